use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::EntryDistribution;
use crate::error::{Error, Result};
use crate::geometry::CompressParams;
use crate::lcd::{Alpha, LcdQuery};
use crate::linalg::{generate_matrix_with, singular_values};
use crate::rng;
use crate::witness::{witness_certificate_for, BOUND_SLACK};

pub const DEFAULT_MASTER_SEED: u64 = 20_240_917;
pub const DEFAULT_MAX_N: usize = 800;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub distributions: Vec<EntryDistribution>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub eps_grid: Vec<f64>,
    pub master_seed: u64,
    pub compress: CompressParams,
    pub lcd: LcdQuery,
    pub workers: usize,
    /// Largest admissible `n`.
    pub max_n: usize,
    /// Distinguish a uniformly random column instead of the first one.
    pub random_column: bool,
}

impl ExperimentConfig {
    pub fn new(distributions: Vec<EntryDistribution>, sizes: Vec<usize>, trials: usize, eps_grid: Vec<f64>) -> Self {
        Self {
            distributions,
            sizes,
            trials,
            eps_grid,
            master_seed: DEFAULT_MASTER_SEED,
            compress: CompressParams::new(0.1, 0.1).expect("valid defaults"),
            lcd: LcdQuery::new(Alpha::Auto, 0.1, 10.0).expect("valid defaults"),
            workers: 1,
            max_n: DEFAULT_MAX_N,
            random_column: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if self.distributions.is_empty() {
            return invalid("no distributions".into());
        }
        if self.sizes.is_empty() {
            return invalid("no sizes".into());
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2 || n > self.max_n) {
            return invalid(format!("n = {n} outside [2, {}]", self.max_n));
        }
        if self.trials == 0 {
            return invalid("trials must be positive".into());
        }
        if self.eps_grid.is_empty() {
            return invalid("empty eps grid".into());
        }
        if let Some(e) = self.eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return invalid(format!("eps = {e} outside (0, 1)"));
        }
        if self.workers == 0 {
            return invalid("workers must be positive".into());
        }
        Ok(())
    }

    /// At least 30 trials per cell.
    pub fn is_acceptance_grade(&self) -> bool {
        self.trials >= 30
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub dist: String,
    pub n: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub s_n: f64,
    pub witness_upper: f64,
    pub norm_x: f64,
    pub b2: f64,
    pub degenerate: bool,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub s_1: f64,
}

impl TrialRecord {
    /// `s_n <= witness_upper + 1e-8 s_1`; vacuous for degenerate trials.
    pub fn bound_holds(&self) -> bool {
        self.degenerate || self.s_n <= self.witness_upper + BOUND_SLACK * self.s_1
    }

    /// Equality of everything except the measured runtime.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| TrialRecord { runtime_ms: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

pub const TRIAL_CSV_HEADER: &str = "dist,n,trial_index,seed,s_n,witness_upper,norm_x,b2,degenerate,runtime_ms";

/// CSV rendering of `records`; `with_runtime = false` writes zero runtimes so
/// the output is reproducible byte for byte.
pub fn records_to_csv(records: &[TrialRecord], with_runtime: bool) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in records {
        let runtime = if with_runtime { r.runtime_ms } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{:e},{:e},{:e},{:e},{},{:.3}\n",
            r.dist, r.n, r.trial_index, r.seed, r.s_n, r.witness_upper, r.norm_x, r.b2, r.degenerate, runtime
        ));
    }
    out
}

fn run_one(cfg: &ExperimentConfig, dist_index: usize, n: usize, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let dist = &cfg.distributions[dist_index];
    let seed = rng::stream_index(&[dist_index as u64, n as u64, trial as u64]);
    let mut gen = rng::stream(cfg.master_seed, seed);
    let a = generate_matrix_with(dist, n, n, &mut gen);
    let column = if cfg.random_column {
        rand::Rng::random_range(&mut gen, 0..n)
    } else {
        0
    };
    let spectrum = singular_values(&a);
    let cert = witness_certificate_for(&a, column).expect("square input and valid column");
    TrialRecord {
        dist: dist.to_string(),
        n,
        trial_index: trial,
        seed,
        s_n: spectrum.smallest(),
        witness_upper: cert.upper_bound,
        norm_x: cert.norm_x,
        b2: cert.b2().unwrap_or(0.0),
        degenerate: cert.degenerate,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        s_1: spectrum.largest(),
    }
}

/// One record per `(distribution, n, trial)`, in that lexicographic order
/// whatever the worker count.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for d in 0..cfg.distributions.len() {
        for &n in &cfg.sizes {
            for t in 0..cfg.trials {
                jobs.push((d, n, t));
            }
        }
    }
    // largest matrices first for better load balance
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(jobs[i].1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut done: Vec<(usize, TrialRecord)> = pool.install(|| {
        order
            .par_iter()
            .map(|&i| {
                let (d, n, t) = jobs[i];
                (i, run_one(cfg, d, n, t))
            })
            .collect()
    });
    done.sort_by_key(|(i, _)| *i);
    Ok(done.into_iter().map(|(_, r)| r).collect())
}
