use serde::{Deserialize, Serialize};

use super::trials::{ExperimentConfig, TrialRecord};
use crate::error::{Error, Result};
use crate::witness::assembly_threshold;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCell {
    pub dist: String,
    pub n: usize,
    pub epsilon: f64,
    /// `eps^-2 n^-1/2`
    pub threshold: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// `eps + n^-1/2`
    pub envelope_unit: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub dist: String,
    pub n: usize,
    pub holds: bool,
}

/// Parameters of the run, echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub distributions: Vec<String>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub eps_grid: Vec<f64>,
    pub master_seed: u64,
    pub delta: f64,
    pub rho: f64,
    pub r: f64,
    pub alpha: String,
    pub t_max: f64,
    pub random_column: bool,
}

impl From<&ExperimentConfig> for ConfigEcho {
    fn from(cfg: &ExperimentConfig) -> Self {
        let alpha = match cfg.lcd.alpha {
            crate::lcd::Alpha::Auto => "auto".to_string(),
            crate::lcd::Alpha::Fixed(a) => a.to_string(),
        };
        Self {
            distributions: cfg.distributions.iter().map(|d| d.to_string()).collect(),
            sizes: cfg.sizes.clone(),
            trials: cfg.trials,
            eps_grid: cfg.eps_grid.clone(),
            master_seed: cfg.master_seed,
            delta: cfg.compress.delta,
            rho: cfg.compress.rho,
            r: cfg.lcd.r,
            alpha,
            t_max: cfg.lcd.t_max,
            random_column: cfg.random_column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    pub cells: Vec<TailCell>,
    pub c_hat: f64,
    pub degenerate_total: usize,
    pub monotonicity: Vec<MonotonicityCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ExperimentReport {
    pub fn with_config(mut self, echo: ConfigEcho) -> Self {
        self.config = Some(echo);
        self
    }

    /// Records seconds since the Unix epoch and the elapsed wall time.
    pub fn with_timing(mut self, wall_time_s: f64) -> Self {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self.wall_time_s = Some(wall_time_s);
        self
    }

    pub fn monotone(&self) -> bool {
        self.monotonicity.iter().all(|m| m.holds)
    }

    /// The distinct `eps` values in order of appearance.
    pub fn eps_grid(&self) -> Vec<f64> {
        let mut grid: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !grid.contains(&c.epsilon) {
                grid.push(c.epsilon);
            }
        }
        grid
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    pub const CSV_HEADER: &'static str =
        "dist,n,epsilon,threshold,trials,exceedances,p_hat,wilson_low,wilson_high,envelope_unit,degenerate";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                c.dist,
                c.n,
                c.epsilon,
                c.threshold,
                c.trials,
                c.exceedances,
                c.p_hat,
                c.wilson_low,
                c.wilson_high,
                c.envelope_unit,
                c.degenerate
            ));
        }
        out
    }
}

/// Exceedance table over the `(dist, n)` groups of `records` and the fitted
/// constant `C_hat = max p_hat / (eps + n^-1/2)`.
pub fn tail_table_and_fit(records: &[TrialRecord], eps_grid: &[f64]) -> Result<ExperimentReport> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty eps grid".into()));
    }
    if records.is_empty() {
        return Err(Error::EmptyCell("no records".into()));
    }
    let mut groups: Vec<((String, usize), Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(k, _)| k.0 == r.dist && k.1 == r.n) {
            Some((_, v)) => v.push(r),
            None => groups.push(((r.dist.clone(), r.n), vec![r])),
        }
    }

    let mut cells = Vec::new();
    let mut monotonicity = Vec::new();
    let mut c_hat = 0.0f64;
    for ((dist, n), group) in &groups {
        let trials = group.len();
        let degenerate = group.iter().filter(|r| r.degenerate).count();
        let mut row = Vec::with_capacity(eps_grid.len());
        for &epsilon in eps_grid {
            let threshold = assembly_threshold(epsilon, *n);
            let exceedances = group.iter().filter(|r| r.s_n > threshold).count();
            let p_hat = exceedances as f64 / trials as f64;
            let (wilson_low, wilson_high) = wilson_interval(exceedances, trials, WILSON_Z);
            let envelope_unit = epsilon + 1.0 / (*n as f64).sqrt();
            c_hat = c_hat.max(p_hat / envelope_unit);
            row.push(TailCell {
                dist: dist.clone(),
                n: *n,
                epsilon,
                threshold,
                trials,
                exceedances,
                p_hat,
                wilson_low,
                wilson_high,
                envelope_unit,
                degenerate,
            });
        }
        let mut by_eps: Vec<&TailCell> = row.iter().collect();
        by_eps.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        let holds = by_eps
            .windows(2)
            .all(|w| w[1].p_hat <= w[0].p_hat || w[1].wilson_low <= w[0].wilson_high);
        monotonicity.push(MonotonicityCheck { dist: dist.clone(), n: *n, holds });
        cells.extend(row);
    }
    let degenerate_total = groups.iter().map(|(_, g)| g.iter().filter(|r| r.degenerate).count()).sum();
    Ok(ExperimentReport {
        schema_version: 1,
        config: None,
        cells,
        c_hat,
        degenerate_total,
        monotonicity,
        timestamp: None,
        wall_time_s: None,
    })
}
