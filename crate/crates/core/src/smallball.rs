//! Small-ball bounds for random sums `<x, xi>` and their empirical check.
//!
//! The bound evaluated here is
//!
//! ```text
//! C / (r sqrt(1 - u)) (eps + 1 / LCD_{alpha,r}(x)) + C exp(-2 alpha^2 (1 - u))
//! ```
//!
//! where `u` bounds the concentration of a single entry at radius one.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{concentration_estimate, DistKind, EntryDistribution};
use crate::error::{Error, Result};
use crate::lcd::{lcd_vector, LcdQuery, LcdValue, SearchMode};
use crate::linalg::norm;
use crate::rng;

/// Draws per independent random stream in [`linear_form_samples`].
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallBoundInput {
    pub epsilon: f64,
    /// `f64::INFINITY` stands for an infinite (or censored) LCD.
    pub lcd_value: f64,
    pub r: f64,
    pub u: f64,
    pub alpha: f64,
    /// Absolute constant of the bound.
    pub c: f64,
}

impl SmallBallBoundInput {
    pub fn new(epsilon: f64, lcd_value: f64, r: f64, u: f64, alpha: f64, c: f64) -> Result<Self> {
        let input = Self { epsilon, lcd_value, r, u, alpha, c };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} out of range: {v}")));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.lcd_value > 0.0) {
            return bad("lcd", self.lcd_value);
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r", self.r);
        }
        if !(self.u > 0.0 && self.u < 1.0) {
            return bad("u", self.u);
        }
        if !(self.alpha > 0.0) {
            return bad("alpha", self.alpha);
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C", self.c);
        }
        Ok(())
    }
}

/// Raw value of the bound and its clamp to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
}

pub fn theorem_bound(input: &SmallBallBoundInput) -> BoundValue {
    let SmallBallBoundInput { epsilon, lcd_value, r, u, alpha, c } = *input;
    let inv_lcd = if lcd_value.is_infinite() { 0.0 } else { 1.0 / lcd_value };
    let first = c / (r * (1.0 - u).sqrt()) * (epsilon + inv_lcd);
    let second = c * (-2.0 * alpha * alpha * (1.0 - u)).exp();
    let raw = first + second;
    BoundValue { raw, clamped: raw.clamp(0.0, 1.0) }
}

/// `sample_count` i.i.d. draws of `<x, xi>` with `xi` having i.i.d. entries
/// from `dist`. Work is split into fixed chunks with one random stream each,
/// so the output does not depend on the thread count.
pub fn linear_form_samples(x: &[f64], dist: &EntryDistribution, sample_count: usize, seed: u64) -> Vec<f64> {
    let chunks = sample_count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = rng::stream(seed, c as u64);
            let len = CHUNK.min(sample_count - c * CHUNK);
            let mut out = Vec::with_capacity(len);
            let mut xi = vec![0.0; x.len()];
            for _ in 0..len {
                let s = match dist.kind() {
                    DistKind::Rademacher => rademacher_form(x, &mut rng),
                    _ => {
                        dist.fill(&mut rng, &mut xi);
                        x.iter().zip(&xi).map(|(a, b)| a * b).sum()
                    }
                };
                out.push(s);
            }
            out
        })
        .collect()
}

fn rademacher_form<R: RngCore>(x: &[f64], rng: &mut R) -> f64 {
    let mut s = 0.0;
    for block in x.chunks(64) {
        let bits = rng.next_u64();
        for (i, &xi) in block.iter().enumerate() {
            if bits >> i & 1 == 1 {
                s += xi;
            } else {
                s -= xi;
            }
        }
    }
    s
}

/// Empirical `sup_l P(|<x, xi> - l| <= eps)` for each radius.
pub fn empirical_concentration(
    x: &[f64],
    dist: &EntryDistribution,
    epsilons: &[f64],
    sample_count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut s = linear_form_samples(x, dist, sample_count, seed);
    s.sort_by(f64::total_cmp);
    epsilons.iter().map(|&e| concentration_estimate(&s, e).map(|c| c.value)).collect()
}

/// `P(|<x, xi>| <= eps)` estimated from `sample_count` draws: the mass of
/// the ball at the symmetric center, which carries no selection bias.
pub fn centered_concentration(x: &[f64], dist: &EntryDistribution, epsilon: f64, sample_count: usize, seed: u64) -> f64 {
    let s = linear_form_samples(x, dist, sample_count, seed);
    s.iter().filter(|v| v.abs() <= epsilon).count() as f64 / sample_count as f64
}

/// Concentration of a single entry on open balls of radius one,
/// `sup_l P(|xi - l| < 1)`, estimated from `sample_count` draws.
pub fn measure_u(dist: &EntryDistribution, sample_count: usize, seed: u64) -> Result<f64> {
    let mut s = dist.sample(sample_count, seed);
    s.sort_by(f64::total_cmp);
    // the largest float below one turns the closed window into an open one
    Ok(concentration_estimate(&s, 1.0 - f64::EPSILON / 2.0)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallRow {
    pub epsilon: f64,
    pub empirical: f64,
    pub lcd: LcdValue,
    pub bound_raw: f64,
    pub bound_clamped: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallTable {
    pub u: f64,
    pub alpha: f64,
    pub r: f64,
    pub c: f64,
    pub sample_count: usize,
    pub rows: Vec<SmallBallRow>,
}

impl SmallBallTable {
    pub const CSV_HEADER: &'static str = "epsilon,empirical,lcd,bound_raw,bound_clamped,pass";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.epsilon, row.empirical, row.lcd, row.bound_raw, row.bound_clamped, row.pass
            ));
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub sample_count: usize,
    pub seed: u64,
    pub c: f64,
    /// Entry concentration; measured when `None`.
    pub u: Option<f64>,
}

impl CompareOptions {
    pub fn new(sample_count: usize, seed: u64) -> Self {
        Self { sample_count, seed, c: 1.0, u: None }
    }
}

pub const MIN_SAMPLE_COUNT: usize = 10_000;

/// Empirical concentration of `<x, xi>` against the bound at each radius.
pub fn smallball_compare(
    x: &[f64],
    dist: &EntryDistribution,
    epsilons: &[f64],
    q: &LcdQuery,
    opts: &CompareOptions,
) -> Result<SmallBallTable> {
    if (norm(x) - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit(norm(x)));
    }
    if opts.sample_count < MIN_SAMPLE_COUNT {
        return Err(Error::InvalidParameter(format!(
            "sample_count must be at least {MIN_SAMPLE_COUNT}, got {}",
            opts.sample_count
        )));
    }
    let lcd = lcd_vector(x, q, SearchMode::Fast)?;
    let u = match opts.u {
        Some(u) => u,
        None => measure_u(dist, opts.sample_count, rng::mix64(opts.seed))?,
    };
    let alpha = q.alpha.resolve(x.len());
    let empirical = empirical_concentration(x, dist, epsilons, opts.sample_count, opts.seed)?;
    let mut rows = Vec::with_capacity(epsilons.len());
    for (&epsilon, &emp) in epsilons.iter().zip(&empirical) {
        let input = SmallBallBoundInput::new(epsilon, lcd.value.as_lower_bound(), q.r, u, alpha, opts.c)?;
        let b = theorem_bound(&input);
        rows.push(SmallBallRow {
            epsilon,
            empirical: emp,
            lcd: lcd.value,
            bound_raw: b.raw,
            bound_clamped: b.clamped,
            pass: emp <= b.clamped,
        });
    }
    Ok(SmallBallTable { u, alpha, r: q.r, c: opts.c, sample_count: opts.sample_count, rows })
}

/// Smallest `C` for which every row of `table` passes: the bound is linear
/// in `C`, so this is the largest ratio `empirical / (bound at C = 1)`.
pub fn fitted_constant(table: &SmallBallTable) -> f64 {
    table
        .rows
        .iter()
        .map(|row| row.empirical / (row.bound_raw / table.c))
        .fold(0.0, f64::max)
}

/// Sampling helper for a fixed random unit vector in `R^n`.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}
