//! Normalized entry laws and Lévy concentration estimates.
//!
//! Every [`EntryDistribution`] has mean zero and variance exactly one. The
//! Pareto and Student-t families with shape in `(2, 4]` have an infinite
//! fourth moment.

use std::fmt;
use std::str::FromStr;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    Gaussian,
    Rademacher,
    /// Symmetric Pareto with tail index `shape`.
    ParetoSymmetric { shape: f64 },
    /// Student t with `dof` degrees of freedom.
    StudentT { dof: f64 },
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryDistribution {
    kind: DistKind,
    /// Multiplier applied to the base law so that the variance is one. For
    /// Pareto this is the threshold `x_m`, for uniform the half-width.
    scale: f64,
}

impl EntryDistribution {
    pub fn gaussian() -> Self {
        Self { kind: DistKind::Gaussian, scale: 1.0 }
    }

    pub fn rademacher() -> Self {
        Self { kind: DistKind::Rademacher, scale: 1.0 }
    }

    pub fn uniform() -> Self {
        Self { kind: DistKind::Uniform, scale: 3f64.sqrt() }
    }

    /// Symmetric Pareto: `|X| = x_m U^(-1/shape)` with a fair random sign and
    /// `x_m = sqrt((shape - 2) / shape)`.
    pub fn pareto_symmetric(shape: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "pareto shape must exceed 2 for finite variance, got {shape}"
            )));
        }
        Ok(Self {
            kind: DistKind::ParetoSymmetric { shape },
            scale: ((shape - 2.0) / shape).sqrt(),
        })
    }

    /// Student t rescaled by `sqrt((dof - 2) / dof)`.
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof.is_finite() && dof > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "student-t degrees of freedom must exceed 2 for finite variance, got {dof}"
            )));
        }
        Ok(Self {
            kind: DistKind::StudentT { dof },
            scale: ((dof - 2.0) / dof).sqrt(),
        })
    }

    /// Builds a law from its tag and (where needed) its shape parameter.
    pub fn make(kind: &str, parameter: Option<f64>) -> Result<Self> {
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Error::InvalidParameter(format!("`{kind}` requires a parameter")))
        };
        let no_param = |d: Self| match parameter {
            Some(_) => Err(Error::InvalidParameter(format!("`{kind}` takes no parameter"))),
            None => Ok(d),
        };
        match kind {
            "gaussian" | "normal" => no_param(Self::gaussian()),
            "rademacher" => no_param(Self::rademacher()),
            "uniform" => no_param(Self::uniform()),
            "pareto" | "pareto_symmetric" => Self::pareto_symmetric(need(parameter)?),
            "student" | "student_t" => Self::student_t(need(parameter)?),
            other => Err(Error::UnknownDistribution(other.to_string())),
        }
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    /// Variance computed from the closed form of each family.
    pub fn variance(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            DistKind::Gaussian | DistKind::Rademacher => s2,
            DistKind::ParetoSymmetric { shape } => shape * s2 / (shape - 2.0),
            DistKind::StudentT { dof } => s2 * dof / (dof - 2.0),
            DistKind::Uniform => s2 / 3.0,
        }
    }

    pub fn has_finite_fourth_moment(&self) -> bool {
        match self.kind {
            DistKind::ParetoSymmetric { shape } => shape > 4.0,
            DistKind::StudentT { dof } => dof > 4.0,
            _ => true,
        }
    }

    /// `count` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng::seeded(seed);
        self.sample_iter(&mut rng).take(count).collect()
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = Distribution::sample(self, rng);
        }
    }
}

impl Distribution<f64> for EntryDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            DistKind::Gaussian => rng.sample::<f64, _>(StandardNormal),
            DistKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistKind::ParetoSymmetric { shape } => {
                // 1 - U lies in (0, 1], keeping the power finite
                let u = 1.0 - rng.random::<f64>();
                let magnitude = self.scale * u.powf(-1.0 / shape);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            DistKind::StudentT { dof } => {
                let t = StudentT::new(dof).expect("dof validated at construction");
                self.scale * t.sample(rng)
            }
            DistKind::Uniform => self.scale * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DistKind::Gaussian => write!(f, "gaussian"),
            DistKind::Rademacher => write!(f, "rademacher"),
            DistKind::Uniform => write!(f, "uniform"),
            DistKind::ParetoSymmetric { shape } => write!(f, "pareto:{shape}"),
            DistKind::StudentT { dof } => write!(f, "student:{dof}"),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    /// Parses `kind` or `kind:parameter`, e.g. `pareto:2.5`, `student:3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad distribution parameter in `{s}`")))?;
                (k.trim(), Some(p))
            }
            None => (s, None),
        };
        Self::make(&kind.to_ascii_lowercase(), param)
    }
}

/// Empirical Lévy concentration `sup_l P(|X - l| <= epsilon)` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub epsilon: f64,
    pub value: f64,
    pub sample_count: usize,
}

/// Exact supremum over centers for the empirical measure of `sorted`: the
/// largest number of samples inside a closed window of width `2 epsilon`,
/// divided by the sample count.
pub fn concentration_estimate(sorted: &[f64], epsilon: f64) -> Result<ConcentrationEstimate> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::UnsortedSample);
    }
    let width = 2.0 * epsilon;
    let mut best = 0usize;
    let mut lo = 0usize;
    for hi in 0..sorted.len() {
        while sorted[hi] - sorted[lo] > width {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    Ok(ConcentrationEstimate {
        epsilon,
        value: best as f64 / sorted.len() as f64,
        sample_count: sorted.len(),
    })
}

/// Sorts a copy of `samples` (total order, NaN-free input assumed) and
/// evaluates the concentration at every radius of `epsilons`.
pub fn concentration_profile(samples: &[f64], epsilons: &[f64]) -> Result<Vec<ConcentrationEstimate>> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    epsilons
        .iter()
        .map(|&e| concentration_estimate(&sorted, e))
        .collect()
}
