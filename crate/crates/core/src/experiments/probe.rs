use serde::{Deserialize, Serialize};

use crate::distributions::EntryDistribution;
use crate::error::{Error, Result};
use crate::geometry::{classify, random_compressible, CompressParams, Compressibility};
use crate::lcd::{lcd_subspace2, LcdQuery, LcdResult, SearchMode};
use crate::linalg::{generate_matrix_with, norm, orthonormal_basis, DenseMatrix};
use crate::rng;
use crate::witness::witness_certificate;

const QUANTILES: [f64; 9] = [0.0, 0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];

/// Lower-bound estimate of `inf |Bx| / sqrt(n)` over compressible unit `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub n: usize,
    pub probes: usize,
    pub minimum: f64,
    /// `(level, value)` pairs of the empirical distribution of `|Bx| / sqrt(n)`.
    pub quantiles: Vec<(f64, f64)>,
}

/// Draws `B` with `n - 2` rows of i.i.d. entries and probes it with random
/// compressible unit vectors.
pub fn compressible_kernel_probe(
    dist: &EntryDistribution,
    n: usize,
    probes: usize,
    p: &CompressParams,
    seed: u64,
) -> Result<ProbeResult> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("probe needs n >= 8, got {n}")));
    }
    let mut gen = rng::stream(seed, 0);
    let b = generate_matrix_with(dist, n - 2, n, &mut gen);
    compressible_probe_with_matrix(&b, probes, p, seed)
}

/// Same as [`compressible_kernel_probe`] for a given matrix `B`.
pub fn compressible_probe_with_matrix(b: &DenseMatrix, probes: usize, p: &CompressParams, seed: u64) -> Result<ProbeResult> {
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be positive".into()));
    }
    let n = b.cols();
    let root_n = (n as f64).sqrt();
    let mut gen = rng::stream(seed, 1);
    let mut values: Vec<f64> = (0..probes)
        .map(|_| {
            let x = random_compressible(n, p, &mut gen);
            norm(&b.matvec(&x)) / root_n
        })
        .collect();
    values.sort_by(f64::total_cmp);
    let quantiles = QUANTILES
        .iter()
        .map(|&q| {
            let i = ((q * (probes - 1) as f64).round() as usize).min(probes - 1);
            (q, values[i])
        })
        .collect();
    Ok(ProbeResult { n, probes, minimum: values[0], quantiles })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelStudyOptions {
    pub compress: CompressParams,
    pub lcd: LcdQuery,
    /// Unit vectors sampled from the plane for classification.
    pub samples: usize,
    pub angular_points: usize,
    /// `gamma` in the target `LCD >= gamma sqrt(n)`.
    pub gamma: f64,
}

/// Structure of the plane `H = span(X_3, ..., X_n)^perp` for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelStudy {
    pub n: usize,
    pub seed: u64,
    pub incompressible_fraction: f64,
    pub lcd: LcdResult,
    /// Whether the plane's LCD reaches `gamma sqrt(n)`.
    pub lcd_reaches_target: bool,
    /// Component of `Y_2 / |Y_2|` orthogonal to `H`.
    pub y2_residual: f64,
}

pub fn kernel_complement_study(
    dist: &EntryDistribution,
    n: usize,
    seed: u64,
    opts: &KernelStudyOptions,
) -> Result<KernelStudy> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("kernel study needs n >= 3, got {n}")));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mut gen = rng::stream(seed, 0);
    let a = generate_matrix_with(dist, n, n, &mut gen);
    let cols = a.columns();
    let span = orthonormal_basis(&cols[2..])?;
    let plane = span.complement();
    if plane.rank() != 2 {
        return Err(Error::WrongSubspaceDimension(plane.rank()));
    }

    let (h1, h2) = (plane.vector(0), plane.vector(1));
    let mut incompressible = 0usize;
    for i in 0..opts.samples {
        let (s, c) = (std::f64::consts::PI * i as f64 / opts.samples as f64).sin_cos();
        let mut x: Vec<f64> = h1.iter().zip(h2).map(|(a, b)| c * a + s * b).collect();
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        if classify(&x, &opts.compress)? == Compressibility::Incompressible {
            incompressible += 1;
        }
    }

    let lcd = lcd_subspace2(&plane, &opts.lcd, opts.angular_points, SearchMode::Fast)?;
    let target = opts.gamma * (n as f64).sqrt();

    let cert = witness_certificate(&a)?;
    let y2_residual = if cert.degenerate {
        f64::NAN
    } else {
        let y = cert.y(0);
        let ny = norm(y);
        let unit: Vec<f64> = y.iter().map(|v| v / ny).collect();
        norm(&plane.residual(&unit)?)
    };

    Ok(KernelStudy {
        n,
        seed,
        incompressible_fraction: incompressible as f64 / opts.samples as f64,
        lcd,
        lcd_reaches_target: lcd.value.at_least(target),
        y2_residual,
    })
}
