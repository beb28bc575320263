//! Singular values by one-sided (Hestenes) Jacobi, and a power-iteration
//! estimate of the operator norm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{dot, norm, DenseMatrix};
use crate::rng;

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Singular values in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest singular value, the operator norm.
    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    /// Smallest singular value `s_min(rows, cols)`.
    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn condition_number(&self) -> f64 {
        self.largest() / self.smallest()
    }
}

/// All `min(rows, cols)` singular values of `m`.
///
/// Orthogonalizes the columns of the taller orientation with plane rotations
/// until every pair is orthogonal to working precision; the column norms are
/// then the singular values. Jacobi keeps high relative accuracy for small
/// singular values, which is what the tail experiments look at.
pub fn singular_values(m: &DenseMatrix) -> SingularSpectrum {
    // Work on the columns of whichever orientation has more rows.
    let (len, count, mut w) = if m.rows() >= m.cols() {
        let t = m.transpose();
        (m.rows(), m.cols(), t.data().to_vec())
    } else {
        (m.cols(), m.rows(), m.data().to_vec())
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..count {
            for q in p + 1..count {
                let (head, tail) = w.split_at_mut(q * len);
                let cp = &mut head[p * len..(p + 1) * len];
                let cq = &mut tail[..len];
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                let gamma = dot(cp, cq);
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<f64> = w.chunks_exact(len).map(norm).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    SingularSpectrum { values }
}

/// Power iteration on `M^T M` from a fixed pseudo-random start. Returns
/// `|M v|` for the final unit iterate, a lower estimate of `s_1(M)`.
pub fn operator_norm_estimate(m: &DenseMatrix, iterations: usize) -> f64 {
    let mut r = rng::seeded(0x005e_ed0f_0e1a);
    let mut v: Vec<f64> = (0..m.cols()).map(|_| r.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let mv = m.matvec(&v);
        estimate = norm(&mv);
        let next = m.matvec_t(&mv);
        let nn = norm(&next);
        if nn == 0.0 {
            return estimate;
        }
        v = next.into_iter().map(|x| x / nn).collect();
    }
    estimate.max(norm(&m.matvec(&v)))
}
