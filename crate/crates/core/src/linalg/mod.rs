//! Dense real linear algebra used by the witness construction and the
//! experiments: matrix generation, singular values, orthonormal bases,
//! projections and LU solves.

mod basis;
mod lu;
mod matrix;
mod svd;

pub use basis::{dist_to_subspace, orthonormal_basis, OrthonormalBasis};
pub use lu::{solve_transpose, LuFactors};
pub use matrix::{generate_matrix, generate_matrix_with, DenseMatrix};
pub use svd::{operator_norm_estimate, singular_values, SingularSpectrum};

/// Relative pivot threshold for rank and singularity detection.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
