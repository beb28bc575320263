//! Numerical laboratory for the upper tail of the smallest singular value of
//! square random matrices with i.i.d. mean-zero, unit-variance entries,
//! including heavy-tailed entries without a fourth moment.
//!
//! The crate executes the constructive pieces of the argument on concrete
//! matrices and checks its probabilistic statements by Monte Carlo:
//!
//! * [`distributions`]: normalized entry laws and Lévy concentration estimates.
//! * [`linalg`]: dense matrices, singular values, orthonormal bases, solves.
//! * [`geometry`]: compressible vectors, sparse nets, pseudometric coverage.
//! * [`lcd`]: essential least common denominators of vectors and planes.
//! * [`witness`]: the witness vector certificate `s_n(A) <= |x| / |A^-1 x|`.
//! * [`smallball`]: small-ball bound evaluation against empirical sums.
//! * [`experiments`]: seeded, parallel trial runner, tail tables, probes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod lcd;
pub mod linalg;
pub mod rng;
pub mod smallball;
pub mod witness;

pub use distributions::{ConcentrationEstimate, DistKind, EntryDistribution};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, OrthonormalBasis, SingularSpectrum};
