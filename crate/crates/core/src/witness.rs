//! Witness-vector certificates for the upper bound on `s_n(A)`.
//!
//! For a distinguished column `X_c` of a square `A`, let `H` be the span of
//! the other columns and `x = X_c - P_H X_c`. Then
//! `s_n(A) <= |x| / |A^-1 x|`, and with `Y_k = P_H (A^-1)^T e_k`
//!
//! ```text
//! |A^-1 x|^2 = 1 + sum_{k != c} <X_c, Y_k>^2 = 1 + sum (a_k / b_k)^2,
//! a_k = |<Y_k / |Y_k|, X_c>|,   b_k = 1 / |Y_k| = dist(X_k, H_{c,k}).
//! ```
//!
//! The certificate computes `|A^-1 x|` by a direct solve and the right-hand
//! side from the biorthogonal system, so the identity is a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, norm, orthonormal_basis, singular_values, DenseMatrix, LuFactors, OrthonormalBasis, PIVOT_THRESHOLD,
};

/// Residual threshold used by [`VerificationReport::passes`].
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Relative slack (in units of `s_1`) for `s_n <= upper_bound`.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub n: usize,
    /// Index of the distinguished column (0-based).
    pub column: usize,
    /// `|x| = dist(X_c, H)`
    pub norm_x: f64,
    /// `a_k` for every `k != c`, in increasing `k`.
    pub a: Vec<f64>,
    /// `b_k = 1 / |Y_k|`, same order as `a`.
    pub b: Vec<f64>,
    /// `|A^-1 x|` from a direct solve.
    pub inv_norm: f64,
    /// `sqrt(1 + sum (a_k / b_k)^2)`
    pub proof_lower: f64,
    /// `norm_x / inv_norm`
    pub upper_bound: f64,
    pub degenerate: bool,
    #[serde(skip)]
    x: Vec<f64>,
    #[serde(skip)]
    inv_x: Vec<f64>,
    #[serde(skip)]
    y: Vec<Vec<f64>>,
}

impl WitnessCertificate {
    fn degenerate(n: usize, column: usize) -> Self {
        Self {
            n,
            column,
            norm_x: 0.0,
            a: Vec::new(),
            b: Vec::new(),
            inv_norm: 0.0,
            proof_lower: 0.0,
            upper_bound: 0.0,
            degenerate: true,
            x: Vec::new(),
            inv_x: Vec::new(),
            y: Vec::new(),
        }
    }

    /// Indices `k != column` in the order of `a` and `b`.
    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&k| k != self.column)
    }

    /// The witness vector `x`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `Y_k` for the `i`-th index of [`others`](Self::others).
    pub fn y(&self, i: usize) -> &[f64] {
        &self.y[i]
    }

    /// `b` for the first index after the distinguished column, i.e. `b_2`
    /// when the column is the first one.
    pub fn b2(&self) -> Option<f64> {
        self.b.first().copied()
    }

    /// `sqrt(n) * upper_bound`, comparable to `tau t / eps` in the assembly.
    pub fn scaled_upper_bound(&self) -> f64 {
        self.upper_bound * (self.n as f64).sqrt()
    }
}

/// Certificate with the first column distinguished.
pub fn witness_certificate(a: &DenseMatrix) -> Result<WitnessCertificate> {
    witness_certificate_for(a, 0)
}

/// Certificate with column `column` distinguished. A numerically singular
/// matrix yields a certificate flagged `degenerate`.
pub fn witness_certificate_for(a: &DenseMatrix, column: usize) -> Result<WitnessCertificate> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if column >= n {
        return Err(Error::DimensionMismatch { expected: n, got: column });
    }
    if n == 1 {
        // H = {0}: x = X_1 and A^-1 x = e_1
        let v = a.get(0, 0);
        if v == 0.0 {
            return Ok(WitnessCertificate::degenerate(1, 0));
        }
        return Ok(WitnessCertificate {
            n,
            column,
            norm_x: v.abs(),
            a: Vec::new(),
            b: Vec::new(),
            inv_norm: 1.0,
            proof_lower: 1.0,
            upper_bound: v.abs(),
            degenerate: false,
            x: vec![v],
            inv_x: vec![1.0],
            y: Vec::new(),
        });
    }

    let cols = a.columns();
    let others: Vec<&Vec<f64>> = cols.iter().enumerate().filter(|(j, _)| *j != column).map(|(_, c)| c).collect();
    let h = orthonormal_basis(&others)?;
    if !h.is_full_rank() {
        return Ok(WitnessCertificate::degenerate(n, column));
    }
    let lu = match LuFactors::new(a) {
        Ok(lu) => lu,
        Err(Error::SingularMatrix { .. }) => return Ok(WitnessCertificate::degenerate(n, column)),
        Err(e) => return Err(e),
    };

    let xc = &cols[column];
    let x = h.residual(xc)?;
    let norm_x = norm(&x);

    let mut e = vec![0.0; n];
    let mut a_coef = Vec::with_capacity(n - 1);
    let mut b_coef = Vec::with_capacity(n - 1);
    let mut ys = Vec::with_capacity(n - 1);
    for k in (0..n).filter(|&k| k != column) {
        e[k] = 1.0;
        let row = lu.solve_transpose(&e)?;
        e[k] = 0.0;
        let yk = h.project(&row)?;
        let ny = norm(&yk);
        if !(ny > 0.0) {
            return Ok(WitnessCertificate::degenerate(n, column));
        }
        a_coef.push(dot(&yk, xc).abs() / ny);
        b_coef.push(1.0 / ny);
        ys.push(yk);
    }

    let inv_x = lu.solve(&x)?;
    let inv_norm = norm(&inv_x);
    let proof_lower = (1.0 + a_coef.iter().zip(&b_coef).map(|(ak, bk)| (ak / bk).powi(2)).sum::<f64>()).sqrt();
    Ok(WitnessCertificate {
        n,
        column,
        norm_x,
        a: a_coef,
        b: b_coef,
        inv_norm,
        proof_lower,
        upper_bound: norm_x / inv_norm,
        degenerate: false,
        x,
        inv_x,
        y: ys,
    })
}

/// `(|x|, b_2)` for the first column without inverting `A`: one ordered
/// Gram-Schmidt pass over `X_3, ..., X_n`, then `X_2` (its residual is
/// `dist(X_2, H_{1,2})`), then `X_1` (residual `dist(X_1, H_1)`).
/// `None` when the columns are numerically dependent.
pub fn tail_statistics(a: &DenseMatrix) -> Result<Option<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n < 2 {
        return Err(Error::InvalidParameter("tail statistics need n >= 2".into()));
    }
    let cols = a.columns();
    let largest = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let threshold = PIVOT_THRESHOLD * largest;
    let mut h = OrthonormalBasis::empty(n);
    for c in &cols[2..] {
        h.push(c, threshold)?;
    }
    let b2 = h.push(&cols[1], threshold)?;
    let norm_x = h.push(&cols[0], threshold)?;
    Ok(h.is_full_rank().then_some((norm_x, b2)))
}

/// The threshold `(tau t / eps) n^-1/2` at `t = tau = eps^-1/2`, which is
/// `eps^-2 n^-1/2`.
pub fn assembly_threshold(eps: f64, n: usize) -> f64 {
    let t = 1.0 / eps.sqrt();
    let tau = t;
    tau * t / eps / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `max_{j,k != c} |<X_j, Y_k> - delta_jk|`
    pub biorthogonality: f64,
    /// `max_k |dist(X_k, H_{c,k}) |Y_k| - 1|`, distances by direct projection.
    pub distance_identity: f64,
    /// `|inv_norm - proof_lower| / inv_norm`
    pub equality_chain: f64,
    /// `|<A^-1 P X_c, e_c>|`
    pub orthogonality: f64,
    pub s_1: f64,
    pub s_n: f64,
    /// `s_n <= upper_bound + 1e-8 s_1`
    pub bound_holds: bool,
}

impl VerificationReport {
    pub fn passes(&self) -> bool {
        self.biorthogonality <= RESIDUAL_TOL
            && self.distance_identity <= RESIDUAL_TOL
            && self.equality_chain <= RESIDUAL_TOL
            && self.orthogonality <= RESIDUAL_TOL
            && self.bound_holds
    }
}

/// Checks a certificate against the matrix it came from.
pub fn verify_certificate(a: &DenseMatrix, c: &WitnessCertificate) -> Result<VerificationReport> {
    if !a.is_square() || a.rows() != c.n {
        return Err(Error::DimensionMismatch { expected: c.n, got: a.rows() });
    }
    if c.degenerate {
        return Err(Error::InvalidParameter("degenerate certificate".into()));
    }
    let spectrum = singular_values(a);
    let (s_1, s_n) = (spectrum.largest(), spectrum.smallest());
    let cols = a.columns();
    let others: Vec<usize> = c.others().collect();

    let mut biorthogonality = 0.0f64;
    for (i, &k) in others.iter().enumerate() {
        for &j in &others {
            let target = if j == k { 1.0 } else { 0.0 };
            biorthogonality = biorthogonality.max((dot(&cols[j], c.y(i)) - target).abs());
        }
    }

    // dist(X_k, H_{c,k}) from the basis of the preceding columns extended
    // by the following ones
    let largest = cols.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let threshold = PIVOT_THRESHOLD * largest;
    let mut prefix = OrthonormalBasis::empty(c.n);
    let mut distance_identity = 0.0f64;
    for (i, &k) in others.iter().enumerate() {
        let mut h = prefix.clone();
        for &j in &others[i + 1..] {
            h.push(&cols[j], threshold)?;
        }
        let d = crate::linalg::dist_to_subspace(&cols[k], &h)?;
        distance_identity = distance_identity.max((d * norm(c.y(i)) - 1.0).abs());
        prefix.push(&cols[k], threshold)?;
    }

    let equality_chain = (c.inv_norm - c.proof_lower).abs() / c.inv_norm;
    // A^-1 P X_c = e_c - A^-1 x
    let orthogonality = (1.0 - c.inv_x[c.column]).abs();
    Ok(VerificationReport {
        biorthogonality,
        distance_identity,
        equality_chain,
        orthogonality,
        s_1,
        s_n,
        bound_holds: s_n <= c.upper_bound + BOUND_SLACK * s_1,
    })
}

/// JSON view of a certificate together with its verification residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub schema_version: u32,
    pub n: usize,
    pub norm_x: f64,
    pub inv_norm: f64,
    pub proof_lower: f64,
    pub upper_bound: f64,
    pub residuals: Option<VerificationReport>,
    pub degenerate: bool,
}

impl CertificateSummary {
    pub fn new(c: &WitnessCertificate, residuals: Option<VerificationReport>) -> Self {
        Self {
            schema_version: 1,
            n: c.n,
            norm_x: c.norm_x,
            inv_norm: c.inv_norm,
            proof_lower: c.proof_lower,
            upper_bound: c.upper_bound,
            residuals,
            degenerate: c.degenerate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EntryDistribution;
    use crate::linalg::generate_matrix;

    #[test]
    fn identity_certificate() {
        let c = witness_certificate(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(c.x(), &[1.0, 0.0, 0.0]);
        assert_eq!(c.norm_x, 1.0);
        assert_eq!(c.a, vec![0.0, 0.0]);
        assert_eq!(c.b, vec![1.0, 1.0]);
        assert_eq!(c.inv_norm, 1.0);
        assert_eq!(c.upper_bound, 1.0);
        let v = verify_certificate(&DenseMatrix::identity(3), &c).unwrap();
        assert_eq!(v.biorthogonality, 0.0);
        assert_eq!(v.distance_identity, 0.0);
        assert_eq!(v.equality_chain, 0.0);
        assert_eq!(v.orthogonality, 0.0);
        assert!(v.passes());
    }

    #[test]
    fn diagonal_certificate() {
        let a = DenseMatrix::from_diag(&[2.0, 1.0]);
        let c = witness_certificate(&a).unwrap();
        assert_eq!(c.x(), &[2.0, 0.0]);
        assert_eq!(c.norm_x, 2.0);
        assert_eq!(c.inv_norm, 1.0);
        assert_eq!(c.upper_bound, 2.0);
        let v = verify_certificate(&a, &c).unwrap();
        assert_eq!(v.s_n, 1.0);
        assert!(v.bound_holds);
    }

    #[test]
    fn distinct_diagonal_is_biorthogonal() {
        let a = DenseMatrix::from_diag(&[3.0, -0.5, 7.0, 1.25]);
        let c = witness_certificate(&a).unwrap();
        let v = verify_certificate(&a, &c).unwrap();
        assert!(v.biorthogonality <= 1e-12);
        assert!(v.passes());
    }

    #[test]
    fn gaussian_5x5_equality_chain_and_bound() {
        let a = generate_matrix(&EntryDistribution::gaussian(), 5, 5, 21);
        let c = witness_certificate(&a).unwrap();
        assert!(!c.degenerate);
        assert!((c.inv_norm - c.proof_lower).abs() <= 1e-8 * c.inv_norm);
        let s_n = singular_values(&a).smallest();
        assert!(s_n <= c.upper_bound);
        assert!(verify_certificate(&a, &c).unwrap().passes());
    }

    #[test]
    fn other_distinguished_columns() {
        let a = generate_matrix(&EntryDistribution::student_t(3.0).unwrap(), 8, 8, 2);
        for col in 0..8 {
            let c = witness_certificate_for(&a, col).unwrap();
            assert!(verify_certificate(&a, &c).unwrap().passes(), "column {col}");
        }
    }

    #[test]
    fn singular_matrix_is_degenerate() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let c = witness_certificate(&a).unwrap();
        assert!(c.degenerate);
        assert!(verify_certificate(&a, &c).is_err());
        assert!(witness_certificate(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn mismatched_certificate() {
        let c = witness_certificate(&DenseMatrix::identity(3)).unwrap();
        assert!(matches!(
            verify_certificate(&DenseMatrix::identity(4), &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tail_statistics_match_certificate() {
        let a = generate_matrix(&EntryDistribution::pareto_symmetric(2.5).unwrap(), 30, 30, 5);
        let c = witness_certificate(&a).unwrap();
        let (norm_x, b2) = tail_statistics(&a).unwrap().unwrap();
        assert!((norm_x - c.norm_x).abs() < 1e-9 * c.norm_x.max(1.0));
        assert!((b2 - c.b2().unwrap()).abs() < 1e-8 * b2);
    }

    #[test]
    fn normalized_y2_lies_in_kernel_complement() {
        // Y_2 is orthogonal to X_3, ..., X_n
        let a = generate_matrix(&EntryDistribution::gaussian(), 12, 12, 6);
        let c = witness_certificate(&a).unwrap();
        let y = c.y(0);
        let ny = norm(y);
        for j in 2..12 {
            assert!(dot(&a.column(j), y).abs() / ny < 1e-10);
        }
    }

    #[test]
    fn assembly_threshold_is_eps_minus_two() {
        for (eps, n) in [(0.1f64, 100usize), (0.25, 49), (0.5, 7)] {
            let expected = eps.powi(-2) / (n as f64).sqrt();
            assert!((assembly_threshold(eps, n) - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn summary_json_fields() {
        let a = DenseMatrix::identity(2);
        let c = witness_certificate(&a).unwrap();
        let s = CertificateSummary::new(&c, Some(verify_certificate(&a, &c).unwrap()));
        let v = serde_json::to_value(&s).unwrap();
        for key in ["n", "norm_x", "inv_norm", "proof_lower", "upper_bound", "residuals", "degenerate"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn upper_bound_dominates_smallest_singular_value(seed in 0u64..10_000, n in 2usize..12) {
            let a = generate_matrix(&EntryDistribution::pareto_symmetric(2.5).unwrap(), n, n, seed);
            let c = witness_certificate(&a).unwrap();
            proptest::prop_assume!(!c.degenerate);
            let v = verify_certificate(&a, &c).unwrap();
            proptest::prop_assert!(v.bound_holds);
            proptest::prop_assert!(v.equality_chain <= 1e-8);
        }
    }
}
