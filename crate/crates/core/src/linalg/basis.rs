use super::{axpy, dot, norm, PIVOT_THRESHOLD};
use crate::error::{Error, Result};

/// Orthonormal vectors spanning a subspace of `R^ambient_dim`.
///
/// Vectors are stored contiguously. Built by classical Gram-Schmidt with a
/// second orthogonalization pass; inputs whose residual falls below
/// `PIVOT_THRESHOLD` times the largest input norm are dropped and counted as
/// rank deficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    ambient_dim: usize,
    data: Vec<f64>,
    input_count: usize,
}

impl OrthonormalBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { ambient_dim, data: Vec::new(), input_count: 0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.data.len() / self.ambient_dim.max(1)
    }

    /// Number of vectors offered to the basis, accepted or not.
    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.input_count
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.ambient_dim)
    }

    /// Removes the component of `w` along the span, twice.
    fn orthogonalize(&self, w: &mut [f64]) {
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.vectors().map(|q| dot(q, w)).collect();
            for (q, c) in self.vectors().zip(coeffs) {
                axpy(-c, q, w);
            }
        }
    }

    /// Orthogonalizes `v` against the basis and appends the normalized
    /// residual when its norm exceeds `threshold`. Returns the residual norm,
    /// i.e. the distance from `v` to the span before insertion.
    pub fn push(&mut self, v: &[f64], threshold: f64) -> Result<f64> {
        self.check_dim(v.len())?;
        self.input_count += 1;
        let mut w = v.to_vec();
        self.orthogonalize(&mut w);
        let r = norm(&w);
        if r > threshold && r > 0.0 {
            self.data.extend(w.iter().map(|x| x / r));
        }
        Ok(r)
    }

    /// Orthogonal projection of `y` onto the span.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y.len())?;
        let mut p = vec![0.0; self.ambient_dim];
        for q in self.vectors() {
            axpy(dot(q, y), q, &mut p);
        }
        Ok(p)
    }

    /// `y - P y`, computed with re-orthogonalization.
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y.len())?;
        let mut w = y.to_vec();
        self.orthogonalize(&mut w);
        Ok(w)
    }

    /// Orthonormal basis of the orthogonal complement, obtained by
    /// orthogonalizing the standard basis vectors against this one.
    pub fn complement(&self) -> OrthonormalBasis {
        let n = self.ambient_dim;
        let mut full = self.clone();
        let mut comp = OrthonormalBasis::empty(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            if full.rank() == n {
                break;
            }
            e.iter_mut().for_each(|x| *x = 0.0);
            e[i] = 1.0;
            let before = full.rank();
            // 1/sqrt(2n) keeps the selected directions well conditioned
            let _ = full.push(&e, 0.5 / (n as f64).sqrt());
            if full.rank() > before {
                let v = full.vector(before).to_vec();
                comp.data.extend(v);
                comp.input_count += 1;
            }
        }
        comp
    }

    /// Largest `|<q_i, q_j> - delta_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.rank();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.vector(i), self.vector(j)) - target).abs());
            }
        }
        worst
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got });
        }
        Ok(())
    }
}

/// Basis for the span of `columns`. Rank deficiency is reported through
/// [`OrthonormalBasis::rank`] and [`OrthonormalBasis::is_full_rank`].
pub fn orthonormal_basis<V: AsRef<[f64]>>(columns: &[V]) -> Result<OrthonormalBasis> {
    let dim = columns
        .first()
        .map(|c| c.as_ref().len())
        .ok_or_else(|| Error::InvalidParameter("no vectors given".into()))?;
    if dim == 0 {
        return Err(Error::InvalidParameter("vectors must be non-empty".into()));
    }
    let largest = columns.iter().map(|c| norm(c.as_ref())).fold(0.0, f64::max);
    let threshold = PIVOT_THRESHOLD * largest;
    let mut basis = OrthonormalBasis::empty(dim);
    for c in columns {
        basis.push(c.as_ref(), threshold)?;
    }
    Ok(basis)
}

/// `|y - P_H y|`.
pub fn dist_to_subspace(y: &[f64], h: &OrthonormalBasis) -> Result<f64> {
    Ok(norm(&h.residual(y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EntryDistribution;
    use crate::linalg::generate_matrix;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn standard_vectors_are_kept() {
        let b = orthonormal_basis(&[e(3, 0), e(3, 1)]).unwrap();
        assert_eq!(b.rank(), 2);
        assert_eq!(b.vector(0), e(3, 0).as_slice());
        assert_eq!(b.vector(1), e(3, 1).as_slice());
    }

    #[test]
    fn dependent_input_detected() {
        let b = orthonormal_basis(&[e(3, 0), vec![2.0, 0.0, 0.0]]).unwrap();
        assert_eq!(b.rank(), 1);
        assert!(!b.is_full_rank());
        assert_eq!(b.vector(0), e(3, 0).as_slice());
    }

    #[test]
    fn gaussian_columns_full_rank() {
        let m = generate_matrix(&EntryDistribution::gaussian(), 100, 99, 5);
        let b = orthonormal_basis(&m.columns()).unwrap();
        assert_eq!(b.rank(), 99);
        assert!(b.orthonormality_residual() <= 1e-10);
    }

    #[test]
    fn distances() {
        let h = orthonormal_basis(&[e(2, 1)]).unwrap();
        assert!((dist_to_subspace(&e(2, 0), &h).unwrap() - 1.0).abs() < 1e-15);
        let y = [1.0 / 2f64.sqrt(); 2];
        let h1 = orthonormal_basis(&[e(2, 0)]).unwrap();
        assert!((dist_to_subspace(&y, &h1).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let in_span = [3.0, 0.0];
        assert!(dist_to_subspace(&in_span, &h1).unwrap() < 1e-10);
        assert!(matches!(dist_to_subspace(&[1.0, 2.0, 3.0], &h1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn complement_is_orthogonal_and_fills_space() {
        let m = generate_matrix(&EntryDistribution::gaussian(), 10, 7, 3);
        let b = orthonormal_basis(&m.columns()).unwrap();
        let c = b.complement();
        assert_eq!(c.rank(), 3);
        assert!(c.orthonormality_residual() < 1e-12);
        for q in c.vectors() {
            assert!(b.project(q).unwrap().iter().all(|x| x.abs() < 1e-12));
        }
    }

    proptest::proptest! {
        #[test]
        fn pythagoras_and_idempotence(
            seed in 0u64..1000,
            k in 1usize..6,
            y in proptest::collection::vec(-5.0f64..5.0, 8),
        ) {
            let m = generate_matrix(&EntryDistribution::gaussian(), 8, k, seed);
            let h = orthonormal_basis(&m.columns()).unwrap();
            let p = h.project(&y).unwrap();
            let d = dist_to_subspace(&y, &h).unwrap();
            let ny2 = dot(&y, &y);
            proptest::prop_assert!((ny2 - (dot(&p, &p) + d * d)).abs() <= 1e-8 * ny2.max(1e-300));
            proptest::prop_assert!(dist_to_subspace(&p, &h).unwrap() <= 1e-10 * ny2.sqrt().max(1e-300));
        }
    }
}
