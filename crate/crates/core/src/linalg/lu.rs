use super::{norm, DenseMatrix, PIVOT_THRESHOLD};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    // unit-lower L below the diagonal, U on and above, row-major
    lu: Vec<f64>,
    // row i of P M is row perm[i] of M
    perm: Vec<usize>,
}

impl LuFactors {
    /// Fails with [`Error::SingularMatrix`] when a pivot drops below
    /// `PIVOT_THRESHOLD` times the largest column norm of `m`.
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let n = m.rows();
        let largest = (0..n).map(|j| norm(&m.column(j))).fold(0.0, f64::max);
        let threshold = PIVOT_THRESHOLD * largest;
        let mut lu = m.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > threshold) || pivot == 0.0 {
                return Err(Error::SingularMatrix { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    let (top, bottom) = lu.split_at_mut(i * n);
                    let src = &top[k * n + k + 1..k * n + n];
                    let dst = &mut bottom[k + 1..n];
                    for (x, s) in dst.iter_mut().zip(src) {
                        *x -= f * s;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `M^T w = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        // U^T z = b, column-oriented forward substitution
        let mut z = b.to_vec();
        for k in 0..n {
            z[k] /= self.lu[k * n + k];
            let zk = z[k];
            if zk != 0.0 {
                let row = &self.lu[k * n + k + 1..(k + 1) * n];
                for (zi, u) in z[k + 1..].iter_mut().zip(row) {
                    *zi -= u * zk;
                }
            }
        }
        // L^T y = z
        for k in (0..n).rev() {
            let yk = z[k];
            if yk != 0.0 {
                let row = &self.lu[k * n..k * n + k];
                for (zi, l) in z[..k].iter_mut().zip(row) {
                    *zi -= l * yk;
                }
            }
        }
        let mut w = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            w[p] = z[i];
        }
        Ok(w)
    }

    /// Dense inverse, one solve per column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            cols.push(self.solve(&e).expect("dimension checked"));
            e[j] = 0.0;
        }
        DenseMatrix::from_columns(&cols).expect("square")
    }
}

/// `w` with `M^T w = e_k` (0-based `k`): the `k`-th row of `M^-1`.
pub fn solve_transpose(m: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    let lu = LuFactors::new(m)?;
    if k >= lu.dim() {
        return Err(Error::DimensionMismatch { expected: lu.dim(), got: k });
    }
    let mut e = vec![0.0; lu.dim()];
    e[k] = 1.0;
    lu.solve_transpose(&e)
}
