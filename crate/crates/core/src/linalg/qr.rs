use super::DenseMatrix;
use crate::error::LinalgError;

/// Full Householder QR of an `m×n` matrix with `m ≥ n`: `M = Q [R; 0]`.
#[derive(Debug, Clone)]
pub struct Qr {
    /// `m×m` orthogonal factor.
    pub q: DenseMatrix,
    /// `n×n` upper-triangular factor.
    pub r: DenseMatrix,
}

impl Qr {
    /// Factors `m` and rejects numerically rank-deficient input.
    pub fn new(m: &DenseMatrix) -> Result<Self, LinalgError> {
        let qr = Self::new_unchecked(m)?;
        let scale = super::frobenius_norm(m).max(f64::MIN_POSITIVE);
        let tol = 1e-13 * scale * (m.rows().max(m.cols()) as f64);
        for (j, d) in qr.r.diagonal().iter().enumerate() {
            if d.abs() <= tol {
                return Err(LinalgError::RankDeficient { column: j });
            }
        }
        Ok(qr)
    }

    /// Factors without the rank check.
    pub fn new_unchecked(m: &DenseMatrix) -> Result<Self, LinalgError> {
        let (rows, cols) = (m.rows(), m.cols());
        if rows < cols {
            return Err(LinalgError::Shape(format!(
                "QR needs rows >= cols, got {rows}x{cols}"
            )));
        }
        let mut a = m.clone();
        let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut v: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
            let alpha = super::norm2(&v);
            if alpha == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm = super::norm2(&v);
            v.iter_mut().for_each(|x| *x /= vnorm);
            // A[k.., k..] -= 2 v (vᵀ A[k.., k..])
            for j in k..cols {
                let s: f64 = v.iter().enumerate().map(|(t, vi)| vi * a[(k + t, j)]).sum();
                for (t, vi) in v.iter().enumerate() {
                    a[(k + t, j)] -= 2.0 * vi * s;
                }
            }
            reflectors.push(v);
        }
        let r = DenseMatrix::from_fn(cols, cols, |i, j| if j >= i { a[(i, j)] } else { 0.0 });

        // Q = H_0 H_1 ... H_{n-1}, accumulated backwards on the identity.
        let mut q = DenseMatrix::identity(rows);
        for (k, v) in reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            for j in 0..rows {
                let s: f64 = v.iter().enumerate().map(|(t, vi)| vi * q[(k + t, j)]).sum();
                if s == 0.0 {
                    continue;
                }
                for (t, vi) in v.iter().enumerate() {
                    q[(k + t, j)] -= 2.0 * vi * s;
                }
            }
        }
        Ok(Self { q, r })
    }

    /// First `n` columns of `Q` (orthonormal basis of the range).
    pub fn q_range(&self) -> DenseMatrix {
        self.q.submatrix(0, 0, self.q.rows(), self.r.rows())
    }

    /// Remaining `m−n` columns of `Q` (orthonormal complement).
    pub fn q_complement(&self) -> DenseMatrix {
        let n = self.r.rows();
        self.q.submatrix(0, n, self.q.rows(), self.q.rows() - n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, Rng};

    fn orthogonality_residual(q: &DenseMatrix) -> f64 {
        frobenius_norm(&q.t_matmul(q).sub(&DenseMatrix::identity(q.cols())))
    }

    #[test]
    fn identity_factors_trivially() {
        let qr = Qr::new(&DenseMatrix::identity(3)).unwrap();
        // Householder may flip signs; Q R must still equal I and |R| = I.
        let prod = qr.q_range().matmul(&qr.r);
        assert!(frobenius_norm(&prod.sub(&DenseMatrix::identity(3))) < 1e-15);
        for d in qr.r.diagonal() {
            assert!((d.abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn column_vector_three_four() {
        let m = DenseMatrix::from_rows(&[&[3.0], &[4.0]]);
        let qr = Qr::new(&m).unwrap();
        assert!((qr.r[(0, 0)].abs() - 5.0).abs() < 1e-14);
        let q0 = qr.q.column(0);
        let s = qr.r[(0, 0)].signum();
        assert!((s * q0[0] - 0.6).abs() < 1e-14 && (s * q0[1] - 0.8).abs() < 1e-14);
        assert!(orthogonality_residual(&qr.q) < 1e-14);
    }

    #[test]
    fn random_rectangular_round_trip() {
        let mut rng = Rng::seed_from_u64(11);
        for &(m, n) in &[(5usize, 3usize), (40, 40), (60, 7)] {
            let a = DenseMatrix::from_fn(m, n, |_, _| rng.gaussian());
            let qr = Qr::new(&a).unwrap();
            assert!(orthogonality_residual(&qr.q) < 1e-12);
            let back = qr.q_range().matmul(&qr.r);
            assert!(frobenius_norm(&back.sub(&a)) < 1e-12 * frobenius_norm(&a));
            let cross = qr.q_range().t_matmul(&qr.q_complement());
            assert!(cross.max_abs() < 1e-13);
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        assert!(matches!(Qr::new(&a), Err(LinalgError::RankDeficient { column: 1 })));
    }
}
