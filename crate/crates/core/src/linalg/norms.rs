use super::{sym_eig, ComplexMatrix, DenseMatrix};
use crate::error::LinalgError;

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    super::norm2(m.as_slice())
}

/// Largest singular value, from the top eigenvalue of `MᵀM` (or `MMᵀ`,
/// whichever is smaller).
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    let gram = if m.cols() <= m.rows() {
        m.t_matmul(m)
    } else {
        m.matmul_t(m)
    };
    Ok(sym_eig(&gram)?.max().max(0.0).sqrt())
}

/// 2-norm condition number of a square matrix.
pub fn condition_2(m: &DenseMatrix) -> Result<f64, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape("condition_2 needs a square matrix".into()));
    }
    extreme_ratio(&sym_eig(&m.t_matmul(m))?.values, m.rows())
}

/// 2-norm condition number of a square complex matrix, via the real
/// embedding of its Hermitian Gram matrix.
pub fn condition_2_complex(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::Shape("condition_2 needs a square matrix".into()));
    }
    let emb = m.gram().hermitian_real_embedding();
    extreme_ratio(&sym_eig(&emb)?.values, m.rows())
}

fn extreme_ratio(gram_eigs: &[f64], dim: usize) -> Result<f64, LinalgError> {
    let (Some(&lo), Some(&hi)) = (gram_eigs.first(), gram_eigs.last()) else {
        return Ok(1.0);
    };
    if hi <= 0.0 || lo <= (dim as f64) * f64::EPSILON * hi {
        return Err(LinalgError::Singular);
    }
    Ok((hi / lo).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_orthogonal, Rng};

    #[test]
    fn identity_norms() {
        let i = DenseMatrix::identity(4);
        assert!((spectral_norm(&i).unwrap() - 1.0).abs() < 1e-15);
        assert!((frobenius_norm(&i) - 2.0).abs() < 1e-15);
        assert!((condition_2(&i).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_norms() {
        let m = DenseMatrix::from_diag(&[2.0, -3.0]);
        assert!((spectral_norm(&m).unwrap() - 3.0).abs() < 1e-14);
        assert!((frobenius_norm(&m) - 13f64.sqrt()).abs() < 1e-14);
        assert!((condition_2(&m).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn singular_condition_is_error() {
        let m = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(condition_2(&m).unwrap_err(), LinalgError::Singular);
    }

    #[test]
    fn spectral_norm_orthogonally_invariant() {
        let mut rng = Rng::seed_from_u64(21);
        let m = DenseMatrix::from_fn(12, 12, |_, _| rng.gaussian());
        let q = haar_orthogonal(12, &mut rng);
        let a = spectral_norm(&m).unwrap();
        let b = spectral_norm(&q.matmul(&m).matmul_t(&q)).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn complex_condition_of_real_matches_real() {
        let m = DenseMatrix::from_rows(&[&[3.0, 1.0], &[0.5, 2.0]]);
        let mut c = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                c[(i, j)] = num_complex::Complex64::new(m[(i, j)], 0.0);
            }
        }
        let a = condition_2(&m).unwrap();
        let b = condition_2_complex(&c).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }
}
