//! Dense linear algebra kernels: matrices, factorizations, eigensolvers,
//! norms, random sampling and plain-text matrix I/O.

mod cholesky;
mod complex;
mod eig;
mod io;
mod lu;
mod matrix;
mod norms;
mod qr;
mod random;
mod symeig;

pub use cholesky::Cholesky;
pub use complex::ComplexMatrix;
pub use eig::{gen_eig, EigenPairs};
pub use io::{parse_matrix, read_matrix, write_matrix};
pub use lu::{lu_solve, Lu};
pub use matrix::DenseMatrix;
pub use norms::{condition_2, condition_2_complex, frobenius_norm, spectral_norm};
pub use qr::Qr;
pub use random::{haar_orthogonal, Rng};
pub use symeig::{sym_eig, SymEigen};

use crate::error::LinalgError;

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// `y ← y + a·x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

/// Accepts `m` if `‖M − Mᵀ‖_∞ ≤ 1e-10·‖M‖_∞` and returns `(M + Mᵀ)/2`.
pub fn check_symmetric(m: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let diff = m.sub(&m.transpose()).norm_inf();
    if diff > SYMMETRY_TOL * m.norm_inf() {
        return Err(LinalgError::NotSymmetric {
            asymmetry: m.asymmetry(),
        });
    }
    Ok(m.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm2_avoids_overflow() {
        let x = [3e200, 4e200];
        assert!((norm2(&x) - 5e200).abs() < 1e186);
        assert_eq!(norm2(&[]), 0.0);
    }

    #[test]
    fn symmetric_check_tolerates_roundoff() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0 + 1e-14, 1.0]]);
        let s = check_symmetric(&m).unwrap();
        assert_eq!(s[(0, 1)], s[(1, 0)]);
    }

    proptest! {
        #[test]
        fn axpy_matches_definition(
            a in -10.0f64..10.0,
            xs in prop::collection::vec(-1e3f64..1e3, 0..20),
        ) {
            let mut y: Vec<f64> = xs.iter().map(|v| v * 0.5).collect();
            let expect: Vec<f64> = xs.iter().map(|v| v * 0.5 + a * v).collect();
            axpy(a, &xs, &mut y);
            prop_assert_eq!(y, expect);
        }

        #[test]
        fn cauchy_schwarz(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..30),
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert!(dot(&x, &y).abs() <= norm2(&x) * norm2(&y) * (1.0 + 1e-12) + 1e-12);
        }
    }
}
