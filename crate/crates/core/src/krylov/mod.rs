//! Matrix-free Krylov solvers over [`LinearOperator`].

mod admm_gmres;
mod cr;
mod gmres;
mod minres;

pub use admm_gmres::admm_gmres;
pub use cr::conjugate_residuals;
pub use gmres::{gmres, gmres_restarted, gmres_with};
pub use minres::minres;

use crate::error::KrylovError;
use crate::linalg::{dot, norm2, DenseMatrix, Rng};

/// A square linear map given only by its action.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "operator must be square");
        self.rows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    /// Target for the gate residual (or the relative native residual when no
    /// gate is given).
    pub tol: f64,
    pub max_iters: usize,
    /// Restart period; `None` keeps the whole Krylov basis.
    pub restart: Option<usize>,
}

impl KrylovConfig {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        Self {
            tol,
            max_iters,
            restart: None,
        }
    }

    pub fn with_restart(mut self, period: usize) -> Self {
        self.restart = Some(period);
        self
    }

    fn validate(&self) {
        assert!(self.tol > 0.0, "tol must be positive");
        if let Some(p) = self.restart {
            assert!(p >= 1, "restart period must be at least 1");
        }
    }
}

/// Residual evaluated on the current solution estimate; convergence is
/// declared on it instead of on the solver's own residual.
pub type Gate<'g> = &'g mut dyn FnMut(&[f64]) -> f64;

/// Relative tolerance of the randomized symmetry probe.
const SYMMETRY_PROBE_TOL: f64 = 1e-8;

/// Checks `⟨Au, v⟩ ≈ ⟨u, Av⟩` on two fixed random probe pairs.
pub fn probe_symmetry(op: &dyn LinearOperator) -> Result<(), KrylovError> {
    let n = op.dim();
    let mut rng = Rng::seed_from_u64(0x5eed);
    for _ in 0..2 {
        let u = rng.gaussian_vec(n);
        let v = rng.gaussian_vec(n);
        let au = op.apply(&u);
        let av = op.apply(&v);
        let scale = (norm2(&au) * norm2(&v)).max(norm2(&av) * norm2(&u));
        if scale == 0.0 {
            continue;
        }
        let rel = (dot(&au, &v) - dot(&u, &av)).abs() / scale;
        if !(rel <= SYMMETRY_PROBE_TOL) {
            return Err(KrylovError::NotSymmetric(rel));
        }
    }
    Ok(())
}

fn check_dim(op: &dyn LinearOperator, b: &[f64]) -> Result<(), KrylovError> {
    if op.dim() != b.len() {
        return Err(KrylovError::Dimension {
            operator: op.dim(),
            vector: b.len(),
        });
    }
    Ok(())
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
