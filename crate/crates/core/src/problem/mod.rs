//! Problem data for
//!
//! ```text
//! minimize ½xᵀDx + cᵀx + pᵀz   subject to   Ax + Bz = d
//! ```
//!
//! with `D` (n×n) positive definite, `A` (m×n) of full row rank and `B`
//! (m×ℓ) of full column rank, plus the factorizations every solver in the
//! crate shares.

mod generate;
mod io;
mod kkt;

pub use generate::{random_problem, sample_sweep_instance, worst_case_problem, SweepInstance};
pub use io::{parse_problem, read_problem, write_problem};
pub use kkt::{assemble_kkt, solve_saddle_dense, KktSystem, SaddleSolution};

use crate::error::{LinalgError, ProblemError};
use crate::linalg::{self, sym_eig, Cholesky, DenseMatrix, Qr};

#[derive(Debug, Clone, PartialEq)]
pub struct EcqpProblem {
    pub hessian: DenseMatrix,
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
    pub d: Vec<f64>,
}

impl EcqpProblem {
    /// Checks shapes, `ℓ ≤ m ≤ n` and finiteness. Rank and definiteness are
    /// checked when the problem is factored.
    pub fn new(
        hessian: DenseMatrix,
        a: DenseMatrix,
        b: DenseMatrix,
        c: Vec<f64>,
        p: Vec<f64>,
        d: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        let n = hessian.rows();
        let m = a.rows();
        let l = b.cols();
        let dim = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(ProblemError::Dimension(what.to_string()))
            }
        };
        dim(hessian.is_square(), "D must be square")?;
        dim(n >= 1 && m >= 1 && l >= 1, "n, m and l must be positive")?;
        dim(a.cols() == n, "A must have n columns")?;
        dim(b.rows() == m, "B must have m rows")?;
        dim(c.len() == n, "c must have length n")?;
        dim(p.len() == l, "p must have length l")?;
        dim(d.len() == m, "d must have length m")?;
        dim(l <= m && m <= n, "need l <= m <= n")?;
        for (name, v) in [("c", &c), ("p", &p), ("d", &d)] {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(ProblemError::Dimension(format!("{name}[{i}] is not finite")));
            }
        }
        Ok(Self { hessian, a, b, c, p, d })
    }

    pub fn n(&self) -> usize {
        self.hessian.rows()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn l(&self) -> usize {
        self.b.cols()
    }

    /// Relative residual of the saddle system
    /// `[[D,0,Aᵀ],[0,0,Bᵀ],[A,B,0]]·[x;z;λ] = [−c;−p;d]`.
    pub fn saddle_residual(&self, x: &[f64], z: &[f64], lambda: &[f64]) -> f64 {
        let mut r1 = self.hessian.matvec(x);
        self.a.matvec_t_add(lambda, &mut r1);
        linalg::axpy(1.0, &self.c, &mut r1);
        let mut r2 = self.b.matvec_t(lambda);
        linalg::axpy(1.0, &self.p, &mut r2);
        let mut r3 = self.a.matvec(x);
        self.b.matvec_add(z, &mut r3);
        linalg::axpy(-1.0, &self.d, &mut r3);
        let num = (sq(&r1) + sq(&r2) + sq(&r3)).sqrt();
        let den = (sq(&self.c) + sq(&self.p) + sq(&self.d)).sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

fn sq(v: &[f64]) -> f64 {
    linalg::dot(v, v)
}

/// Extreme eigenvalues of `D̃ = (AD⁻¹Aᵀ)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConstants {
    pub mu: f64,
    pub l: f64,
    pub kappa: f64,
    /// All eigenvalues of `D̃`, ascending.
    pub dtilde_eigs: Vec<f64>,
}

impl SpectralConstants {
    /// `√(μL)`, the step size minimizing `γ`.
    pub fn optimal_beta(&self) -> f64 {
        (self.mu * self.l).sqrt()
    }

    /// `γ = max(L/β, β/μ)`.
    pub fn gamma(&self, beta: f64) -> f64 {
        (self.l / beta).max(beta / self.mu)
    }
}

/// A problem together with the cached factorizations:
/// Cholesky of `D` and `BᵀB`, the full QR of `B`, the eigendecomposition
/// `D̃ = V Λ Vᵀ` and the product `AD⁻¹`.
#[derive(Debug, Clone)]
pub struct FactoredProblem {
    pub problem: EcqpProblem,
    pub chol_d: Cholesky,
    pub chol_btb: Cholesky,
    pub qr_b: Qr,
    /// Eigenvalues of `D̃`, ascending.
    pub lambda: Vec<f64>,
    /// Matching orthonormal eigenvectors (columns).
    pub v: DenseMatrix,
    /// `AD⁻¹`, m×n.
    pub ad_inv: DenseMatrix,
    pub constants: SpectralConstants,
}

/// Relative floor on the eigenvalues of `AD⁻¹Aᵀ` below which `A` is
/// treated as rank deficient.
const RANK_TOL: f64 = 64.0 * f64::EPSILON;

impl FactoredProblem {
    pub fn new(problem: EcqpProblem) -> Result<Self, ProblemError> {
        let chol_d = Cholesky::new(&problem.hessian).map_err(|e| match e {
            LinalgError::NotPositiveDefinite { .. } => ProblemError::HessianNotPositiveDefinite,
            other => other.into(),
        })?;
        let (m, n) = (problem.m(), problem.n());

        // Rows of F = A L⁻ᵀ are L⁻¹aᵢ; then F Fᵀ = AD⁻¹Aᵀ.
        let mut f = problem.a.clone();
        let mut ad_inv = problem.a.clone();
        for i in 0..m {
            chol_d.solve_lower_in_place(f.row_mut(i));
            chol_d.solve_in_place(ad_inv.row_mut(i));
        }
        let gram = f.matmul_t(&f);
        let eig = sym_eig(&gram)?;
        let (g_min, g_max) = (eig.min(), eig.max());
        if !(g_max > 0.0) || g_min <= RANK_TOL * g_max {
            return Err(ProblemError::ANotFullRowRank);
        }
        // Eigenvalues of D̃ are 1/g; reversing keeps them ascending.
        let lambda: Vec<f64> = eig.values.iter().rev().map(|g| 1.0 / g).collect();
        let v = DenseMatrix::from_fn(m, m, |i, j| eig.vectors[(i, m - 1 - j)]);

        let qr_b = Qr::new(&problem.b).map_err(|e| match e {
            LinalgError::RankDeficient { .. } => ProblemError::BNotFullColumnRank,
            other => other.into(),
        })?;
        let chol_btb = Cholesky::new(&problem.b.t_matmul(&problem.b))
            .map_err(|_| ProblemError::BNotFullColumnRank)?;

        let mu = lambda[0];
        let l = lambda[m - 1];
        let constants = SpectralConstants {
            mu,
            l,
            kappa: l / mu,
            dtilde_eigs: lambda.clone(),
        };
        debug_assert_eq!(ad_inv.cols(), n);
        Ok(Self {
            problem,
            chol_d,
            chol_btb,
            qr_b,
            lambda,
            v,
            ad_inv,
            constants,
        })
    }

    pub fn n(&self) -> usize {
        self.problem.n()
    }

    pub fn m(&self) -> usize {
        self.problem.m()
    }

    pub fn l(&self) -> usize {
        self.problem.l()
    }

    /// `V diag(f(λ)) Vᵀ w` in O(m²).
    pub fn dtilde_fn_apply(&self, w: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut t = self.v.matvec_t(w);
        for (ti, &li) in t.iter_mut().zip(&self.lambda) {
            *ti *= f(li);
        }
        self.v.matvec(&t)
    }

    /// `D̃ w`.
    pub fn dtilde_apply(&self, w: &[f64]) -> Vec<f64> {
        self.dtilde_fn_apply(w, |l| l)
    }

    /// `AD⁻¹Aᵀ w = D̃⁻¹ w`.
    pub fn schur_apply(&self, w: &[f64]) -> Vec<f64> {
        self.dtilde_fn_apply(w, |l| 1.0 / l)
    }

    /// `(BᵀB)⁻¹ r`.
    pub fn btb_solve(&self, r: &[f64]) -> Vec<f64> {
        self.chol_btb.solve(r)
    }

    /// Dense `D̃`, assembled from the eigendecomposition.
    pub fn dtilde_dense(&self) -> DenseMatrix {
        let scaled = DenseMatrix::from_fn(self.m(), self.m(), |i, j| self.v[(i, j)] * self.lambda[j]);
        scaled.matmul_t(&self.v).symmetrized()
    }
}

/// Factors the problem and returns `(μ, L, κ, Λ{D̃})`.
pub fn spectral_constants(problem: &EcqpProblem) -> Result<SpectralConstants, ProblemError> {
    Ok(FactoredProblem::new(problem.clone())?.constants)
}
