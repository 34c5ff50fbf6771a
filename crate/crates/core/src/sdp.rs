//! The SDP interior-point Newton subproblem
//!
//! ```text
//! min ½ sᵀ(W ⊗ W)s − x̂ᵀs − b̂ᵀy   s.t.   s + 𝔸y = ĉ
//! ```
//!
//! over symmetric-vectorized `s`. It is an ECQP with `D = W ⊗ W`, `A = I`,
//! `B = 𝔸`, and the Kronecker structure makes every ADMM `s`-update an
//! O(n³) Hadamard-product solve in the eigenbasis of `W`.

use crate::admm::FixedPointMap;
use crate::error::{LinalgError, ProblemError};
use crate::linalg::{self, haar_orthogonal, sym_eig, Cholesky, DenseMatrix, Qr, Rng, SymEigen};
use crate::problem::EcqpProblem;

/// `n(n+1)/2`.
pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper triangle of a symmetric matrix, row by row, with off-diagonal
/// entries scaled by √2 so that `⟨svec S, svec T⟩ = tr(ST)`.
pub fn svec(s: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let s = linalg::check_symmetric(s)?;
    let n = s.rows();
    let mut out = Vec::with_capacity(svec_dim(n));
    for i in 0..n {
        out.push(s[(i, i)]);
        for j in i + 1..n {
            out.push(std::f64::consts::SQRT_2 * s[(i, j)]);
        }
    }
    Ok(out)
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64]) -> Result<DenseMatrix, LinalgError> {
    let n = (((8 * v.len() + 1) as f64).sqrt().round() as usize).saturating_sub(1) / 2;
    if svec_dim(n) != v.len() {
        return Err(LinalgError::Shape(format!("{} is not a triangular number", v.len())));
    }
    let mut s = DenseMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        s[(i, i)] = v[k];
        k += 1;
        for j in i + 1..n {
            let x = v[k] / std::f64::consts::SQRT_2;
            s[(i, j)] = x;
            s[(j, i)] = x;
            k += 1;
        }
    }
    Ok(s)
}

/// `(β⁻¹ W⊗W + I)⁻¹` applied to `C`, as
/// `V [ (β/(λᵢλⱼ + β)) ∘ (VᵀCV) ] Vᵀ` with `W = V diag(λ) Vᵀ`.
pub fn kron_solve(w_eig: &SymEigen, beta: f64, c: &DenseMatrix) -> DenseMatrix {
    let v = &w_eig.vectors;
    let lam = &w_eig.values;
    let mut core = v.t_matmul(&c.matmul(v));
    let n = lam.len();
    for i in 0..n {
        for j in 0..n {
            core[(i, j)] *= beta / (lam[i] * lam[j] + beta);
        }
    }
    v.matmul(&core).matmul_t(v).symmetrized()
}

/// `W S W`, the action of `W ⊗ W` on symmetric matrices.
fn congruence(w: &DenseMatrix, s: &DenseMatrix) -> DenseMatrix {
    w.matmul(s).matmul(w).symmetrized()
}

/// Dense `W ⊗ W` restricted to svec coordinates.
pub fn sym_kron_dense(w: &DenseMatrix) -> DenseMatrix {
    let dim = svec_dim(w.rows());
    let mut out = DenseMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for k in 0..dim {
        e[k] = 1.0;
        let col = svec(&congruence(w, &smat(&e).expect("triangular"))).expect("symmetric");
        out.set_column(k, &col);
        e[k] = 0.0;
    }
    out.symmetrized()
}

#[derive(Debug, Clone)]
pub struct SdpNewtonProblem {
    /// Scaling matrix, symmetric positive definite, n×n.
    pub w: DenseMatrix,
    /// Columns are `svec Aᵢ`; `svec_dim(n) × m`, full column rank.
    pub constraints: DenseMatrix,
    pub x_hat: Vec<f64>,
    pub b_hat: Vec<f64>,
    pub c_hat: Vec<f64>,
}

impl SdpNewtonProblem {
    pub fn new(
        w: DenseMatrix,
        constraints: DenseMatrix,
        x_hat: Vec<f64>,
        b_hat: Vec<f64>,
        c_hat: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        let dim = svec_dim(w.rows());
        if !w.is_square() || w.rows() == 0 {
            return Err(ProblemError::Dimension("W must be square and nonempty".into()));
        }
        if constraints.rows() != dim || x_hat.len() != dim || c_hat.len() != dim {
            return Err(ProblemError::Dimension(format!("svec quantities must have length {dim}")));
        }
        if b_hat.len() != constraints.cols() || constraints.cols() > dim {
            return Err(ProblemError::Dimension("b̂ must match the number of constraints, at most svec dim".into()));
        }
        Ok(Self { w, constraints, x_hat, b_hat, c_hat })
    }

    /// Order of the semidefinite cone.
    pub fn order(&self) -> usize {
        self.w.rows()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.cols()
    }

    pub fn svec_dim(&self) -> usize {
        svec_dim(self.order())
    }

    /// The same problem as a generic ECQP: `x = s`, `z = y`, `D = W⊗W`,
    /// `c = −x̂`, `p = −b̂`, `A = I`, `B = 𝔸`, `d = ĉ`.
    pub fn to_ecqp(&self) -> Result<EcqpProblem, ProblemError> {
        EcqpProblem::new(
            sym_kron_dense(&self.w),
            DenseMatrix::identity(self.svec_dim()),
            self.constraints.clone(),
            self.x_hat.iter().map(|v| -v).collect(),
            self.b_hat.iter().map(|v| -v).collect(),
            self.c_hat.clone(),
        )
    }
}

/// Synthetic Newton subproblem whose ECQP condition number is exactly
/// `kappa`: `W = V diag(λ) Vᵀ` with `λ` log-spaced on `[κ^{-1/4}, κ^{1/4}]`
/// (so `cond(W)² = κ`), `V` Haar, and `𝔸` the orthonormalized svec of `m`
/// random symmetric Gaussian matrices.
pub fn synthetic_newton(n: usize, m: usize, kappa: f64, seed: u64) -> Result<SdpNewtonProblem, ProblemError> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(ProblemError::Parameter(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    if n == 0 || m == 0 || m > svec_dim(n) {
        return Err(ProblemError::Dimension(format!("need n >= 1 and 1 <= m <= {}", svec_dim(n))));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let v = haar_orthogonal(n, &mut rng);
    let half = 0.25 * kappa.ln();
    let lam: Vec<f64> = (0..n)
        .map(|i| {
            let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            (-half + 2.0 * half * t).exp()
        })
        .collect();
    let scaled = DenseMatrix::from_fn(n, n, |i, j| v[(i, j)] * lam[j]);
    let w = scaled.matmul_t(&v).symmetrized();
    let dim = svec_dim(n);
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let g = rng.gaussian_matrix(n, n);
            svec(&g.add(&g.transpose()).scale(0.5)).expect("symmetric")
        })
        .collect();
    let raw = DenseMatrix::from_columns(&cols);
    let constraints = Qr::new(&raw).map_err(|_| ProblemError::BNotFullColumnRank)?.q_range();
    debug_assert_eq!(constraints.rows(), dim);
    let x_hat = rng.gaussian_vec(dim);
    let b_hat = rng.gaussian_vec(m);
    let c_hat = rng.gaussian_vec(dim);
    SdpNewtonProblem::new(w, constraints, x_hat, b_hat, c_hat)
}

/// ADMM on the Newton subproblem, state `u = [s; y; x̃]` with `x̃ = β⁻¹x`.
#[derive(Debug, Clone)]
pub struct SdpAdmm<'a> {
    pub prob: &'a SdpNewtonProblem,
    pub beta: f64,
    pub w_eig: SymEigen,
    chol_ata: Cholesky,
}

impl<'a> SdpAdmm<'a> {
    pub fn new(prob: &'a SdpNewtonProblem, beta: f64) -> Result<Self, ProblemError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ProblemError::Parameter(format!("beta must be positive, got {beta}")));
        }
        let w_eig = sym_eig(&prob.w)?;
        if w_eig.min() <= 0.0 {
            return Err(ProblemError::HessianNotPositiveDefinite);
        }
        let a = &prob.constraints;
        let chol_ata = Cholesky::new(&a.t_matmul(a)).map_err(|_| ProblemError::BNotFullColumnRank)?;
        Ok(Self { prob, beta, w_eig, chol_ata })
    }

    /// `β = λ_min(W) λ_max(W)`, which is `√(μL)` for the equivalent ECQP.
    pub fn optimal(prob: &'a SdpNewtonProblem) -> Result<Self, ProblemError> {
        let eig = sym_eig(&prob.w)?;
        Self::new(prob, eig.min() * eig.max())
    }

    /// `cond(W)²`.
    pub fn kappa(&self) -> f64 {
        (self.w_eig.max() / self.w_eig.min()).powi(2)
    }

    fn split<'u>(&self, u: &'u [f64]) -> (&'u [f64], &'u [f64], &'u [f64]) {
        let dim = self.prob.svec_dim();
        let (s, rest) = u.split_at(dim);
        let (y, xt) = rest.split_at(self.prob.num_constraints());
        (s, y, xt)
    }

    /// One ADMM step. The new `s` depends only on `(y, x̃)`.
    pub fn step(&self, y: &[f64], xt: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let p = self.prob;
        let a = &p.constraints;
        let inv_beta = 1.0 / self.beta;
        // s ← (β⁻¹W⊗W + I)⁻¹(β⁻¹x̂ + ĉ − 𝔸y − x̃)
        let mut rhs = p.c_hat.clone();
        linalg::axpy(inv_beta, &p.x_hat, &mut rhs);
        linalg::axpy(-1.0, &a.matvec(y), &mut rhs);
        linalg::axpy(-1.0, xt, &mut rhs);
        let c = smat(&rhs).expect("svec length");
        let s_new = svec(&kron_solve(&self.w_eig, self.beta, &c)).expect("symmetric");
        // y ← (𝔸ᵀ𝔸)⁻¹[β⁻¹b̂ − 𝔸ᵀ(s + x̃ − ĉ)]
        let mut t = s_new.clone();
        linalg::axpy(1.0, xt, &mut t);
        linalg::axpy(-1.0, &p.c_hat, &mut t);
        let mut r = a.matvec_t(&t);
        r.iter_mut().for_each(|v| *v = -*v);
        linalg::axpy(inv_beta, &p.b_hat, &mut r);
        let y_new = self.chol_ata.solve(&r);
        // x̃ ← x̃ + s + 𝔸y − ĉ
        let mut xt_new = xt.to_vec();
        linalg::axpy(1.0, &s_new, &mut xt_new);
        a.matvec_add(&y_new, &mut xt_new);
        linalg::axpy(-1.0, &p.c_hat, &mut xt_new);
        (s_new, y_new, xt_new)
    }

    /// Relative residual of the Newton KKT system at `(s, y, x = βx̃)`,
    /// normalized like the generic saddle residual of [`SdpNewtonProblem::to_ecqp`].
    pub fn kkt_residual(&self, s: &[f64], y: &[f64], xt: &[f64]) -> f64 {
        let p = self.prob;
        let a = &p.constraints;
        let x = linalg::scaled(self.beta, xt);
        let ws = svec(&congruence(&p.w, &smat(s).expect("svec length"))).expect("symmetric");
        let mut r1 = ws;
        linalg::axpy(1.0, &x, &mut r1);
        linalg::axpy(-1.0, &p.x_hat, &mut r1);
        let mut r2 = a.matvec_t(&x);
        linalg::axpy(-1.0, &p.b_hat, &mut r2);
        let mut r3 = s.to_vec();
        a.matvec_add(y, &mut r3);
        linalg::axpy(-1.0, &p.c_hat, &mut r3);
        let sq = |v: &[f64]| linalg::dot(v, v);
        let num = (sq(&r1) + sq(&r2) + sq(&r3)).sqrt();
        let den = (sq(&p.x_hat) + sq(&p.b_hat) + sq(&p.c_hat)).sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Unpacks a state into `(S, y, X)` with `X = β smat(x̃)`.
    pub fn recover(&self, u: &[f64]) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
        let (s, y, xt) = self.split(u);
        let s = smat(s).expect("svec length");
        let x = smat(xt).expect("svec length").scale(self.beta);
        (s, y.to_vec(), x)
    }
}

impl FixedPointMap for SdpAdmm<'_> {
    fn dim(&self) -> usize {
        2 * self.prob.svec_dim() + self.prob.num_constraints()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (_, y, xt) = self.split(u);
        let (s, y, xt) = self.step(y, xt);
        let mut out = s;
        out.extend(y);
        out.extend(xt);
        out
    }

    fn gate_residual(&self, u: &[f64]) -> f64 {
        let (s, y, xt) = self.split(u);
        self.kkt_residual(s, y, xt)
    }
}
