//! Saddle-point preconditioners built from the same cached factors as ADMM.
//!
//! Eliminating `x` from the saddle system leaves the reduced system
//!
//! ```text
//! [0   Bᵀ      ] [z]   [−p ]
//! [B  −AD⁻¹Aᵀ  ] [λ] = [ d′],   d′ = d + AD⁻¹c,
//! ```
//!
//! and eliminating `λ` as well leaves the Schur system
//! `BᵀD̃B z = −p′` with `p′ = p − BᵀD̃d′`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, LinalgError};
use crate::krylov::{
    conjugate_residuals, gmres_with, minres, KrylovConfig, LinearOperator,
};
use crate::linalg::{self, Cholesky, DenseMatrix};
use crate::problem::{FactoredProblem, SaddleSolution};
use crate::report::SolveReport;

/// `(d′, p′)`.
pub fn forward_substitute(fp: &FactoredProblem) -> (Vec<f64>, Vec<f64>) {
    let prob = &fp.problem;
    let mut d1 = prob.d.clone();
    fp.ad_inv.matvec_add(&prob.c, &mut d1);
    let mut p1 = prob.p.clone();
    linalg::axpy(-1.0, &prob.b.matvec_t(&fp.dtilde_apply(&d1)), &mut p1);
    (d1, p1)
}

/// `λ = D̃(Bz − d′)`, then `x = −D⁻¹(Aᵀλ + c)`.
pub fn back_substitute(fp: &FactoredProblem, z: &[f64], d_prime: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut bz = fp.problem.b.matvec(z);
    linalg::axpy(-1.0, d_prime, &mut bz);
    let lambda = fp.dtilde_apply(&bz);
    let x = recover_x(fp, &lambda);
    (lambda, x)
}

/// `x = −D⁻¹(Aᵀλ + c)`.
pub fn recover_x(fp: &FactoredProblem, lambda: &[f64]) -> Vec<f64> {
    let mut r = fp.problem.c.clone();
    fp.problem.a.matvec_t_add(lambda, &mut r);
    let mut x = fp.chol_d.solve(&r);
    x.iter_mut().for_each(|v| *v = -*v);
    x
}

/// `[z; λ] ↦ [Bᵀλ; Bz − AD⁻¹Aᵀλ]`.
pub struct ReducedSystem<'a> {
    pub fp: &'a FactoredProblem,
    pub rhs: Vec<f64>,
    pub d_prime: Vec<f64>,
}

impl<'a> ReducedSystem<'a> {
    pub fn new(fp: &'a FactoredProblem) -> Self {
        let (d_prime, _) = forward_substitute(fp);
        let mut rhs: Vec<f64> = fp.problem.p.iter().map(|v| -v).collect();
        rhs.extend_from_slice(&d_prime);
        Self { fp, rhs, d_prime }
    }

    /// Full saddle solution from a reduced iterate `[z; λ]`.
    pub fn expand(&self, w: &[f64]) -> SaddleSolution {
        let l = self.fp.l();
        let lambda = w[l..].to_vec();
        SaddleSolution {
            x: recover_x(self.fp, &lambda),
            z: w[..l].to_vec(),
            lambda,
        }
    }

    pub fn dense(&self) -> DenseMatrix {
        let (l, m) = (self.fp.l(), self.fp.m());
        let mut h = DenseMatrix::zeros(l + m, l + m);
        let b = &self.fp.problem.b;
        h.set_block(0, l, &b.transpose());
        h.set_block(l, 0, b);
        let c = dense_schur(self.fp);
        h.set_block(l, l, &c.scale(-1.0));
        h
    }
}

impl LinearOperator for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        self.fp.l() + self.fp.m()
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let l = self.fp.l();
        let (z, lam) = w.split_at(l);
        let b = &self.fp.problem.b;
        let mut out = b.matvec_t(lam);
        let mut second = b.matvec(z);
        linalg::axpy(-1.0, &self.fp.schur_apply(lam), &mut second);
        out.extend(second);
        out
    }
}

/// `z ↦ BᵀD̃Bz`.
pub struct SchurSystem<'a> {
    pub fp: &'a FactoredProblem,
    pub rhs: Vec<f64>,
    pub d_prime: Vec<f64>,
}

impl<'a> SchurSystem<'a> {
    pub fn new(fp: &'a FactoredProblem) -> Self {
        let (d_prime, p_prime) = forward_substitute(fp);
        let rhs = p_prime.iter().map(|v| -v).collect();
        Self { fp, rhs, d_prime }
    }

    pub fn expand(&self, z: &[f64]) -> SaddleSolution {
        let (lambda, x) = back_substitute(self.fp, z, &self.d_prime);
        SaddleSolution { x, z: z.to_vec(), lambda }
    }

    pub fn dense(&self) -> DenseMatrix {
        let b = &self.fp.problem.b;
        b.t_matmul(&self.fp.dtilde_dense().matmul(b)).symmetrized()
    }
}

impl LinearOperator for SchurSystem<'_> {
    fn dim(&self) -> usize {
        self.fp.l()
    }

    fn apply(&self, z: &[f64]) -> Vec<f64> {
        let b = &self.fp.problem.b;
        b.matvec_t(&self.fp.dtilde_apply(&b.matvec(z)))
    }
}

/// Dense `AD⁻¹Aᵀ`.
fn dense_schur(fp: &FactoredProblem) -> DenseMatrix {
    fp.ad_inv.matmul_t(&fp.problem.a).symmetrized()
}

/// Inverse of `M₁ = blkdiag(βBᵀB, AD⁻¹Aᵀ)`.
pub struct BlockDiagonal<'a> {
    pub fp: &'a FactoredProblem,
    pub beta: f64,
}

impl<'a> BlockDiagonal<'a> {
    /// `β = L`.
    pub fn new(fp: &'a FactoredProblem) -> Self {
        Self::with_beta(fp, fp.constants.l)
    }

    pub fn with_beta(fp: &'a FactoredProblem, beta: f64) -> Self {
        Self { fp, beta }
    }

    pub fn dense(&self) -> DenseMatrix {
        let (l, m) = (self.fp.l(), self.fp.m());
        let mut out = DenseMatrix::zeros(l + m, l + m);
        let b = &self.fp.problem.b;
        out.set_block(0, 0, &b.t_matmul(b).scale(self.beta));
        out.set_block(l, l, &dense_schur(self.fp));
        out
    }
}

impl LinearOperator for BlockDiagonal<'_> {
    fn dim(&self) -> usize {
        self.fp.l() + self.fp.m()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (r1, r2) = r.split_at(self.fp.l());
        let mut out = linalg::scaled(1.0 / self.beta, &self.fp.btb_solve(r1));
        out.extend(self.fp.dtilde_apply(r2));
        out
    }
}

/// Inverse of the constraint preconditioner `M₂ = [[0, Bᵀ], [B, −βI]]`,
/// applied through
///
/// ```text
/// M₂ = [I  −β⁻¹Bᵀ] [β⁻¹BᵀB    0 ] [ I      0]
///      [0     I  ] [  0     −βI ] [−β⁻¹B   I]
/// ```
pub struct Constraint<'a> {
    pub fp: &'a FactoredProblem,
    pub beta: f64,
}

impl<'a> Constraint<'a> {
    /// `β = √(μL)`.
    pub fn new(fp: &'a FactoredProblem) -> Self {
        Self::with_beta(fp, fp.constants.optimal_beta())
    }

    pub fn with_beta(fp: &'a FactoredProblem, beta: f64) -> Self {
        Self { fp, beta }
    }

    pub fn dense(&self) -> DenseMatrix {
        let (l, m) = (self.fp.l(), self.fp.m());
        let b = &self.fp.problem.b;
        let mut out = DenseMatrix::zeros(l + m, l + m);
        out.set_block(0, l, &b.transpose());
        out.set_block(l, 0, b);
        out.set_block(l, l, &DenseMatrix::identity(m).scale(-self.beta));
        out
    }
}

impl LinearOperator for Constraint<'_> {
    fn dim(&self) -> usize {
        self.fp.l() + self.fp.m()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (r1, r2) = r.split_at(self.fp.l());
        let b = &self.fp.problem.b;
        let inv_beta = 1.0 / self.beta;
        let mut t1 = r1.to_vec();
        linalg::axpy(inv_beta, &b.matvec_t(r2), &mut t1);
        let w1 = linalg::scaled(self.beta, &self.fp.btb_solve(&t1));
        let mut w2 = linalg::scaled(-inv_beta, r2);
        linalg::axpy(inv_beta, &b.matvec(&w1), &mut w2);
        let mut out = w1;
        out.extend(w2);
        out
    }
}

/// Inverse of `M₃ = BᵀB` on the Schur system.
pub struct SchurPreconditioner<'a> {
    pub fp: &'a FactoredProblem,
}

impl LinearOperator for SchurPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.fp.l()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.fp.btb_solve(r)
    }
}

/// Inverse of the HSS preconditioner
/// `M₄ = blkdiag(αI, −(AD⁻¹Aᵀ + αI)) · [[αI, Bᵀ], [−B, αI]]`.
/// The second factor is inverted through its Schur complement
/// `α²I + BᵀB`, which gets its own Cholesky factor.
pub struct Hss<'a> {
    pub fp: &'a FactoredProblem,
    pub alpha: f64,
    chol: Cholesky,
}

impl<'a> Hss<'a> {
    /// `α = 1/L`.
    pub fn new(fp: &'a FactoredProblem) -> Result<Self, LinalgError> {
        Self::with_alpha(fp, 1.0 / fp.constants.l)
    }

    pub fn with_alpha(fp: &'a FactoredProblem, alpha: f64) -> Result<Self, LinalgError> {
        let b = &fp.problem.b;
        let mut s = b.t_matmul(b);
        s.add_diagonal(alpha * alpha);
        Ok(Self {
            fp,
            alpha,
            chol: Cholesky::new(&s)?,
        })
    }

    pub fn dense(&self) -> DenseMatrix {
        let (l, m) = (self.fp.l(), self.fp.m());
        let a = self.alpha;
        let b = &self.fp.problem.b;
        let mut first = DenseMatrix::zeros(l + m, l + m);
        first.set_block(0, 0, &DenseMatrix::identity(l).scale(a));
        let mut c = dense_schur(self.fp);
        c.add_diagonal(a);
        first.set_block(l, l, &c.scale(-1.0));
        let mut second = DenseMatrix::identity(l + m).scale(a);
        second.set_block(0, l, &b.transpose());
        second.set_block(l, 0, &b.scale(-1.0));
        first.matmul(&second)
    }
}

impl LinearOperator for Hss<'_> {
    fn dim(&self) -> usize {
        self.fp.l() + self.fp.m()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (r1, r2) = r.split_at(self.fp.l());
        let a = self.alpha;
        let b = &self.fp.problem.b;
        let t1 = linalg::scaled(1.0 / a, r1);
        // (AD⁻¹Aᵀ + αI)⁻¹ = V diag(λ/(1 + αλ)) Vᵀ
        let t2: Vec<f64> = self.fp.dtilde_fn_apply(r2, |l| l / (1.0 + a * l)).iter().map(|v| -v).collect();
        let mut rhs = linalg::scaled(a, &t1);
        linalg::axpy(-1.0, &b.matvec_t(&t2), &mut rhs);
        let w1 = self.chol.solve(&rhs);
        let mut w2 = t2;
        linalg::axpy(1.0, &b.matvec(&w1), &mut w2);
        w2.iter_mut().for_each(|v| *v /= a);
        let mut out = w1;
        out.extend(w2);
        out
    }
}

/// Right-preconditioned operator `H M⁻¹`.
struct RightPreconditioned<'a> {
    op: &'a dyn LinearOperator,
    pinv: &'a dyn LinearOperator,
}

impl LinearOperator for RightPreconditioned<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.op.apply(&self.pinv.apply(x))
    }
}

/// The four saddle-point methods and their Krylov pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SaddleMethod {
    /// MINRES on the reduced system with `M₁`.
    BlkDiag,
    /// GMRES on the reduced system with `M₂`.
    ConstrI,
    /// Conjugate residuals on the Schur system with `M₃`.
    ConstrII,
    /// GMRES on the reduced system with `M₄`.
    Hss,
}

impl SaddleMethod {
    pub const ALL: [SaddleMethod; 4] = [Self::BlkDiag, Self::ConstrI, Self::ConstrII, Self::Hss];
}

impl fmt::Display for SaddleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BlkDiag => "blkdiag",
            Self::ConstrI => "constr1",
            Self::ConstrII => "constr2",
            Self::Hss => "hss",
        })
    }
}

impl FromStr for SaddleMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "blkdiag" => Ok(Self::BlkDiag),
            "constr1" => Ok(Self::ConstrI),
            "constr2" => Ok(Self::ConstrII),
            "hss" => Ok(Self::Hss),
            other => Err(format!("unknown preconditioned method '{other}'")),
        }
    }
}

/// Parameter override for [`solve_preconditioned`]: `β` for Blk-Diag and
/// Constr I, `α` for HSS, ignored by Constr II.
pub type MethodParameter = Option<f64>;

/// Solves the saddle system with one of the preconditioned Krylov methods,
/// terminating on the saddle residual of the back-substituted iterate.
pub fn solve_preconditioned(
    fp: &FactoredProblem,
    method: SaddleMethod,
    param: MethodParameter,
    cfg: &KrylovConfig,
) -> Result<(SaddleSolution, SolveReport), Error> {
    let prob = &fp.problem;
    let saddle = |s: &SaddleSolution| prob.saddle_residual(&s.x, &s.z, &s.lambda);
    match method {
        SaddleMethod::ConstrII => {
            let sys = SchurSystem::new(fp);
            let pre = SchurPreconditioner { fp };
            let mut gate = |z: &[f64]| saddle(&sys.expand(z));
            let (z, rep) = conjugate_residuals(&sys, &sys.rhs, cfg, &pre, Some(&mut gate))?;
            Ok((sys.expand(&z), rep))
        }
        SaddleMethod::BlkDiag => {
            let sys = ReducedSystem::new(fp);
            let pre = match param {
                Some(beta) => BlockDiagonal::with_beta(fp, beta),
                None => BlockDiagonal::new(fp),
            };
            let mut gate = |w: &[f64]| saddle(&sys.expand(w));
            let (w, rep) = minres(&sys, &sys.rhs, cfg, &pre, Some(&mut gate))?;
            Ok((sys.expand(&w), rep))
        }
        SaddleMethod::ConstrI | SaddleMethod::Hss => {
            let sys = ReducedSystem::new(fp);
            let pre: Box<dyn LinearOperator> = match (method, param) {
                (SaddleMethod::ConstrI, Some(beta)) => Box::new(Constraint::with_beta(fp, beta)),
                (SaddleMethod::ConstrI, None) => Box::new(Constraint::new(fp)),
                (_, Some(alpha)) => Box::new(Hss::with_alpha(fp, alpha)?),
                (_, None) => Box::new(Hss::new(fp)?),
            };
            let op = RightPreconditioned { op: &sys, pinv: pre.as_ref() };
            let mut gate = |v: &[f64]| saddle(&sys.expand(&pre.apply(v)));
            let (v, rep) = gmres_with(&op, &sys.rhs, None, cfg, Some(&mut gate))?;
            Ok((sys.expand(&pre.apply(&v)), rep))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sym_eig, Lu, Rng};
    use crate::problem::{random_problem, solve_saddle_dense, EcqpProblem};

    fn fp(n: usize, m: usize, l: usize, s: f64, seed: u64) -> FactoredProblem {
        FactoredProblem::new(random_problem(n, m, l, s, seed).unwrap()).unwrap()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        norm2(&linalg::sub(a, b)) / norm2(b).max(1e-300)
    }

    #[test]
    fn zero_c_leaves_d_unchanged() {
        let mut f = fp(8, 5, 2, 1.0, 1);
        f.problem.c = vec![0.0; 8];
        let (d1, _) = forward_substitute(&f);
        assert_eq!(d1, f.problem.d);
    }

    #[test]
    fn dense_pipelines_reproduce_saddle_solution() {
        let f = fp(14, 9, 4, 1.0, 2);
        let oracle = solve_saddle_dense(&f.problem).unwrap();
        let red = ReducedSystem::new(&f);
        let w = Lu::new(&red.dense()).unwrap().solve(&red.rhs);
        let s = red.expand(&w);
        assert!(rel_err(&s.x, &oracle.x) < 1e-8);
        assert!(rel_err(&s.lambda, &oracle.lambda) < 1e-8);
        let schur = SchurSystem::new(&f);
        let z = Lu::new(&schur.dense()).unwrap().solve(&schur.rhs);
        let s = schur.expand(&z);
        assert!(rel_err(&s.x, &oracle.x) < 1e-8);
        assert!(f.problem.saddle_residual(&s.x, &s.z, &s.lambda) < 1e-8);
    }

    #[test]
    fn matrix_free_operators_match_dense() {
        let f = fp(12, 8, 3, 1.0, 3);
        let mut rng = Rng::seed_from_u64(4);
        let red = ReducedSystem::new(&f);
        let v = rng.gaussian_vec(11);
        assert!(rel_err(&red.apply(&v), &red.dense().matvec(&v)) < 1e-10);
        let schur = SchurSystem::new(&f);
        let z = rng.gaussian_vec(3);
        assert!(rel_err(&schur.apply(&z), &schur.dense().matvec(&z)) < 1e-10);
    }

    #[test]
    fn preconditioner_inverses_match_dense() {
        let f = fp(12, 8, 3, 1.0, 5);
        let mut rng = Rng::seed_from_u64(6);
        let (blk, con, hss) = (BlockDiagonal::new(&f), Constraint::new(&f), Hss::new(&f).unwrap());
        let pres: Vec<(&dyn LinearOperator, DenseMatrix)> =
            vec![(&blk, blk.dense()), (&con, con.dense()), (&hss, hss.dense())];
        for (op, dense) in pres {
            let r = rng.gaussian_vec(11);
            let oracle = Lu::new(&dense).unwrap().solve(&r);
            assert!(rel_err(&op.apply(&r), &oracle) < 1e-9);
        }
        let r = rng.gaussian_vec(3);
        let b = &f.problem.b;
        let oracle = Lu::new(&b.t_matmul(b)).unwrap().solve(&r);
        assert!(rel_err(&SchurPreconditioner { fp: &f }.apply(&r), &oracle) < 1e-10);
    }

    #[test]
    fn identity_blkdiag_spectrum_is_golden() {
        let n = 4;
        let prob = EcqpProblem::new(
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
            vec![1.0; n],
            vec![1.0; n],
            vec![1.0; n],
        )
        .unwrap();
        let f = FactoredProblem::new(prob).unwrap();
        let pre = BlockDiagonal::with_beta(&f, 1.0);
        // M₁ = I here, so the preconditioned matrix is the reduced matrix.
        let eig = sym_eig(&pre.dense().matmul(&ReducedSystem::new(&f).dense())).unwrap();
        let lo = (-1.0 - 5f64.sqrt()) / 2.0;
        let hi = (-1.0 + 5f64.sqrt()) / 2.0;
        for (i, v) in eig.values.iter().enumerate() {
            let want = if i < n { lo } else { hi };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn all_methods_reach_dense_solution() {
        let f = fp(20, 12, 5, 1.0, 7);
        let oracle = solve_saddle_dense(&f.problem).unwrap();
        for method in SaddleMethod::ALL {
            let (s, rep) = solve_preconditioned(&f, method, None, &KrylovConfig::new(1e-11, 500)).unwrap();
            assert!(rep.converged(), "{method}");
            assert!(rel_err(&s.x, &oracle.x) < 1e-8, "{method}: {}", rel_err(&s.x, &oracle.x));
            assert!(rel_err(&s.z, &oracle.z) < 1e-8, "{method}");
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in SaddleMethod::ALL {
            assert_eq!(m.to_string().parse::<SaddleMethod>().unwrap(), m);
        }
        assert!("uzawa".parse::<SaddleMethod>().is_err());
    }
}
