//! ADMM as a fixed-point map `T_β(u) = G(β)u + b(β)` on `u = [x; z; y]`,
//! where `y` is the dual scaled by `1/β`.

use crate::linalg::{self, norm2, DenseMatrix};
use crate::problem::FactoredProblem;
use crate::report::{Metric, SolveReport, Status};

/// A fixed-point map whose iterates can also be scored by an external
/// residual (the saddle-system residual for ADMM).
pub trait FixedPointMap: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, u: &[f64]) -> Vec<f64>;

    /// Residual used to decide convergence.
    fn gate_residual(&self, u: &[f64]) -> f64;

    /// `‖u − T(u)‖`, together with `T(u)`.
    fn fixed_point_residual(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let tu = self.apply(u);
        let r = linalg::sub(u, &tu);
        (norm2(&r), tu)
    }
}

/// How the x-update `(β⁻¹D + AᵀA)x = rhs` is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XUpdate {
    /// Solves through `V diag(βλ/(λ+β)) Vᵀ` acting directly on `d − Bz − y`;
    /// `Ax` comes out of the same eigenbasis without a product with `A`.
    #[default]
    Eigen,
    /// `βD⁻¹[I − Aᵀ(β⁻¹I + AD⁻¹Aᵀ)⁻¹AD⁻¹]` applied to the assembled rhs.
    Woodbury,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
}

impl Iterate {
    pub fn zeros(n: usize, l: usize, m: usize) -> Self {
        Self {
            x: vec![0.0; n],
            z: vec![0.0; l],
            y: vec![0.0; m],
        }
    }

    pub fn from_slice(u: &[f64], n: usize, l: usize) -> Self {
        Self {
            x: u[..n].to_vec(),
            z: u[n..n + l].to_vec(),
            y: u[n + l..].to_vec(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.x.len() + self.z.len() + self.y.len());
        u.extend_from_slice(&self.x);
        u.extend_from_slice(&self.z);
        u.extend_from_slice(&self.y);
        u
    }
}

/// `T_β` for a factored problem. Each application costs O(n·m + m² + m·ℓ + ℓ²)
/// given the cached factors.
#[derive(Debug, Clone)]
pub struct AdmmOperator<'a> {
    pub fp: &'a FactoredProblem,
    pub beta: f64,
    pub route: XUpdate,
    /// `x_c = (β⁻¹D + AᵀA)⁻¹(−β⁻¹c)` and `A x_c`.
    x_c: Vec<f64>,
    ax_c: Vec<f64>,
    /// `βλ/(λ+β)` and `β/(λ+β)` on the eigenvalues of `D̃`.
    w_x: Vec<f64>,
    w_ax: Vec<f64>,
}

impl<'a> AdmmOperator<'a> {
    pub fn new(fp: &'a FactoredProblem, beta: f64) -> Self {
        Self::with_route(fp, beta, XUpdate::default())
    }

    pub fn with_route(fp: &'a FactoredProblem, beta: f64, route: XUpdate) -> Self {
        assert!(beta > 0.0 && beta.is_finite(), "beta must be positive");
        let w_x = fp.lambda.iter().map(|&l| beta * l / (l + beta)).collect();
        let w_ax = fp.lambda.iter().map(|&l| beta / (l + beta)).collect();
        let mut op = Self {
            fp,
            beta,
            route,
            x_c: Vec::new(),
            ax_c: Vec::new(),
            w_x,
            w_ax,
        };
        let rhs: Vec<f64> = fp.problem.c.iter().map(|c| -c / beta).collect();
        op.x_c = op.woodbury_solve(&rhs);
        op.ax_c = fp.problem.a.matvec(&op.x_c);
        op
    }

    /// Operator at `β = √(μL)`.
    pub fn optimal(fp: &'a FactoredProblem) -> Self {
        Self::new(fp, fp.constants.optimal_beta())
    }

    pub fn n(&self) -> usize {
        self.fp.n()
    }

    pub fn l(&self) -> usize {
        self.fp.l()
    }

    pub fn m(&self) -> usize {
        self.fp.m()
    }

    /// `(β⁻¹D + AᵀA)⁻¹ r = β(s − D⁻¹Aᵀ q)` with `s = D⁻¹r` and
    /// `q = (β⁻¹I + AD⁻¹Aᵀ)⁻¹ A s`.
    pub fn woodbury_solve(&self, r: &[f64]) -> Vec<f64> {
        let fp = self.fp;
        let s = fp.chol_d.solve(r);
        let q = fp.dtilde_fn_apply(&fp.problem.a.matvec(&s), |l| self.beta * l / (l + self.beta));
        let mut x = s;
        let eq = fp.ad_inv.matvec_t(&q);
        for (xi, ei) in x.iter_mut().zip(&eq) {
            *xi = self.beta * (*xi - ei);
        }
        x
    }

    /// x-update from `w = d − Bz − y`; returns `(x, Ax)`.
    fn x_update(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let fp = self.fp;
        match self.route {
            XUpdate::Eigen => {
                let t = fp.v.matvec_t(w);
                let sx: Vec<f64> = t.iter().zip(&self.w_x).map(|(a, b)| a * b).collect();
                let sa: Vec<f64> = t.iter().zip(&self.w_ax).map(|(a, b)| a * b).collect();
                let mut x = fp.ad_inv.matvec_t(&fp.v.matvec(&sx));
                linalg::axpy(1.0, &self.x_c, &mut x);
                let mut ax = fp.v.matvec(&sa);
                linalg::axpy(1.0, &self.ax_c, &mut ax);
                (x, ax)
            }
            XUpdate::Woodbury => {
                let mut rhs = fp.problem.a.matvec_t(w);
                for (ri, ci) in rhs.iter_mut().zip(&fp.problem.c) {
                    *ri -= ci / self.beta;
                }
                let x = self.woodbury_solve(&rhs);
                let ax = fp.problem.a.matvec(&x);
                (x, ax)
            }
        }
    }

    pub fn apply_iterate(&self, u: &Iterate) -> Iterate {
        let prob = &self.fp.problem;
        // w = d − Bz − y
        let mut w = prob.d.clone();
        linalg::axpy(-1.0, &prob.b.matvec(&u.z), &mut w);
        linalg::axpy(-1.0, &u.y, &mut w);
        let (x, ax) = self.x_update(&w);

        // BᵀB z = −β⁻¹p − Bᵀ(Ax − d + y)
        let mut g = ax.clone();
        linalg::axpy(-1.0, &prob.d, &mut g);
        linalg::axpy(1.0, &u.y, &mut g);
        let mut rhs = prob.b.matvec_t(&g);
        for (ri, pi) in rhs.iter_mut().zip(&prob.p) {
            *ri = -*ri - pi / self.beta;
        }
        let z = self.fp.btb_solve(&rhs);

        // y⁺ = y + Ax + Bz − d
        let mut y = g;
        prob.b.matvec_add(&z, &mut y);
        Iterate { x, z, y }
    }

    /// Saddle-system relative residual of `u`, with `λ = βy`.
    pub fn saddle_residual(&self, u: &Iterate) -> f64 {
        let lambda = linalg::scaled(self.beta, &u.y);
        self.fp.problem.saddle_residual(&u.x, &u.z, &lambda)
    }

    /// Dense `G(β)` by applying the homogeneous map to unit vectors; for
    /// tests and small diagnostics only.
    pub fn dense_iteration_matrix(&self) -> DenseMatrix {
        let dim = self.dim();
        let b = self.apply(&vec![0.0; dim]);
        let mut g = DenseMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            let col = linalg::sub(&self.apply(&e), &b);
            g.set_column(j, &col);
            e[j] = 0.0;
        }
        g
    }
}

impl FixedPointMap for AdmmOperator<'_> {
    fn dim(&self) -> usize {
        self.n() + self.l() + self.m()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_iterate(&Iterate::from_slice(u, self.n(), self.l())).to_vec()
    }

    fn gate_residual(&self, u: &[f64]) -> f64 {
        self.saddle_residual(&Iterate::from_slice(u, self.n(), self.l()))
    }
}

/// `β = √(μL)`.
pub fn optimal_beta(constants: &crate::problem::SpectralConstants) -> f64 {
    constants.optimal_beta()
}

/// Plain iteration `u ← T(u)` until the gate residual is at most `tol`.
pub fn solve_admm<T: FixedPointMap + ?Sized>(
    map: &T,
    u0: &[f64],
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, SolveReport) {
    solve_relaxed(map, u0, 1.0, tol, max_iters)
}

/// Over-relaxed iteration: two plain steps, then
/// `u ← (1−ω)u + ω T(u)`. With `β = √(μL)` and `ω = 2` the error contracts
/// like `‖K(β)‖` per step.
pub fn solve_sor<T: FixedPointMap + ?Sized>(
    map: &T,
    u0: &[f64],
    omega: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, SolveReport) {
    assert!(omega > 0.0 && omega <= 2.0, "omega must lie in (0, 2]");
    solve_relaxed(map, u0, omega, tol, max_iters)
}

fn solve_relaxed<T: FixedPointMap + ?Sized>(
    map: &T,
    u0: &[f64],
    omega: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, SolveReport) {
    assert!(tol > 0.0, "tol must be positive");
    assert_eq!(u0.len(), map.dim(), "initial point has the wrong length");
    let mut u = u0.to_vec();
    let mut gate = vec![map.gate_residual(&u)];
    let mut native = Vec::new();
    let mut status = Status::MaxIters;
    let mut k = 0;
    if gate[0] <= tol {
        status = Status::Converged;
    }
    while status != Status::Converged && k < max_iters {
        let (fpr, tu) = map.fixed_point_residual(&u);
        native.push(fpr);
        if omega == 1.0 || k < 2 {
            u = tu;
        } else {
            for (ui, ti) in u.iter_mut().zip(&tu) {
                *ui = (1.0 - omega) * *ui + omega * ti;
            }
        }
        k += 1;
        let r = map.gate_residual(&u);
        gate.push(r);
        if !r.is_finite() {
            break;
        }
        if r <= tol {
            status = Status::Converged;
        }
    }
    native.push(map.fixed_point_residual(&u).0);
    let report = SolveReport {
        iterations: k,
        status,
        residual_history: gate,
        metric: Metric::SaddleRelative,
        native_history: native,
        native_metric: Metric::FixedPoint,
    };
    (u, report)
}
