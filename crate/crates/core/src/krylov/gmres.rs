use super::{all_finite, check_dim, Gate, KrylovConfig, LinearOperator};
use crate::error::KrylovError;
use crate::linalg::{axpy, dot, norm2};
use crate::report::{Metric, SolveReport, Status};

/// Above this, a second Gram–Schmidt pass is run on the new Arnoldi vector.
const REORTH_THRESHOLD: f64 = 1e-8;
/// A restart cycle that shrinks the residual by less than this fraction
/// counts as a stall.
const STALL_REDUCTION: f64 = 1e-3;

/// Full GMRES from a zero initial guess, converging on `‖b − Ax‖/‖b‖`.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], cfg: &KrylovConfig) -> Result<(Vec<f64>, SolveReport), KrylovError> {
    let cfg = KrylovConfig { restart: None, ..*cfg };
    gmres_with(op, b, None, &cfg, None)
}

/// GMRES(p): cycles of `p` iterations, each restarted from the last iterate.
pub fn gmres_restarted(
    op: &dyn LinearOperator,
    b: &[f64],
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport), KrylovError> {
    assert!(cfg.restart.is_some(), "gmres_restarted needs a restart period");
    gmres_with(op, b, None, cfg, None)
}

/// GMRES with an optional initial guess and an optional gate.
///
/// Iteration `k` minimizes `‖b − Ax‖` over `x0 + K_k(A, r0)` (within the
/// current restart cycle). Without a gate, convergence is
/// `‖b − Ax_k‖ ≤ tol·‖b‖`. With a gate, `x_k` is formed every iteration
/// and convergence is `gate(x_k) ≤ tol`.
///
/// `native_history` holds the absolute residuals `‖b − Ax_k‖` from the
/// Givens recurrence.
pub fn gmres_with(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
    mut gate: Option<Gate<'_>>,
) -> Result<(Vec<f64>, SolveReport), KrylovError> {
    cfg.validate();
    check_dim(op, b)?;
    let n = b.len();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    check_dim(op, &x)?;
    let bnorm = norm2(b);
    let metric = if gate.is_some() {
        Metric::SaddleRelative
    } else {
        Metric::KrylovRelative
    };

    let mut r = residual(op, b, &x);
    let mut rnorm = norm2(&r);
    let score = |g: &mut Option<Gate<'_>>, x: &[f64], rnorm: f64| match g {
        Some(f) => f(x),
        None if bnorm == 0.0 => 0.0,
        None => rnorm / bnorm,
    };
    let mut gate_hist = vec![score(&mut gate, &x, rnorm)];
    let mut native = vec![rnorm];
    let mut iters = 0;
    if gate_hist[0] <= cfg.tol || rnorm == 0.0 {
        let status = if gate_hist[0] <= cfg.tol {
            Status::Converged
        } else {
            Status::Stalled
        };
        return Ok((x, report(0, status, gate_hist, metric, native)));
    }

    let cycle_len = cfg.restart.unwrap_or(cfg.max_iters).min(n).max(1);
    let mut status = Status::MaxIters;
    'cycles: while iters < cfg.max_iters {
        let cycle_start = rnorm;
        let len = cycle_len.min(cfg.max_iters - iters);
        let mut arn = Arnoldi::new(&r, rnorm, len);
        let mut broke_down = false;
        for j in 0..len {
            broke_down = arn.step(op, j).map_err(|_| KrylovError::NonFinite { iteration: iters + 1 })?;
            iters += 1;
            let res = arn.residual();
            native.push(res);
            let g = if gate.is_some() {
                let xk = arn.solution(&x, j + 1);
                score(&mut gate, &xk, res)
            } else {
                score(&mut gate, &x, res)
            };
            gate_hist.push(g);
            if !g.is_finite() {
                return Err(KrylovError::NonFinite { iteration: iters });
            }
            if g <= cfg.tol {
                x = arn.solution(&x, j + 1);
                status = Status::Converged;
                break 'cycles;
            }
            if broke_down {
                x = arn.solution(&x, j + 1);
                // The Krylov space is invariant: x is exact up to roundoff.
                // Another cycle from the new residual can still refine it.
                break;
            }
            if j + 1 == len {
                x = arn.solution(&x, len);
            }
        }
        r = residual(op, b, &x);
        rnorm = norm2(&r);
        if rnorm == 0.0 {
            status = if score(&mut gate, &x, 0.0) <= cfg.tol {
                Status::Converged
            } else {
                Status::Stalled
            };
            break;
        }
        let reduced = rnorm <= (1.0 - STALL_REDUCTION) * cycle_start;
        if !reduced && (cfg.restart.is_some() || broke_down) {
            status = Status::Stalled;
            break;
        }
    }
    Ok((x, report(iters, status, gate_hist, metric, native)))
}

fn report(iterations: usize, status: Status, gate: Vec<f64>, metric: Metric, native: Vec<f64>) -> SolveReport {
    SolveReport {
        iterations,
        status,
        residual_history: gate,
        metric,
        native_history: native,
        native_metric: Metric::KrylovResidual,
    }
}

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    if x.iter().any(|v| *v != 0.0) {
        axpy(-1.0, &op.apply(x), &mut r);
    }
    r
}

/// Arnoldi basis with the Hessenberg matrix kept in QR form by Givens
/// rotations.
struct Arnoldi {
    basis: Vec<Vec<f64>>,
    /// Column `j` holds the rotated `H[0..=j+1, j]`.
    r: Vec<Vec<f64>>,
    cs: Vec<f64>,
    sn: Vec<f64>,
    /// Rotated right-hand side `‖r0‖e₁`.
    g: Vec<f64>,
}

impl Arnoldi {
    fn new(r0: &[f64], r0norm: f64, cap: usize) -> Self {
        let mut g = Vec::with_capacity(cap + 1);
        g.push(r0norm);
        let mut basis = Vec::with_capacity(cap + 1);
        basis.push(r0.iter().map(|v| v / r0norm).collect());
        Self {
            basis,
            r: Vec::with_capacity(cap),
            cs: Vec::with_capacity(cap),
            sn: Vec::with_capacity(cap),
            g,
        }
    }

    /// Extends the basis by one vector. Returns `Ok(true)` on breakdown (the
    /// new vector is zero, so the current iterate is exact).
    fn step(&mut self, op: &dyn LinearOperator, j: usize) -> Result<bool, ()> {
        let mut w = op.apply(&self.basis[j]);
        if !all_finite(&w) {
            return Err(());
        }
        let wnorm0 = norm2(&w);
        let mut h = vec![0.0; j + 2];
        for (i, vi) in self.basis.iter().enumerate() {
            let hij = dot(&w, vi);
            axpy(-hij, vi, &mut w);
            h[i] = hij;
        }
        let mut wnorm = norm2(&w);
        let worst = self
            .basis
            .iter()
            .map(|vi| dot(&w, vi).abs())
            .fold(0.0f64, f64::max);
        if wnorm > 0.0 && worst > REORTH_THRESHOLD * wnorm {
            for (i, vi) in self.basis.iter().enumerate() {
                let c = dot(&w, vi);
                axpy(-c, vi, &mut w);
                h[i] += c;
            }
            wnorm = norm2(&w);
        }
        h[j + 1] = wnorm;
        let breakdown = wnorm <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE);

        for i in 0..j {
            let (c, s) = (self.cs[i], self.sn[i]);
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let (a, b) = (h[j], h[j + 1]);
        let rho = a.hypot(b);
        let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b / rho) };
        h[j] = rho;
        h[j + 1] = 0.0;
        self.cs.push(c);
        self.sn.push(s);
        let gj = self.g[j];
        self.g[j] = c * gj;
        self.g.push(-s * gj);
        self.r.push(h);
        if !breakdown {
            self.basis.push(w.iter().map(|v| v / wnorm).collect());
        }
        Ok(breakdown)
    }

    fn residual(&self) -> f64 {
        self.g.last().copied().unwrap_or(0.0).abs()
    }

    /// `x0 + V_k y` with `R y = g` on the leading `k×k` block.
    fn solution(&self, x0: &[f64], k: usize) -> Vec<f64> {
        let mut y = self.g[..k].to_vec();
        for i in (0..k).rev() {
            let mut acc = y[i];
            for j in (i + 1)..k {
                acc -= self.r[j][i] * y[j];
            }
            let rii = self.r[i][i];
            y[i] = if rii == 0.0 { 0.0 } else { acc / rii };
        }
        let mut x = x0.to_vec();
        for (yi, vi) in y.iter().zip(&self.basis) {
            axpy(*yi, vi, &mut x);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Identity;
    use crate::linalg::{lu_solve, DenseMatrix, Rng};

    fn well_conditioned(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = Rng::seed_from_u64(seed);
        let mut a = rng.gaussian_matrix(n, n).scale(0.5 / (n as f64).sqrt());
        a.add_diagonal(2.0);
        a
    }

    #[test]
    fn identity_one_iteration() {
        let b = vec![1.0, -2.0, 3.0];
        let (x, rep) = gmres(&Identity(3), &b, &KrylovConfig::new(1e-12, 10)).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged());
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let (x, rep) = gmres(&Identity(4), &[0.0; 4], &KrylovConfig::new(1e-8, 10)).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged());
    }

    #[test]
    fn matches_dense_lu_and_is_monotone() {
        let a = well_conditioned(20, 1);
        let b = Rng::seed_from_u64(2).gaussian_vec(20);
        let (x, rep) = gmres(&a, &b, &KrylovConfig::new(1e-12, 20)).unwrap();
        let oracle = lu_solve(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-8);
        }
        assert!(rep.iterations <= 20);
        for w in rep.native_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn finite_termination_on_nonnormal() {
        let mut rng = Rng::seed_from_u64(7);
        let a = rng.gaussian_matrix(30, 30);
        let b = rng.gaussian_vec(30);
        let (x, rep) = gmres(&a, &b, &KrylovConfig::new(1e-10, 60)).unwrap();
        assert!(rep.converged());
        assert!(rep.iterations <= 31, "{}", rep.iterations);
        let r = residual(&a, &b, &x);
        assert!(norm2(&r) <= 1e-8 * norm2(&b));
    }

    #[test]
    fn scaling_invariance() {
        let a = well_conditioned(15, 3);
        let b = Rng::seed_from_u64(4).gaussian_vec(15);
        let alpha = 37.5;
        let cfg = KrylovConfig::new(1e-10, 15);
        let (x1, r1) = gmres(&a, &b, &cfg).unwrap();
        let (x2, r2) = gmres(&a.scale(alpha), &crate::linalg::scaled(alpha, &b), &cfg).unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn long_restart_equals_full() {
        let a = well_conditioned(12, 5);
        let b = Rng::seed_from_u64(6).gaussian_vec(12);
        let cfg = KrylovConfig::new(1e-10, 50);
        let (x1, r1) = gmres(&a, &b, &cfg).unwrap();
        let (x2, r2) = gmres_restarted(&a, &b, &cfg.with_restart(40)).unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(x1, x2);
    }

    #[test]
    fn restarted_stalls_on_shift_operator() {
        // Cyclic shift: GMRES(p) with p < n makes no progress at all.
        let n = 8;
        let a = DenseMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { 1.0 } else { 0.0 });
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let cfg = KrylovConfig::new(1e-8, 100);
        let (_, rest) = gmres_restarted(&a, &b, &cfg.with_restart(3)).unwrap();
        assert_eq!(rest.status, Status::Stalled);
        let (_, full) = gmres(&a, &b, &cfg).unwrap();
        assert!(full.converged());
        assert_eq!(full.iterations, n);
    }

    #[test]
    fn gate_controls_termination() {
        let a = well_conditioned(10, 8);
        let b = Rng::seed_from_u64(9).gaussian_vec(10);
        let mut calls = 0;
        let mut gate = |x: &[f64]| {
            calls += 1;
            norm2(&residual(&a, &b, x)) / norm2(&b)
        };
        let (_, rep) = gmres_with(&a, &b, None, &KrylovConfig::new(1e-9, 10), Some(&mut gate)).unwrap();
        assert!(rep.converged());
        assert_eq!(rep.metric, Metric::SaddleRelative);
        assert_eq!(calls, rep.iterations + 1);
        assert!(rep.final_residual() <= 1e-9);
    }

    #[test]
    fn non_finite_operator_is_reported() {
        struct Bad;
        impl LinearOperator for Bad {
            fn dim(&self) -> usize {
                2
            }
            fn apply(&self, _: &[f64]) -> Vec<f64> {
                vec![f64::NAN, 0.0]
            }
        }
        let err = gmres(&Bad, &[1.0, 0.0], &KrylovConfig::new(1e-8, 5)).unwrap_err();
        assert_eq!(err, KrylovError::NonFinite { iteration: 1 });
    }
}
