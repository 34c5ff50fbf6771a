use super::{all_finite, check_dim, probe_symmetry, Gate, KrylovConfig, LinearOperator};
use crate::error::KrylovError;
use crate::linalg::{axpy, dot};
use crate::report::{Metric, SolveReport, Status};

/// Preconditioned MINRES (Paige–Saunders) for a symmetric, possibly
/// indefinite operator with an SPD preconditioner given by its inverse
/// action `precond_inv`.
///
/// The native history is `‖b − Ax_k‖_{M⁻¹}`, which is nonincreasing. Without a
/// gate, convergence is that norm relative to its initial value.
pub fn minres(
    op: &dyn LinearOperator,
    b: &[f64],
    cfg: &KrylovConfig,
    precond_inv: &dyn LinearOperator,
    mut gate: Option<Gate<'_>>,
) -> Result<(Vec<f64>, SolveReport), KrylovError> {
    cfg.validate();
    check_dim(op, b)?;
    check_dim(precond_inv, b)?;
    probe_symmetry(op)?;
    let n = b.len();
    let mut x = vec![0.0; n];
    let metric = if gate.is_some() {
        Metric::SaddleRelative
    } else {
        Metric::KrylovRelative
    };

    let mut r1 = b.to_vec();
    let mut y = precond_inv.apply(&r1);
    let ry = dot(&r1, &y);
    if ry < 0.0 {
        return Err(KrylovError::Breakdown {
            iteration: 0,
            reason: "preconditioner is not positive definite",
        });
    }
    let beta1 = ry.sqrt();
    let mut score = |x: &[f64], phibar: f64| match gate.as_mut() {
        Some(f) => f(x),
        None if beta1 == 0.0 => 0.0,
        None => phibar / beta1,
    };
    let mut gate_hist = vec![score(&x, beta1)];
    let mut native = vec![beta1];
    if beta1 == 0.0 || gate_hist[0] <= cfg.tol {
        let status = if gate_hist[0] <= cfg.tol { Status::Converged } else { Status::Stalled };
        return Ok((x, report(0, status, gate_hist, metric, native)));
    }

    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut status = Status::MaxIters;
    let mut k = 0;
    while k < cfg.max_iters {
        k += 1;
        let v: Vec<f64> = y.iter().map(|t| t / beta).collect();
        y = op.apply(&v);
        if !all_finite(&y) {
            return Err(KrylovError::NonFinite { iteration: k });
        }
        if k >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        r1 = std::mem::replace(&mut r2, y);
        y = precond_inv.apply(&r2);
        oldb = beta;
        let ry = dot(&r2, &y);
        if ry < 0.0 {
            return Err(KrylovError::Breakdown {
                iteration: k,
                reason: "preconditioner is not positive definite",
            });
        }
        beta = ry.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = v
            .iter()
            .zip(w1.iter().zip(&w2))
            .map(|(vi, (a, b))| (vi - oldeps * a - delta * b) / gamma)
            .collect();
        axpy(phi, &w, &mut x);

        native.push(phibar.abs());
        let g = score(&x, phibar.abs());
        gate_hist.push(g);
        if !g.is_finite() {
            return Err(KrylovError::NonFinite { iteration: k });
        }
        if g <= cfg.tol {
            status = Status::Converged;
            break;
        }
        if beta == 0.0 {
            // Invariant subspace: the iterate is exact.
            status = Status::Stalled;
            break;
        }
    }
    Ok((x, report(k, status, gate_hist, metric, native)))
}

fn report(iterations: usize, status: Status, gate: Vec<f64>, metric: Metric, native: Vec<f64>) -> SolveReport {
    SolveReport {
        iterations,
        status,
        residual_history: gate,
        metric,
        native_history: native,
        native_metric: Metric::PreconditionedResidual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Identity;
    use crate::linalg::{lu_solve, DenseMatrix, Rng};

    #[test]
    fn identity_one_iteration() {
        let b = vec![3.0, 4.0];
        let (x, rep) = minres(&Identity(2), &b, &KrylovConfig::new(1e-12, 5), &Identity(2), None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((x[0] - 3.0).abs() < 1e-14 && (x[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_indefinite_matches_dense() {
        let mut rng = Rng::seed_from_u64(10);
        let g = rng.gaussian_matrix(30, 30);
        let a = g.add(&g.transpose());
        let b = rng.gaussian_vec(30);
        let (x, rep) = minres(&a, &b, &KrylovConfig::new(1e-13, 300), &Identity(30), None).unwrap();
        let oracle = lu_solve(&a, &b).unwrap();
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-8 * scale, "{p} vs {q}");
        }
        for w in rep.native_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn preconditioned_matches_dense() {
        let mut rng = Rng::seed_from_u64(12);
        let g = rng.gaussian_matrix(20, 20);
        let a = g.add(&g.transpose());
        let diag: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
        let minv = DenseMatrix::from_diag(&diag.iter().map(|d| 1.0 / d).collect::<Vec<_>>());
        let b = rng.gaussian_vec(20);
        let (x, _) = minres(&a, &b, &KrylovConfig::new(1e-13, 200), &minv, None).unwrap();
        let oracle = lu_solve(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-8 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn asymmetric_operator_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let err = minres(&a, &[1.0, 1.0], &KrylovConfig::new(1e-8, 5), &Identity(2), None).unwrap_err();
        assert!(matches!(err, KrylovError::NotSymmetric(_)));
    }
}
