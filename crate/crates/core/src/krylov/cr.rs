use super::{all_finite, check_dim, probe_symmetry, Gate, KrylovConfig, LinearOperator};
use crate::error::KrylovError;
use crate::linalg::{axpy, dot};
use crate::report::{Metric, SolveReport, Status};

/// Preconditioned conjugate residuals for an SPD operator with an SPD
/// preconditioner given by its inverse action.
///
/// Minimizes `‖b − Ax‖_{M⁻¹}` over the preconditioned Krylov space; that norm
/// is the native history.
pub fn conjugate_residuals(
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

    let mut r = b.to_vec();
    let mut z = precond_inv.apply(&r);
    let mnorm = |r: &[f64], z: &[f64]| dot(r, z).max(0.0).sqrt();
    let r0 = mnorm(&r, &z);
    let mut score = |x: &[f64], res: f64| match gate.as_mut() {
        Some(f) => f(x),
        None if r0 == 0.0 => 0.0,
        None => res / r0,
    };
    let mut gate_hist = vec![score(&x, r0)];
    let mut native = vec![r0];
    if r0 == 0.0 || gate_hist[0] <= cfg.tol {
        let status = if gate_hist[0] <= cfg.tol { Status::Converged } else { Status::Stalled };
        return Ok((x, report(0, status, gate_hist, metric, native)));
    }

    let mut az = op.apply(&z);
    let mut p = z.clone();
    let mut ap = az.clone();
    let mut zaz = dot(&z, &az);
    let mut status = Status::MaxIters;
    let mut k = 0;
    while k < cfg.max_iters {
        k += 1;
        let q = precond_inv.apply(&ap);
        let denom = dot(&ap, &q);
        if !(denom > 0.0) || !(zaz > 0.0) {
            return Err(KrylovError::Breakdown {
                iteration: k,
                reason: "zero or negative curvature in conjugate residuals",
            });
        }
        let alpha = zaz / denom;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        axpy(-alpha, &q, &mut z);
        if !all_finite(&x) {
            return Err(KrylovError::NonFinite { iteration: k });
        }

        let res = mnorm(&r, &z);
        native.push(res);
        let g = score(&x, res);
        gate_hist.push(g);
        if g <= cfg.tol {
            status = Status::Converged;
            break;
        }
        if res == 0.0 {
            status = Status::Stalled;
            break;
        }

        az = op.apply(&z);
        let zaz_new = dot(&z, &az);
        let beta = zaz_new / zaz;
        zaz = zaz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
            ap[i] = az[i] + beta * ap[i];
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
        let b = vec![1.0, 2.0, 2.0];
        let (x, rep) = conjugate_residuals(&Identity(3), &b, &KrylovConfig::new(1e-12, 5), &Identity(3), None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, b);
    }

    #[test]
    fn spd_matches_dense_and_is_monotone() {
        let mut rng = Rng::seed_from_u64(13);
        let g = rng.gaussian_matrix(30, 30);
        let mut a = g.t_matmul(&g);
        a.add_diagonal(1.0);
        let b = rng.gaussian_vec(30);
        let minv = DenseMatrix::from_diag(&a.diagonal().iter().map(|d| 1.0 / d).collect::<Vec<_>>());
        let (x, rep) = conjugate_residuals(&a, &b, &KrylovConfig::new(1e-13, 300), &minv, None).unwrap();
        let oracle = lu_solve(&a, &b).unwrap();
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-8 * scale);
        }
        for w in rep.native_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn indefinite_breaks_down_with_index() {
        let a = DenseMatrix::from_diag(&[1.0, -1.0]);
        let err = conjugate_residuals(&a, &[1.0, 1.0], &KrylovConfig::new(1e-12, 5), &Identity(2), None).unwrap_err();
        assert!(matches!(err, KrylovError::Breakdown { iteration: 1, .. }));
    }
}
