use ecqp_core::admm::{solve_admm, AdmmOperator, FixedPointMap};
use ecqp_core::diagnostics::{build_k, diagnose};
use ecqp_core::krylov::{admm_gmres, KrylovConfig};
use ecqp_core::precond::{solve_preconditioned, SaddleMethod};
use ecqp_core::problem::{
    parse_problem, random_problem, solve_saddle_dense, worst_case_problem, write_problem, FactoredProblem, SaddleSolution,
};
use ecqp_core::sdp::{synthetic_newton, SdpAdmm};
use proptest::prelude::*;

fn stacked(s: &SaddleSolution) -> Vec<f64> {
    s.x.iter().chain(&s.z).chain(&s.lambda).copied().collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    num / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (3usize..=18).prop_flat_map(|n| (Just(n), 1..=n)).prop_flat_map(|(n, m)| (Just(n), Just(m), 1..=m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_solver_reaches_the_dense_solution((n, m, l) in dims(), s in 0.0f64..1.0, seed in any::<u64>()) {
        let fp = FactoredProblem::new(random_problem(n, m, l, s, seed).unwrap()).unwrap();
        let exact = stacked(&solve_saddle_dense(&fp.problem).unwrap());
        let cfg = KrylovConfig::new(1e-10, 500);
        for method in SaddleMethod::ALL {
            let (sol, rep) = solve_preconditioned(&fp, method, None, &cfg).unwrap();
            prop_assert!(rep.converged(), "{method}: {:?}", rep.status);
            prop_assert!(rel_err(&stacked(&sol), &exact) < 1e-8, "{method}");
        }
        let op = AdmmOperator::optimal(&fp);
        let (u, rep) = admm_gmres(&op, &vec![0.0; op.dim()], &cfg).unwrap();
        prop_assert!(rep.converged());
        prop_assert!(rel_err(&u[..n], &exact[..n]) < 1e-8);
    }

    #[test]
    fn acceleration_never_loses_to_plain_admm((n, m, l) in dims(), s in 0.0f64..2.0, seed in any::<u64>()) {
        let fp = FactoredProblem::new(random_problem(n, m, l, s, seed).unwrap()).unwrap();
        let op = AdmmOperator::optimal(&fp);
        let u0 = vec![0.0; op.dim()];
        let (_, g) = admm_gmres(&op, &u0, &KrylovConfig::new(1e-10, 200)).unwrap();
        let (_, a) = solve_admm(&op, &u0, 1e-300, g.iterations);
        let r0 = a.native_history[0];
        for (gk, ak) in g.native_history.iter().zip(&a.native_history) {
            prop_assert!(*gk <= ak + 1e-12 * r0);
        }
    }

    #[test]
    fn norm_of_k_has_closed_form((n, m, l) in dims(), s in 0.0f64..2.0, seed in any::<u64>(), t in -1.0f64..2.0) {
        let fp = FactoredProblem::new(random_problem(n, m, l, s, seed).unwrap()).unwrap();
        let (mu, big_l) = (fp.constants.mu, fp.constants.l);
        // β log-uniform on [μ/10, 10L].
        let beta = (mu / 10.0) * (100.0 * big_l / mu).powf((t + 1.0) / 3.0);
        let gamma = (big_l / beta).max(beta / mu);
        let r = build_k(&fp, beta).unwrap();
        prop_assert!((r.norm_numeric - (gamma - 1.0) / (gamma + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn problem_files_round_trip((n, m, l) in dims(), s in 0.0f64..2.0, seed in any::<u64>()) {
        let prob = random_problem(n, m, l, s, seed).unwrap();
        let mut buf = Vec::new();
        write_problem(&mut buf, &prob).unwrap();
        prop_assert_eq!(parse_problem(std::str::from_utf8(&buf).unwrap()).unwrap(), prob);
    }
}

#[test]
fn worst_case_eigenvalues_sit_on_the_circle() {
    let (m, kappa) = (12, 1e4);
    let fp = FactoredProblem::new(worst_case_problem(m, kappa, 0).unwrap()).unwrap();
    let d = diagnose(&fp, fp.constants.optimal_beta()).unwrap();
    let a = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
    assert!((d.disk_radius - a).abs() < 1e-12);
    for z in &d.eigenvalues {
        assert!((z.norm() - a).abs() < 1e-9, "{z}");
    }
    let delta = 1.0 - (std::f64::consts::PI / m as f64).cos();
    assert!((d.delta - delta).abs() < 1e-9, "{} vs {delta}", d.delta);
}

#[test]
fn sdp_admm_solves_the_equivalent_ecqp() {
    let prob = synthetic_newton(5, 6, 1e3, 2).unwrap();
    let map = SdpAdmm::optimal(&prob).unwrap();
    let (u, rep) = admm_gmres(&map, &vec![0.0; map.dim()], &KrylovConfig::new(1e-11, 400)).unwrap();
    assert!(rep.converged());
    let exact = solve_saddle_dense(&prob.to_ecqp().unwrap()).unwrap();
    let nv = prob.svec_dim();
    assert!(rel_err(&u[..nv], &exact.x) < 1e-8);
    assert!(rel_err(&u[nv..nv + prob.num_constraints()], &exact.z) < 1e-8);
}
