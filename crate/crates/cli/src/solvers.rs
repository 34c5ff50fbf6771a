use std::time::Instant;

use ecqp_core::admm::{solve_admm, solve_sor, AdmmOperator, FixedPointMap};
use ecqp_core::krylov::{admm_gmres, KrylovConfig};
use ecqp_core::precond::solve_preconditioned;
use ecqp_core::problem::FactoredProblem;
use ecqp_core::report::SolveReport;
use ecqp_core::Status;

use crate::config::SolverKind;

/// Iteration limits and tolerances shared by every solver in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iters: usize,
    pub restart: usize,
    pub timing: bool,
    /// ADMM penalty override.
    pub beta: Option<f64>,
    /// Preconditioner parameter override.
    pub precond_param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Finished(Status),
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            Self::Finished(s) => s.to_string(),
            Self::Failed(_) => "error".into(),
        }
    }

    pub fn converged(&self) -> bool {
        *self == Self::Finished(Status::Converged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub solver: SolverKind,
    pub iterations: usize,
    pub status: RunStatus,
    pub final_residual: f64,
    /// Wall time of the solve on its worker thread, only with `timing`.
    pub seconds: Option<f64>,
    /// Saddle relative residual per iteration.
    pub history: Vec<f64>,
    /// Fixed-point residual per iteration, for the ADMM family.
    pub fixed_point_history: Option<Vec<f64>>,
}

impl RunOutcome {
    fn from_report(solver: SolverKind, rep: SolveReport, seconds: Option<f64>) -> Self {
        let fixed_point_history = matches!(
            solver,
            SolverKind::Admm | SolverKind::Sor | SolverKind::AdmmGmres | SolverKind::AdmmGmresRestarted
        )
        .then(|| rep.native_history.clone());
        Self {
            solver,
            iterations: rep.iterations,
            status: RunStatus::Finished(rep.status),
            final_residual: rep.final_residual(),
            seconds,
            history: rep.residual_history,
            fixed_point_history,
        }
    }

    fn failed(solver: SolverKind, msg: String) -> Self {
        Self {
            solver,
            iterations: 0,
            status: RunStatus::Failed(msg),
            final_residual: f64::NAN,
            seconds: None,
            history: Vec::new(),
            fixed_point_history: None,
        }
    }
}

/// Runs a fixed-point map through one of the ADMM-family solvers from the
/// zero start.
pub fn run_fixed_point<T: FixedPointMap + ?Sized>(map: &T, kind: SolverKind, s: &SolverSettings) -> RunOutcome {
    let start = Instant::now();
    let u0 = vec![0.0; map.dim()];
    let cfg = KrylovConfig::new(s.tol, s.max_iters);
    let result = match kind {
        SolverKind::Admm => Ok(solve_admm(map, &u0, s.tol, s.max_iters).1),
        SolverKind::Sor => Ok(solve_sor(map, &u0, 2.0, s.tol, s.max_iters).1),
        SolverKind::AdmmGmres => admm_gmres(map, &u0, &cfg).map(|r| r.1),
        SolverKind::AdmmGmresRestarted => admm_gmres(map, &u0, &cfg.with_restart(s.restart)).map(|r| r.1),
        SolverKind::Saddle(m) => return RunOutcome::failed(kind, format!("{m} needs an explicit saddle system")),
    };
    let secs = s.timing.then(|| start.elapsed().as_secs_f64());
    match result {
        Ok(rep) => RunOutcome::from_report(kind, rep, secs),
        Err(e) => RunOutcome::failed(kind, e.to_string()),
    }
}

pub fn run_solver(fp: &FactoredProblem, kind: SolverKind, s: &SolverSettings) -> RunOutcome {
    match kind {
        SolverKind::Saddle(method) => {
            let start = Instant::now();
            let cfg = KrylovConfig::new(s.tol, s.max_iters);
            let result = solve_preconditioned(fp, method, s.precond_param, &cfg);
            let secs = s.timing.then(|| start.elapsed().as_secs_f64());
            match result {
                Ok((_, rep)) => RunOutcome::from_report(kind, rep, secs),
                Err(e) => RunOutcome::failed(kind, e.to_string()),
            }
        }
        _ => {
            let op = match s.beta {
                Some(b) => AdmmOperator::new(fp, b),
                None => AdmmOperator::optimal(fp),
            };
            run_fixed_point(&op, kind, s)
        }
    }
}
