use std::path::Path;

use anyhow::{bail, Context, Result};
use ecqp_core::diagnostics::{diagnose, DiagnosticsReport};
use ecqp_core::linalg::Rng;
use ecqp_core::problem::{read_problem, sample_sweep_instance, worst_case_problem, FactoredProblem, SweepInstance};
use ecqp_core::report::fitted_rate;
use ecqp_core::sdp::{svec_dim, synthetic_newton, SdpAdmm};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SolverKind};
use crate::solvers::{run_fixed_point, run_solver, RunOutcome, RunStatus, SolverSettings};
use crate::stats::loglog_slope;
use crate::svg::{render, Plot, Series};

pub const DEFAULT_SWEEP_N: usize = 200;
pub const DEFAULT_WORST_M: usize = 64;
pub const DEFAULT_SDP_N: usize = 20;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn settings(cfg: &ExperimentConfig) -> SolverSettings {
    SolverSettings {
        tol: cfg.tol,
        max_iters: cfg.max_iters,
        restart: cfg.restart,
        timing: cfg.timing,
        beta: cfg.beta,
        precond_param: cfg.precond_param,
    }
}

/// Runs `f` on a pool with the configured number of threads.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    Ok(builder.build().context("building thread pool")?.install(f))
}

/// Seeded instance list. `m` and `l` from the config pin those dimensions
/// instead of sampling them.
pub fn sweep_instances(cfg: &ExperimentConfig) -> Vec<SweepInstance> {
    let n = cfg.n.unwrap_or(DEFAULT_SWEEP_N);
    let mut rng = Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|_| {
            let mut inst = sample_sweep_instance(n, cfg.s_min, cfg.s_max, &mut rng);
            if let Some(m) = cfg.m {
                inst.m = m;
                inst.l = inst.l.min(m);
            }
            if let Some(l) = cfg.l {
                inst.l = l.min(inst.m);
            }
            inst
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagSummary {
    pub beta: f64,
    pub norm_k: f64,
    pub delta: f64,
    pub delta_lb: f64,
    pub kappa_x: f64,
    pub nu: f64,
    pub nu_bound: f64,
}

impl From<&DiagnosticsReport> for DiagSummary {
    fn from(d: &DiagnosticsReport) -> Self {
        Self {
            beta: d.beta,
            norm_k: d.norm_numeric,
            delta: d.delta,
            delta_lb: d.delta_lb,
            kappa_x: d.kappa_x,
            nu: d.nu,
            nu_bound: d.nu_bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceRecord {
    pub index: usize,
    pub instance: SweepInstance,
    pub kappa: f64,
    pub diagnostics: Option<DiagSummary>,
    pub runs: Vec<RunOutcome>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<InstanceRecord>,
    /// `(instance index, message)` for instances that could not be built.
    pub failures: Vec<(usize, String)>,
}

fn run_instance(
    index: usize,
    inst: &SweepInstance,
    solvers: &[SolverKind],
    s: &SolverSettings,
    with_diagnostics: bool,
) -> Result<InstanceRecord> {
    let fp = FactoredProblem::new(inst.build()?)?;
    let diagnostics = if with_diagnostics {
        Some(DiagSummary::from(&diagnose(&fp, fp.constants.optimal_beta())?))
    } else {
        None
    };
    let runs = solvers.iter().map(|&k| run_solver(&fp, k, s)).collect();
    Ok(InstanceRecord {
        index,
        instance: *inst,
        kappa: fp.constants.kappa,
        diagnostics,
        runs,
    })
}

/// Runs every instance in parallel; the output order is the instance order
/// regardless of scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, solvers: &[SolverKind], with_diagnostics: bool) -> SweepOutput {
    let s = settings(cfg);
    let results: Vec<Result<InstanceRecord>> = sweep_instances(cfg)
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_instance(i, inst, solvers, &s, with_diagnostics))
        .collect();
    let mut out = SweepOutput { records: Vec::new(), failures: Vec::new() };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.failures.push((i, format!("{e:#}"))),
        }
    }
    out
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
}

pub fn sweep_csv(records: &[InstanceRecord], timing: bool) -> Result<String> {
    let mut header = vec![
        "instance", "n", "m", "l", "s", "seed", "kappa", "solver", "iterations", "status", "final_residual", "beta",
        "norm_k", "delta", "delta_lb", "kappa_x", "nu", "nu_bound",
    ];
    if timing {
        header.push("seconds");
    }
    let rows = records.iter().flat_map(|r| {
        r.runs.iter().map(move |run| {
            let d = r.diagnostics.as_ref();
            let mut row = vec![
                r.index.to_string(),
                r.instance.n.to_string(),
                r.instance.m.to_string(),
                r.instance.l.to_string(),
                fmt_f64(r.instance.s),
                r.instance.seed.to_string(),
                fmt_f64(r.kappa),
                run.solver.to_string(),
                run.iterations.to_string(),
                run.status.label(),
                fmt_f64(run.final_residual),
                fmt_opt(d.map(|d| d.beta)),
                fmt_opt(d.map(|d| d.norm_k)),
                fmt_opt(d.map(|d| d.delta)),
                fmt_opt(d.map(|d| d.delta_lb)),
                fmt_opt(d.map(|d| d.kappa_x)),
                fmt_opt(d.map(|d| d.nu)),
                fmt_opt(d.map(|d| d.nu_bound)),
            ];
            if timing {
                row.push(fmt_opt(run.seconds));
            }
            row
        })
    });
    csv_string(&header, rows)
}

/// Iterations against κ on log-log axes, one marker per run, with the
/// `10√κ` and `6κ^{1/4}` reference curves.
pub fn sweep_svg(records: &[InstanceRecord], solvers: &[SolverKind]) -> String {
    let mut series: Vec<Series> = solvers
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let pts = records
                .iter()
                .flat_map(|r| r.runs.iter().filter(|run| run.solver == k).map(|run| (r.kappa, run.iterations.max(1) as f64)))
                .collect();
            Series::scatter(k.to_string(), i, pts)
        })
        .collect();
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.kappa), b.max(r.kappa)));
    if lo.is_finite() {
        let grid: Vec<f64> = (0..=40).map(|i| lo * (hi / lo).powf(i as f64 / 40.0)).collect();
        series.push(Series::reference("10√κ", "#555", grid.iter().map(|&k| (k, 10.0 * k.sqrt())).collect()));
        series.push(Series::reference("6κ^¼", "#999", grid.iter().map(|&k| (k, 6.0 * k.powf(0.25))).collect()));
    }
    render(&Plot {
        title: "Iterations to tolerance".into(),
        x_label: "κ".into(),
        y_label: "iterations".into(),
        log_x: true,
        log_y: true,
        series,
    })
}

/// Per-solver log-log slope of iterations against κ over converged runs
/// with κ in `[lo, hi]`.
pub fn sweep_slopes(records: &[InstanceRecord], solver: SolverKind, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.kappa >= lo && r.kappa <= hi)
        .flat_map(|r| r.runs.iter().filter(|run| run.solver == solver && run.status.converged()).map(|run| (r.kappa, run.iterations as f64)))
        .collect();
    loglog_slope(&pts)
}

/// `log₁₀ κ` bins `(0,2], (2,4], …, (8,10]`.
pub const BINS: [(f64, f64); 5] = [(0.0, 2.0), (2.0, 4.0), (4.0, 6.0), (6.0, 8.0), (8.0, 10.0)];

pub fn bin_label((lo, hi): (f64, f64)) -> String {
    format!("({lo},{hi}]")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub bin: (f64, f64),
    pub solver: SolverKind,
    pub instances: usize,
    pub max_iterations: usize,
    /// Runs that did not converge (hit the cap, stalled, or errored).
    pub unconverged: usize,
    pub max_seconds: Option<f64>,
}

pub fn compare_table(records: &[InstanceRecord], solvers: &[SolverKind]) -> Vec<CompareRow> {
    let mut rows = Vec::new();
    for bin in BINS {
        let in_bin: Vec<&InstanceRecord> = records
            .iter()
            .filter(|r| {
                let e = r.kappa.log10();
                e > bin.0 && e <= bin.1
            })
            .collect();
        for &solver in solvers {
            let runs: Vec<&RunOutcome> = in_bin.iter().flat_map(|r| r.runs.iter().filter(move |x| x.solver == solver)).collect();
            rows.push(CompareRow {
                bin,
                solver,
                instances: runs.len(),
                max_iterations: runs.iter().map(|r| r.iterations).max().unwrap_or(0),
                unconverged: runs.iter().filter(|r| !r.status.converged()).count(),
                max_seconds: runs.iter().filter_map(|r| r.seconds).reduce(f64::max),
            });
        }
    }
    rows
}

pub fn compare_csv(rows: &[CompareRow], timing: bool) -> Result<String> {
    let mut header = vec!["log10_kappa_bin", "solver", "instances", "max_iterations", "unconverged"];
    if timing {
        header.push("max_seconds");
    }
    csv_string(
        &header,
        rows.iter().map(|r| {
            let mut row = vec![
                bin_label(r.bin),
                r.solver.to_string(),
                r.instances.to_string(),
                r.max_iterations.to_string(),
                r.unconverged.to_string(),
            ];
            if timing {
                row.push(fmt_opt(r.max_seconds));
            }
            row
        }),
    )
}

/// Human-readable table: one row per solver, one column per bin, entries
/// `max iterations` or `>cap` when any run in the bin failed to converge.
pub fn compare_text(rows: &[CompareRow], solvers: &[SolverKind], cap: usize) -> String {
    let mut out = format!("{:<22}", "log10(kappa)");
    for b in BINS {
        out.push_str(&format!("{:>12}", bin_label(b)));
    }
    out.push('\n');
    for &s in solvers {
        out.push_str(&format!("{:<22}", s.to_string()));
        for b in BINS {
            let cell = rows
                .iter()
                .find(|r| r.solver == s && r.bin == b)
                .map(|r| match (r.instances, r.unconverged) {
                    (0, _) => "-".to_string(),
                    (_, 0) => r.max_iterations.to_string(),
                    _ => format!(">{cap}"),
                })
                .unwrap_or_default();
            out.push_str(&format!("{cell:>12}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct WorstCaseResult {
    pub m: usize,
    pub kappa: f64,
    /// `(√κ − 1)/(√κ + 1)`.
    pub rate: f64,
    pub runs: Vec<RunOutcome>,
}

impl WorstCaseResult {
    /// Geometric rate fitted to the residual history over iterations
    /// `from..=to`.
    pub fn fitted(&self, solver: SolverKind, from: usize, to: usize) -> Option<f64> {
        let run = self.runs.iter().find(|r| r.solver == solver)?;
        fitted_rate(&run.history, from, to)
    }
}

pub fn run_worstcase(cfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<WorstCaseResult> {
    let m = cfg.m.unwrap_or(DEFAULT_WORST_M);
    let kappa = cfg.kappa[0];
    let fp = FactoredProblem::new(worst_case_problem(m, kappa, cfg.seed)?)?;
    let s = settings(cfg);
    let runs = solvers
        .iter()
        .map(|&k| run_solver(&fp, k, &s))
        .collect();
    let sk = kappa.sqrt();
    Ok(WorstCaseResult { m, kappa, rate: (sk - 1.0) / (sk + 1.0), runs })
}

pub fn worstcase_csv(res: &WorstCaseResult) -> Result<String> {
    let rows = res.runs.iter().flat_map(|run| {
        let r0 = run.history.first().copied().unwrap_or(1.0);
        run.history.iter().enumerate().map(move |(k, &r)| {
            vec![
                run.solver.to_string(),
                k.to_string(),
                fmt_f64(r),
                fmt_f64(r0 * res.rate.powi(k.saturating_sub(2) as i32)),
            ]
        })
    });
    csv_string(&["solver", "iteration", "residual", "rate_bound"], rows)
}

pub fn worstcase_svg(res: &WorstCaseResult) -> String {
    let mut series: Vec<Series> = res
        .runs
        .iter()
        .enumerate()
        .map(|(i, run)| {
            let mut s = Series::scatter(run.solver.to_string(), i, run.history.iter().enumerate().map(|(k, &r)| (k as f64, r)).collect());
            s.connect = true;
            s
        })
        .collect();
    let len = res.runs.iter().map(|r| r.history.len()).max().unwrap_or(1);
    series.push(Series::reference(
        "a^(k−2)",
        "#000",
        (0..len).map(|k| (k as f64, res.rate.powi(k.saturating_sub(2) as i32))).collect(),
    ));
    render(&Plot {
        title: format!("Worst case, m = {}, κ = {:e}", res.m, res.kappa),
        x_label: "iteration".into(),
        y_label: "saddle residual".into(),
        log_x: false,
        log_y: true,
        series,
    })
}

#[derive(Debug, Clone)]
pub struct DiagnoseRecord {
    pub index: usize,
    pub instance: SweepInstance,
    pub report: DiagnosticsReport,
}

pub fn run_diagnose(cfg: &ExperimentConfig) -> SweepOutputOf<DiagnoseRecord> {
    let results: Vec<Result<DiagnoseRecord>> = sweep_instances(cfg)
        .par_iter()
        .enumerate()
        .map(|(index, inst)| {
            let fp = FactoredProblem::new(inst.build()?)?;
            let report = diagnose(&fp, fp.constants.optimal_beta())?;
            Ok(DiagnoseRecord { index, instance: *inst, report })
        })
        .collect();
    split_results(results)
}

#[derive(Debug, Clone)]
pub struct SweepOutputOf<T> {
    pub records: Vec<T>,
    pub failures: Vec<(usize, String)>,
}

fn split_results<T>(results: Vec<Result<T>>) -> SweepOutputOf<T> {
    let mut out = SweepOutputOf { records: Vec::new(), failures: Vec::new() };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.failures.push((i, format!("{e:#}"))),
        }
    }
    out
}

pub fn diagnose_csv(records: &[DiagnoseRecord]) -> Result<String> {
    csv_string(
        &["instance", "n", "m", "l", "s", "seed", "kappa", "beta", "norm_k", "delta", "delta_lb", "kappa_x", "nu", "nu_bound"],
        records.iter().map(|r| {
            let d = &r.report;
            vec![
                r.index.to_string(),
                r.instance.n.to_string(),
                r.instance.m.to_string(),
                r.instance.l.to_string(),
                fmt_f64(r.instance.s),
                r.instance.seed.to_string(),
                fmt_f64(d.kappa),
                fmt_f64(d.beta),
                fmt_f64(d.norm_numeric),
                fmt_f64(d.delta),
                fmt_f64(d.delta_lb),
                fmt_f64(d.kappa_x),
                fmt_f64(d.nu),
                fmt_f64(d.nu_bound),
            ]
        }),
    )
}

/// δ against κ, one marker per instance.
pub fn diagnose_svg(records: &[DiagnoseRecord]) -> String {
    render(&Plot {
        title: "Outlier margin δ".into(),
        x_label: "κ".into(),
        y_label: "δ".into(),
        log_x: true,
        log_y: false,
        series: vec![Series::scatter("δ", 0, records.iter().map(|r| (r.report.kappa, r.report.delta)).collect())],
    })
}

/// `Re Im` per line for every eigenvalue of `K`, instances separated by a
/// `# instance i` comment.
pub fn eigenvalue_dump(records: &[DiagnoseRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!("# instance {} kappa {} radius {}\n", r.index, fmt_f64(r.report.kappa), fmt_f64(r.report.disk_radius)));
        for z in &r.report.eigenvalues {
            out.push_str(&format!("{} {}\n", fmt_f64(z.re), fmt_f64(z.im)));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SdpRecord {
    pub kappa: f64,
    pub order: usize,
    pub constraints: usize,
    pub runs: Vec<RunOutcome>,
}

/// Synthetic Newton subproblems of order `n` with `m` constraints, one per
/// configured κ.
pub fn run_sdp(cfg: &ExperimentConfig, solvers: &[SolverKind]) -> SweepOutputOf<SdpRecord> {
    let n = cfg.n.unwrap_or(DEFAULT_SDP_N);
    let m = cfg.m.unwrap_or(n).min(svec_dim(n));
    let s = settings(cfg);
    let results: Vec<Result<SdpRecord>> = cfg
        .kappa
        .par_iter()
        .map(|&kappa| {
            let prob = synthetic_newton(n, m, kappa, cfg.seed)?;
            let admm = match cfg.beta {
                Some(b) => SdpAdmm::new(&prob, b)?,
                None => SdpAdmm::optimal(&prob)?,
            };
            let runs = solvers
                .iter()
                .map(|&k| run_fixed_point(&admm, k, &s))
                .collect();
            Ok(SdpRecord { kappa, order: n, constraints: m, runs })
        })
        .collect();
    split_results(results)
}

pub fn sdp_csv(records: &[SdpRecord], timing: bool) -> Result<String> {
    let mut header = vec!["kappa", "order", "constraints", "solver", "iterations", "status", "final_residual"];
    if timing {
        header.push("seconds");
    }
    csv_string(
        &header,
        records.iter().flat_map(|r| {
            r.runs.iter().map(move |run| {
                let mut row = vec![
                    fmt_f64(r.kappa),
                    r.order.to_string(),
                    r.constraints.to_string(),
                    run.solver.to_string(),
                    run.iterations.to_string(),
                    run.status.label(),
                    fmt_f64(run.final_residual),
                ];
                if timing {
                    row.push(fmt_opt(run.seconds));
                }
                row
            })
        }),
    )
}

pub fn sdp_svg(records: &[SdpRecord], solvers: &[SolverKind]) -> String {
    let series = solvers
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let pts = records
                .iter()
                .flat_map(|r| r.runs.iter().filter(|x| x.solver == k).map(|x| (r.kappa, x.iterations.max(1) as f64)))
                .collect();
            Series::scatter(k.to_string(), i, pts)
        })
        .collect();
    render(&Plot {
        title: "Newton subproblem iterations".into(),
        x_label: "κ".into(),
        y_label: "iterations".into(),
        log_x: true,
        log_y: true,
        series,
    })
}

/// Solves a problem file with each solver.
pub fn run_solve_file(path: &Path, cfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<(f64, Vec<RunOutcome>)> {
    let prob = read_problem(path).with_context(|| format!("reading problem {}", path.display()))?;
    let fp = FactoredProblem::new(prob)?;
    let s = settings(cfg);
    Ok((fp.constants.kappa, solvers.iter().map(|&k| run_solver(&fp, k, &s)).collect()))
}

pub fn solve_csv(kappa: f64, runs: &[RunOutcome], timing: bool) -> Result<String> {
    let mut header = vec!["kappa", "solver", "iterations", "status", "final_residual"];
    if timing {
        header.push("seconds");
    }
    csv_string(
        &header,
        runs.iter().map(|run| {
            let mut row = vec![
                fmt_f64(kappa),
                run.solver.to_string(),
                run.iterations.to_string(),
                run.status.label(),
                fmt_f64(run.final_residual),
            ];
            if timing {
                row.push(fmt_opt(run.seconds));
            }
            row
        }),
    )
}

/// 0 when every run converged, 2 when some stopped early, 1 on errors.
pub fn exit_code<'a>(statuses: impl IntoIterator<Item = &'a RunStatus>, failures: usize) -> i32 {
    let mut code = 0;
    for s in statuses {
        match s {
            RunStatus::Failed(_) => return 1,
            s if !s.converged() => code = 2,
            _ => {}
        }
    }
    if failures > 0 {
        1
    } else {
        code
    }
}

pub fn check_solvers_for_fixed_point(solvers: &[SolverKind], what: &str) -> Result<()> {
    if let Some(s) = solvers.iter().find(|s| matches!(s, SolverKind::Saddle(_))) {
        bail!("{what} supports only the ADMM family, got {s}");
    }
    Ok(())
}
