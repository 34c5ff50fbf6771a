use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ecqp_cli::config::{ExperimentConfig, SolverKind};
use ecqp_cli::experiments::{self as ex, exit_code};

#[derive(Parser)]
#[command(name = "ecqp", version, about = "Benchmarks for ADMM and Krylov solvers on equality-constrained QPs")]
struct Cli {
    /// key=value file applied after the environment and before flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the merged configuration to FILE before running.
    #[arg(long, global = true, value_name = "FILE")]
    save_config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

/// Every flag mirrors a config key of the same name.
#[derive(Args, Default)]
struct Flags {
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    m: Option<String>,
    #[arg(long, global = true)]
    l: Option<String>,
    #[arg(long, global = true)]
    s_min: Option<String>,
    #[arg(long, global = true)]
    s_max: Option<String>,
    #[arg(long, global = true)]
    count: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    max_iters: Option<String>,
    /// Comma-separated: admm, sor, admm-gmres, admm-gmres-restarted,
    /// blkdiag, constr1, constr2, hss.
    #[arg(long, global = true)]
    solvers: Option<String>,
    #[arg(long, global = true)]
    restart: Option<String>,
    /// ADMM penalty, default √(μL).
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Preconditioner β (blkdiag, constr1, constr2) or α (hss).
    #[arg(long, global = true)]
    precond_param: Option<String>,
    /// Comma-separated condition numbers for worstcase and sdp.
    #[arg(long, global = true)]
    kappa: Option<String>,
    #[arg(long, global = true)]
    out_csv: Option<String>,
    #[arg(long, global = true)]
    out_svg: Option<String>,
    /// Worker threads; defaults to ECQP_THREADS, then the core count.
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Record per-run wall time in the CSV.
    #[arg(long, global = true)]
    timing: bool,
}

impl Flags {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let pairs = [
            ("n", &self.n),
            ("m", &self.m),
            ("l", &self.l),
            ("s-min", &self.s_min),
            ("s-max", &self.s_max),
            ("count", &self.count),
            ("seed", &self.seed),
            ("tol", &self.tol),
            ("max-iters", &self.max_iters),
            ("solvers", &self.solvers),
            ("restart", &self.restart),
            ("beta", &self.beta),
            ("precond-param", &self.precond_param),
            ("kappa", &self.kappa),
            ("out-csv", &self.out_csv),
            ("out-svg", &self.out_svg),
            ("threads", &self.threads),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{key}"))?;
            }
        }
        if self.timing {
            cfg.timing = true;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Random instances, iterations against κ.
    Sweep,
    /// Per-bin maximum iterations for every solver.
    Compare,
    /// Residual histories on the worst-case construction.
    Worstcase,
    /// Spectral diagnostics of K(β) per instance.
    Diagnose {
        /// Dump the eigenvalues of K to FILE.
        #[arg(long, value_name = "FILE")]
        out_eigs: Option<PathBuf>,
    },
    /// Synthetic SDP Newton subproblems, one per κ.
    Sdp,
    /// Solve a problem file.
    Solve { file: PathBuf },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_svg(cfg: &ExperimentConfig, svg: impl FnOnce() -> String) -> Result<()> {
    if let Some(p) = &cfg.out_svg {
        std::fs::write(p, svg()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn report_failures(failures: &[(usize, String)]) {
    for (i, msg) in failures {
        eprintln!("instance {i} skipped: {msg}");
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = ExperimentConfig::from_env()?;
    if let Some(p) = &cli.config {
        cfg.apply_file(p)?;
    }
    cli.flags.apply(&mut cfg)?;
    cfg.validate()?;
    if let Some(p) = &cli.save_config {
        std::fs::write(p, cfg.to_kv()).with_context(|| format!("writing {}", p.display()))?;
    }
    let threads = cfg.threads;
    ex::with_threads(threads, || dispatch(&cli.command, &cfg))?
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> Result<i32> {
    use SolverKind::*;
    if matches!(command, Command::Sweep | Command::Compare | Command::Diagnose { .. }) {
        cfg.validate_ecqp_dims(ex::DEFAULT_SWEEP_N)?;
    }
    match command {
        Command::Sweep => {
            let solvers = cfg.solvers_or(&[Admm, AdmmGmres]);
            let out = ex::run_sweep(cfg, &solvers, true);
            report_failures(&out.failures);
            write_out(cfg.out_csv.as_deref(), &ex::sweep_csv(&out.records, cfg.timing)?)?;
            write_svg(cfg, || ex::sweep_svg(&out.records, &solvers))?;
            for &s in &solvers {
                if let Some(slope) = ex::sweep_slopes(&out.records, s, 1e2, 1e8) {
                    eprintln!("{s}: log-log slope {slope:.3} over kappa in [1e2, 1e8]");
                }
            }
            Ok(exit_code(out.records.iter().flat_map(|r| r.runs.iter().map(|x| &x.status)), out.failures.len()))
        }
        Command::Compare => {
            let solvers = cfg.solvers_or(&SolverKind::ALL);
            let out = ex::run_sweep(cfg, &solvers, false);
            report_failures(&out.failures);
            let rows = ex::compare_table(&out.records, &solvers);
            print!("{}", ex::compare_text(&rows, &solvers, cfg.max_iters));
            if let Some(p) = &cfg.out_csv {
                write_out(Some(p), &ex::compare_csv(&rows, cfg.timing)?)?;
            }
            write_svg(cfg, || ex::sweep_svg(&out.records, &solvers))?;
            Ok(exit_code(out.records.iter().flat_map(|r| r.runs.iter().map(|x| &x.status)), out.failures.len()))
        }
        Command::Worstcase => {
            let solvers = cfg.solvers_or(&[Admm, Sor, AdmmGmres]);
            let res = ex::run_worstcase(cfg, &solvers)?;
            write_out(cfg.out_csv.as_deref(), &ex::worstcase_csv(&res)?)?;
            write_svg(cfg, || ex::worstcase_svg(&res))?;
            eprintln!("m = {}, kappa = {:e}, predicted rate {:.6}", res.m, res.kappa, res.rate);
            for run in &res.runs {
                let to = run.history.len().saturating_sub(1).min(40);
                if let Some(r) = ex_fitted(&res, run.solver, to) {
                    eprintln!("{}: fitted rate {r:.6} over iterations 10..={to}", run.solver);
                }
            }
            Ok(exit_code(res.runs.iter().map(|r| &r.status), 0))
        }
        Command::Diagnose { out_eigs } => {
            let out = ex::run_diagnose(cfg);
            report_failures(&out.failures);
            write_out(cfg.out_csv.as_deref(), &ex::diagnose_csv(&out.records)?)?;
            write_svg(cfg, || ex::diagnose_svg(&out.records))?;
            if let Some(p) = out_eigs {
                write_out(Some(p), &ex::eigenvalue_dump(&out.records))?;
            }
            Ok(if out.failures.is_empty() { 0 } else { 1 })
        }
        Command::Sdp => {
            let solvers = cfg.solvers_or(&[AdmmGmres, AdmmGmresRestarted, Admm]);
            ex::check_solvers_for_fixed_point(&solvers, "sdp")?;
            let out = ex::run_sdp(cfg, &solvers);
            report_failures(&out.failures);
            write_out(cfg.out_csv.as_deref(), &ex::sdp_csv(&out.records, cfg.timing)?)?;
            write_svg(cfg, || ex::sdp_svg(&out.records, &solvers))?;
            Ok(exit_code(out.records.iter().flat_map(|r| r.runs.iter().map(|x| &x.status)), out.failures.len()))
        }
        Command::Solve { file } => {
            let solvers = cfg.solvers_or(&SolverKind::ALL);
            let (kappa, runs) = ex::run_solve_file(file, cfg, &solvers)?;
            write_out(cfg.out_csv.as_deref(), &ex::solve_csv(kappa, &runs, cfg.timing)?)?;
            Ok(exit_code(runs.iter().map(|r| &r.status), 0))
        }
    }
}

fn ex_fitted(res: &ex::WorstCaseResult, solver: SolverKind, to: usize) -> Option<f64> {
    (to > 10).then(|| res.fitted(solver, 10, to)).flatten()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
