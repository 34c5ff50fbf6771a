//! Experiment configuration: defaults, then `ECQP_THREADS`, then a
//! key=value file, then command-line flags. Keys are the long flag names
//! without the leading dashes.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ecqp_core::precond::SaddleMethod;

pub const THREADS_ENV: &str = "ECQP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Admm,
    /// Over-relaxed ADMM with `ω = 2`.
    Sor,
    AdmmGmres,
    /// ADMM-GMRES restarted every `restart` iterations.
    AdmmGmresRestarted,
    Saddle(SaddleMethod),
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        Self::Admm,
        Self::Sor,
        Self::Saddle(SaddleMethod::BlkDiag),
        Self::Saddle(SaddleMethod::ConstrI),
        Self::Saddle(SaddleMethod::ConstrII),
        Self::Saddle(SaddleMethod::Hss),
        Self::AdmmGmres,
        Self::AdmmGmresRestarted,
    ];
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Admm => f.write_str("admm"),
            Self::Sor => f.write_str("sor"),
            Self::AdmmGmres => f.write_str("admm-gmres"),
            Self::AdmmGmresRestarted => f.write_str("admm-gmres-restarted"),
            Self::Saddle(m) => m.fmt(f),
        }
    }
}

impl FromStr for SolverKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "admm" => Ok(Self::Admm),
            "sor" => Ok(Self::Sor),
            "admm-gmres" => Ok(Self::AdmmGmres),
            "admm-gmres-restarted" => Ok(Self::AdmmGmresRestarted),
            other => other.parse::<SaddleMethod>().map(Self::Saddle).map_err(|e| anyhow!(e)),
        }
    }
}

/// Everything needed to reproduce a run. Optional fields fall back to a
/// per-subcommand default.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub s_min: f64,
    pub s_max: f64,
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    pub solvers: Option<Vec<SolverKind>>,
    pub restart: usize,
    /// ADMM penalty; `√(μL)` when unset.
    pub beta: Option<f64>,
    /// β or α of the saddle preconditioners; each method's own default when
    /// unset.
    pub precond_param: Option<f64>,
    pub kappa: Vec<f64>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub threads: Option<usize>,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: None,
            m: None,
            l: None,
            s_min: 0.0,
            s_max: 2.0,
            count: 50,
            seed: 0,
            tol: 1e-6,
            max_iters: 100_000,
            solvers: None,
            restart: 25,
            beta: None,
            precond_param: None,
            kappa: vec![1e4],
            out_csv: None,
            out_svg: None,
            threads: None,
            timing: false,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "n", "m", "l", "s-min", "s-max", "count", "seed", "tol", "max-iters", "solvers", "restart", "beta",
    "precond-param", "kappa",
    "out-csv", "out-svg", "threads", "timing",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| anyhow!("invalid value '{value}' for '{key}': {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

impl ExperimentConfig {
    /// Defaults with the thread count taken from `ECQP_THREADS` if set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(v) = std::env::var(THREADS_ENV) {
            cfg.set("threads", &v).with_context(|| format!("from {THREADS_ENV}"))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = Some(parse(key, value)?),
            "m" => self.m = Some(parse(key, value)?),
            "l" => self.l = Some(parse(key, value)?),
            "s-min" => self.s_min = parse(key, value)?,
            "s-max" => self.s_max = parse(key, value)?,
            "count" => self.count = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "max-iters" => self.max_iters = parse(key, value)?,
            "solvers" => self.solvers = Some(parse_list(key, value)?),
            "restart" => self.restart = parse(key, value)?,
            "beta" => self.beta = Some(parse(key, value)?),
            "precond-param" => self.precond_param = Some(parse(key, value)?),
            "kappa" => self.kappa = parse_list(key, value)?,
            "out-csv" => self.out_csv = Some(PathBuf::from(value.trim())),
            "out-svg" => self.out_svg = Some(PathBuf::from(value.trim())),
            "threads" => self.threads = Some(parse(key, value)?),
            "timing" => self.timing = parse(key, value)?,
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// Applies `key=value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", lineno + 1))?;
            self.set(key.trim(), value).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_kv(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The config as key=value lines; [`apply_kv`](Self::apply_kv) on the
    /// output reproduces it exactly.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        let join = |xs: &[String]| xs.join(",");
        if let Some(n) = self.n {
            put("n", n.to_string());
        }
        if let Some(m) = self.m {
            put("m", m.to_string());
        }
        if let Some(l) = self.l {
            put("l", l.to_string());
        }
        // `{:?}` prints the shortest representation that parses back exactly.
        put("s-min", format!("{:?}", self.s_min));
        put("s-max", format!("{:?}", self.s_max));
        put("count", self.count.to_string());
        put("seed", self.seed.to_string());
        put("tol", format!("{:?}", self.tol));
        put("max-iters", self.max_iters.to_string());
        if let Some(s) = &self.solvers {
            put("solvers", join(&s.iter().map(|k| k.to_string()).collect::<Vec<_>>()));
        }
        put("restart", self.restart.to_string());
        if let Some(b) = self.beta {
            put("beta", format!("{b:?}"));
        }
        if let Some(p) = self.precond_param {
            put("precond-param", format!("{p:?}"));
        }
        put("kappa", join(&self.kappa.iter().map(|k| format!("{k:?}")).collect::<Vec<_>>()));
        if let Some(p) = &self.out_csv {
            put("out-csv", p.display().to_string());
        }
        if let Some(p) = &self.out_svg {
            put("out-svg", p.display().to_string());
        }
        if let Some(t) = self.threads {
            put("threads", t.to_string());
        }
        put("timing", self.timing.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if n == 0 {
                bail!("n must be positive");
            }
        }
        match (self.m, self.l) {
            (Some(m), Some(l)) if l > m => bail!("l = {l} exceeds m = {m}"),
            (Some(0), _) | (_, Some(0)) => bail!("m and l must be positive"),
            _ => {}
        }
        if !(self.s_min >= 0.0 && self.s_min <= self.s_max && self.s_max.is_finite()) {
            bail!("need 0 <= s-min <= s-max < inf, got [{}, {}]", self.s_min, self.s_max);
        }
        if self.count == 0 {
            bail!("count must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("tol must lie in (0, 1), got {}", self.tol);
        }
        if self.max_iters == 0 {
            bail!("max-iters must be positive");
        }
        if self.restart == 0 {
            bail!("restart must be positive");
        }
        for (name, v) in [("beta", self.beta), ("precond-param", self.precond_param)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive and finite, got {v}");
                }
            }
        }
        if let Some(s) = &self.solvers {
            if s.is_empty() {
                bail!("solvers list is empty");
            }
        }
        if self.kappa.is_empty() || self.kappa.iter().any(|k| !(*k >= 1.0 && k.is_finite())) {
            bail!("kappa values must be finite and >= 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(())
    }

    /// Generic problems need `m ≤ n`; SDP subproblems only `m ≤ n(n+1)/2`.
    pub fn validate_ecqp_dims(&self, default_n: usize) -> Result<()> {
        let n = self.n.unwrap_or(default_n);
        match self.m {
            Some(m) if m > n => bail!("m = {m} exceeds n = {n}"),
            _ => Ok(()),
        }
    }

    pub fn solvers_or(&self, default: &[SolverKind]) -> Vec<SolverKind> {
        self.solvers.clone().unwrap_or_else(|| default.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for s in SolverKind::ALL {
            assert_eq!(s.to_string().parse::<SolverKind>().unwrap(), s);
        }
        assert!("cg".parse::<SolverKind>().is_err());
    }

    #[test]
    fn kv_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv("n = 40\nm=20 # comment\n\ns-max=1.5\nsolvers=admm,hss\nkappa=100,1e6\nout-csv=/tmp/a b.csv\ntol=3e-7\n")
            .unwrap();
        assert_eq!(cfg.n, Some(40));
        assert_eq!(cfg.kappa, vec![100.0, 1e6]);
        assert_eq!(cfg.solvers.as_deref(), Some(&[SolverKind::Admm, SolverKind::Saddle(SaddleMethod::Hss)][..]));
        let mut back = ExperimentConfig::default();
        back.apply_kv(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_is_settable() {
        let values = [
            "5", "3", "2", "0.1", "1.0", "7", "9", "1e-5", "10", "admm", "4", "2.5", "0.5", "10", "x.csv", "x.svg", "2", "true",
        ];
        let mut cfg = ExperimentConfig::default();
        for (k, v) in KEYS.iter().zip(values) {
            cfg.set(k, v).unwrap();
        }
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply_kv("bogus=1").is_err());
        assert!(cfg.apply_kv("n").is_err());
        assert!(cfg.set("tol", "abc").is_err());
        cfg.set("n", "10").unwrap();
        cfg.set("m", "11").unwrap();
        assert!(cfg.validate().is_ok());
        assert!(cfg.validate_ecqp_dims(200).is_err());
        assert!(ExperimentConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { s_min: 3.0, ..Default::default() }.validate().is_err());
    }
}
