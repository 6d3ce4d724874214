//! Iteration-count benchmarks of l^p circulant preconditioners on the model
//! Toeplitz family, rendered as `n x p` tables.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::toeplitz::{
    build_toeplitz, lp_circulant_minimizer, pcg_solve, strang_type_correction, CirculantMatrix, ModelSymbol,
    PcgOptions, SolveStatus, ToeplitzOperator, DEFAULT_TOL,
};

/// Label of the unpreconditioned column.
pub const UNPRECONDITIONED: &str = "n. p.";
/// Cell text for failed runs.
pub const FAILURE_MARK: &str = "#";

/// Right-hand side of the benchmark systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rhs {
    #[default]
    Ones,
    /// Uniform `[0, 1)` entries; `None` defers to the run seed.
    Random(Option<u64>),
}

impl Rhs {
    pub fn vector(&self, n: usize, fallback_seed: u64) -> Vec<f64> {
        match self {
            Rhs::Ones => vec![1.0; n],
            Rhs::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(fallback_seed));
                (0..n).map(|_| rng.random::<f64>()).collect()
            }
        }
    }
}

impl std::str::FromStr for Rhs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ones" {
            return Ok(Rhs::Ones);
        }
        if s == "random" {
            return Ok(Rhs::Random(None));
        }
        if let Some(inner) = s.strip_prefix("random(").and_then(|r| r.strip_suffix(')')) {
            let seed = inner
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed in rhs '{s}'")))?;
            return Ok(Rhs::Random(Some(seed)));
        }
        Err(Error::Parse(format!(
            "rhs must be 'ones', 'random' or 'random(<seed>)', got '{s}'"
        )))
    }
}

impl std::fmt::Display for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rhs::Ones => f.write_str("ones"),
            Rhs::Random(None) => f.write_str("random"),
            Rhs::Random(Some(s)) => write!(f, "random({s})"),
        }
    }
}

impl Serialize for Rhs {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rhs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn serialize_on_off<S: Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(if *v { "on" } else { "off" })
}

fn deserialize_on_off<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OnOff {
        Flag(bool),
        Word(String),
    }
    match OnOff::deserialize(d)? {
        OnOff::Flag(b) => Ok(b),
        OnOff::Word(w) => match w.as_str() {
            "on" => Ok(true),
            "off" => Ok(false),
            other => Err(serde::de::Error::custom(format!(
                "expected 'on' or 'off', got '{other}'"
            ))),
        },
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n_list: Vec<usize>,
    pub p_list: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxit: Option<usize>,
    #[serde(
        default,
        serialize_with = "serialize_on_off",
        deserialize_with = "deserialize_on_off"
    )]
    pub correction: bool,
    #[serde(default)]
    pub rhs: Rhs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_true")]
    pub unpreconditioned: bool,
}

impl BenchConfig {
    pub fn new(symbol: ModelSymbol, n_list: Vec<usize>, p_list: Vec<f64>) -> Self {
        Self {
            alpha: symbol.alpha,
            beta: symbol.beta,
            gamma: symbol.gamma,
            n_list,
            p_list,
            tol: DEFAULT_TOL,
            maxit: None,
            correction: false,
            rhs: Rhs::Ones,
            seed: None,
            unpreconditioned: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn symbol(&self) -> Result<ModelSymbol> {
        ModelSymbol::new(self.alpha, self.beta, self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        self.symbol()?;
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 1) {
            return Err(Error::InvalidInput("n_list must hold positive dimensions".into()));
        }
        if self.p_list.iter().any(|&p| !p.is_finite() || p < 1.0) {
            return Err(Error::InvalidInput("p_list entries must be >= 1".into()));
        }
        if self.p_list.is_empty() && !self.unpreconditioned {
            return Err(Error::InvalidInput(
                "nothing to run: empty p_list and no unpreconditioned column".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub n: usize,
    /// `None` for the unpreconditioned run.
    pub p: Option<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
    pub final_residual: Option<f64>,
    /// The spectral correction changed the preconditioner.
    pub corrected: bool,
    /// Smallest real part in the spectrum of the preconditioner as built.
    pub min_eigenvalue: Option<f64>,
}

impl BenchCell {
    pub fn display(&self) -> String {
        if self.status == SolveStatus::Converged {
            self.iterations.to_string()
        } else {
            FAILURE_MARK.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub cells: Vec<BenchCell>,
}

/// Circulant preconditioner for one benchmark cell, corrected if requested.
pub fn build_preconditioner(t: &ToeplitzOperator, p: f64, correction: bool) -> Result<(CirculantMatrix, bool)> {
    let c = lp_circulant_minimizer(t, p)?;
    if correction && !c.is_positive_definite() {
        let fixed = strang_type_correction(&c, c.singularity_threshold())?;
        return Ok((fixed, true));
    }
    Ok((c, false))
}

fn run_cell(cfg: &BenchConfig, symbol: &ModelSymbol, n: usize, p: Option<f64>, seed: u64) -> Result<BenchCell> {
    let t = build_toeplitz(&(*symbol).into(), n)?;
    let b = cfg.rhs.vector(n, seed);
    let opts = PcgOptions {
        tol: cfg.tol,
        maxit: cfg.maxit,
    };
    let (report, corrected, min_eigenvalue) = match p {
        None => (pcg_solve(&t, &b, None, &opts)?, false, None),
        Some(p) => {
            let (m, corrected) = build_preconditioner(&t, p, cfg.correction)?;
            let min = m.eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            (pcg_solve(&t, &b, Some(&m), &opts)?, corrected, Some(min))
        }
    };
    Ok(BenchCell {
        n,
        p,
        iterations: report.iterations,
        status: report.status,
        final_residual: report.final_residual(),
        corrected,
        min_eigenvalue,
    })
}

/// Runs every `(n, p)` cell (plus the unpreconditioned column) on a pool of
/// `workers` threads; `workers = 0` lets rayon decide.
pub fn run_bench(cfg: &BenchConfig, workers: usize) -> Result<BenchResult> {
    cfg.validate()?;
    let symbol = cfg.symbol()?;
    let seed = cfg.seed.unwrap_or(0);
    let mut columns: Vec<Option<f64>> = cfg.p_list.iter().map(|&p| Some(p)).collect();
    if cfg.unpreconditioned {
        columns.push(None);
    }
    let jobs: Vec<(usize, Option<f64>)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| columns.iter().map(move |&p| (n, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let cells = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, p)| run_cell(cfg, &symbol, n, p, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(BenchResult {
        config: cfg.clone(),
        cells,
    })
}

fn p_label(p: Option<f64>) -> String {
    p.map_or_else(|| UNPRECONDITIONED.to_string(), |p| format!("{p}"))
}

impl BenchResult {
    pub fn cell(&self, n: usize, p: Option<f64>) -> Option<&BenchCell> {
        self.cells.iter().find(|c| c.n == n && c.p == p)
    }

    fn columns(&self) -> Vec<Option<f64>> {
        let mut cols: Vec<Option<f64>> = self.config.p_list.iter().map(|&p| Some(p)).collect();
        if self.config.unpreconditioned {
            cols.push(None);
        }
        cols
    }

    /// Header row and one row per `n`, cells as displayed in the tables.
    pub fn grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let cols = self.columns();
        let mut header = vec!["n".to_string()];
        header.extend(cols.iter().map(|&p| p_label(p)));
        let rows = self
            .config
            .n_list
            .iter()
            .map(|&n| {
                let mut row = vec![n.to_string()];
                row.extend(
                    cols.iter()
                        .map(|&p| self.cell(n, p).map_or_else(String::new, BenchCell::display)),
                );
                row
            })
            .collect();
        (header, rows)
    }

    pub fn to_csv(&self) -> String {
        let (header, rows) = self.grid();
        let mut out = header.join(",");
        out.push('\n');
        for r in rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let (header, rows) = self.grid();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "(alpha, beta, gamma) = ({}, {}, {}); tol = {}; rhs = {}; correction = {}",
            self.config.alpha,
            self.config.beta,
            self.config.gamma,
            self.config.tol,
            self.config.rhs,
            if self.config.correction { "on" } else { "off" }
        );
        out.push('\n');
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        for r in rows {
            let _ = writeln!(out, "| {} |", r.join(" | "));
        }
        out
    }

    /// One line per cell with the full status.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("n,p,iterations,status,final_residual,corrected,min_eigenvalue\n");
        for c in &self.cells {
            let status = serde_json::to_value(c.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.n,
                p_label(c.p),
                c.iterations,
                status,
                c.final_residual.map(fmt_f64).unwrap_or_default(),
                c.corrected,
                c.min_eigenvalue.map(fmt_f64).unwrap_or_default()
            );
        }
        out
    }
}

/// `j,re,im` for every circulant eigenvalue.
pub fn circulant_spectrum_csv(c: &CirculantMatrix) -> String {
    let mut out = String::from("j,re,im\n");
    for (j, z) in c.eigenvalues().iter().enumerate() {
        let _ = writeln!(out, "{j},{},{}", fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

/// `j,lambda` for a real spectrum.
pub fn real_spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("j,lambda\n");
    for (j, l) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{j},{}", fmt_f64(*l));
    }
    out
}
