//! Command-line front end: run configuration, code artifacts and the four
//! subcommands (`evaluate`, `optimize`, `sweep`, `seeds`).
//!
//! A run is described by one JSON [`RunConfig`]; command-line flags
//! override individual fields. Every command writes its outputs into the
//! configured output directory.

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codes::{binomial_code, kappa, ladder_code, thirteen_code, AqecCode, FidelityEvaluator, KappaConfig, Subspace};
use crate::error::{AqecError, Result};
use crate::matcore::{CMatrix, CVector};
use crate::models::ModelSpec;
use crate::optimizer::{self, ConvergenceLog, OptimizerConfig, TerminationReason};

/// Iteration budgets above this need the long-running flag.
pub const LONG_RUN_ITERATIONS: usize = 10_000;

/// Where the code under study comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CodeSource {
    Thirteen,
    Binomial,
    Ladder,
    Random,
    File(PathBuf),
}

impl CodeSource {
    pub fn is_reference(&self) -> bool {
        matches!(self, CodeSource::Thirteen | CodeSource::Binomial | CodeSource::Ladder)
    }
}

impl FromStr for CodeSource {
    type Err = AqecError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "thirteen" | "13" => CodeSource::Thirteen,
            "binomial" => CodeSource::Binomial,
            "ladder" => CodeSource::Ladder,
            "random" => CodeSource::Random,
            "" => return Err(AqecError::invalid("empty code source")),
            path => CodeSource::File(PathBuf::from(path)),
        })
    }
}

impl TryFrom<String> for CodeSource {
    type Error = AqecError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodeSource> for String {
    fn from(c: CodeSource) -> String {
        c.to_string()
    }
}

impl fmt::Display for CodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSource::Thirteen => f.write_str("thirteen"),
            CodeSource::Binomial => f.write_str("binomial"),
            CodeSource::Ladder => f.write_str("ladder"),
            CodeSource::Random => f.write_str("random"),
            CodeSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// What `sweep` does at each exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Evaluate the configured code unchanged.
    Evaluate,
    /// Optimize starting from the configured code.
    Optimize,
    /// Best of `num_seeds` random-start optimizations.
    RandomBest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub code: CodeSource,
    /// Induced-to-natural rate ratio Γ/γ for the reference codes.
    pub gamma_ratio: f64,
    pub optimizer: OptimizerConfig,
    pub kappa: KappaConfig,
    pub out_dir: PathBuf,
    pub sweep_values: Vec<f64>,
    pub sweep_mode: SweepMode,
    pub num_seeds: usize,
    pub long_running: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Uniform { n: 4 },
            code: CodeSource::Thirteen,
            gamma_ratio: 1e6,
            optimizer: OptimizerConfig::default(),
            kappa: KappaConfig::default(),
            out_dir: PathBuf::from("aqec-out"),
            sweep_values: Vec::new(),
            sweep_mode: SweepMode::Evaluate,
            num_seeds: 1,
            long_running: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        self.optimizer.validate()?;
        self.kappa.validate()?;
        if !(self.gamma_ratio >= 0.0 && self.gamma_ratio.is_finite()) {
            return Err(AqecError::invalid(format!("gamma_ratio must be >= 0, got {}", self.gamma_ratio)));
        }
        if self.num_seeds == 0 {
            return Err(AqecError::invalid("num_seeds must be at least 1"));
        }
        if let CodeSource::File(p) = &self.code {
            if !p.is_file() {
                return Err(AqecError::invalid(format!("code file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Optimizer settings with the iteration budget capped unless the
    /// long-running tier is enabled.
    pub fn effective_optimizer(&self) -> OptimizerConfig {
        let mut cfg = self.optimizer.clone();
        if !self.long_running && cfg.max_iterations > LONG_RUN_ITERATIONS {
            cfg.max_iterations = LONG_RUN_ITERATIONS;
        }
        cfg
    }

    pub fn budget_was_capped(&self) -> bool {
        !self.long_running && self.optimizer.max_iterations > LONG_RUN_ITERATIONS
    }

    /// Builds the configured code for a model of dimension `n`.
    pub fn build_code(&self, model: &ModelSpec) -> Result<AqecCode> {
        let code = match &self.code {
            CodeSource::Thirteen => thirteen_code(self.gamma_ratio)?,
            CodeSource::Binomial => binomial_code(self.gamma_ratio)?,
            CodeSource::Ladder => ladder_code(model.dim(), self.gamma_ratio)?,
            CodeSource::Random => {
                let m = model.build()?;
                optimizer::init_random(&m, &self.optimizer)?
            }
            CodeSource::File(p) => CodeArtifact::load(p)?.to_code()?,
        };
        if code.dim() != model.dim() {
            return Err(AqecError::DimensionMismatch {
                expected: model.dim(),
                found: code.dim(),
            });
        }
        Ok(code)
    }
}

/// A complex vector or row-major matrix as separate real and imaginary
/// arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexArray {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArray {
    fn from_slice(z: &[Complex64]) -> Self {
        Self {
            re: z.iter().map(|c| c.re).collect(),
            im: z.iter().map(|c| c.im).collect(),
        }
    }

    fn to_vec(&self, expected: usize, what: &str) -> Result<Vec<Complex64>> {
        if self.re.len() != expected || self.im.len() != expected {
            return Err(AqecError::invalid(format!(
                "{what}: expected {expected} entries, got {} real and {} imaginary",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMetadata {
    pub model: ModelSpec,
    pub gamma_ratio: Option<f64>,
    pub tau: f64,
    pub fidelity: f64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub termination: Option<TerminationReason>,
}

/// JSON form of a code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub dimension: usize,
    pub words: [ComplexArray; 2],
    pub induced_jumps: Vec<ComplexArray>,
    pub control: ComplexArray,
    pub metadata: ArtifactMetadata,
}

impl CodeArtifact {
    pub fn from_code(code: &AqecCode, metadata: ArtifactMetadata) -> Self {
        Self {
            dimension: code.dim(),
            words: [
                ComplexArray::from_slice(code.word0().as_slice()),
                ComplexArray::from_slice(code.word1().as_slice()),
            ],
            induced_jumps: code
                .induced_jumps()
                .iter()
                .map(|b| ComplexArray::from_slice(b.as_slice()))
                .collect(),
            control: ComplexArray::from_slice(code.control().as_slice()),
            metadata,
        }
    }

    pub fn to_code(&self) -> Result<AqecCode> {
        let n = self.dimension;
        let w0 = CVector::from_vec(self.words[0].to_vec(n, "word 0")?);
        let w1 = CVector::from_vec(self.words[1].to_vec(n, "word 1")?);
        let jumps = self
            .induced_jumps
            .iter()
            .enumerate()
            .map(|(l, b)| CMatrix::new(n, n, b.to_vec(n * n, &format!("induced jump {l}"))?))
            .collect::<Result<Vec<_>>>()?;
        let control = CMatrix::new(n, n, self.control.to_vec(n * n, "control")?)?;
        AqecCode::new(w0, w1, jumps, control)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Leakage target for a model: the reference code space of that dimension
/// when one exists, otherwise the span of the starting words.
pub fn default_target(model: &ModelSpec, initial: &AqecCode) -> Result<Subspace> {
    let n = model.dim();
    match n {
        4 => Subspace::from_levels("code_space", 4, &[1, 3]),
        5 => Subspace::from_code("code_space", &binomial_code(0.0)?),
        n if n >= 6 && n % 2 == 0 => Subspace::from_levels("code_space", n, &[n / 2 - 1, n - 1]),
        _ => Subspace::from_code("code_space", initial),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub model: ModelSpec,
    pub code: String,
    pub gamma_ratio: f64,
    pub tau: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub kappa: Option<f64>,
    pub kappa_error: Option<String>,
    pub beta1: f64,
    pub beta2: f64,
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(())
}

fn evaluate_code(cfg: &RunConfig, model: &ModelSpec, code: &AqecCode) -> Result<EvaluateReport> {
    let m = model.build()?;
    let f = FidelityEvaluator::new(&m, cfg.optimizer.tau)?.fidelity(code)?;
    let (k, kerr) = match kappa(&m, code, &cfg.kappa) {
        Ok(k) => (Some(k), None),
        Err(e @ AqecError::KappaUndefined { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(EvaluateReport {
        model: *model,
        code: cfg.code.to_string(),
        gamma_ratio: cfg.gamma_ratio,
        tau: cfg.optimizer.tau,
        fidelity: f,
        infidelity: 1.0 - f,
        kappa: k,
        kappa_error: kerr,
        beta1: cfg.kappa.beta1,
        beta2: cfg.kappa.beta2,
    })
}

/// Fidelity and κ of the configured code; writes `evaluate.json`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateReport> {
    cfg.validate()?;
    let code = cfg.build_code(&cfg.model)?;
    let report = evaluate_code(cfg, &cfg.model, &code)?;
    prepare_out_dir(cfg)?;
    let w = BufWriter::new(File::create(cfg.out_dir.join("evaluate.json"))?);
    serde_json::to_writer_pretty(w, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeReport {
    pub artifact: PathBuf,
    pub log: PathBuf,
    pub initial_fidelity: f64,
    pub final_fidelity: f64,
    pub iterations: usize,
    pub termination: Option<TerminationReason>,
}

fn write_log(log: &ConvergenceLog, path: &Path) -> Result<()> {
    log.write_csv(BufWriter::new(File::create(path)?))
}

fn run_optimize(cfg: &RunConfig, model: &ModelSpec) -> Result<(AqecCode, ConvergenceLog)> {
    let m = model.build()?;
    let opt = cfg.effective_optimizer();
    let initial = cfg.build_code(model)?;
    let target = default_target(model, &initial)?;
    optimizer::Optimizer::new(&m, &opt, Some(initial))?
        .with_targets(vec![target])
        .run()
}

/// Runs the optimizer from the configured code and writes `code.json` and
/// `convergence.csv`.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeReport> {
    cfg.validate()?;
    let (code, log) = run_optimize(cfg, &cfg.model)?;
    prepare_out_dir(cfg)?;
    let artifact = cfg.out_dir.join("code.json");
    let log_path = cfg.out_dir.join("convergence.csv");
    let meta = ArtifactMetadata {
        model: cfg.model,
        gamma_ratio: cfg.code.is_reference().then_some(cfg.gamma_ratio),
        tau: cfg.optimizer.tau,
        fidelity: log.final_fidelity(),
        seed: Some(cfg.optimizer.seed),
        source: format!("optimized from {}", cfg.code),
        iterations: Some(log.iterations()),
        termination: log.termination,
    };
    CodeArtifact::from_code(&code, meta).save(&artifact)?;
    write_log(&log, &log_path)?;
    Ok(OptimizeReport {
        artifact,
        log: log_path,
        initial_fidelity: log.initial_fidelity,
        final_fidelity: log.final_fidelity(),
        iterations: log.iterations(),
        termination: log.termination,
    })
}

/// One line of the sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub fidelity: Option<f64>,
    pub infidelity: Option<f64>,
    pub kappa: Option<f64>,
    pub source: String,
    pub error: Option<String>,
}

fn sweep_point(cfg: &RunConfig, alpha: f64) -> Result<(f64, Option<f64>, String)> {
    let model = cfg.model.with_alpha(alpha);
    let m = model.build()?;
    let (code, source) = match cfg.sweep_mode {
        SweepMode::Evaluate => {
            let source = if cfg.code.is_reference() { "reference" } else { "fixed" };
            (cfg.build_code(&model)?, source.to_string())
        }
        SweepMode::Optimize => (run_optimize(cfg, &model)?.0, "optimized".to_string()),
        SweepMode::RandomBest => {
            let runs = optimizer::multi_seed(&m, &cfg.effective_optimizer(), cfg.num_seeds)?;
            (runs[0].code.clone(), "random-best".to_string())
        }
    };
    let report = evaluate_code(cfg, &model, &code)?;
    Ok((report.fidelity, report.kappa, source))
}

/// Evaluates or optimizes at each exponent on the power-law family and
/// writes `sweep.csv`. A failing point is recorded and the sweep goes on.
pub fn cmd_sweep(cfg: &RunConfig, values: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(AqecError::invalid("sweep needs at least one value"));
    }
    let rows: Vec<SweepRow> = values
        .iter()
        .map(|&alpha| match sweep_point(cfg, alpha) {
            Ok((f, k, source)) => SweepRow {
                alpha,
                fidelity: Some(f),
                infidelity: Some(1.0 - f),
                kappa: k,
                source,
                error: None,
            },
            Err(e) => SweepRow {
                alpha,
                fidelity: None,
                infidelity: None,
                kappa: None,
                source: "failed".into(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    prepare_out_dir(cfg)?;
    let mut w = csv::Writer::from_path(cfg.out_dir.join("sweep.csv"))?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub seed: u64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub iterations: usize,
    pub termination: Option<TerminationReason>,
    pub artifact: String,
}

/// Independent random-start runs; writes one artifact and one convergence
/// log per seed plus `ranking.csv`, best first.
pub fn cmd_seeds(cfg: &RunConfig, num_seeds: usize) -> Result<Vec<RankingRow>> {
    cfg.validate()?;
    let m = cfg.model.build()?;
    let opt = cfg.effective_optimizer();
    let target = default_target(&cfg.model, &optimizer::init_random(&m, &opt)?)?;
    let runs = optimizer::multi_seed_with_targets(&m, &opt, num_seeds, &[target])?;
    prepare_out_dir(cfg)?;
    let mut rows = Vec::with_capacity(runs.len());
    for (rank, run) in runs.iter().enumerate() {
        let name = format!("seed_{}.json", run.seed);
        let meta = ArtifactMetadata {
            model: cfg.model,
            gamma_ratio: None,
            tau: opt.tau,
            fidelity: run.fidelity,
            seed: Some(run.seed),
            source: "random".into(),
            iterations: Some(run.log.iterations()),
            termination: run.log.termination,
        };
        CodeArtifact::from_code(&run.code, meta).save(&cfg.out_dir.join(&name))?;
        write_log(&run.log, &cfg.out_dir.join(format!("seed_{}.csv", run.seed)))?;
        rows.push(RankingRow {
            rank: rank + 1,
            seed: run.seed,
            fidelity: run.fidelity,
            infidelity: 1.0 - run.fidelity,
            iterations: run.log.iterations(),
            termination: run.log.termination,
            artifact: name,
        });
    }
    let mut w = csv::Writer::from_path(cfg.out_dir.join("ranking.csv"))?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Freeze {
    Basis,
    B,
    O,
}

#[derive(Debug, Parser)]
#[command(name = "aqec", version, about = "Search and evaluate autonomous QEC codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity and kappa of a fixed code.
    Evaluate,
    /// Optimize a code and write the artifact and convergence log.
    Optimize,
    /// Sweep the power-law exponent.
    Sweep {
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, value_enum)]
        mode: Option<SweepMode>,
    },
    /// Multi-seed random-start campaign.
    Seeds,
}

#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// uniform | photon_loss | power_law | power_law(ALPHA)
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// thirteen | binomial | ladder | random | path to a code artifact
    #[arg(long, global = true)]
    pub code: Option<String>,
    #[arg(long, global = true)]
    pub gamma_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, num_args = 1..)]
    pub freeze: Vec<Freeze>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub beta1: Option<f64>,
    #[arg(long, global = true)]
    pub beta2: Option<f64>,
    #[arg(long, global = true)]
    pub seeds: Option<usize>,
    /// Allow iteration budgets above 10^4.
    #[arg(long, global = true)]
    pub long_running: bool,
}

impl Overrides {
    /// Loads the base configuration (if any) and applies the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.model.is_some() || self.n.is_some() || self.alpha.is_some() {
            let name = match &self.model {
                Some(name) => name.clone(),
                None => match cfg.model {
                    ModelSpec::Uniform { .. } => "uniform".into(),
                    ModelSpec::PhotonLoss { .. } => "photon_loss".into(),
                    ModelSpec::PowerLaw { .. } => "power_law".into(),
                },
            };
            let n = self.n.unwrap_or(cfg.model.dim());
            cfg.model = ModelSpec::parse(&name, n, self.alpha.or(cfg.model.alpha()))?;
        }
        if let Some(code) = &self.code {
            cfg.code = code.parse()?;
        }
        if let Some(g) = self.gamma_ratio {
            cfg.gamma_ratio = g;
        }
        if let Some(t) = self.tau {
            cfg.optimizer.tau = t;
        }
        if let Some(k) = self.max_iter {
            cfg.optimizer.max_iterations = k;
        }
        if let Some(s) = self.seed {
            cfg.optimizer.seed = s;
        }
        for f in &self.freeze {
            match f {
                Freeze::Basis => cfg.optimizer.freeze_basis = true,
                Freeze::B => cfg.optimizer.freeze_b = true,
                Freeze::O => cfg.optimizer.freeze_o = true,
            }
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(b) = self.beta1 {
            cfg.kappa.beta1 = b;
        }
        if let Some(b) = self.beta2 {
            cfg.kappa.beta2 = b;
        }
        if let Some(s) = self.seeds {
            cfg.num_seeds = s;
        }
        cfg.long_running |= self.long_running;
        Ok(cfg)
    }
}

/// Process exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &AqecError) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = cli.overrides.resolve()?;
    if cfg.budget_was_capped() {
        eprintln!(
            "note: iteration budget capped at {LONG_RUN_ITERATIONS}; pass --long-running for more"
        );
    }
    match &cli.command {
        Command::Evaluate => {
            let r = cmd_evaluate(&cfg)?;
            println!("model      {}", r.model);
            println!("code       {} (gamma ratio {:e})", r.code, r.gamma_ratio);
            println!("tau        {}", r.tau);
            println!("fidelity   {:.12}", r.fidelity);
            println!("infidelity {:.6e}", r.infidelity);
            match (r.kappa, &r.kappa_error) {
                (Some(k), _) => println!("kappa      {k:.6}"),
                (None, Some(e)) => println!("kappa      undefined ({e})"),
                (None, None) => println!("kappa      undefined"),
            }
        }
        Command::Optimize => {
            let r = cmd_optimize(&cfg)?;
            println!(
                "fidelity {:.12} -> {:.12} after {} iterations ({})",
                r.initial_fidelity,
                r.final_fidelity,
                r.iterations,
                r.termination.map_or("running".to_string(), |t| t.to_string())
            );
            println!("wrote {} and {}", r.artifact.display(), r.log.display());
        }
        Command::Sweep { values, mode } => {
            if let Some(mode) = mode {
                cfg.sweep_mode = *mode;
            }
            let values = if values.is_empty() { cfg.sweep_values.clone() } else { values.clone() };
            for row in cmd_sweep(&cfg, &values)? {
                match (row.fidelity, &row.error) {
                    (Some(f), _) => println!(
                        "alpha {:<6} F {:.10} kappa {} [{}]",
                        row.alpha,
                        f,
                        row.kappa.map_or("-".into(), |k| format!("{k:.5}")),
                        row.source
                    ),
                    (None, e) => println!("alpha {:<6} failed: {}", row.alpha, e.as_deref().unwrap_or("?")),
                }
            }
        }
        Command::Seeds => {
            for row in cmd_seeds(&cfg, cfg.num_seeds)? {
                println!("#{:<3} seed {:<8} F {:.10} ({} iterations)", row.rank, row.seed, row.fidelity, row.iterations);
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_source_parsing() {
        assert_eq!("thirteen".parse::<CodeSource>().unwrap(), CodeSource::Thirteen);
        assert_eq!("random".parse::<CodeSource>().unwrap(), CodeSource::Random);
        assert_eq!(
            "runs/code.json".parse::<CodeSource>().unwrap(),
            CodeSource::File(PathBuf::from("runs/code.json"))
        );
        let json = serde_json::to_string(&CodeSource::Binomial).unwrap();
        assert_eq!(json, "\"binomial\"");
    }

    #[test]
    fn config_defaults_and_overrides() {
        let cfg: RunConfig = serde_json::from_str(r#"{"model":{"name":"photon_loss","n":5},"code":"binomial"}"#).unwrap();
        assert_eq!(cfg.model, ModelSpec::PhotonLoss { n: 5 });
        assert_eq!(cfg.gamma_ratio, 1e6);
        assert_eq!(cfg.optimizer.tau, 1.0);
        let cli = Cli::try_parse_from([
            "aqec", "optimize", "--model", "power_law", "--n", "5", "--alpha", "0.45", "--freeze", "b", "o",
            "--seed", "9",
        ])
        .unwrap();
        let cfg = cli.overrides.resolve().unwrap();
        assert_eq!(cfg.model, ModelSpec::PowerLaw { n: 5, alpha: 0.45 });
        assert!(cfg.optimizer.freeze_b && cfg.optimizer.freeze_o && !cfg.optimizer.freeze_basis);
        assert_eq!(cfg.optimizer.seed, 9);
        assert!(serde_json::from_str::<RunConfig>(r#"{"modle":{}}"#).is_err());
    }

    #[test]
    fn budget_gate() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.effective_optimizer().max_iterations, LONG_RUN_ITERATIONS);
        assert!(cfg.budget_was_capped());
        cfg.long_running = true;
        assert_eq!(cfg.effective_optimizer().max_iterations, 100_000);
    }

    #[test]
    fn artifact_round_trip_is_exact() {
        let code = binomial_code(1e6).unwrap();
        let meta = ArtifactMetadata {
            model: ModelSpec::PhotonLoss { n: 5 },
            gamma_ratio: Some(1e6),
            tau: 1.0,
            fidelity: 0.999994,
            seed: None,
            source: "binomial".into(),
            iterations: None,
            termination: None,
        };
        let art = CodeArtifact::from_code(&code, meta);
        let text = serde_json::to_string(&art).unwrap();
        let back: CodeArtifact = serde_json::from_str(&text).unwrap();
        assert_eq!(back, art);
        assert_eq!(back.to_code().unwrap(), code);
    }

    #[test]
    fn malformed_artifact_is_rejected() {
        let code = thirteen_code(1.0).unwrap();
        let meta = ArtifactMetadata {
            model: ModelSpec::Uniform { n: 4 },
            gamma_ratio: None,
            tau: 1.0,
            fidelity: 0.0,
            seed: None,
            source: String::new(),
            iterations: None,
            termination: None,
        };
        let mut art = CodeArtifact::from_code(&code, meta);
        art.control.re.pop();
        assert!(art.to_code().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&AqecError::Singular), 2);
        assert_eq!(exit_code(&AqecError::invalid("x")), 1);
        assert_eq!(run(["aqec", "frobnicate"]), 1);
        assert_eq!(run(["aqec", "evaluate", "--model", "thermal"]), 1);
    }
}
