//! Alternating gradient ascent on the projector fidelity.
//!
//! Each iteration updates, in order, the code basis, every induced jump
//! operator, and the control Hamiltonian. Every update is a forward
//! finite-difference gradient followed by a march-and-zoom line search
//! along the normalized gradient. Only improvements are accepted, so the
//! fidelity history never decreases.

use std::fmt;
use std::io::{Read, Write};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{AqecCode, FidelityEvaluator, Subspace};
use crate::error::{AqecError, Result};
use crate::matcore::{expm, gell_mann, orthonormal_pair, orthonormalize, CMatrix, CVector, GeneratorSet, I};
use crate::models::QuditModel;

/// An evaluation that beats the incumbent by less than this counts as a
/// decrease.
pub const PLATEAU_TOL: f64 = 1e-15;
/// Gradient norm below which a component is considered stationary.
pub const ZERO_GRADIENT_TOL: f64 = 1e-14;
/// Largest step along a unit-norm basis generator; the rotation angle is
/// periodic on this scale.
pub const BASIS_STEP_CAP: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Evaluation time in units of 1/γ.
    pub tau: f64,
    pub max_iterations: usize,
    pub stagnation_window: usize,
    pub stagnation_threshold: f64,
    /// Generator coefficient for the basis finite differences.
    pub basis_probe: f64,
    pub basis_initial_step: f64,
    /// Entry increment for the matrix finite differences; also the first
    /// step of the matrix line searches.
    pub matrix_probe: f64,
    pub matrix_step_cap: f64,
    pub zoom_tolerance: f64,
    pub freeze_basis: bool,
    pub freeze_b: bool,
    pub freeze_o: bool,
    pub seed: u64,
    pub num_induced_jumps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            max_iterations: 100_000,
            stagnation_window: 1_000,
            stagnation_threshold: 1e-8,
            basis_probe: 1e-8,
            basis_initial_step: 1e-2,
            matrix_probe: 1e-6,
            matrix_step_cap: 1e4,
            zoom_tolerance: 1e-8,
            freeze_basis: false,
            freeze_b: false,
            freeze_o: false,
            seed: 0,
            num_induced_jumps: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("stagnation_threshold", self.stagnation_threshold),
            ("basis_probe", self.basis_probe),
            ("basis_initial_step", self.basis_initial_step),
            ("matrix_probe", self.matrix_probe),
            ("matrix_step_cap", self.matrix_step_cap),
            ("zoom_tolerance", self.zoom_tolerance),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AqecError::invalid(format!("{name} must be positive, got {value}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(AqecError::invalid("max_iterations must be at least 1"));
        }
        if self.stagnation_window == 0 {
            return Err(AqecError::invalid("stagnation_window must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxIterations,
    Stagnation,
    ZeroGradient,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::Stagnation => "stagnation",
            TerminationReason::ZeroGradient => "zero_gradient",
        })
    }
}

/// Diagnostics for one completed iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub fidelity: f64,
    pub basis_step: f64,
    pub b_steps: Vec<f64>,
    pub o_step: f64,
    /// Leakage of the code words outside each target subspace.
    pub leakage: Vec<f64>,
    pub max_abs_b: f64,
    pub max_abs_o: f64,
    pub wall_ms: f64,
}

impl IterationRecord {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceLog {
    pub initial_fidelity: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Option<TerminationReason>,
    pub target_names: Vec<String>,
}

impl ConvergenceLog {
    /// `(iteration, fidelity)` pairs starting with iteration 0.
    pub fn fidelity_history(&self) -> Vec<(usize, f64)> {
        std::iter::once((0, self.initial_fidelity))
            .chain(self.records.iter().map(|r| (r.iteration, r.fidelity)))
            .collect()
    }

    pub fn final_fidelity(&self) -> f64 {
        self.records.last().map_or(self.initial_fidelity, |r| r.fidelity)
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// CSV header: `iteration, fidelity, infidelity, basis_step, b_step_<l>
    /// per induced jump, o_step, leakage_code_space, max_abs_b, wall_ms`,
    /// followed by `leakage_<name>` for every target after the first.
    pub fn csv_header(&self) -> Vec<String> {
        let n_b = self.records.first().map_or(0, |r| r.b_steps.len());
        let mut h = vec![
            "iteration".to_string(),
            "fidelity".into(),
            "infidelity".into(),
            "basis_step".into(),
        ];
        h.extend((0..n_b).map(|l| format!("b_step_{l}")));
        h.extend(["o_step", "leakage_code_space", "max_abs_b", "wall_ms"].map(String::from));
        h.extend(self.target_names.iter().skip(1).map(|n| format!("leakage_{n}")));
        h
    }

    /// Writes one row per iteration, with row 0 holding the initial
    /// fidelity. Floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header = self.csv_header();
        w.write_record(&header)?;
        let n_b = self.records.first().map_or(0, |r| r.b_steps.len());
        let mut initial = vec![
            "0".to_string(),
            self.initial_fidelity.to_string(),
            (1.0 - self.initial_fidelity).to_string(),
        ];
        initial.resize(header.len(), String::new());
        w.write_record(&initial)?;
        for r in &self.records {
            let mut row = vec![
                r.iteration.to_string(),
                r.fidelity.to_string(),
                r.infidelity().to_string(),
                r.basis_step.to_string(),
            ];
            row.extend((0..n_b).map(|l| r.b_steps.get(l).map_or(String::new(), f64::to_string)));
            row.push(r.o_step.to_string());
            row.push(r.leakage.first().map_or(String::new(), f64::to_string));
            row.push(r.max_abs_b.to_string());
            row.push(r.wall_ms.to_string());
            row.extend(r.leakage.iter().skip(1).map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads back the `(iteration, fidelity)` columns of a log written by
    /// [`ConvergenceLog::write_csv`].
    pub fn read_fidelity_history<R: Read>(reader: R) -> Result<Vec<(usize, f64)>> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| AqecError::invalid(format!("log is missing column {name:?}")))
        };
        let (ci, cf) = (col("iteration")?, col("fidelity")?);
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let it = rec[ci]
                .parse()
                .map_err(|_| AqecError::invalid(format!("bad iteration {:?}", &rec[ci])))?;
            let f = rec[cf]
                .parse()
                .map_err(|_| AqecError::invalid(format!("bad fidelity {:?}", &rec[cf])))?;
            out.push((it, f));
        }
        Ok(out)
    }
}

/// Mutable state of a run.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub iteration: usize,
    pub code: AqecCode,
    pub fidelity: f64,
    pub fidelity_history: Vec<(usize, f64)>,
    pub termination_reason: Option<TerminationReason>,
}

/// Outcome of a one-dimensional search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchResult {
    pub step: f64,
    pub fidelity: f64,
    pub evaluations: usize,
}

/// [`try_line_search`] for infallible objectives.
pub fn line_search(
    mut evaluate: impl FnMut(f64) -> f64,
    initial_step: f64,
    step_cap: f64,
    zoom_tol: f64,
) -> LineSearchResult {
    let f0 = evaluate(0.0);
    let r: std::result::Result<_, std::convert::Infallible> = line_search_from(
        |s| Ok(evaluate(s)),
        f0,
        initial_step,
        step_cap,
        zoom_tol,
        PLATEAU_TOL,
    );
    let mut r = r.unwrap_or_else(|e| match e {});
    r.evaluations += 1;
    r
}

/// Marches along `s > 0` with steps `s0, 2 s0, 4 s0, …` (clamped to the
/// cap) until the objective stops increasing, then shrinks the bracket
/// around the best point by bisecting its larger half until the bracket
/// is no wider than `zoom_tol`.
pub fn try_line_search<E>(
    mut evaluate: impl FnMut(f64) -> std::result::Result<f64, E>,
    initial_step: f64,
    step_cap: f64,
    zoom_tol: f64,
) -> std::result::Result<LineSearchResult, E> {
    let f0 = evaluate(0.0)?;
    let mut r = line_search_from(evaluate, f0, initial_step, step_cap, zoom_tol, PLATEAU_TOL)?;
    r.evaluations += 1;
    Ok(r)
}

/// Line search with the value at the origin already known. Gains of at
/// most `resolution` count as no gain.
pub(crate) fn line_search_from<E>(
    mut evaluate: impl FnMut(f64) -> std::result::Result<f64, E>,
    f0: f64,
    initial_step: f64,
    step_cap: f64,
    zoom_tol: f64,
    resolution: f64,
) -> std::result::Result<LineSearchResult, E> {
    let improves = |candidate: f64, incumbent: f64| candidate - incumbent > resolution;
    let mut evaluations = 0;
    let mut eval = |s: f64| {
        evaluations += 1;
        evaluate(s)
    };
    // march: (left, best) are the last two accepted points
    let (mut left, mut f_left) = (0.0, f0);
    let (mut best, mut f_best) = (0.0, f0);
    let mut s = initial_step.min(step_cap);
    let (right, f_right) = loop {
        let f = eval(s)?;
        if improves(f, f_best) {
            (left, f_left) = (best, f_best);
            (best, f_best) = (s, f);
            if s >= step_cap {
                return Ok(LineSearchResult {
                    step: best,
                    fidelity: f_best,
                    evaluations,
                });
            }
            s = (2.0 * s).min(step_cap);
        } else {
            break (s, f);
        }
    };
    // zoom on [a, c] around best
    let (mut a, mut fa, mut c, mut fc) = (left, f_left, right, f_right);
    while c - a > zoom_tol {
        if f_best - fa.min(fc) <= resolution {
            // the objective no longer resolves the bracket
            break;
        }
        let x = if c - best >= best - a {
            0.5 * (best + c)
        } else {
            0.5 * (a + best)
        };
        if x == best || x == a || x == c {
            break;
        }
        let f = eval(x)?;
        if improves(f, f_best) {
            if x > best {
                (a, fa) = (best, f_best);
            } else {
                (c, fc) = (best, f_best);
            }
            (best, f_best) = (x, f);
        } else if x > best {
            (c, fc) = (x, f);
        } else {
            (a, fa) = (x, f);
        }
    }
    Ok(LineSearchResult {
        step: best,
        fidelity: f_best,
        evaluations,
    })
}

/// Which matrix of the code a matrix update acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixTarget {
    InducedJump(usize),
    Control,
}

/// Random initial code: Gaussian orthonormal words, induced jumps with
/// real and imaginary parts uniform in [-0.5, 0.5], and a Hermitian control
/// drawn the same way on and above the diagonal (real diagonal).
pub fn init_random(model: &QuditModel, cfg: &OptimizerConfig) -> Result<AqecCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    init_random_with(model.dim(), cfg.num_induced_jumps, &mut rng)
}

pub fn init_random_with<R: Rng + ?Sized>(
    n: usize,
    num_induced_jumps: usize,
    rng: &mut R,
) -> Result<AqecCode> {
    let (w0, w1) = orthonormal_pair(n, rng)?;
    let mut uniform = || rng.random_range(-0.5..=0.5);
    let jumps = (0..num_induced_jumps)
        .map(|_| CMatrix::from_fn(n, n, |_, _| Complex64::new(uniform(), uniform())))
        .collect();
    let mut control = CMatrix::zeros(n, n);
    for i in 0..n {
        control[(i, i)] = Complex64::new(uniform(), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(uniform(), uniform());
            control[(i, j)] = z;
            control[(j, i)] = z.conj();
        }
    }
    AqecCode::new(w0, w1, jumps, control)
}

fn with_words_unchecked(code: &AqecCode, w0: CVector, w1: CVector) -> AqecCode {
    AqecCode::from_parts_unchecked(w0, w1, code.induced_jumps().to_vec(), code.control().clone())
}

fn with_matrix_unchecked(code: &AqecCode, which: MatrixTarget, m: CMatrix) -> AqecCode {
    let mut jumps = code.induced_jumps().to_vec();
    let mut control = code.control().clone();
    match which {
        MatrixTarget::InducedJump(l) => jumps[l] = m,
        MatrixTarget::Control => control = m,
    }
    AqecCode::from_parts_unchecked(code.word0().clone(), code.word1().clone(), jumps, control)
}

fn current_matrix(code: &AqecCode, which: MatrixTarget) -> Result<&CMatrix> {
    match which {
        MatrixTarget::InducedJump(l) => code
            .induced_jumps()
            .get(l)
            .ok_or_else(|| AqecError::invalid(format!("code has no induced jump #{l}"))),
        MatrixTarget::Control => Ok(code.control()),
    }
}

/// Number of real directions of a matrix update: 2n² for a general jump
/// operator, n² for a Hermitian control.
fn matrix_directions(n: usize, which: MatrixTarget) -> usize {
    match which {
        MatrixTarget::InducedJump(_) => 2 * n * n,
        MatrixTarget::Control => n * n,
    }
}

/// Unit perturbation of the k-th real direction.
fn matrix_direction(n: usize, which: MatrixTarget, k: usize) -> CMatrix {
    let mut d = CMatrix::zeros(n, n);
    match which {
        MatrixTarget::InducedJump(_) => {
            let (entry, imag) = (k / 2, k % 2 == 1);
            d[(entry / n, entry % n)] = if imag { I } else { Complex64::new(1.0, 0.0) };
        }
        MatrixTarget::Control => {
            if k < n {
                d[(k, k)] = Complex64::new(1.0, 0.0);
            } else {
                let off = k - n;
                let (pair, imag) = (off / 2, off % 2 == 1);
                let (i, j) = upper_pair(n, pair);
                let z = if imag { I } else { Complex64::new(1.0, 0.0) };
                d[(i, j)] = z;
                d[(j, i)] = z.conj();
            }
        }
    }
    d
}

fn upper_pair(n: usize, mut index: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - 1 - i;
        if index < row {
            return (i, i + 1 + index);
        }
        index -= row;
    }
    unreachable!("upper-triangle index out of range")
}

/// Direction matrix `Σ_k g_k D_k` for a gradient over the real directions.
fn matrix_from_gradient(n: usize, which: MatrixTarget, gradient: &[f64]) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for (k, &g) in gradient.iter().enumerate() {
        if g != 0.0 {
            out.axpy(g.into(), &matrix_direction(n, which, k));
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Outcome of one component update.
#[derive(Clone, Debug)]
struct UpdateOutcome {
    code: AqecCode,
    fidelity: f64,
    step: f64,
    gradient_norm: f64,
}

/// Holds the pieces reused across updates: the fidelity evaluator and the
/// SU(n) generators.
struct Engine {
    evaluator: FidelityEvaluator,
    generators: GeneratorSet,
    cfg: OptimizerConfig,
}

impl Engine {
    fn new(model: &QuditModel, cfg: &OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            evaluator: FidelityEvaluator::new(model, cfg.tau)?,
            generators: gell_mann(model.dim())?,
            cfg: cfg.clone(),
        })
    }

    fn check_dim(&self, code: &AqecCode) -> Result<()> {
        if code.dim() != self.evaluator.dim() {
            return Err(AqecError::DimensionMismatch {
                expected: self.evaluator.dim(),
                found: code.dim(),
            });
        }
        Ok(())
    }

    fn fidelity(&self, code: &AqecCode) -> Result<f64> {
        self.evaluator.fidelity(code)
    }

    /// Smallest fidelity gain a line search will accept at `code`: gains
    /// below the rounding error of the evaluation are noise, and chasing
    /// them lets a run drift away from an exact optimum.
    fn resolution(&self, code: &AqecCode) -> Result<f64> {
        Ok(self.evaluator.rounding_floor(code)?.max(PLATEAU_TOL))
    }

    fn rotate(&self, code: &AqecCode, generator: &CMatrix, s: f64) -> Result<AqecCode> {
        let u = expm(&generator.scale(I), s)?;
        let (w0, w1) = orthonormalize(&u.matvec(code.word0()), &u.matvec(code.word1()))?;
        Ok(with_words_unchecked(code, w0, w1))
    }

    fn basis_gradient(&self, code: &AqecCode, f: f64) -> Result<Vec<f64>> {
        let lambda = self.cfg.basis_probe;
        self.generators
            .generators()
            .par_iter()
            .map(|g| {
                let u = expm(&g.scale(I), lambda)?;
                let probe = with_words_unchecked(
                    code,
                    u.matvec(code.word0()),
                    u.matvec(code.word1()),
                );
                Ok((self.fidelity(&probe)? - f) / lambda)
            })
            .collect()
    }

    fn update_basis(&self, code: &AqecCode, f: f64) -> Result<UpdateOutcome> {
        let gradient = self.basis_gradient(code, f)?;
        let gnorm = norm(&gradient);
        if !(gnorm >= ZERO_GRADIENT_TOL) {
            return Ok(UpdateOutcome {
                code: code.clone(),
                fidelity: f,
                step: 0.0,
                gradient_norm: if gnorm.is_nan() { 0.0 } else { gnorm },
            });
        }
        let unit: Vec<f64> = gradient.iter().map(|g| g / gnorm).collect();
        let generator = self.generators.combine(&unit);
        let search = line_search_from(
            |s| self.fidelity(&self.rotate(code, &generator, s)?),
            f,
            self.cfg.basis_initial_step,
            BASIS_STEP_CAP,
            self.cfg.zoom_tolerance,
            self.resolution(code)?,
        )?;
        let code = if search.step > 0.0 {
            self.rotate(code, &generator, search.step)?
        } else {
            code.clone()
        };
        Ok(UpdateOutcome {
            code,
            fidelity: search.fidelity,
            step: search.step,
            gradient_norm: gnorm,
        })
    }

    fn matrix_gradient(&self, code: &AqecCode, f: f64, which: MatrixTarget) -> Result<Vec<f64>> {
        let base = current_matrix(code, which)?;
        let n = code.dim();
        let delta = self.cfg.matrix_probe;
        (0..matrix_directions(n, which))
            .into_par_iter()
            .map(|k| {
                let mut m = base.clone();
                m.axpy(delta.into(), &matrix_direction(n, which, k));
                Ok((self.fidelity(&with_matrix_unchecked(code, which, m))? - f) / delta)
            })
            .collect()
    }

    fn update_matrix(&self, code: &AqecCode, f: f64, which: MatrixTarget) -> Result<UpdateOutcome> {
        let gradient = self.matrix_gradient(code, f, which)?;
        let gnorm = norm(&gradient);
        if !(gnorm >= ZERO_GRADIENT_TOL) {
            return Ok(UpdateOutcome {
                code: code.clone(),
                fidelity: f,
                step: 0.0,
                gradient_norm: if gnorm.is_nan() { 0.0 } else { gnorm },
            });
        }
        let unit: Vec<f64> = gradient.iter().map(|g| g / gnorm).collect();
        let n = code.dim();
        let direction = matrix_from_gradient(n, which, &unit);
        let base = current_matrix(code, which)?.clone();
        let moved = |s: f64| {
            let mut m = base.clone();
            m.axpy(s.into(), &direction);
            with_matrix_unchecked(code, which, m)
        };
        let search = line_search_from(
            |s| self.fidelity(&moved(s)),
            f,
            self.cfg.matrix_probe,
            self.cfg.matrix_step_cap,
            self.cfg.zoom_tolerance,
            self.resolution(code)?,
        )?;
        let code = if search.step > 0.0 { moved(search.step) } else { code.clone() };
        Ok(UpdateOutcome {
            code,
            fidelity: search.fidelity,
            step: search.step,
            gradient_norm: gnorm,
        })
    }
}

/// Forward-difference gradient of F over the SU(n) generators: component m
/// is `[F(exp(iλG_m) w) − F(w)] / λ`, both words rotated together.
pub fn basis_gradient(model: &QuditModel, code: &AqecCode, cfg: &OptimizerConfig) -> Result<Vec<f64>> {
    let engine = Engine::new(model, cfg)?;
    engine.check_dim(code)?;
    let f = engine.fidelity(code)?;
    engine.basis_gradient(code, f)
}

/// Forward-difference gradient over the real directions of one matrix.
/// Control directions are ordered: diagonal entries, then for each upper
/// pair `(i, j)` the real and imaginary parts.
pub fn matrix_gradient(
    model: &QuditModel,
    code: &AqecCode,
    cfg: &OptimizerConfig,
    which: MatrixTarget,
) -> Result<Vec<f64>> {
    let engine = Engine::new(model, cfg)?;
    engine.check_dim(code)?;
    let f = engine.fidelity(code)?;
    engine.matrix_gradient(code, f, which)
}

/// One basis update: rotate both code words along the best generator.
pub fn update_basis(model: &QuditModel, code: &AqecCode, cfg: &OptimizerConfig) -> Result<AqecCode> {
    let engine = Engine::new(model, cfg)?;
    engine.check_dim(code)?;
    let f = engine.fidelity(code)?;
    Ok(engine.update_basis(code, f)?.code)
}

/// One update of an induced jump operator or of the control Hamiltonian.
pub fn update_matrix(
    model: &QuditModel,
    code: &AqecCode,
    cfg: &OptimizerConfig,
    which: MatrixTarget,
) -> Result<AqecCode> {
    let engine = Engine::new(model, cfg)?;
    engine.check_dim(code)?;
    let f = engine.fidelity(code)?;
    Ok(engine.update_matrix(code, f, which)?.code)
}

/// Iterative driver; see [`optimize`] for the one-call form.
pub struct Optimizer {
    engine: Engine,
    state: OptimizerState,
    log: ConvergenceLog,
    targets: Vec<Subspace>,
    started: Instant,
}

impl Optimizer {
    pub fn new(model: &QuditModel, cfg: &OptimizerConfig, initial: Option<AqecCode>) -> Result<Self> {
        let engine = Engine::new(model, cfg)?;
        let code = match initial {
            Some(code) => code,
            None => init_random(model, cfg)?,
        };
        engine.check_dim(&code)?;
        let fidelity = engine.fidelity(&code)?;
        Ok(Self {
            engine,
            state: OptimizerState {
                iteration: 0,
                code,
                fidelity,
                fidelity_history: vec![(0, fidelity)],
                termination_reason: None,
            },
            log: ConvergenceLog {
                initial_fidelity: fidelity,
                records: Vec::new(),
                termination: None,
                target_names: Vec::new(),
            },
            targets: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Subspaces whose leakage is recorded every iteration. The first one
    /// fills the `leakage_code_space` log column.
    pub fn with_targets(mut self, targets: Vec<Subspace>) -> Self {
        self.log.target_names = targets.iter().map(|t| t.name().to_string()).collect();
        self.targets = targets;
        self
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn log(&self) -> &ConvergenceLog {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.state.termination_reason.is_some()
    }

    fn all_frozen(&self) -> bool {
        let cfg = &self.engine.cfg;
        cfg.freeze_basis
            && (cfg.freeze_b || self.state.code.induced_jumps().is_empty())
            && cfg.freeze_o
    }

    fn finish(&mut self, reason: TerminationReason) {
        self.state.termination_reason = Some(reason);
        self.log.termination = Some(reason);
    }

    /// Runs one full iteration (basis, each induced jump, control) and
    /// checks the termination rules. Returns the termination reason once
    /// the run is over.
    pub fn step(&mut self) -> Result<Option<TerminationReason>> {
        if let Some(reason) = self.state.termination_reason {
            return Ok(Some(reason));
        }
        if self.all_frozen() {
            self.finish(TerminationReason::ZeroGradient);
            return Ok(self.state.termination_reason);
        }
        let cfg = self.engine.cfg.clone();
        let mut code = self.state.code.clone();
        let mut f = self.state.fidelity;
        let mut max_gradient: f64 = 0.0;

        let mut basis_step = 0.0;
        if !cfg.freeze_basis {
            let out = self.engine.update_basis(&code, f)?;
            max_gradient = max_gradient.max(out.gradient_norm);
            basis_step = out.step;
            code = out.code;
            f = out.fidelity;
        }
        let mut b_steps = vec![0.0; code.induced_jumps().len()];
        if !cfg.freeze_b {
            for (l, slot) in b_steps.iter_mut().enumerate() {
                let out = self.engine.update_matrix(&code, f, MatrixTarget::InducedJump(l))?;
                max_gradient = max_gradient.max(out.gradient_norm);
                *slot = out.step;
                code = out.code;
                f = out.fidelity;
            }
        }
        let mut o_step = 0.0;
        if !cfg.freeze_o {
            let out = self.engine.update_matrix(&code, f, MatrixTarget::Control)?;
            max_gradient = max_gradient.max(out.gradient_norm);
            o_step = out.step;
            code = out.code;
            f = out.fidelity;
        }

        self.state.iteration += 1;
        let k = self.state.iteration;
        self.log.records.push(IterationRecord {
            iteration: k,
            fidelity: f,
            basis_step,
            b_steps,
            o_step,
            leakage: self.targets.iter().map(|t| t.leakage(&code)).collect(),
            max_abs_b: code.induced_jumps().iter().map(CMatrix::max_abs).fold(0.0, f64::max),
            max_abs_o: code.control().max_abs(),
            wall_ms: self.started.elapsed().as_secs_f64() * 1e3,
        });
        self.state.code = code;
        self.state.fidelity = f;
        self.state.fidelity_history.push((k, f));

        if max_gradient < ZERO_GRADIENT_TOL {
            self.finish(TerminationReason::ZeroGradient);
        } else if k >= cfg.stagnation_window
            && f - self.state.fidelity_history[k - cfg.stagnation_window].1 < cfg.stagnation_threshold
        {
            self.finish(TerminationReason::Stagnation);
        } else if k >= cfg.max_iterations {
            self.finish(TerminationReason::MaxIterations);
        }
        Ok(self.state.termination_reason)
    }

    pub fn run(mut self) -> Result<(AqecCode, ConvergenceLog)> {
        while self.step()?.is_none() {}
        Ok((self.state.code, self.log))
    }
}

/// Runs the alternating search to termination. Without an initial code a
/// random one is drawn from `cfg.seed`.
pub fn optimize(
    model: &QuditModel,
    cfg: &OptimizerConfig,
    initial: Option<AqecCode>,
) -> Result<(AqecCode, ConvergenceLog)> {
    Optimizer::new(model, cfg, initial)?.run()
}

/// One finished run of a multi-seed campaign.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub code: AqecCode,
    pub fidelity: f64,
    pub log: ConvergenceLog,
}

/// Independent random-start runs with seeds `cfg.seed + i`, best first.
pub fn multi_seed(model: &QuditModel, cfg: &OptimizerConfig, num_seeds: usize) -> Result<Vec<SeedRun>> {
    multi_seed_with_targets(model, cfg, num_seeds, &[])
}

pub fn multi_seed_with_targets(
    model: &QuditModel,
    cfg: &OptimizerConfig,
    num_seeds: usize,
    targets: &[Subspace],
) -> Result<Vec<SeedRun>> {
    if num_seeds == 0 {
        return Err(AqecError::invalid("num_seeds must be at least 1"));
    }
    let mut runs = (0..num_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let run_cfg = OptimizerConfig { seed, ..cfg.clone() };
            let (code, log) = Optimizer::new(model, &run_cfg, None)?
                .with_targets(targets.to_vec())
                .run()?;
            Ok(SeedRun {
                seed,
                fidelity: log.final_fidelity(),
                code,
                log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| b.fidelity.total_cmp(&a.fidelity));
    Ok(runs)
}
