//! AQEC codes, the code-space projector and the projector fidelity.
//!
//! A code is two orthonormal code words, a list of induced jump operators
//! `b_l` and a Hermitian control Hamiltonian `O`. Its quality under a model
//! is `F = ¼ |Tr{exp(L τ) P}|`, where `P` projects vectorized density
//! matrices onto the code-space block.

use num_complex::Complex64;

use crate::error::{AqecError, Result};
use crate::lindblad::{
    add_code_terms, natural_lindbladian, signed_propagate, Superoperator, HERMITIAN_TOL,
};
use crate::matcore::{expm_squarings, orthonormalize, CMatrix, CVector, I};
use crate::models::QuditModel;

/// Tolerance on the norm of each code word.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on the overlap of the two code words.
pub const OVERLAP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct AqecCode {
    word0: CVector,
    word1: CVector,
    induced_jumps: Vec<CMatrix>,
    control: CMatrix,
}

impl AqecCode {
    pub fn new(
        word0: CVector,
        word1: CVector,
        induced_jumps: Vec<CMatrix>,
        control: CMatrix,
    ) -> Result<Self> {
        let n = word0.dim();
        if word1.dim() != n {
            return Err(AqecError::DimensionMismatch {
                expected: n,
                found: word1.dim(),
            });
        }
        if !word0.is_finite() || !word1.is_finite() {
            return Err(AqecError::NonFinite("code word"));
        }
        for (k, w) in [&word0, &word1].into_iter().enumerate() {
            let norm = w.norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(AqecError::NotOrthonormal(format!("word{k} has norm {norm}")));
            }
        }
        let overlap = word0.inner(&word1).norm();
        if overlap > OVERLAP_TOL {
            return Err(AqecError::NotOrthonormal(format!("overlap {overlap:.3e}")));
        }
        for m in induced_jumps.iter().chain(std::iter::once(&control)) {
            if m.rows() != n || m.cols() != n {
                return Err(AqecError::DimensionMismatch {
                    expected: n,
                    found: m.rows().max(m.cols()),
                });
            }
        }
        let dev = control.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(AqecError::NotHermitian { deviation: dev });
        }
        Ok(Self {
            word0,
            word1,
            induced_jumps,
            control,
        })
    }

    /// Skips validation; callers guarantee the invariants up to rounding.
    pub(crate) fn from_parts_unchecked(
        word0: CVector,
        word1: CVector,
        induced_jumps: Vec<CMatrix>,
        control: CMatrix,
    ) -> Self {
        Self {
            word0,
            word1,
            induced_jumps,
            control,
        }
    }

    /// Code with the given words and no correction terms.
    pub fn passive(word0: CVector, word1: CVector) -> Result<Self> {
        let n = word0.dim();
        Self::new(word0, word1, Vec::new(), CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.word0.dim()
    }

    pub fn word0(&self) -> &CVector {
        &self.word0
    }

    pub fn word1(&self) -> &CVector {
        &self.word1
    }

    pub fn words(&self) -> (&CVector, &CVector) {
        (&self.word0, &self.word1)
    }

    pub fn induced_jumps(&self) -> &[CMatrix] {
        &self.induced_jumps
    }

    pub fn control(&self) -> &CMatrix {
        &self.control
    }

    pub fn with_words(&self, word0: CVector, word1: CVector) -> Result<Self> {
        Self::new(word0, word1, self.induced_jumps.clone(), self.control.clone())
    }

    pub fn with_induced_jumps(&self, jumps: Vec<CMatrix>) -> Result<Self> {
        Self::new(self.word0.clone(), self.word1.clone(), jumps, self.control.clone())
    }

    pub fn with_induced_jump(&self, index: usize, jump: CMatrix) -> Result<Self> {
        let mut jumps = self.induced_jumps.clone();
        let slot = jumps
            .get_mut(index)
            .ok_or_else(|| AqecError::invalid(format!("no induced jump #{index}")))?;
        *slot = jump;
        self.with_induced_jumps(jumps)
    }

    pub fn with_control(&self, control: CMatrix) -> Result<Self> {
        Self::new(
            self.word0.clone(),
            self.word1.clone(),
            self.induced_jumps.clone(),
            control,
        )
    }

    /// Replaces the words by `(u00 w0 + u01 w1, u10 w0 + u11 w1)`; the
    /// mixing matrix must be unitary for the result to be valid.
    pub fn mix_words(&self, mixing: [[Complex64; 2]; 2]) -> Result<Self> {
        let comb = |a: Complex64, b: Complex64| {
            CVector::from_vec(
                self.word0
                    .as_slice()
                    .iter()
                    .zip(self.word1.as_slice())
                    .map(|(x, y)| a * x + b * y)
                    .collect(),
            )
        };
        self.with_words(
            comb(mixing[0][0], mixing[0][1]),
            comb(mixing[1][0], mixing[1][1]),
        )
    }
}

/// Projector onto the code-space block of vectorized density matrices,
/// `P = Σ_{a,b} vec(w_a w_b†) vec(w_a w_b†)†`.
#[derive(Clone, Debug)]
pub struct CodeProjector {
    superop: Superoperator,
    vectors: [CVector; 4],
}

impl CodeProjector {
    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    /// `Tr{S P}` without forming the product.
    pub fn trace_against(&self, s: &Superoperator) -> Complex64 {
        trace_against_vectors(&self.vectors, s.matrix())
    }
}

fn column_stack(m: &CMatrix) -> CVector {
    let n = m.rows();
    CVector::from_vec((0..n * n).map(|k| m[(k % n, k / n)]).collect())
}

fn projector_vectors(w0: &CVector, w1: &CVector) -> [CVector; 4] {
    [
        column_stack(&w0.outer(w0)),
        column_stack(&w0.outer(w1)),
        column_stack(&w1.outer(w0)),
        column_stack(&w1.outer(w1)),
    ]
}

fn trace_against_vectors(vectors: &[CVector; 4], m: &CMatrix) -> Complex64 {
    vectors.iter().map(|v| v.inner(&m.matvec(v))).sum()
}

pub fn projector(code: &AqecCode) -> Result<CodeProjector> {
    let (w0, w1) = code.words();
    if (w0.norm() - 1.0).abs() > NORM_TOL
        || (w1.norm() - 1.0).abs() > NORM_TOL
        || w0.inner(w1).norm() > OVERLAP_TOL
    {
        return Err(AqecError::NotOrthonormal("projector needs orthonormal words".into()));
    }
    let n = code.dim();
    let vectors = projector_vectors(w0, w1);
    let mut m = CMatrix::zeros(n * n, n * n);
    for v in &vectors {
        m += &v.outer(v);
    }
    Ok(CodeProjector {
        superop: Superoperator::new(n, m)?,
        vectors,
    })
}

/// Caches the natural part of the generator so repeated fidelity
/// evaluations against one model only rebuild the code-dependent terms.
#[derive(Clone, Debug)]
pub struct FidelityEvaluator {
    natural: Superoperator,
    tau: f64,
}

impl FidelityEvaluator {
    pub fn new(model: &QuditModel, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(AqecError::invalid(format!(
                "evaluation time must be finite and non-negative, got {tau}"
            )));
        }
        Ok(Self {
            natural: natural_lindbladian(model)?,
            tau,
        })
    }

    pub fn dim(&self) -> usize {
        self.natural.dim()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fidelity(&self, code: &AqecCode) -> Result<f64> {
        self.fidelity_at(code, self.tau)
    }

    pub fn fidelity_at(&self, code: &AqecCode, t: f64) -> Result<f64> {
        let l = add_code_terms(&self.natural, code)?;
        let vectors = projector_vectors(code.word0(), code.word1());
        let prop = signed_propagate(&l, t)?;
        Ok(0.25 * trace_against_vectors(&vectors, prop.matrix()).norm())
    }

    /// Rough size of the rounding error in [`FidelityEvaluator::fidelity`].
    /// Each squaring in the propagator roughly doubles the error of the
    /// slowly decaying modes, so the floor is `2^s` units of roundoff.
    pub fn rounding_floor(&self, code: &AqecCode) -> Result<f64> {
        let l = add_code_terms(&self.natural, code)?;
        let s = expm_squarings(l.matrix().norm_1() * self.tau);
        Ok(0.5 * f64::EPSILON * 2f64.powi(s))
    }

    /// Fidelity of the code words under the natural dynamics alone.
    pub fn free_fidelity_at(&self, code: &AqecCode, t: f64) -> Result<f64> {
        let vectors = projector_vectors(code.word0(), code.word1());
        let prop = signed_propagate(&self.natural, t)?;
        Ok(0.25 * trace_against_vectors(&vectors, prop.matrix()).norm())
    }
}

/// `F = ¼ |Tr{exp(L τ) P}|` with τ in units of 1/γ.
pub fn fidelity(model: &QuditModel, code: &AqecCode, tau: f64) -> Result<f64> {
    FidelityEvaluator::new(model, tau)?.fidelity(code)
}

/// Time multipliers for the early-time slope estimate of κ.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KappaConfig {
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for KappaConfig {
    fn default() -> Self {
        Self {
            beta1: 0.3,
            beta2: 0.1,
        }
    }
}

impl KappaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta1.is_finite()
            && self.beta2.is_finite()
            && self.beta1 > 0.0
            && self.beta2 > 0.0
            && self.beta1 != self.beta2;
        if ok {
            Ok(())
        } else {
            Err(AqecError::invalid(format!(
                "kappa needs distinct positive betas, got {} and {}",
                self.beta1, self.beta2
            )))
        }
    }
}

/// Step in γt of the central difference for the free-evolution slope.
pub const KAPPA_SLOPE_STEP: f64 = 1e-6;

/// Free-evolution slope `dF/d(γt)` at t = 0 for the code's words.
pub fn free_slope(model: &QuditModel, code: &AqecCode) -> Result<f64> {
    let eval = FidelityEvaluator::new(model, 0.0)?;
    let h = KAPPA_SLOPE_STEP / model.gamma();
    let plus = eval.free_fidelity_at(code, h)?;
    let minus = eval.free_fidelity_at(code, -h)?;
    Ok((plus - minus) / (2.0 * KAPPA_SLOPE_STEP))
}

/// Ratio of the early-time fidelity slope under the code to the t = 0 slope
/// of the same code words under free evolution.
pub fn kappa(model: &QuditModel, code: &AqecCode, cfg: &KappaConfig) -> Result<f64> {
    cfg.validate()?;
    let eval = FidelityEvaluator::new(model, 0.0)?;
    let g = model.gamma();
    let f1 = eval.fidelity_at(code, cfg.beta1 / g)?;
    let f2 = eval.fidelity_at(code, cfg.beta2 / g)?;
    let numerator = (f1 - f2) / (cfg.beta1 - cfg.beta2);
    let denominator = free_slope(model, code)?;
    if denominator.abs() < 1e-12 {
        return Err(AqecError::KappaUndefined { slope: denominator });
    }
    Ok(numerator / denominator)
}

fn check_ratio(gamma_ratio: f64) -> Result<f64> {
    if gamma_ratio.is_finite() && gamma_ratio >= 0.0 {
        Ok(gamma_ratio.sqrt())
    } else {
        Err(AqecError::invalid(format!(
            "induced rate ratio must be finite and non-negative, got {gamma_ratio}"
        )))
    }
}

/// Four-level code on `{|1>, |3>}` with re-excitation `|0>→|1>`, `|2>→|3>`.
pub fn thirteen_code(gamma_ratio: f64) -> Result<AqecCode> {
    let amp = check_ratio(gamma_ratio)?;
    let mut b = CMatrix::zeros(4, 4);
    b[(1, 0)] = amp.into();
    b[(3, 2)] = amp.into();
    AqecCode::new(
        CVector::basis(4, 1),
        CVector::basis(4, 3),
        vec![b],
        CMatrix::zeros(4, 4),
    )
}

/// Five-level binomial code `{(|0>+|4>)/√2, |2>}` with its recovery jump
/// and the `σ_y` control between `|0>` and `|4>`.
pub fn binomial_code(gamma_ratio: f64) -> Result<AqecCode> {
    let amp = check_ratio(gamma_ratio)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = CMatrix::zeros(5, 5);
    b[(0, 3)] = (amp * h).into();
    b[(4, 3)] = (amp * h).into();
    b[(2, 1)] = amp.into();
    let mut o = CMatrix::zeros(5, 5);
    o[(0, 4)] = -I;
    o[(4, 0)] = I;
    AqecCode::new(
        CVector::from_real(&[h, 0.0, 0.0, 0.0, h]),
        CVector::basis(5, 2),
        vec![b],
        o,
    )
}

/// Even-n ladder code on `{|n/2-1>, |n-1>}` with one induced jump per
/// number of lost excitations.
pub fn ladder_code(n: usize, gamma_ratio: f64) -> Result<AqecCode> {
    if n < 4 || n % 2 != 0 {
        return Err(AqecError::invalid(format!(
            "ladder code needs an even dimension >= 4, got {n}"
        )));
    }
    let amp = check_ratio(gamma_ratio)?;
    let half = n / 2;
    let jumps = (1..half)
        .map(|p| {
            let mut b = CMatrix::zeros(n, n);
            b[(half - p, half - p - 1)] = amp.into();
            b[(n - p, n - p - 1)] = amp.into();
            b
        })
        .collect();
    AqecCode::new(
        CVector::basis(n, half - 1),
        CVector::basis(n, n - 1),
        jumps,
        CMatrix::zeros(n, n),
    )
}

/// Named subspace used for leakage diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    name: String,
    basis: Vec<CVector>,
}

impl Subspace {
    pub fn from_levels(name: impl Into<String>, n: usize, levels: &[usize]) -> Result<Self> {
        if let Some(&bad) = levels.iter().find(|&&k| k >= n) {
            return Err(AqecError::invalid(format!("level {bad} out of range for n = {n}")));
        }
        Ok(Self {
            name: name.into(),
            basis: levels.iter().map(|&k| CVector::basis(n, k)).collect(),
        })
    }

    pub fn from_code(name: impl Into<String>, code: &AqecCode) -> Result<Self> {
        let (a, b) = orthonormalize(code.word0(), code.word1())?;
        Ok(Self {
            name: name.into(),
            basis: vec![a, b],
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, CVector::dim)
    }

    /// Mean probability of the two code words lying outside the subspace.
    pub fn leakage(&self, code: &AqecCode) -> f64 {
        let outside = |w: &CVector| {
            1.0 - self
                .basis
                .iter()
                .map(|e| e.inner(w).norm_sqr())
                .sum::<f64>()
        };
        0.5 * (outside(code.word0()) + outside(code.word1()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{photon_loss, power_law, uniform_decay};
    use crate::oracle::relaxation_fidelity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trivial_qubit() -> AqecCode {
        AqecCode::passive(CVector::basis(2, 0), CVector::basis(2, 1)).unwrap()
    }

    #[test]
    fn construction_errors() {
        let w = CVector::basis(3, 0);
        assert!(AqecCode::passive(w.clone(), w.clone()).is_err());
        assert!(AqecCode::passive(w.clone(), CVector::from_real(&[0.0, 2.0, 0.0])).is_err());
        assert!(AqecCode::passive(w.clone(), CVector::basis(2, 1)).is_err());
        let bad_control = CMatrix::unit(3, 0, 1);
        assert!(AqecCode::new(w, CVector::basis(3, 1), vec![], bad_control).is_err());
    }

    #[test]
    fn full_space_projector_is_identity() {
        let p = projector(&trivial_qubit()).unwrap();
        assert!(p.superop().matrix().max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn thirteen_projector_is_diagonal_with_four_ones() {
        let p = projector(&thirteen_code(1.0).unwrap()).unwrap();
        let m = p.superop().matrix();
        let mut ones = Vec::new();
        for i in 0..16 {
            for j in 0..16 {
                let z = m[(i, j)];
                if i != j {
                    assert_eq!(z.norm(), 0.0);
                } else if z.norm() > 0.0 {
                    assert_eq!(z.re, 1.0);
                    ones.push(i);
                }
            }
        }
        // column-stacked indices of ρ11, ρ31, ρ13, ρ33
        assert_eq!(ones, vec![5, 7, 13, 15]);
    }

    #[test]
    fn random_projector_idempotent_rank_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = crate::matcore::orthonormal_pair(5, &mut rng).unwrap();
        let p = projector(&AqecCode::passive(a, b).unwrap()).unwrap();
        let m = p.superop().matrix();
        assert!(m.matmul(m).max_abs_diff(m) < 1e-10);
        assert!((m.trace() - Complex64::new(4.0, 0.0)).norm() < 1e-10);
        assert!(m.is_hermitian(1e-12));
    }

    #[test]
    fn free_qubit_fidelity_matches_closed_form() {
        let model = uniform_decay(2).unwrap();
        let code = trivial_qubit();
        assert!((fidelity(&model, &code, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let f0 = fidelity(&model, &code, 1.0).unwrap();
        assert!((f0 - 0.64523519).abs() < 1e-8);
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let f = fidelity(&model, &code, t).unwrap();
            assert!((f - relaxation_fidelity(t)).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn dephasing_convention() {
        // sqrt(γφ/2) σz gives off-diagonal decay exp(-γφ t)
        let sz = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let model = QuditModel::new(
            CMatrix::zeros(2, 2),
            vec![sz.scale_real(0.5f64.sqrt())],
            1.0,
        )
        .unwrap();
        for t in [0.1, 1.0, 3.0] {
            let f = fidelity(&model, &trivial_qubit(), t).unwrap();
            assert!((f - crate::oracle::dephasing_fidelity(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn thirteen_code_values() {
        let uni = uniform_decay(4).unwrap();
        let f = fidelity(&uni, &thirteen_code(1e6).unwrap(), 1.0).unwrap();
        assert!((f - 0.9999985).abs() < 1e-7, "F = {f}");
        let pl = fidelity(&photon_loss(4).unwrap(), &thirteen_code(1e6).unwrap(), 1.0).unwrap();
        assert!((pl - 0.88).abs() < 0.01, "F = {pl}");
    }

    #[test]
    fn thirteen_code_without_induced_decay() {
        // words |1>, |3> decaying down a uniform ladder: each diagonal
        // element and the coherence lose weight at rate γ, so F = e^{-t}
        let uni = uniform_decay(4).unwrap();
        let f = fidelity(&uni, &thirteen_code(0.0).unwrap(), 1.0).unwrap();
        assert!((f - (-1f64).exp()).abs() < 1e-12, "F = {f}");
    }

    #[test]
    fn binomial_code_values() {
        let code = binomial_code(1e6).unwrap();
        let f = fidelity(&photon_loss(5).unwrap(), &code, 1.0).unwrap();
        assert!((f - 0.999994).abs() < 1e-6, "F = {f}");
        let no_control = code.with_control(CMatrix::zeros(5, 5)).unwrap();
        let g = fidelity(&photon_loss(5).unwrap(), &no_control, 1.0).unwrap();
        assert!(g < f - 0.1, "control-free F = {g}");
        let p = fidelity(&power_law(5, 0.45).unwrap(), &code, 1.0).unwrap();
        assert!((p - 0.9967).abs() < 5e-4, "F = {p}");
    }

    #[test]
    fn ladder_code_structure() {
        let four = ladder_code(4, 3.0).unwrap();
        assert_eq!(four, thirteen_code(3.0).unwrap());
        let six = ladder_code(6, 1e6).unwrap();
        assert_eq!(six.induced_jumps().len(), 2);
        assert!(ladder_code(5, 1.0).is_err());
        let f = fidelity(&uniform_decay(6).unwrap(), &six, 1.0).unwrap();
        assert!((f - 0.999999).abs() < 5e-7, "F = {f}");
    }

    #[test]
    fn mixing_and_phase_invariance() {
        let model = uniform_decay(4).unwrap();
        let code = thirteen_code(10.0).unwrap();
        let f = fidelity(&model, &code, 1.0).unwrap();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let phase = Complex64::from_polar(1.0, 0.3);
        let mixed = code
            .mix_words([[c.into(), s * phase], [-s * phase.conj(), c.into()]])
            .unwrap();
        assert!((fidelity(&model, &mixed, 1.0).unwrap() - f).abs() < 1e-10);
        let phased = code
            .mix_words([[phase, 0.0.into()], [0.0.into(), 1.0.into()]])
            .unwrap();
        let p1 = projector(&code).unwrap();
        let p2 = projector(&phased).unwrap();
        assert!(p1.superop().matrix().max_abs_diff(p2.superop().matrix()) < 1e-12);
    }

    #[test]
    fn kappa_free_qubit() {
        let model = uniform_decay(2).unwrap();
        let code = trivial_qubit();
        let slope = free_slope(&model, &code).unwrap();
        assert!((slope + 0.5).abs() < 1e-8, "slope {slope}");
        let k = kappa(&model, &code, &KappaConfig::default()).unwrap();
        // closed-form oracle: secant of ¼(1 + 2e^{-t/2} + e^{-t}) over [0.1, 0.3]
        let expected =
            (relaxation_fidelity(0.3) - relaxation_fidelity(0.1)) / 0.2 / -0.5;
        assert!((k - expected).abs() < 1e-8, "kappa {k} vs {expected}");
        assert!((k - 0.8626).abs() < 1e-3);
    }

    #[test]
    fn kappa_thirteen_code_suppression() {
        let model = uniform_decay(4).unwrap();
        let code = thirteen_code(1e6).unwrap();
        let k = kappa(&model, &code, &KappaConfig::default()).unwrap();
        // effective rate γ²/Γ relaxes the coherence at half that rate in F
        // while the bare words lose F at rate γ
        assert!(k > 1e-7 && k < 1e-5, "kappa {k}");
        let halved = kappa(&model, &code, &KappaConfig { beta1: 0.15, beta2: 0.05 }).unwrap();
        assert!(((halved - k) / k).abs() < 0.2, "{halved} vs {k}");
    }

    #[test]
    fn kappa_errors() {
        let model = QuditModel::new(CMatrix::zeros(2, 2), vec![], 1.0).unwrap();
        assert!(matches!(
            kappa(&model, &trivial_qubit(), &KappaConfig::default()),
            Err(AqecError::KappaUndefined { .. })
        ));
        let bad = KappaConfig { beta1: 0.2, beta2: 0.2 };
        assert!(kappa(&uniform_decay(2).unwrap(), &trivial_qubit(), &bad).is_err());
    }

    #[test]
    fn leakage_diagnostic() {
        let s = Subspace::from_levels("13", 4, &[1, 3]).unwrap();
        assert!(s.leakage(&thirteen_code(1.0).unwrap()).abs() < 1e-15);
        let other = AqecCode::passive(CVector::basis(4, 0), CVector::basis(4, 1)).unwrap();
        assert!((s.leakage(&other) - 0.5).abs() < 1e-15);
        assert!(Subspace::from_levels("bad", 4, &[4]).is_err());
    }
}
