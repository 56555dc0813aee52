//! Independent cross-checks for the superoperator pipeline: closed-form
//! fidelity curves, effective-rate formulas, and a fixed-step RK4 that
//! integrates the master equation in plain matrix form.

use num_complex::Complex64;

use crate::codes::AqecCode;
use crate::error::{AqecError, Result};
use crate::lindblad::DensityMatrix;
use crate::matcore::CMatrix;
use crate::models::QuditModel;

/// Free-relaxation qubit fidelity `¼(1 + 2e^{-t/2} + e^{-t})`, t in 1/γ.
pub fn relaxation_fidelity(t: f64) -> f64 {
    0.25 * (1.0 + 2.0 * (-t / 2.0).exp() + (-t).exp())
}

/// Pure-dephasing qubit fidelity `½(1 + e^{-t})`.
pub fn dephasing_fidelity(t: f64) -> f64 {
    0.5 * (1.0 + (-t).exp())
}

/// Closed-form qubit state after relaxation for time t (units of 1/γ).
pub fn relaxed_state(rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(AqecError::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        });
    }
    let r = rho0.matrix();
    let decay = (-t).exp();
    let half = (-t / 2.0).exp();
    let m = CMatrix::new(
        2,
        2,
        vec![
            r[(0, 0)] + r[(1, 1)] * (1.0 - decay),
            r[(0, 1)] * half,
            r[(1, 0)] * half,
            r[(1, 1)] * decay,
        ],
    )?;
    DensityMatrix::relaxed(m)
}

/// Dephasing rate (units of γ) of the coherence between Fock states
/// `|N>` and `|N+2>` under photon loss when each error is undone by a fast
/// single-step re-excitation: `(N+1) - sqrt((N+1)^2 - 1)`.
pub fn effective_dephasing_rate(n_fock: u64) -> f64 {
    let m = n_fock as f64 + 1.0;
    // (m - sqrt(m²-1)) = 1 / (m + sqrt(m²-1)), stable for large m
    1.0 / (m + (m * m - 1.0).sqrt())
}

/// The master-equation right-hand side evaluated with matrix products.
struct DirectGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<(CMatrix, CMatrix, CMatrix)>,
}

impl DirectGenerator {
    fn new(model: &QuditModel, code: &AqecCode) -> Result<Self> {
        if model.dim() != code.dim() {
            return Err(AqecError::DimensionMismatch {
                expected: model.dim(),
                found: code.dim(),
            });
        }
        let hamiltonian = model.free_hamiltonian() + code.control();
        let jumps = model
            .natural_jumps()
            .iter()
            .chain(code.induced_jumps())
            .map(|a| {
                let ad = a.adjoint();
                let ada = ad.matmul(a);
                (a.clone(), ad, ada)
            })
            .collect();
        Ok(Self { hamiltonian, jumps })
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mi = Complex64::new(0.0, -1.0);
        let mut out = (&self.hamiltonian.matmul(rho) - &rho.matmul(&self.hamiltonian)).scale(mi);
        for (a, ad, ada) in &self.jumps {
            out += &a.matmul(rho).matmul(ad);
            out.axpy((-0.5).into(), &ada.matmul(rho));
            out.axpy((-0.5).into(), &rho.matmul(ada));
        }
        out
    }

    fn max_rate(&self) -> f64 {
        self.jumps
            .iter()
            .map(|(_, _, ada)| ada.norm_1())
            .fold(0.0, f64::max)
    }
}

/// Default RK4 step: `min(1e-3, 0.1 / Γ_max)` with Γ_max the largest
/// squared jump-operator norm.
pub fn default_rk4_step(model: &QuditModel, code: &AqecCode) -> Result<f64> {
    let gen = DirectGenerator::new(model, code)?;
    let rate = gen.max_rate();
    Ok(if rate > 0.0 { (1e-3f64).min(0.1 / rate) } else { 1e-3 })
}

/// Classic fixed-step RK4 for `dρ/dt`. The step is shrunk so that an
/// integer number of steps lands exactly on `t`.
pub fn rk4_propagate(
    model: &QuditModel,
    code: &AqecCode,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if !(dt > 0.0) || !(t >= 0.0) || dt > t || !t.is_finite() {
        return Err(AqecError::invalid(format!(
            "rk4 needs 0 < dt <= t, got dt = {dt}, t = {t}"
        )));
    }
    if rho0.dim() != model.dim() {
        return Err(AqecError::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    let gen = DirectGenerator::new(model, code)?;
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let mut rho = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = gen.rhs(&rho);
        let mut y = rho.clone();
        y.axpy((0.5 * h).into(), &k1);
        let k2 = gen.rhs(&y);
        let mut y = rho.clone();
        y.axpy((0.5 * h).into(), &k2);
        let k3 = gen.rhs(&y);
        let mut y = rho.clone();
        y.axpy(h.into(), &k3);
        let k4 = gen.rhs(&y);
        rho.axpy((h / 6.0).into(), &k1);
        rho.axpy((h / 3.0).into(), &k2);
        rho.axpy((h / 3.0).into(), &k3);
        rho.axpy((h / 6.0).into(), &k4);
    }
    DensityMatrix::relaxed(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::thirteen_code;
    use crate::lindblad::{build_lindbladian, propagate};
    use crate::matcore::CVector;
    use crate::models::{photon_loss, uniform_decay};

    fn qubit_code() -> AqecCode {
        AqecCode::passive(CVector::basis(2, 0), CVector::basis(2, 1)).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(relaxation_fidelity(0.0), 1.0);
        assert!((relaxation_fidelity(1.0) - 0.64523519).abs() < 1e-8);
        assert!((relaxation_fidelity(50.0) - 0.25).abs() < 1e-10);
        assert_eq!(dephasing_fidelity(0.0), 1.0);
        assert!((dephasing_fidelity(1.0) - 0.6839397).abs() < 1e-7);
        assert!((dephasing_fidelity(50.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn dephasing_rate_formula() {
        assert!((effective_dephasing_rate(1) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((effective_dephasing_rate(1) - 0.267949).abs() < 1e-6);
        // large-N asymptote is 1/(2(N+1)); 1/(2√N) is off by orders of magnitude
        let big = effective_dephasing_rate(10_000);
        assert!((big * 2.0 * 10_001.0 - 1.0).abs() < 1e-6);
        assert!(big < 0.005 / 50.0);
        for n in 1..100 {
            assert!(effective_dephasing_rate(n + 1) < effective_dephasing_rate(n));
        }
    }

    #[test]
    fn relaxed_state_cases() {
        let ground = DensityMatrix::new(CMatrix::unit(2, 0, 0)).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(relaxed_state(&ground, t).unwrap().matrix(), ground.matrix());
        }
        let excited = DensityMatrix::new(CMatrix::unit(2, 1, 1)).unwrap();
        let out = relaxed_state(&excited, 1.0).unwrap();
        assert!((out.matrix()[(1, 1)].re - (-1f64).exp()).abs() < 1e-15);
        let wrong = DensityMatrix::new(CMatrix::unit(3, 0, 0)).unwrap();
        assert!(relaxed_state(&wrong, 1.0).is_err());
    }

    #[test]
    fn relaxed_state_matches_propagator() {
        let plus = CVector::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ]);
        let rho0 = DensityMatrix::pure(&plus).unwrap();
        let model = uniform_decay(2).unwrap();
        let l = build_lindbladian(&model, &qubit_code()).unwrap();
        for t in [0.2, 1.0, 4.0] {
            let via = propagate(&l, t).unwrap().apply(rho0.matrix());
            let closed = relaxed_state(&rho0, t).unwrap();
            assert!(via.max_abs_diff(closed.matrix()) < 1e-10);
        }
    }

    #[test]
    fn rk4_zero_generator_is_identity() {
        let model = QuditModel::new(CMatrix::zeros(3, 3), vec![], 1.0).unwrap();
        let code = AqecCode::passive(CVector::basis(3, 0), CVector::basis(3, 1)).unwrap();
        let rho0 = DensityMatrix::new(CMatrix::identity(3).scale_real(1.0 / 3.0)).unwrap();
        let out = rk4_propagate(&model, &code, &rho0, 1.0, 0.1).unwrap();
        assert_eq!(out.matrix(), rho0.matrix());
    }

    #[test]
    fn rk4_qubit_relaxation() {
        let model = uniform_decay(2).unwrap();
        let rho0 = DensityMatrix::new(CMatrix::unit(2, 1, 1)).unwrap();
        let out = rk4_propagate(&model, &qubit_code(), &rho0, 1.0, 1e-3).unwrap();
        assert!((out.matrix()[(1, 1)].re - (-1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rk4_matches_expm_on_thirteen_code() {
        let model = photon_loss(4).unwrap();
        let code = thirteen_code(1e2).unwrap();
        let psi = CVector::from_real(&[0.0, 0.6, 0.0, 0.8]);
        let rho0 = DensityMatrix::pure(&psi).unwrap();
        let rk = rk4_propagate(&model, &code, &rho0, 1.0, 1e-4).unwrap();
        let l = build_lindbladian(&model, &code).unwrap();
        let ex = propagate(&l, 1.0).unwrap().apply(rho0.matrix());
        assert!(rk.matrix().max_abs_diff(&ex) < 1e-8);
        assert!((rk.matrix().trace().re - 1.0).abs() < 1e-9);
        assert!(rk.matrix().is_hermitian(1e-10));
    }

    #[test]
    fn rk4_argument_errors() {
        let model = uniform_decay(2).unwrap();
        let rho0 = DensityMatrix::new(CMatrix::unit(2, 1, 1)).unwrap();
        assert!(rk4_propagate(&model, &qubit_code(), &rho0, 1.0, 0.0).is_err());
        assert!(rk4_propagate(&model, &qubit_code(), &rho0, 0.1, 0.2).is_err());
        let rho3 = DensityMatrix::new(CMatrix::unit(3, 1, 1)).unwrap();
        assert!(rk4_propagate(&model, &qubit_code(), &rho3, 1.0, 0.1).is_err());
    }

    #[test]
    fn default_step_respects_stiffness() {
        let model = uniform_decay(4).unwrap();
        let dt = default_rk4_step(&model, &thirteen_code(1e3).unwrap()).unwrap();
        assert!((dt - 1e-4).abs() < 1e-12);
        let dt = default_rk4_step(&model, &thirteen_code(0.0).unwrap()).unwrap();
        assert_eq!(dt, 1e-3);
    }
}
