//! Cross-checks the superoperator propagator against the closed forms and
//! against direct RK4 integration of the master equation.

use aqec::lindblad::{build_lindbladian, propagate, unvec, vec};
use aqec::oracle::{default_rk4_step, relaxation_fidelity, rk4_propagate};
use aqec::{fidelity, photon_loss, power_law, AqecCode, CVector, DensityMatrix, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    // a free qubit relaxing at rate γ = 1
    let qubit = photon_loss(2)?;
    let trivial = AqecCode::passive(CVector::basis(2, 0), CVector::basis(2, 1))?;
    for t in [0.1, 0.5, 1.0, 2.0] {
        let f = aqec::FidelityEvaluator::new(&qubit, t)?.fidelity(&trivial)?;
        println!("t = {t}: propagator {f:.15}, closed form {:.15}", relaxation_fidelity(t));
    }

    // an uneven superposition on a power-law model, propagator vs RK4
    let model = power_law(4, 0.5)?;
    let code = aqec::thirteen_code(10.0)?;
    let s = 0.5f64.sqrt();
    let psi = CVector::from_vec(vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    let rho0 = DensityMatrix::pure(&psi)?;
    let l = build_lindbladian(&model, &code)?;
    let exact = unvec(&propagate(&l, 1.0)?.matrix().matvec(&vec(&rho0)))?;
    let dt = default_rk4_step(&model, &code)?;
    let rk4 = rk4_propagate(&model, &code, &rho0, 1.0, dt)?;
    let diff = exact.matrix().max_abs_diff(rk4.matrix());
    println!("power law α=0.5, Γ/γ=10: max |ρ_expm - ρ_rk4| = {diff:.2e} (dt = {dt:.1e})");
    println!("fidelity of the same code: {:.9}", fidelity(&model, &code, 1.0)?);
    Ok(())
}
