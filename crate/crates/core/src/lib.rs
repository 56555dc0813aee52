//! Search and evaluation of autonomous quantum error correction (AQEC)
//! codes for few-level open quantum systems.
//!
//! A code is a pair of code words together with engineered dissipation
//! (induced jump operators) and a control Hamiltonian. Its quality under a
//! given decay model is the projector fidelity after a fixed evolution
//! time, and [`optimizer`] climbs that fidelity by alternating
//! finite-difference gradient steps on the three components.

pub mod cli;
pub mod codes;
pub mod error;
pub mod lindblad;
pub mod matcore;
pub mod models;
pub mod optimizer;
pub mod oracle;

pub use codes::{
    binomial_code, fidelity, kappa, ladder_code, projector, thirteen_code, AqecCode,
    CodeProjector, FidelityEvaluator, KappaConfig, Subspace,
};
pub use error::{AqecError, Result};
pub use lindblad::{build_lindbladian, propagate, DensityMatrix, Superoperator};
pub use matcore::{CMatrix, CVector};
pub use models::{photon_loss, power_law, uniform_decay, ModelSpec, QuditModel};
