//! Qudit decay models: the fixed physics an AQEC code has to fight.
//!
//! Levels are indexed `|0>..|n-1>`. Rates are absorbed into the jump
//! operators, and γ = 1 sets the unit of rate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AqecError, Result};
use crate::lindblad::HERMITIAN_TOL;
use crate::matcore::CMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct QuditModel {
    dim: usize,
    free_hamiltonian: CMatrix,
    natural_jumps: Vec<CMatrix>,
    gamma: f64,
}

impl QuditModel {
    pub fn new(free_hamiltonian: CMatrix, natural_jumps: Vec<CMatrix>, gamma: f64) -> Result<Self> {
        let dim = free_hamiltonian.require_square()?;
        let dev = free_hamiltonian.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(AqecError::NotHermitian { deviation: dev });
        }
        for a in &natural_jumps {
            if a.rows() != dim || a.cols() != dim {
                return Err(AqecError::DimensionMismatch {
                    expected: dim,
                    found: a.rows().max(a.cols()),
                });
            }
        }
        Ok(Self {
            dim,
            free_hamiltonian,
            natural_jumps,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn free_hamiltonian(&self) -> &CMatrix {
        &self.free_hamiltonian
    }

    pub fn natural_jumps(&self) -> &[CMatrix] {
        &self.natural_jumps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Single lowering jump with amplitude `sqrt(γ) * k^alpha` on `(k-1, k)`.
fn ladder_jump(n: usize, alpha: f64) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).powf(alpha), 0.0);
    }
    a
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(AqecError::invalid(format!("model dimension must be >= 2, got {n}")))
    } else {
        Ok(())
    }
}

fn ladder_model(n: usize, alpha: f64) -> Result<QuditModel> {
    check_dim(n)?;
    if !alpha.is_finite() {
        return Err(AqecError::NonFinite("power-law exponent"));
    }
    QuditModel::new(CMatrix::zeros(n, n), vec![ladder_jump(n, alpha)], 1.0)
}

/// Equal decay rates down the ladder `|n-1> → … → |0>`.
pub fn uniform_decay(n: usize) -> Result<QuditModel> {
    ladder_model(n, 0.0)
}

/// Truncated harmonic-oscillator annihilation operator.
pub fn photon_loss(n: usize) -> Result<QuditModel> {
    check_dim(n)?;
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    QuditModel::new(CMatrix::zeros(n, n), vec![a], 1.0)
}

/// Interpolates between uniform decay (alpha = 0) and photon loss
/// (alpha = 0.5).
pub fn power_law(n: usize, alpha: f64) -> Result<QuditModel> {
    ladder_model(n, alpha)
}

/// Serializable name for one of the built-in models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    Uniform { n: usize },
    PhotonLoss { n: usize },
    PowerLaw { n: usize, alpha: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<QuditModel> {
        match *self {
            ModelSpec::Uniform { n } => uniform_decay(n),
            ModelSpec::PhotonLoss { n } => photon_loss(n),
            ModelSpec::PowerLaw { n, alpha } => power_law(n, alpha),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::Uniform { n } | ModelSpec::PhotonLoss { n } | ModelSpec::PowerLaw { n, .. } => n,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ModelSpec::PowerLaw { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Parses `uniform`, `photon_loss`, `power_law` or `power_law(0.45)`
    /// with the dimension and an optional default exponent supplied
    /// separately.
    pub fn parse(name: &str, n: usize, alpha: Option<f64>) -> Result<Self> {
        let name = name.trim();
        if let Some(inner) = name
            .strip_prefix("power_law(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let a = f64::from_str(inner.trim())
                .map_err(|_| AqecError::invalid(format!("bad exponent in model name {name:?}")))?;
            return Ok(ModelSpec::PowerLaw { n, alpha: a });
        }
        match name {
            "uniform" => Ok(ModelSpec::Uniform { n }),
            "photon_loss" => Ok(ModelSpec::PhotonLoss { n }),
            "power_law" => match alpha {
                Some(alpha) => Ok(ModelSpec::PowerLaw { n, alpha }),
                None => Err(AqecError::invalid("power_law model needs an exponent (--alpha)")),
            },
            other => Err(AqecError::invalid(format!("unknown model {other:?}"))),
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        ModelSpec::PowerLaw {
            n: self.dim(),
            alpha,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Uniform { n } => write!(f, "uniform(n={n})"),
            ModelSpec::PhotonLoss { n } => write!(f, "photon_loss(n={n})"),
            ModelSpec::PowerLaw { n, alpha } => write!(f, "power_law(n={n}, alpha={alpha})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jump(m: &QuditModel) -> &CMatrix {
        &m.natural_jumps()[0]
    }

    #[test]
    fn uniform_four_level_layout() {
        let m = uniform_decay(4).unwrap();
        let expected = CMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(jump(&m), &expected);
        assert_eq!(m.free_hamiltonian(), &CMatrix::zeros(4, 4));
        assert_eq!(jump(&uniform_decay(2).unwrap()), &CMatrix::unit(2, 0, 1));
        let six = uniform_decay(6).unwrap();
        let nonzero = jump(&six).as_slice().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 5);
        assert!(uniform_decay(1).is_err());
    }

    #[test]
    fn photon_loss_layouts() {
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        let four = photon_loss(4).unwrap();
        let expected4 = CMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, s2, 0.0],
            &[0.0, 0.0, 0.0, s3],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(jump(&four), &expected4);
        let five = photon_loss(5).unwrap();
        assert_eq!(jump(&five)[(3, 4)].re, 2.0);
        assert_eq!(jump(&five)[(2, 3)].re, s3);
        assert_eq!(photon_loss(2).unwrap(), uniform_decay(2).unwrap());
        assert!(photon_loss(0).is_err());
    }

    #[test]
    fn power_law_limits() {
        for n in 2..=6 {
            assert_eq!(power_law(n, 0.0).unwrap(), uniform_decay(n).unwrap());
            let p = power_law(n, 0.5).unwrap();
            assert!(jump(&p).max_abs_diff(jump(&photon_loss(n).unwrap())) < 1e-15);
        }
        let p = power_law(5, 0.45).unwrap();
        assert!((jump(&p)[(3, 4)].re - 4f64.powf(0.45)).abs() < 1e-15);
        assert!((jump(&p)[(3, 4)].re - 1.8661).abs() < 1e-4);
        assert!(power_law(4, f64::NAN).is_err());
    }

    #[test]
    fn jumps_live_on_first_superdiagonal() {
        for m in [uniform_decay(5).unwrap(), photon_loss(6).unwrap(), power_law(4, 0.3).unwrap()] {
            let a = jump(&m);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    if j != i + 1 {
                        assert_eq!(a[(i, j)].norm(), 0.0);
                    } else {
                        assert!(a[(i, j)].re > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(ModelSpec::parse("uniform", 4, None).unwrap(), ModelSpec::Uniform { n: 4 });
        assert_eq!(
            ModelSpec::parse("power_law(0.45)", 5, None).unwrap(),
            ModelSpec::PowerLaw { n: 5, alpha: 0.45 }
        );
        assert_eq!(
            ModelSpec::parse("power_law", 5, Some(0.4)).unwrap(),
            ModelSpec::PowerLaw { n: 5, alpha: 0.4 }
        );
        assert!(ModelSpec::parse("power_law", 5, None).is_err());
        assert!(ModelSpec::parse("thermal", 5, None).is_err());
        let json = serde_json::to_string(&ModelSpec::PowerLaw { n: 5, alpha: 0.4 }).unwrap();
        assert_eq!(json, r#"{"name":"power_law","n":5,"alpha":0.4}"#);
    }
}
