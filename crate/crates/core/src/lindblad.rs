//! Superoperator form of the Lindblad master equation.
//!
//! Density matrices are vectorized by column stacking, `vec(ρ)[j*n + i] =
//! ρ[i, j]`, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Units: ħ = 1 and the
//! natural decay rate γ = 1, so times are measured in 1/γ.

use num_complex::Complex64;

use crate::codes::AqecCode;
use crate::error::{AqecError, Result};
use crate::matcore::{expm, kron, CMatrix, CVector};
use crate::models::QuditModel;

/// Tolerance on Hermiticity checks for Hamiltonians and density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Linear map on vectorized n×n matrices, stored as an n²×n² matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n2 = dim * dim;
        if matrix.rows() != n2 || matrix.cols() != n2 {
            return Err(AqecError::DimensionMismatch {
                expected: n2,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn add_assign(&mut self, other: &Superoperator) {
        assert_eq!(self.dim, other.dim);
        self.matrix += &other.matrix;
    }

    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim);
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.matmul(&other.matrix),
        }
    }

    /// Applies the map to a matrix: `unvec(S · vec(ρ))`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec_matrix(&self.matrix.matvec(&vec_matrix(rho)), self.dim)
    }

    /// Largest entry of `vec(I)† · S`; zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let n2 = n * n;
        (0..n2)
            .map(|col| {
                (0..n)
                    .map(|k| self.matrix[(k * n + k, col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// A density matrix. `physical` records whether the unit-trace and
/// Hermiticity checks were enforced at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    physical: bool,
}

impl DensityMatrix {
    /// Checked constructor: Hermitian and unit trace within 1e-12.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        matrix.require_square()?;
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(AqecError::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(AqecError::invalid(format!("density matrix trace {tr} != 1")));
        }
        Ok(Self {
            matrix,
            physical: true,
        })
    }

    /// Unchecked constructor for intermediate algebra.
    pub fn relaxed(matrix: CMatrix) -> Result<Self> {
        matrix.require_square()?;
        Ok(Self {
            matrix,
            physical: false,
        })
    }

    pub fn pure(state: &CVector) -> Result<Self> {
        Self::new(state.outer(state))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }
}

fn vec_matrix(m: &CMatrix) -> CVector {
    let n = m.rows();
    let mut out = Vec::with_capacity(n * m.cols());
    for j in 0..m.cols() {
        for i in 0..n {
            out.push(m[(i, j)]);
        }
    }
    CVector::from_vec(out)
}

fn unvec_matrix(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[j * n + i])
}

/// Column-stacking vectorization.
pub fn vec(rho: &DensityMatrix) -> CVector {
    vec_matrix(rho.matrix())
}

/// Inverse of [`vec`]; the result is not checked for physicality.
pub fn unvec(v: &CVector) -> Result<DensityMatrix> {
    let n = (v.dim() as f64).sqrt().round() as usize;
    if n * n != v.dim() {
        return Err(AqecError::invalid(format!(
            "vector length {} is not a perfect square",
            v.dim()
        )));
    }
    DensityMatrix::relaxed(unvec_matrix(v, n))
}

/// `ρ ↦ a ρ a† − ½{a†a, ρ}` as `conj(a)⊗a − ½ I⊗(a†a) − ½ (a†a)ᵀ⊗I`.
pub fn dissipator(a: &CMatrix) -> Result<Superoperator> {
    let n = a.require_square()?;
    let ident = CMatrix::identity(n);
    let ada = a.adjoint().matmul(a);
    let mut m = kron(&a.conj(), a);
    m.axpy((-0.5).into(), &kron(&ident, &ada));
    m.axpy((-0.5).into(), &kron(&ada.transpose(), &ident));
    Ok(Superoperator { dim: n, matrix: m })
}

/// `ρ ↦ −i[h, ρ]` as `−i(I⊗h − hᵀ⊗I)`.
pub fn hamiltonian_part(h: &CMatrix) -> Result<Superoperator> {
    let n = h.require_square()?;
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(AqecError::NotHermitian { deviation: dev });
    }
    let ident = CMatrix::identity(n);
    let mut m = kron(&ident, h);
    m.axpy((-1.0).into(), &kron(&h.transpose(), &ident));
    Ok(Superoperator {
        dim: n,
        matrix: m.scale(Complex64::new(0.0, -1.0)),
    })
}

/// Generator of the natural dynamics alone: free Hamiltonian plus the
/// model's jump operators.
pub fn natural_lindbladian(model: &QuditModel) -> Result<Superoperator> {
    let mut l = hamiltonian_part(model.free_hamiltonian())?;
    for a in model.natural_jumps() {
        l.add_assign(&dissipator(a)?);
    }
    Ok(l)
}

/// Adds the code's control Hamiltonian and induced jumps to a natural
/// generator.
pub(crate) fn add_code_terms(
    natural: &Superoperator,
    code: &AqecCode,
) -> Result<Superoperator> {
    if natural.dim() != code.dim() {
        return Err(AqecError::DimensionMismatch {
            expected: natural.dim(),
            found: code.dim(),
        });
    }
    let mut l = natural.clone();
    l.add_assign(&hamiltonian_part(code.control())?);
    for b in code.induced_jumps() {
        l.add_assign(&dissipator(b)?);
    }
    Ok(l)
}

/// Full generator: `−i[H + O, ·] + Σ_j D[a_j] + Σ_l D[b_l]`.
pub fn build_lindbladian(model: &QuditModel, code: &AqecCode) -> Result<Superoperator> {
    if model.dim() != code.dim() {
        return Err(AqecError::DimensionMismatch {
            expected: model.dim(),
            found: code.dim(),
        });
    }
    let h = model.free_hamiltonian() + code.control();
    let mut l = hamiltonian_part(&h)?;
    for a in model.natural_jumps() {
        l.add_assign(&dissipator(a)?);
    }
    for b in code.induced_jumps() {
        l.add_assign(&dissipator(b)?);
    }
    Ok(l)
}

/// `exp(L τ)`; τ in units of 1/γ.
pub fn propagate(l: &Superoperator, tau: f64) -> Result<Superoperator> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(AqecError::invalid(format!(
            "propagation time must be finite and non-negative, got {tau}"
        )));
    }
    signed_propagate(l, tau)
}

/// `exp(L t)` for any finite t; used by finite differences straddling t = 0.
pub(crate) fn signed_propagate(l: &Superoperator, t: f64) -> Result<Superoperator> {
    Ok(Superoperator {
        dim: l.dim,
        matrix: expm(&l.matrix, t)?,
    })
}
