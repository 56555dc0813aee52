//! Dense complex linear algebra for the small matrices used throughout the
//! crate (Hilbert dimension up to 6, superoperators up to 36x36).
//!
//! Storage is row-major `Vec<Complex64>`. Nothing here is tuned for large
//! sizes; the kernels are plain loops ordered for contiguous access.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{AqecError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AqecError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AqecError::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// Single-entry matrix `|i><j|` of size n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(AqecError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, p) = (self.rows, other.cols);
        // split planes vectorize far better than interleaved complex values
        let b_re: Vec<f64> = other.data.iter().map(|z| z.re).collect();
        let b_im: Vec<f64> = other.data.iter().map(|z| z.im).collect();
        let mut out = Vec::with_capacity(n * p);
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx2") {
                // SAFETY: the CPU supports AVX2, checked just above
                unsafe { matmul_rows_avx2(&self.data, self.cols, &b_re, &b_im, p, &mut out) };
                return CMatrix { rows: n, cols: p, data: out };
            }
        }
        matmul_rows(&self.data, self.cols, &b_re, &b_im, p, &mut out);
        CMatrix { rows: n, cols: p, data: out }
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matvec shape mismatch");
        let out = (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        CVector::from_vec(out)
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        let n = self.require_square()?;
        if rhs.rows != n {
            return Err(AqecError::DimensionMismatch {
                expected: n,
                found: rhs.rows,
            });
        }
        let p = rhs.cols;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm_sqr()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(AqecError::Singular);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                for j in 0..p {
                    b.swap(k * p + j, piv * p + j);
                }
            }
            let inv = ONE / a[k * n + k];
            for i in (k + 1)..n {
                let (a_top, a_rest) = a.split_at_mut(i * n);
                let (pivot, row) = (&a_top[k * n..(k + 1) * n], &mut a_rest[..n]);
                let f = row[k] * inv;
                if f == ZERO {
                    continue;
                }
                row[k] = f;
                for (x, &t) in row[k + 1..].iter_mut().zip(&pivot[k + 1..]) {
                    *x -= f * t;
                }
                let (b_top, b_rest) = b.split_at_mut(i * p);
                for (x, &t) in b_rest[..p].iter_mut().zip(&b_top[k * p..(k + 1) * p]) {
                    *x -= f * t;
                }
            }
        }
        for k in (0..n).rev() {
            let inv = ONE / a[k * n + k];
            let (b_top, b_rest) = b.split_at_mut((k + 1) * p);
            let row = &mut b_top[k * p..];
            for (&akm, done) in a[k * n + k + 1..(k + 1) * n].iter().zip(b_rest.chunks_exact(p)) {
                if akm == ZERO {
                    continue;
                }
                for (x, &y) in row.iter_mut().zip(done) {
                    *x -= akm * y;
                }
            }
            for x in row.iter_mut() {
                *x *= inv;
            }
        }
        Ok(CMatrix {
            rows: n,
            cols: p,
            data: b,
        })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.axpy(-ONE, rhs);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    data: Vec<Complex64>,
}

impl CVector {
    pub fn from_vec(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![ZERO; dim],
        }
    }

    /// Computational basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self {
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        self.scale(Complex64::new(1.0 / self.norm(), 0.0))
    }

    /// `self - s * other`
    pub fn sub_scaled(&self, s: Complex64, other: &CVector) -> Self {
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - s * b)
                .collect(),
        }
    }

    /// `|self><other|`
    pub fn outer(&self, other: &CVector) -> CMatrix {
        CMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            self.data[i] * other.data[j].conj()
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

/// Kronecker product: `(a⊗b)[i*rb + k, j*cb + l] = a[i,j] * b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca, rb, cb) = (a.rows, a.cols, b.rows, b.cols);
    let cols = ca * cb;
    let mut out = CMatrix::zeros(ra * rb, cols);
    for i in 0..ra {
        for j in 0..ca {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..rb {
                let row = (i * rb + k) * cols + j * cb;
                for l in 0..cb {
                    out.data[row + l] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

// Diagonal Padé [6/6] coefficients for exp: c_k = (12-k)! 6! / (12! k! (6-k)!).
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Scaled 1-norm the Padé core is applied at.
const EXPM_SCALED_NORM: f64 = 0.5;

/// `exp(scale * m)` by scaling and squaring around a [6/6] Padé approximant.
///
/// The squaring count is chosen so the scaled 1-norm is at most 0.5, where
/// the Padé truncation error is below 1e-16.
/// Row-by-row product of an interleaved complex matrix with a matrix given
/// as separate real and imaginary planes. Appends the result to `out`.
#[inline(always)]
fn matmul_rows(a: &[Complex64], m: usize, b_re: &[f64], b_im: &[f64], p: usize, out: &mut Vec<Complex64>) {
    let mut acc_re = vec![0.0; p];
    let mut acc_im = vec![0.0; p];
    for a_row in a.chunks_exact(m) {
        acc_re.fill(0.0);
        acc_im.fill(0.0);
        for ((z, br), bi) in a_row.iter().zip(b_re.chunks_exact(p)).zip(b_im.chunks_exact(p)) {
            if *z == ZERO {
                continue;
            }
            let (ar, ai) = (z.re, z.im);
            for (((re, im), &x), &y) in acc_re.iter_mut().zip(acc_im.iter_mut()).zip(br).zip(bi) {
                *re += ar * x - ai * y;
                *im += ar * y + ai * x;
            }
        }
        out.extend(acc_re.iter().zip(&acc_im).map(|(&re, &im)| Complex64::new(re, im)));
    }
}

// Same arithmetic (no fused multiply-add), wider vectors.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn matmul_rows_avx2(a: &[Complex64], m: usize, b_re: &[f64], b_im: &[f64], p: usize, out: &mut Vec<Complex64>) {
    matmul_rows(a, m, b_re, b_im, p, out)
}

/// Number of squarings [`expm`] uses for a matrix of scaled 1-norm `norm`.
pub fn expm_squarings(norm: f64) -> i32 {
    if norm > EXPM_SCALED_NORM {
        (norm / EXPM_SCALED_NORM).log2().ceil() as i32
    } else {
        0
    }
}

pub fn expm(m: &CMatrix, scale: f64) -> Result<CMatrix> {
    let n = m.require_square()?;
    if !scale.is_finite() {
        return Err(AqecError::NonFinite("expm scale"));
    }
    let norm = m.norm_1() * scale.abs();
    if !norm.is_finite() {
        return Err(AqecError::NonFinite("expm input"));
    }
    let squarings = expm_squarings(norm);
    let a = m.scale_real(scale / 2f64.powi(squarings));
    let ident = CMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    // even and odd parts: N = V + U, D = V - U
    let mut v = ident.scale_real(PADE6[0]);
    v.axpy(PADE6[2].into(), &a2);
    v.axpy(PADE6[4].into(), &a4);
    v.axpy(PADE6[6].into(), &a6);
    let mut odd = ident.scale_real(PADE6[1]);
    odd.axpy(PADE6[3].into(), &a2);
    odd.axpy(PADE6[5].into(), &a4);
    let u = a.matmul(&odd);

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den.solve(&num)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// Hermitian traceless generators of SU(n).
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `Σ_m c_m G_m`
    pub fn combine(&self, coefficients: &[f64]) -> CMatrix {
        assert_eq!(coefficients.len(), self.generators.len());
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (c, g) in coefficients.iter().zip(&self.generators) {
            if *c != 0.0 {
                out.axpy((*c).into(), g);
            }
        }
        out
    }
}

/// Generalized Gell-Mann matrices, normalized to `Tr(G_i G_j) = 2 δ_ij`.
///
/// Order: the n(n-1)/2 symmetric `E_jk + E_kj`, then the n(n-1)/2
/// antisymmetric `-i E_jk + i E_kj` (both over `j < k` in row-major pair
/// order), then the n-1 diagonal matrices. For n = 2 this yields
/// `[σx, σy, σz]`.
pub fn gell_mann(n: usize) -> Result<GeneratorSet> {
    if n < 2 {
        return Err(AqecError::invalid(format!(
            "Gell-Mann generators need n >= 2, got {n}"
        )));
    }
    let mut generators = Vec::with_capacity(n * n - 1);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut g = CMatrix::zeros(n, n);
        g[(j, k)] = ONE;
        g[(k, j)] = ONE;
        generators.push(g);
    }
    for &(j, k) in &pairs {
        let mut g = CMatrix::zeros(n, n);
        g[(j, k)] = -I;
        g[(k, j)] = I;
        generators.push(g);
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut g = CMatrix::zeros(n, n);
        for j in 0..l {
            g[(j, j)] = Complex64::new(norm, 0.0);
        }
        g[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        generators.push(g);
    }
    Ok(GeneratorSet { dim: n, generators })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
pub fn orthonormalize(v0: &CVector, v1: &CVector) -> Result<(CVector, CVector)> {
    let n0 = v0.norm();
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(AqecError::NotOrthonormal("first vector has zero norm".into()));
    }
    let u0 = v0.normalized();
    let mut u1 = v1.sub_scaled(u0.inner(v1), &u0);
    u1 = u1.sub_scaled(u0.inner(&u1), &u0);
    let n1 = u1.norm();
    if !(n1 > 1e-12 * v1.norm().max(1e-300) && n1.is_finite()) {
        return Err(AqecError::NotOrthonormal("vectors are linearly dependent".into()));
    }
    Ok((u0, u1.normalized()))
}

/// Two random orthonormal vectors in C^n from complex Gaussian entries.
pub fn orthonormal_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(CVector, CVector)> {
    if n < 2 {
        return Err(AqecError::invalid(format!("orthonormal pair needs n >= 2, got {n}")));
    }
    let mut draw = || {
        CVector::from_vec(
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect(),
        )
    };
    let a = draw();
    let b = draw();
    orthonormalize(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        })
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let d = CMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let expected = CMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(kron(&d, &i2), expected);
    }

    #[test]
    fn kron_matches_index_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 2, 1.0);
        let b = CMatrix::from_fn(2, 3, |_, _| c(rng.random(), rng.random()));
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (4, 6));
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..3 {
                        assert_eq!(k[(i * 2 + p, j * 3 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_associative_on_integers() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, -1.0]]);
        let b = CMatrix::from_real_rows(&[&[0.0, 5.0], &[2.0, 1.0]]);
        let cm = CMatrix::from_real_rows(&[&[4.0, -2.0], &[1.0, 7.0]]);
        assert_eq!(kron(&kron(&a, &b), &cm), kron(&a, &kron(&b, &cm)));
    }

    #[test]
    fn expm_trivial_cases() {
        let z = CMatrix::zeros(3, 3);
        assert_eq!(expm(&z, 1.0).unwrap(), CMatrix::identity(3));
        let d = CMatrix::diag(&[c(-1.0, 0.0), c(-2.0, 0.0)]);
        let e = expm(&d, 1.0).unwrap();
        assert!((e[(0, 0)] - c((-1f64).exp(), 0.0)).norm() < 1e-15);
        assert!((e[(1, 1)] - c((-2f64).exp(), 0.0)).norm() < 1e-15);
        assert!(e[(0, 1)].norm() < 1e-300 && e[(1, 0)].norm() < 1e-300);
    }

    #[test]
    fn expm_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(expm(&m, 1.0), Err(AqecError::NonSquare { .. })));
    }

    #[test]
    fn expm_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut m = random_matrix(&mut rng, 4, 1.0);
            let norm = m.frobenius_norm();
            m = m.scale_real(0.9 / norm);
            // 30-term Taylor oracle
            let mut term = CMatrix::identity(4);
            let mut sum = CMatrix::identity(4);
            for k in 1..30 {
                term = term.matmul(&m).scale_real(1.0 / k as f64);
                sum += &term;
            }
            let e = expm(&m, 1.0).unwrap();
            let rel = (&e - &sum).frobenius_norm() / sum.frobenius_norm();
            assert!(rel <= 1e-12, "relative error {rel}");
        }
    }

    #[test]
    fn expm_large_norm_matches_squared_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 6, 3.0);
        let full = expm(&m, 1.0).unwrap();
        let half = expm(&m, 0.5).unwrap();
        let sq = half.matmul(&half);
        assert!((&full - &sq).frobenius_norm() / full.frobenius_norm() < 1e-12);
    }

    #[test]
    fn expm_semigroup_16() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = random_matrix(&mut rng, 16, 1.0);
        let (t1, t2) = (0.37, 0.63);
        m = m.scale_real(10.0 / m.norm_1());
        let lhs = expm(&m, t1).unwrap().matmul(&expm(&m, t2).unwrap());
        let rhs = expm(&m, t1 + t2).unwrap();
        assert!((&lhs - &rhs).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_matrix(&mut rng, 5, 2.0);
        let herm = (&h + &h.adjoint()).scale_real(0.5);
        let u = expm(&herm.scale(I), 1.0).unwrap();
        let prod = u.adjoint().matmul(&u);
        assert!((&prod - &CMatrix::identity(5)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn solve_recovers_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 5, 1.0);
        let x = random_matrix(&mut rng, 5, 1.0);
        let b = a.matmul(&x);
        assert!(a.solve(&b).unwrap().max_abs_diff(&x) < 1e-12);
        assert!(matches!(
            CMatrix::zeros(3, 3).solve(&CMatrix::identity(3)),
            Err(AqecError::Singular)
        ));
    }

    #[test]
    fn gell_mann_two_is_pauli() {
        let g = gell_mann(2).unwrap();
        let sx = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let sy = CMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap();
        let sz = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(g.generators(), &[sx, sy, sz]);
    }

    #[test]
    fn gell_mann_counts_and_hermiticity() {
        for n in 2..=6 {
            let g = gell_mann(n).unwrap();
            assert_eq!(g.len(), n * n - 1);
            for m in g.generators() {
                assert_eq!(m.hermitian_deviation(), 0.0);
                assert!(m.trace().norm() < 1e-15);
            }
        }
        assert!(gell_mann(1).is_err());
    }

    #[test]
    fn gell_mann_three_orthonormal_under_trace() {
        let g = gell_mann(3).unwrap();
        for (i, a) in g.generators().iter().enumerate() {
            for (j, b) in g.generators().iter().enumerate() {
                let t = a.matmul(b).trace();
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((t - c(expected, 0.0)).norm() < 1e-14, "pair ({i},{j}) gave {t}");
            }
        }
    }

    #[test]
    fn orthonormal_pair_contract() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = orthonormal_pair(4, &mut rng).unwrap();
            assert!((a.norm() - 1.0).abs() <= 1e-14);
            assert!((b.norm() - 1.0).abs() <= 1e-14);
            assert!(a.inner(&b).norm() <= 1e-14);
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(
            orthonormal_pair(5, &mut r1).unwrap(),
            orthonormal_pair(5, &mut r2).unwrap()
        );
    }

    #[test]
    fn construction_rejects_nan() {
        assert!(CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(CMatrix::new(2, 2, vec![ZERO; 3]).is_err());
    }
}
