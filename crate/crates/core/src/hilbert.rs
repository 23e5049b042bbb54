//! Vectors and operators on C² and C⁴, tensor products and density operators.
//!
//! C⁴ is identified with C²⊗C² through the canonical ordering
//! `|1,0,0,0⟩ ↔ |1,0⟩⊗|1,0⟩`, `|0,1,0,0⟩ ↔ |1,0⟩⊗|0,1⟩`,
//! `|0,0,1,0⟩ ↔ |0,1⟩⊗|1,0⟩`, `|0,0,0,1⟩ ↔ |0,1⟩⊗|0,1⟩`,
//! i.e. index `2i + j` holds the amplitude of `|i⟩⊗|j⟩`.

use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{hermitian_eigen, HermitianEigen};
use crate::error::{Error, Result};

/// A complex amplitude; serialized elsewhere as a `[re, im]` pair.
pub type Amplitude = Complex64;

/// Tolerance for construction-time checks (unit norm, hermiticity of inputs).
pub const UNIT_TOL: f64 = 1e-12;
/// Default tolerance for everything else.
pub const DEFAULT_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Amplitude {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn zero() -> Amplitude {
    Complex64::new(0.0, 0.0)
}

/// A vector in Cᴺ (ket).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket<const N: usize>(pub [Amplitude; N]);

pub type Ket2 = Ket<2>;
pub type Ket4 = Ket<4>;

impl<const N: usize> Ket<N> {
    pub const fn new(amplitudes: [Amplitude; N]) -> Self {
        Ket(amplitudes)
    }

    pub fn zero() -> Self {
        Ket([zero(); N])
    }

    /// Canonical basis vector `k` (0-based).
    pub fn basis(k: usize) -> Self {
        let mut v = Self::zero();
        v.0[k] = c(1.0, 0.0);
        v
    }

    pub fn from_real(x: [f64; N]) -> Self {
        let mut v = Self::zero();
        for (a, r) in v.0.iter_mut().zip(x) {
            *a = c(r, 0.0);
        }
        v
    }

    /// Builds a vector and checks it is unit-norm within [`UNIT_TOL`].
    pub fn unit(amplitudes: [Amplitude; N]) -> Result<Self> {
        let v = Ket(amplitudes);
        v.check_unit(UNIT_TOL)?;
        Ok(v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_unit(&self, tol: f64) -> Result<()> {
        let n = self.norm_sqr();
        if !self.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::Normalization { norm_sqr: n });
        }
        Ok(())
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Normalization { norm_sqr: n * n });
        }
        Ok(self.scale(c(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: Amplitude) -> Self {
        let mut v = *self;
        for a in v.0.iter_mut() {
            *a *= s;
        }
        v
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Amplitude {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`; states are rays, so this is how they are compared.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|self⟩⟨other|`
    pub fn outer(&self, other: &Self) -> Op<N> {
        let mut m = Op::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[i] * other.0[j].conj();
            }
        }
        m
    }

    pub fn projector(&self) -> Op<N> {
        self.outer(self)
    }
}

impl<const N: usize> Add for Ket<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Ket<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for Ket<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(c(-1.0, 0.0))
    }
}

/// Max entrywise deviation of the Gram matrix of `basis` from the identity.
pub fn gram_deviation<const N: usize, const M: usize>(basis: &[Ket<N>; M]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..M {
        for j in 0..M {
            let want = if i == j { c(1.0, 0.0) } else { zero() };
            let d = (basis[i].inner(&basis[j]) - want).norm();
            if !d.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// A dense N×N complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Op<const N: usize>(pub [[Amplitude; N]; N]);

pub type Op2 = Op<2>;
pub type Op4 = Op<4>;

impl<const N: usize> Op<N> {
    pub fn zero() -> Self {
        Op([[zero(); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = c(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(d: [f64; N]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = c(x, 0.0);
        }
        m
    }

    pub const fn from_rows(rows: [[Amplitude; N]; N]) -> Self {
        Op(rows)
    }

    pub fn from_real_rows(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = c(rows[i][j], 0.0);
            }
        }
        m
    }

    /// Builds `Σ λ_k |e_k⟩⟨e_k|`.
    pub fn spectral_sum(vectors: &[Ket<N>], values: &[f64]) -> Self {
        let mut m = Self::zero();
        for (v, &l) in vectors.iter().zip(values) {
            m = m + v.projector().scale(l);
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(c(s, 0.0))
    }

    pub fn scale_complex(&self, s: Amplitude) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        m
    }

    pub fn apply(&self, v: &Ket<N>) -> Ket<N> {
        let mut out = Ket::zero();
        for i in 0..N {
            out.0[i] = self.0[i].iter().zip(v.0.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `⟨v|self|v⟩`
    pub fn expectation(&self, v: &Ket<N>) -> Amplitude {
        v.inner(&self.apply(v))
    }

    pub fn trace(&self) -> Amplitude {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// `Tr[self · other]`
    pub fn trace_product(&self, other: &Self) -> Amplitude {
        let mut t = zero();
        for i in 0..N {
            for k in 0..N {
                t += self.0[i][k] * other.0[k][i];
            }
        }
        t
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                let d = (self.0[i][j] - other.0[i][j]).norm();
                if !d.is_finite() {
                    return f64::INFINITY;
                }
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::Hermiticity { deviation });
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Spectrum of the hermitian part, ascending.
    pub fn eigh(&self) -> HermitianEigen<N> {
        hermitian_eigen(self)
    }
}

impl<const N: usize> Index<(usize, usize)> for Op<N> {
    type Output = Amplitude;
    fn index(&self, (i, j): (usize, usize)) -> &Amplitude {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Op<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Amplitude {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Op<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Op<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Op<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

/// `a ⊗ b` without input checks.
pub fn kron_state(a: &Ket2, b: &Ket2) -> Ket4 {
    let mut v = Ket4::zero();
    for i in 0..2 {
        for j in 0..2 {
            v.0[2 * i + j] = a.0[i] * b.0[j];
        }
    }
    v
}

/// `a ⊗ b` without input checks; entry `(2i+k, 2j+l)` is `a_ij · b_kl`.
pub fn kron_operator(a: &Op2, b: &Op2) -> Op4 {
    let mut m = Op4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Tensor product of two unit vectors of C², in the canonical C⁴ ordering.
pub fn tensor_state(a: &Ket2, b: &Ket2) -> Result<Ket4> {
    a.check_unit(UNIT_TOL)?;
    b.check_unit(UNIT_TOL)?;
    Ok(kron_state(a, b))
}

/// Tensor product of two hermitian operators on C².
pub fn tensor_operator(a: &Op2, b: &Op2) -> Result<Op4> {
    a.check_hermitian(UNIT_TOL)?;
    b.check_hermitian(UNIT_TOL)?;
    Ok(kron_operator(a, b))
}

/// Outcome of [`validate_density`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_deviation: f64,
    pub ok: bool,
}

/// Reports how far `m` is from being a density operator.
pub fn validate_density(m: &Op4, tol: f64) -> DensityDiagnostics {
    if !m.is_finite() {
        return DensityDiagnostics {
            trace_deviation: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            hermiticity_deviation: f64::INFINITY,
            ok: false,
        };
    }
    let hermiticity_deviation = m.hermiticity_deviation();
    let trace_deviation = (m.trace() - c(1.0, 0.0)).norm();
    let min_eigenvalue = m.eigh().min();
    let ok = hermiticity_deviation <= tol && trace_deviation <= tol && min_eigenvalue >= -tol;
    DensityDiagnostics {
        trace_deviation,
        min_eigenvalue,
        hermiticity_deviation,
        ok,
    }
}

/// A density operator on C⁴, optionally remembering the ensemble it was
/// built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Density4 {
    matrix: Op4,
    provenance: Option<Vec<(f64, Ket4)>>,
}

impl Density4 {
    /// Rank-one density `|v⟩⟨v|` of a unit vector.
    pub fn pure(v: &Ket4) -> Result<Self> {
        v.check_unit(UNIT_TOL)?;
        Ok(Density4 {
            matrix: v.projector(),
            provenance: Some(alloc::vec![(1.0, *v)]),
        })
    }

    /// `Σ w_i |r_i⟩⟨r_i|` with weights in [0, 1] summing to one.
    pub fn mixture(components: &[(f64, Ket4)]) -> Result<Self> {
        check_weights(components.iter().map(|(w, _)| *w))?;
        let mut matrix = Op4::zero();
        for (w, r) in components {
            r.check_unit(UNIT_TOL)?;
            matrix = matrix + r.projector().scale(*w);
        }
        Ok(Density4 {
            matrix,
            provenance: Some(components.to_vec()),
        })
    }

    /// Wraps a matrix after checking it with [`validate_density`] at [`DEFAULT_TOL`].
    pub fn from_matrix(matrix: Op4) -> Result<Self> {
        let d = validate_density(&matrix, DEFAULT_TOL);
        if !d.ok {
            return Err(Error::InvalidDensity {
                trace_deviation: d.trace_deviation,
                min_eigenvalue: d.min_eigenvalue,
                hermiticity_deviation: d.hermiticity_deviation,
            });
        }
        Ok(Density4 {
            matrix,
            provenance: None,
        })
    }

    pub(crate) fn from_matrix_unchecked(matrix: Op4) -> Self {
        Density4 {
            matrix,
            provenance: None,
        }
    }

    /// The maximally mixed state I/4.
    pub fn maximally_mixed() -> Self {
        Density4::from_matrix_unchecked(Op4::identity().scale(0.25))
    }

    pub fn matrix(&self) -> &Op4 {
        &self.matrix
    }

    pub fn provenance(&self) -> Option<&[(f64, Ket4)]> {
        self.provenance.as_deref()
    }

    /// `Tr[ρ A]`
    pub fn trace_with(&self, a: &Op4) -> Amplitude {
        self.matrix.trace_product(a)
    }

    /// The unit vector `v` with `ρ = |v⟩⟨v|`, if the state is pure within `tol`.
    pub fn as_pure(&self, tol: f64) -> Option<Ket4> {
        if let Some([(w, v)]) = self.provenance.as_deref() {
            if (w - 1.0).abs() <= tol {
                return Some(*v);
            }
        }
        let e = self.matrix.eigh();
        if e.max() >= 1.0 - tol && e.values[..3].iter().all(|x| x.abs() <= tol) {
            Some(e.vectors[3])
        } else {
            None
        }
    }

    pub fn diagnostics(&self, tol: f64) -> DensityDiagnostics {
        validate_density(&self.matrix, tol)
    }
}

/// Weights must lie in [0, 1] and sum to one within [`DEFAULT_TOL`].
pub(crate) fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut any = false;
    for w in weights {
        any = true;
        sum += w;
        min = min.min(w);
        max = max.max(w);
    }
    if !any || !sum.is_finite() || (sum - 1.0).abs() > DEFAULT_TOL || min < 0.0 || max > 1.0 {
        return Err(Error::Weight { sum, min });
    }
    Ok(())
}
