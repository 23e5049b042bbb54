//! Product versus entangled structure of states and measurements on C²⊗C².

// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::hilbert::{c, kron_operator, kron_state, Amplitude, Ket2, Ket4, Op2, Op4};
use crate::measurement::Spectral4;

/// Default product threshold on the second Schmidt coefficient.
pub const PRODUCT_TOL: f64 = 1e-8;

/// `v = Σ_k s_k · left_k ⊗ right_k` with `s_0 ≥ s_1 ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchmidtForm {
    pub coefficients: [f64; 2],
    pub left: [Ket2; 2],
    pub right: [Ket2; 2],
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> Ket4 {
        let mut v = Ket4::zero();
        for k in 0..2 {
            v = v + kron_state(&self.left[k], &self.right[k]).scale(c(self.coefficients[k], 0.0));
        }
        v
    }

    pub fn is_product(&self, tol: f64) -> bool {
        self.coefficients[1] <= tol
    }
}

/// Orthogonal complement of a unit vector in C².
fn complement(u: &Ket2) -> Ket2 {
    Ket2::new([-u.0[1].conj(), u.0[0].conj()])
}

/// Schmidt decomposition of a unit vector of C⁴.
///
/// The coefficients come from the closed form of the 2×2 amplitude matrix
/// `M_ij = v[2i+j]`: `s_0 s_1 = |det M|` and `s_0² + s_1² = 1`, which keeps the
/// small coefficient accurate to rounding instead of to its square root.
pub fn schmidt_decompose(v: &Ket4) -> Result<SchmidtForm> {
    v.check_unit(crate::hilbert::UNIT_TOL)?;
    Ok(schmidt_unchecked(v))
}

pub(crate) fn schmidt_unchecked(v: &Ket4) -> SchmidtForm {
    let m = Op2::from_rows([[v.0[0], v.0[1]], [v.0[2], v.0[3]]]);
    let n = v.norm_sqr();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    let disc = (n * n - 4.0 * det * det).max(0.0).sqrt();
    let s0 = ((n + disc) / 2.0).sqrt();
    let s1 = if s0 > 0.0 { det / s0 } else { 0.0 };

    // Left singular vectors from M M†.
    let mmd = m * m.adjoint();
    let eig = mmd.eigh();
    let u0 = eig.vectors[1];
    let u1 = complement(&u0);

    // right_k = Mᵀ conj(u_k) / s_k
    let mt_conj = |u: &Ket2| -> Ket2 {
        Ket2::new([
            u.0[0].conj() * m[(0, 0)] + u.0[1].conj() * m[(1, 0)],
            u.0[0].conj() * m[(0, 1)] + u.0[1].conj() * m[(1, 1)],
        ])
    };
    let w0 = mt_conj(&u0).normalized().unwrap_or_else(|_| Ket2::basis(0));
    let w1_dir = complement(&w0);
    let z = w1_dir.inner(&mt_conj(&u1));
    let w1 = if z.norm() > 0.0 {
        w1_dir.scale(z / z.norm())
    } else {
        w1_dir
    };

    SchmidtForm {
        coefficients: [s0, s1],
        left: [u0, u1],
        right: [w0, w1],
    }
}

/// Factors `(a, b)` with `a ⊗ b = v` up to a global phase when the second
/// Schmidt coefficient is at most `tol`.
pub fn is_product_state(v: &Ket4, tol: f64) -> Result<Option<(Ket2, Ket2)>> {
    let s = schmidt_decompose(v)?;
    Ok(s.is_product(tol).then_some((s.left[0], s.right[0])))
}

/// Product structure of a measurement: an orthonormal basis of each factor
/// such that the stored basis vector in slot `slots[i][j]` is `a_i ⊗ b_j` up to phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductFactorization {
    pub a_basis: [Ket2; 2],
    pub b_basis: [Ket2; 2],
    pub slots: [[usize; 2]; 2],
    /// `(α, β)` with `λ_{slots[i][j]} = α_i β_j`, when the labels allow it.
    pub local_labels: Option<([f64; 2], [f64; 2])>,
}

impl ProductFactorization {
    pub fn a_observable(&self) -> Option<Op2> {
        self.local_labels
            .map(|(alpha, _)| Op2::spectral_sum(&self.a_basis, &alpha))
    }

    pub fn b_observable(&self) -> Option<Op2> {
        self.local_labels
            .map(|(_, beta)| Op2::spectral_sum(&self.b_basis, &beta))
    }

    /// `ℰ_A ⊗ ℰ_B`, when the labels factor.
    pub fn observable(&self) -> Option<Op4> {
        Some(kron_operator(&self.a_observable()?, &self.b_observable()?))
    }
}

/// Verdict of [`is_product_measurement`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementStructure {
    Product(ProductFactorization),
    Entangled,
    /// Degenerate labels where neither answer can be certified from the
    /// operator alone.
    Undecided,
}

impl MeasurementStructure {
    pub fn product(&self) -> Option<&ProductFactorization> {
        match self {
            MeasurementStructure::Product(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, MeasurementStructure::Product(_))
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self, MeasurementStructure::Entangled)
    }
}

/// Decides whether a measurement is built on a product basis
/// `{a_i ⊗ b_j}`.
///
/// A stored basis of product vectors that group as `{a_0, a_1} × {b_0, b_1}`
/// is a product measurement. Otherwise, with pairwise distinct labels the
/// eigenbasis is unique up to phases and the measurement is entangled. With
/// repeated labels another eigenbasis might be a product one: when every
/// arrangement of the labels on a 2×2 grid factors (e.g. two +1 and two −1),
/// a non-factoring observable rules that out; all other degenerate cases are
/// [`MeasurementStructure::Undecided`].
pub fn is_product_measurement(m: &Spectral4, tol: f64) -> MeasurementStructure {
    if let Some((a_basis, b_basis, slots)) = product_grid(m.basis(), tol) {
        let labels = m.eigenvalues();
        let grid = [
            [labels[slots[0][0]], labels[slots[0][1]]],
            [labels[slots[1][0]], labels[slots[1][1]]],
        ];
        let local_labels = factor_labels(grid, tol);
        return MeasurementStructure::Product(ProductFactorization {
            a_basis,
            b_basis,
            slots,
            local_labels,
        });
    }
    if !m.is_degenerate(tol) {
        return MeasurementStructure::Entangled;
    }
    if every_arrangement_factors(m.eigenvalues(), tol)
        && tensor_factors(&m.observable(), tol).is_none()
    {
        return MeasurementStructure::Entangled;
    }
    MeasurementStructure::Undecided
}

/// Groups a basis of C⁴ as `{a_i ⊗ b_j}` if possible.
pub(crate) fn product_grid(
    basis: &[Ket4; 4],
    tol: f64,
) -> Option<([Ket2; 2], [Ket2; 2], [[usize; 2]; 2])> {
    let mut a = [Ket2::zero(); 4];
    let mut b = [Ket2::zero(); 4];
    for k in 0..4 {
        let s = schmidt_unchecked(&basis[k]);
        if !s.is_product(tol) {
            return None;
        }
        a[k] = s.left[0];
        b[k] = s.right[0];
    }
    let a_class = split_rays(&a, tol)?;
    let b_class = split_rays(&b, tol)?;

    let mut slots = [[usize::MAX; 2]; 2];
    for k in 0..4 {
        let cell = &mut slots[a_class[k]][b_class[k]];
        if *cell != usize::MAX {
            return None;
        }
        *cell = k;
    }
    let first = |class: &[usize; 4], which: usize| (0..4).find(|&k| class[k] == which).unwrap();
    let a_basis = [a[first(&a_class, 0)], a[first(&a_class, 1)]];
    let b_basis = [b[first(&b_class, 0)], b[first(&b_class, 1)]];
    Some((a_basis, b_basis, slots))
}

/// Assigns each ray to class 0 (same ray as `rays[0]`) or class 1
/// (orthogonal to it); requires exactly two of each.
fn split_rays(rays: &[Ket2; 4], tol: f64) -> Option<[usize; 4]> {
    let mut class = [0usize; 4];
    let mut counts = [0usize; 2];
    let mut other: Option<Ket2> = None;
    for k in 0..4 {
        let f = rays[0].fidelity(&rays[k]);
        let which = if f >= 0.5 { 0 } else { 1 };
        if which == 0 && 1.0 - f > tol {
            return None;
        }
        if which == 1 {
            if f > tol {
                return None;
            }
            match other {
                None => other = Some(rays[k]),
                Some(o) if 1.0 - o.fidelity(&rays[k]) > tol => return None,
                Some(_) => {}
            }
        }
        class[k] = which;
        counts[which] += 1;
    }
    (counts == [2, 2]).then_some(class)
}

/// Solves `L_ij = α_i β_j` for a 2×2 label grid.
fn factor_labels(grid: [[f64; 2]; 2], tol: f64) -> Option<([f64; 2], [f64; 2])> {
    let mut pivot = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if grid[i][j].abs() > grid[pivot.0][pivot.1].abs() {
                pivot = (i, j);
            }
        }
    }
    let (i0, j0) = pivot;
    let p = grid[i0][j0];
    if p == 0.0 {
        return Some(([0.0; 2], [0.0; 2]));
    }
    let alpha = [grid[0][j0] / p, grid[1][j0] / p];
    let beta = [grid[i0][0], grid[i0][1]];
    let scale = p.abs().max(1.0);
    for i in 0..2 {
        for j in 0..2 {
            if (alpha[i] * beta[j] - grid[i][j]).abs() > tol * scale {
                return None;
            }
        }
    }
    Some((alpha, beta))
}

fn every_arrangement_factors(labels: &[f64; 4], tol: f64) -> bool {
    // Up to symmetry of the grid, an arrangement is fixed by which label
    // shares the diagonal with labels[0].
    (1..4).all(|partner| {
        let rest: [usize; 2] = match partner {
            1 => [2, 3],
            2 => [1, 3],
            _ => [1, 2],
        };
        let grid = [
            [labels[0], labels[rest[0]]],
            [labels[rest[1]], labels[partner]],
        ];
        factor_labels(grid, tol).is_some()
    })
}

/// Writes `op = X ⊗ Y` with hermitian `X`, `Y` when `op` is hermitian and
/// its realignment has rank one within `tol` (relative).
pub fn tensor_factors(op: &Op4, tol: f64) -> Option<(Op2, Op2)> {
    let norm = op.frobenius_norm();
    if norm == 0.0 {
        return Some((Op2::zero(), Op2::identity()));
    }
    // R[(i,j)][(k,l)] = op[(i,k)][(j,l)], so X ⊗ Y realigns to vec(X) vec(Y)ᵀ.
    let mut r = Op4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r[(2 * i + j, 2 * k + l)] = op[(2 * i + k, 2 * j + l)];
                }
            }
        }
    }
    let eig = (r * r.adjoint()).eigh();
    let u = eig.vectors[3];
    // R† u = σ v
    let rd_u = r.adjoint().apply(&u);
    let sigma = rd_u.norm();
    if sigma == 0.0 {
        return None;
    }
    let v = rd_u.scale(c(1.0 / sigma, 0.0));

    let mut residual = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            residual += (r[(a, b)] - u.0[a] * v.0[b].conj() * sigma).norm_sqr();
        }
    }
    if residual.sqrt() > tol * norm {
        return None;
    }

    let mut x = Op2::zero();
    let mut y = Op2::zero();
    for i in 0..2 {
        for j in 0..2 {
            x[(i, j)] = u.0[2 * i + j];
            y[(i, j)] = v.0[2 * i + j].conj() * sigma;
        }
    }
    // X = e^{iφ} H for hermitian H; recover e^{2iφ} from the largest entry.
    let (mut bi, mut bj) = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if x[(i, j)].norm() > x[(bi, bj)].norm() {
                bi = i;
                bj = j;
            }
        }
    }
    let twice: Amplitude = x[(bi, bj)] / x[(bj, bi)].conj();
    let half = if twice.norm() > 0.0 {
        (twice / twice.norm()).sqrt()
    } else {
        c(1.0, 0.0)
    };
    let x = x.scale_complex(half.conj()).hermitian_part();
    let y = y.scale_complex(half).hermitian_part();
    if kron_operator(&x, &y).max_abs_diff(op) > tol * norm.max(1.0) {
        return None;
    }
    Some((x, y))
}
