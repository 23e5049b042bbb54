//! Cyclic Jacobi diagonalization for small complex hermitian matrices.

use num_complex::Complex64;
// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::hilbert::{Ket, Op};

/// Stop sweeping once the off-diagonal Frobenius norm drops below this
/// fraction of the full Frobenius norm.
pub const JACOBI_THRESHOLD: f64 = 1e-13;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: [Ket<N>; N],
}

impl<const N: usize> HermitianEigen<N> {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[N - 1]
    }
}

fn off_diagonal_norm<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if i != j {
                s += z.norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn frobenius<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Diagonalizes the hermitian part of `m`.
///
/// Each step first rotates the phase of column `q` so that the pivot
/// `a[p][q]` becomes real, then applies the classical real Jacobi rotation.
pub fn hermitian_eigen<const N: usize>(m: &Op<N>) -> HermitianEigen<N> {
    let mut a = m.hermitian_part().0;
    let mut v = [[Complex64::new(0.0, 0.0); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }

    let scale = frobenius(&a);
    if scale > 0.0 {
        let mut converged_once = false;
        for _ in 0..MAX_SWEEPS {
            let off = off_diagonal_norm(&a);
            if off <= JACOBI_THRESHOLD * scale {
                if converged_once || off == 0.0 {
                    break;
                }
                converged_once = true;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order = [0usize; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));

    let mut values = [0.0; N];
    let mut vectors = [Ket::<N>::zero(); N];
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[i][i].re;
        let mut col = [Complex64::new(0.0, 0.0); N];
        for (r, c) in col.iter_mut().enumerate() {
            *c = v[r][i];
        }
        vectors[k] = Ket(col);
    }
    HermitianEigen { values, vectors }
}

fn rotate<const N: usize>(
    a: &mut [[Complex64; N]; N],
    v: &mut [[Complex64; N]; N],
    p: usize,
    q: usize,
) {
    let apq = a[p][q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p][p].re;
    let aqq = a[q][q].re;
    if r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p][q] = Complex64::new(0.0, 0.0);
        a[q][p] = Complex64::new(0.0, 0.0);
        return;
    }

    // Phase: column q scaled by e^{-i phi} makes a[p][q] real and positive.
    let phase = apq / r;
    let phase_conj = phase.conj();

    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary U acting on (p, q): U = D * R, D = diag(1, conj(phase)),
    // R = [[c, s], [-s, c]].
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = phase_conj * (-s);
    let u_qq = phase_conj * c;

    // A <- A U
    for row in a.iter_mut() {
        let x = row[p];
        let y = row[q];
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
    // A <- U^dagger A
    for col in 0..N {
        let x = a[p][col];
        let y = a[q][col];
        a[p][col] = u_pp.conj() * x + u_qp.conj() * y;
        a[q][col] = u_pq.conj() * x + u_qq.conj() * y;
    }
    a[p][q] = Complex64::new(0.0, 0.0);
    a[q][p] = Complex64::new(0.0, 0.0);
    a[p][p].im = 0.0;
    a[q][q].im = 0.0;

    for row in v.iter_mut() {
        let x = row[p];
        let y = row[q];
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Op2, Op4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let m = Op4::diagonal([3.0, -1.0, 2.0, 0.5]);
        let e = hermitian_eigen(&m);
        assert_eq!(e.values, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = Op2::from_rows([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        let e = hermitian_eigen(&y);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        for (k, vec) in e.vectors.iter().enumerate() {
            let av = y.apply(vec);
            for i in 0..2 {
                assert!((av.0[i] - vec.0[i] * e.values[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn complex_four_by_four_reconstructs() {
        let m = Op4::from_rows([
            [c(2.0, 0.0), c(0.3, 0.4), c(0.0, -1.0), c(0.1, 0.0)],
            [c(0.3, -0.4), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, 0.2)],
            [c(0.0, 1.0), c(0.5, -0.5), c(0.7, 0.0), c(-0.3, 0.1)],
            [c(0.1, 0.0), c(0.0, -0.2), c(-0.3, -0.1), c(0.0, 0.0)],
        ]);
        let e = hermitian_eigen(&m);
        let mut rebuilt = Op4::zero();
        for k in 0..4 {
            rebuilt = rebuilt + e.vectors[k].projector().scale(e.values[k]);
        }
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let g = e.vectors[i].inner(&e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(want, 0.0)).norm() < 1e-12);
            }
        }
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 1.7).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eigen(&Op4::zero());
        assert_eq!(e.values, [0.0; 4]);
    }
}
