//! Random generators and independent reference computations shared by the
//! integration tests. The oracles here deliberately avoid the library's own
//! helpers so that they can catch mistakes in them.

#![allow(dead_code)]

use bellkit_core::hilbert::{Ket2, Ket4, Op2, Op4};
use bellkit_core::measurement::{OutcomeDistribution, Spectral4};
use bellkit_core::mixture::{LocalSettings, MixtureComponent, ProductMixture, Spectral2};
use bellkit_core::scenario::JointTables;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Dirichlet, Distribution, StandardNormal};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in C^N.
pub fn unit<const N: usize>(rng: &mut StdRng) -> [Complex64; N] {
    loop {
        let v: [Complex64; N] = std::array::from_fn(|_| gaussian(rng));
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.map(|z| z / n);
        }
    }
}

pub fn ket2(rng: &mut StdRng) -> Ket2 {
    Ket2::new(unit::<2>(rng))
}

pub fn ket4(rng: &mut StdRng) -> Ket4 {
    Ket4::new(unit::<4>(rng))
}

/// `[u, u⊥]` with a random phase on the second vector.
pub fn onb2(rng: &mut StdRng) -> [Ket2; 2] {
    let u = unit::<2>(rng);
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let perp = [-u[1].conj() * phase, u[0].conj() * phase];
    [Ket2::new(u), Ket2::new(perp)]
}

/// Gram–Schmidt on Gaussian vectors.
pub fn onb4(rng: &mut StdRng) -> [Ket4; 4] {
    let mut out: Vec<[Complex64; 4]> = Vec::new();
    while out.len() < 4 {
        let mut v: [Complex64; 4] = std::array::from_fn(|_| gaussian(rng));
        for _ in 0..2 {
            for u in &out {
                let proj: Complex64 = (0..4).map(|k| u[k].conj() * v[k]).sum();
                for k in 0..4 {
                    v[k] -= proj * u[k];
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 {
            out.push(v.map(|z| z / n));
        }
    }
    std::array::from_fn(|k| Ket4::new(out[k]))
}

/// Random hermitian 2×2 with entries of order one.
pub fn hermitian2(rng: &mut StdRng) -> Op2 {
    let d0: f64 = rng.sample(StandardNormal);
    let d1: f64 = rng.sample(StandardNormal);
    let off = gaussian(rng);
    Op2::from_rows([
        [Complex64::new(d0, 0.0), off],
        [off.conj(), Complex64::new(d1, 0.0)],
    ])
}

pub fn spectral2(rng: &mut StdRng) -> Spectral2 {
    Spectral2::new(onb2(rng), [1.0, -1.0]).unwrap()
}

pub fn local_settings(rng: &mut StdRng) -> LocalSettings {
    LocalSettings {
        a: spectral2(rng),
        a_prime: spectral2(rng),
        b: spectral2(rng),
        b_prime: spectral2(rng),
    }
}

pub fn product_measurements(rng: &mut StdRng) -> [Spectral4; 4] {
    local_settings(rng).measurements()
}

pub fn product_mixture(rng: &mut StdRng, components: usize) -> ProductMixture {
    let raw: Vec<f64> = (0..components)
        .map(|_| rng.random::<f64>() + 1e-3)
        .collect();
    let total: f64 = raw.iter().sum();
    let mut comps: Vec<MixtureComponent> = raw
        .iter()
        .map(|w| MixtureComponent {
            weight: w / total,
            a: ket2(rng),
            b: ket2(rng),
        })
        .collect();
    // Absorb rounding so the weights sum to one.
    let s: f64 = comps.iter().map(|c| c.weight).sum();
    comps[0].weight += 1.0 - s;
    ProductMixture::new(comps).unwrap()
}

pub fn random_tables(rng: &mut StdRng) -> JointTables {
    let d = Dirichlet::new([1.0; 4]).unwrap();
    JointTables(std::array::from_fn(|_| OutcomeDistribution(d.sample(rng))))
}

/// Vertex `a(x), b(y)` of the local polytope; settings x, y ∈ {0, 1}.
pub fn deterministic_vertex(bits: usize) -> [[f64; 4]; 4] {
    let a = [(bits >> 3) & 1, (bits >> 2) & 1];
    let b = [(bits >> 1) & 1, bits & 1];
    let mut t = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            t[2 * x + y][2 * a[x] + b[y]] = 1.0;
        }
    }
    t
}

/// PR box `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ` with the row for (x, y) = (0, 0) first.
pub fn pr_vertex(alpha: usize, beta: usize, gamma: usize) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            let parity = (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma;
            for a in 0..2 {
                let b = a ^ parity;
                t[2 * x + y][2 * a + b] = 0.5;
            }
        }
    }
    t
}

/// Random point of the no-signaling polytope: a random local point, and in
/// half the draws a random PR box mixed in with a uniform weight.
pub fn no_signaling_tables(rng: &mut StdRng) -> JointTables {
    let w: Vec<f64> = (0..16)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = w.iter().sum();
    let mut t = [[0.0; 4]; 4];
    for (bits, wi) in w.iter().enumerate() {
        let v = deterministic_vertex(bits);
        for s in 0..4 {
            for k in 0..4 {
                t[s][k] += wi / total * v[s][k];
            }
        }
    }
    if rng.random::<bool>() {
        let k = rng.random_range(0..8);
        let pr = pr_vertex(k >> 2, (k >> 1) & 1, k & 1);
        let lambda: f64 = rng.random();
        for s in 0..4 {
            for j in 0..4 {
                t[s][j] = (1.0 - lambda) * t[s][j] + lambda * pr[s][j];
            }
        }
    }
    JointTables(t.map(OutcomeDistribution))
}

// ---------------------------------------------------------------- oracles

/// `(a ⊗ b)[(2i + k), (2j + l)] = a[i][j] b[k][l]`, written with bit ops.
pub fn oracle_kron(a: &Op2, b: &Op2) -> Op4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, z) in row.iter_mut().enumerate() {
            *z = a.0[r >> 1][c >> 1] * b.0[r & 1][c & 1];
        }
    }
    Op4::from_rows(out)
}

/// `Σ_ij conj(e_i) ρ_ij e_j` for each basis vector.
pub fn oracle_born(rho: &Op4, basis: &[Ket4; 4]) -> [f64; 4] {
    basis.map(|e| {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                s += e.0[i].conj() * rho.0[i][j] * e.0[j];
            }
        }
        s.re
    })
}

/// Schmidt coefficients from the reduced density matrix, in closed form.
pub fn oracle_schmidt(v: &Ket4) -> [f64; 2] {
    let m = [[v.0[0], v.0[1]], [v.0[2], v.0[3]]];
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm_sqr();
    let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
    let hi = (1.0 + disc) / 2.0;
    let lo = (1.0 - disc) / 2.0;
    [hi.max(0.0).sqrt(), lo.max(0.0).sqrt()]
}

/// `E = p11 − p12 − p21 + p22` per setting, and the CHSH combination.
pub fn oracle_delta(t: &JointTables) -> f64 {
    let e = |k: usize| {
        let p = t.0[k].0;
        p[0] - p[1] - p[2] + p[3]
    };
    e(3) + e(1) + e(2) - e(0)
}

/// For no-signaling tables: local iff every CHSH form is at most 2 (Fine).
pub fn oracle_fine_local(t: &JointTables, tol: f64) -> bool {
    let e: Vec<f64> =
        t.0.iter()
            .map(|d| d.0[0] - d.0[1] - d.0[2] + d.0[3])
            .collect();
    let mut ok = true;
    for minus in 0..4 {
        let s: f64 = (0..4).map(|k| if k == minus { -e[k] } else { e[k] }).sum();
        ok &= s.abs() <= 2.0 + tol;
    }
    ok
}

/// Marginal-law deviations computed straight from the table entries.
pub fn oracle_max_marginal(t: &JointTables) -> f64 {
    let p = |k: usize| t.0[k].0;
    let a1 = |k: usize| p(k)[0] + p(k)[1];
    let b1 = |k: usize| p(k)[0] + p(k)[2];
    [
        (a1(0) - a1(1)).abs(),
        (a1(2) - a1(3)).abs(),
        (b1(0) - b1(2)).abs(),
        (b1(1) - b1(3)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn fidelity2(u: &Ket2, v: &Ket2) -> f64 {
    (u.0[0].conj() * v.0[0] + u.0[1].conj() * v.0[1]).norm_sqr()
}
