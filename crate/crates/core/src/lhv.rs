//! Local hidden-variable models for CHSH tables.
//!
//! A table set has a single Kolmogorovian model exactly when it is a convex
//! combination of the 16 deterministic strategies. The weights are found by
//! non-negative least squares (Lawson–Hanson active set) over those vertices,
//! with an extra row forcing the weights onto the simplex.

use alloc::vec::Vec;

// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::measurement::{slot, OutcomeDistribution, Setting};
use crate::scenario::{chsh_variants, marginal_deviation, JointTables};

/// Default feasibility tolerance on the reconstructed probabilities.
pub const LHV_TOL: f64 = 1e-9;

/// Fixed outcomes (1 or 2) for each of the four local observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub a: u8,
    pub a_prime: u8,
    pub b: u8,
    pub b_prime: u8,
}

impl DeterministicStrategy {
    /// All 16 strategies; index `8(a−1) + 4(a′−1) + 2(b−1) + (b′−1)`.
    pub fn all() -> [DeterministicStrategy; 16] {
        core::array::from_fn(|k| {
            let bit = |shift: usize| 1 + ((k >> shift) & 1) as u8;
            DeterministicStrategy {
                a: bit(3),
                a_prime: bit(2),
                b: bit(1),
                b_prime: bit(0),
            }
        })
    }

    pub fn index(&self) -> usize {
        let bit = |v: u8| (v - 1) as usize;
        8 * bit(self.a) + 4 * bit(self.a_prime) + 2 * bit(self.b) + bit(self.b_prime)
    }

    fn outcome(&self, s: Setting) -> usize {
        let x = if s.a_primed() { self.a_prime } else { self.a };
        let y = if s.b_primed() { self.b_prime } else { self.b };
        slot((x - 1) as usize, (y - 1) as usize)
    }
}

pub fn strategy_tables(s: &DeterministicStrategy) -> JointTables {
    JointTables(Setting::ALL.map(|setting| {
        let mut p = [0.0; 4];
        p[s.outcome(setting)] = 1.0;
        OutcomeDistribution(p)
    }))
}

/// Why no local model fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Witness {
    /// A CHSH variant (index as in [`chsh_variants`]) exceeds 2.
    Chsh { variant: usize, value: f64 },
    /// A marginal-law equality (index as in [`marginal_deviation`]) fails.
    Signaling { index: usize, deviation: f64 },
    /// Neither test fires but the projection onto the local polytope
    /// still misses the tables by more than the tolerance.
    Residual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LhvCertificate {
    Feasible {
        /// Weight per strategy, indexed as in [`DeterministicStrategy::all`].
        weights: [f64; 16],
        reconstruction_error: f64,
    },
    Infeasible {
        witness: Witness,
        /// Max absolute distance between the tables and their closest local
        /// approximation found.
        residual: f64,
    },
}

impl LhvCertificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LhvCertificate::Feasible { .. })
    }

    pub fn weights(&self) -> Option<&[f64; 16]> {
        match self {
            LhvCertificate::Feasible { weights, .. } => Some(weights),
            LhvCertificate::Infeasible { .. } => None,
        }
    }
}

/// Tables reproduced by a weighting of the deterministic strategies.
pub fn mix_strategies(weights: &[f64; 16]) -> JointTables {
    let mut out = [[0.0; 4]; 4];
    for (s, &w) in DeterministicStrategy::all().iter().zip(weights) {
        for setting in Setting::ALL {
            out[setting.index()][s.outcome(setting)] += w;
        }
    }
    JointTables(out.map(OutcomeDistribution))
}

pub fn lhv_feasible(t: &JointTables, tol: f64) -> LhvCertificate {
    const ROWS: usize = 17;
    let strategies = DeterministicStrategy::all();
    let mut a = [[0.0; 16]; ROWS];
    let mut b = [0.0; ROWS];
    for (col, s) in strategies.iter().enumerate() {
        for setting in Setting::ALL {
            a[4 * setting.index() + s.outcome(setting)][col] = 1.0;
        }
        a[16][col] = 1.0;
    }
    for setting in Setting::ALL {
        for k in 0..4 {
            b[4 * setting.index() + k] = t.0[setting.index()].0[k];
        }
    }
    b[16] = 1.0;

    let weights = nnls(&a, &b);
    let error = mix_strategies(&weights).max_abs_diff(t);
    if error <= tol {
        return LhvCertificate::Feasible {
            weights,
            reconstruction_error: error,
        };
    }

    let variants = chsh_variants(t);
    let (variant, value) =
        variants
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            });
    let marginal = marginal_deviation(t);
    let witness = if value > 2.0 + tol {
        Witness::Chsh { variant, value }
    } else if marginal.max > tol {
        let index = marginal
            .values
            .iter()
            .position(|&v| v == marginal.max)
            .unwrap_or(0);
        Witness::Signaling {
            index,
            deviation: marginal.max,
        }
    } else {
        Witness::Residual
    };
    LhvCertificate::Infeasible {
        witness,
        residual: error,
    }
}

/// All eight CHSH variants, and whether every one is at most `2 + tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FineCheck {
    pub values: [f64; 8],
    pub satisfiable: bool,
}

pub fn fine_chsh_all(t: &JointTables, tol: f64) -> FineCheck {
    let values = chsh_variants(t);
    FineCheck {
        values,
        satisfiable: values.iter().all(|&v| v <= 2.0 + tol),
    }
}

const GRADIENT_TOL: f64 = 1e-13;
const MAX_OUTER: usize = 200;

/// Lawson–Hanson: minimize `‖Ax − b‖` subject to `x ≥ 0`.
fn nnls<const M: usize, const N: usize>(a: &[[f64; N]; M], b: &[f64; M]) -> [f64; N] {
    let mut x = [0.0; N];
    let mut passive = [false; N];
    let mut blocked = [false; N];

    for _ in 0..MAX_OUTER {
        let w = gradient(a, b, &x);
        let candidate = (0..N)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > GRADIENT_TOL)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        let mut first = true;
        loop {
            let cols: Vec<usize> = (0..N).filter(|&i| passive[i]).collect();
            let z = match least_squares(a, b, &cols) {
                Some(z) if !(first && z[j] <= 0.0) => z,
                // Numerically dependent column or a step that would not
                // move: leave it out until the iterate changes.
                _ => {
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            };
            first = false;
            if cols.iter().all(|&i| z[i] > 0.0) {
                x = z;
                blocked = [false; N];
                break;
            }
            let alpha = cols
                .iter()
                .filter(|&&i| z[i] <= 0.0)
                .map(|&i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            for &i in &cols {
                x[i] += alpha * (z[i] - x[i]);
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}

fn gradient<const M: usize, const N: usize>(
    a: &[[f64; N]; M],
    b: &[f64; M],
    x: &[f64; N],
) -> [f64; N] {
    let mut r = *b;
    for (ri, row) in r.iter_mut().zip(a) {
        *ri -= row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
    }
    core::array::from_fn(|j| (0..M).map(|i| a[i][j] * r[i]).sum())
}

/// Unconstrained least squares restricted to `cols`, by modified
/// Gram–Schmidt. `None` when the columns are numerically dependent.
fn least_squares<const M: usize, const N: usize>(
    a: &[[f64; N]; M],
    b: &[f64; M],
    cols: &[usize],
) -> Option<[f64; N]> {
    let k = cols.len();
    let mut q: Vec<[f64; M]> = cols
        .iter()
        .map(|&c| core::array::from_fn(|i| a[i][c]))
        .collect();
    let mut r = alloc::vec![alloc::vec![0.0; k]; k];
    for j in 0..k {
        let norm0 = dot(&q[j], &q[j]).sqrt();
        for i in 0..j {
            let proj = dot(&q[i], &q[j]);
            r[i][j] = proj;
            let qi = q[i];
            for (v, u) in q[j].iter_mut().zip(qi.iter()) {
                *v -= proj * u;
            }
        }
        let norm = dot(&q[j], &q[j]).sqrt();
        if !(norm > 1e-10 * norm0.max(1.0)) {
            return None;
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qtb: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    let mut z = alloc::vec![0.0; k];
    for i in (0..k).rev() {
        let tail: f64 = (i + 1..k).map(|j| r[i][j] * z[j]).sum();
        z[i] = (qtb[i] - tail) / r[i][i];
    }
    let mut out = [0.0; N];
    for (&c, &v) in cols.iter().zip(&z) {
        out[c] = v;
    }
    Some(out)
}

fn dot<const M: usize>(u: &[f64; M], v: &[f64; M]) -> f64 {
    u.iter().zip(v).map(|(p, q)| p * q).sum()
}
