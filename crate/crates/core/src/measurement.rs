//! Four-outcome projective measurements on C⁴ given as spectral families.

use alloc::string::String;
use core::fmt;

use crate::error::{Error, Result};
use crate::hilbert::{gram_deviation, Density4, Ket4, Op4, DEFAULT_TOL};

/// The four coincidence settings of a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    AB,
    ABp,
    ApB,
    ApBp,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::AB, Setting::ABp, Setting::ApB, Setting::ApBp];

    pub fn index(self) -> usize {
        match self {
            Setting::AB => 0,
            Setting::ABp => 1,
            Setting::ApB => 2,
            Setting::ApBp => 3,
        }
    }

    /// ASCII key used in files: `AB`, `ABp`, `ApB`, `ApBp`.
    pub fn key(self) -> &'static str {
        match self {
            Setting::AB => "AB",
            Setting::ABp => "ABp",
            Setting::ApB => "ApB",
            Setting::ApBp => "ApBp",
        }
    }

    pub fn from_key(key: &str) -> Option<Setting> {
        Setting::ALL.into_iter().find(|s| s.key() == key)
    }

    /// Whether the A side uses the primed observable.
    pub fn a_primed(self) -> bool {
        matches!(self, Setting::ApB | Setting::ApBp)
    }

    pub fn b_primed(self) -> bool {
        matches!(self, Setting::ABp | Setting::ApBp)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::AB => "AB",
            Setting::ABp => "AB'",
            Setting::ApB => "A'B",
            Setting::ApBp => "A'B'",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SettingTag {
    Setting(Setting),
    Free(String),
}

/// Outcome slots are keyed 11, 12, 21, 22 (A outcome, B outcome).
pub const OUTCOME_KEYS: [&str; 4] = ["11", "12", "21", "22"];

/// `λ_{XiYi} = +1`, `λ_{XiYj} = -1` for `i ≠ j`.
pub const DEFAULT_LABELS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Slot index of outcome `(i, j)`, both 0-based.
#[inline]
pub fn slot(i: usize, j: usize) -> usize {
    2 * i + j
}

/// Outcome probabilities of a four-outcome measurement, slot order 11, 12, 21, 22.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeDistribution(pub [f64; 4]);

impl OutcomeDistribution {
    /// Checks entries are in [0, 1] and sum to one, both within `tol`.
    pub fn new(p: [f64; 4], tol: f64) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Distribution {
                reason: "non-finite entry",
            });
        }
        if p.iter().any(|&x| x < -tol || x > 1.0 + tol) {
            return Err(Error::Distribution {
                reason: "entry outside [0, 1]",
            });
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::Distribution {
                reason: "entries do not sum to 1",
            });
        }
        Ok(OutcomeDistribution(p))
    }

    pub fn uniform() -> Self {
        OutcomeDistribution([0.25; 4])
    }

    /// Probability of outcome `(i, j)`, 0-based.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.0[slot(i, j)]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `p11 + p22 − p12 − p21`
    pub fn correlation(&self) -> f64 {
        self.0[0] + self.0[3] - self.0[1] - self.0[2]
    }

    /// `Σ_j p(i, j)`
    pub fn a_marginal(&self, i: usize) -> f64 {
        self.p(i, 0) + self.p(i, 1)
    }

    /// `Σ_i p(i, j)`
    pub fn b_marginal(&self, j: usize) -> f64 {
        self.p(0, j) + self.p(1, j)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A projective measurement on C⁴: an orthonormal basis with one real
/// outcome label per vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectral4 {
    basis: [Ket4; 4],
    eigenvalues: [f64; 4],
    tag: Option<SettingTag>,
}

/// Builds a measurement from a basis (stored verbatim) and outcome labels.
pub fn make_measurement(basis: [Ket4; 4], eigenvalues: [f64; 4]) -> Result<Spectral4> {
    Spectral4::new(basis, eigenvalues, DEFAULT_TOL)
}

impl Spectral4 {
    pub fn new(basis: [Ket4; 4], eigenvalues: [f64; 4], tol: f64) -> Result<Self> {
        let deviation = gram_deviation(&basis);
        if !(deviation <= tol) {
            return Err(Error::Orthonormality { deviation });
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::Hermiticity {
                deviation: f64::INFINITY,
            });
        }
        Ok(Spectral4 {
            basis,
            eigenvalues,
            tag: None,
        })
    }

    /// The measurement with the ±1 labels of [`DEFAULT_LABELS`].
    pub fn with_default_labels(basis: [Ket4; 4]) -> Result<Self> {
        make_measurement(basis, DEFAULT_LABELS)
    }

    /// Measurement in the canonical (product) basis of C⁴.
    pub fn canonical(eigenvalues: [f64; 4]) -> Self {
        Spectral4 {
            basis: [
                Ket4::basis(0),
                Ket4::basis(1),
                Ket4::basis(2),
                Ket4::basis(3),
            ],
            eigenvalues,
            tag: None,
        }
    }

    pub fn tagged(mut self, tag: SettingTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn with_setting(self, s: Setting) -> Self {
        self.tagged(SettingTag::Setting(s))
    }

    pub fn tag(&self) -> Option<&SettingTag> {
        self.tag.as_ref()
    }

    pub fn basis(&self) -> &[Ket4; 4] {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64; 4] {
        &self.eigenvalues
    }

    pub fn relabeled(&self, eigenvalues: [f64; 4]) -> Self {
        Spectral4 {
            basis: self.basis,
            eigenvalues,
            tag: self.tag.clone(),
        }
    }

    /// `Σ λ_k |e_k⟩⟨e_k|`
    pub fn observable(&self) -> Op4 {
        Op4::spectral_sum(&self.basis, &self.eigenvalues)
    }

    /// True when every label is +1 or −1 within `tol`.
    pub fn has_pm_one_labels(&self, tol: f64) -> bool {
        self.eigenvalues
            .iter()
            .all(|l| (l.abs() - 1.0).abs() <= tol)
    }

    /// True when some pair of labels coincides within `tol`.
    pub fn is_degenerate(&self, tol: f64) -> bool {
        (0..4)
            .any(|i| ((i + 1)..4).any(|j| (self.eigenvalues[i] - self.eigenvalues[j]).abs() <= tol))
    }
}

/// Born probabilities `p_k = Tr[ρ |e_k⟩⟨e_k|] = ⟨e_k|ρ|e_k⟩`.
pub fn outcome_probabilities(m: &Spectral4, state: &Density4) -> OutcomeDistribution {
    let rho = state.matrix();
    let mut p = [0.0; 4];
    for (pk, e) in p.iter_mut().zip(m.basis.iter()) {
        *pk = rho.expectation(e).re;
    }
    OutcomeDistribution(p)
}

/// `Σ λ_k p_k`
pub fn expectation(m: &Spectral4, state: &Density4) -> f64 {
    outcome_probabilities(m, state)
        .0
        .iter()
        .zip(m.eigenvalues.iter())
        .map(|(p, l)| p * l)
        .sum()
}

/// `Tr[ρ ℰ]`, the operator route to [`expectation`].
pub fn expectation_trace(m: &Spectral4, state: &Density4) -> f64 {
    state.trace_with(&m.observable()).re
}

/// Nonselective Lüders update `ρ′ = Σ_k P_k ρ P_k`.
pub fn lueders_nonselective(m: &Spectral4, state: &Density4) -> Density4 {
    let rho = state.matrix();
    let mut out = Op4::zero();
    for e in m.basis.iter() {
        let w = rho.expectation(e).re;
        out = out + e.projector().scale(w);
    }
    Density4::from_matrix_unchecked(out)
}
