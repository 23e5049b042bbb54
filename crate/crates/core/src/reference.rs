//! Built-in reference scenarios.
//!
//! * `nnmb2`: a pure entangled state with one product and three entangled
//!   measurements reaching `Δ = 4` while breaking the marginal law.
//! * `nonlocal_box`: an equal mixture of two entangled states measured so
//!   that `Δ = 4` and the marginal law holds.
//! * `singlet`: the singlet state with polarizer-angle product measurements.
//! * `pr_box_tables`: the Popescu–Rohrlich correlation tables on their own.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Density4, Ket4};
use crate::measurement::{OutcomeDistribution, Setting, Spectral4, DEFAULT_LABELS};
use crate::mixture::{LocalSettings, Spectral2};
use crate::scenario::{Category, JointTables, QuantumModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceKind {
    Nnmb2 {
        alpha: f64,
        beta: f64,
    },
    NonlocalBox {
        alpha: f64,
        beta: f64,
    },
    /// Polarizer angles (radians) of A, A′, B, B′.
    Singlet {
        a: f64,
        a_prime: f64,
        b: f64,
        b_prime: f64,
    },
    PrBoxTables,
}

/// Angles at which the singlet reaches `Δ = 2√2` with our sign convention.
pub const SINGLET_OPTIMAL: [f64; 4] = [0.0, -PI / 4.0, PI / 8.0, 3.0 * PI / 8.0];

impl ReferenceKind {
    pub const NAMES: [&'static str; 4] = ["nnmb2", "nonlocal_box", "singlet", "pr_box_tables"];

    /// The kind with default parameters (zero phases, optimal angles).
    pub fn from_name(name: &str) -> Option<ReferenceKind> {
        let [a, a_prime, b, b_prime] = SINGLET_OPTIMAL;
        Some(match name {
            "nnmb2" => ReferenceKind::Nnmb2 {
                alpha: 0.0,
                beta: 0.0,
            },
            "nonlocal_box" => ReferenceKind::NonlocalBox {
                alpha: 0.0,
                beta: 0.0,
            },
            "singlet" => ReferenceKind::Singlet {
                a,
                a_prime,
                b,
                b_prime,
            },
            "pr_box_tables" => ReferenceKind::PrBoxTables,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceKind::Nnmb2 { .. } => "nnmb2",
            ReferenceKind::NonlocalBox { .. } => "nonlocal_box",
            ReferenceKind::Singlet { .. } => "singlet",
            ReferenceKind::PrBoxTables => "pr_box_tables",
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            ReferenceKind::Nnmb2 { alpha, beta } | ReferenceKind::NonlocalBox { alpha, beta } => {
                alloc::vec![alpha, beta]
            }
            ReferenceKind::Singlet {
                a,
                a_prime,
                b,
                b_prime,
            } => {
                alloc::vec![a, a_prime, b, b_prime]
            }
            ReferenceKind::PrBoxTables => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Model(QuantumModel),
    Tables(JointTables),
}

impl Reference {
    pub fn tables(&self) -> JointTables {
        match self {
            Reference::Model(m) => crate::scenario::scenario_probabilities(m),
            Reference::Tables(t) => *t,
        }
    }

    pub fn model(&self) -> Option<&QuantumModel> {
        match self {
            Reference::Model(m) => Some(m),
            Reference::Tables(_) => None,
        }
    }
}

pub fn build_reference(kind: &ReferenceKind) -> Result<Reference> {
    if let Some(&value) = kind.params().iter().find(|v| !v.is_finite()) {
        return Err(Error::Parameter { value });
    }
    Ok(match *kind {
        ReferenceKind::Nnmb2 { alpha, beta } => Reference::Model(nnmb2(alpha, beta)),
        ReferenceKind::NonlocalBox { alpha, beta } => Reference::Model(nonlocal_box(alpha, beta)),
        ReferenceKind::Singlet {
            a,
            a_prime,
            b,
            b_prime,
        } => Reference::Model(singlet(a, a_prime, b, b_prime)),
        ReferenceKind::PrBoxTables => Reference::Tables(pr_box_tables()),
    })
}

/// `(0, √½ e^{iα}, √½ e^{iβ}, 0)`
pub fn phased_plus(alpha: f64, beta: f64) -> Ket4 {
    Ket4::new([
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, alpha),
        Complex64::from_polar(FRAC_1_SQRT_2, beta),
        Complex64::new(0.0, 0.0),
    ])
}

/// `(0, √½ e^{iα}, −√½ e^{iβ}, 0)`
pub fn phased_minus(alpha: f64, beta: f64) -> Ket4 {
    Ket4::new([
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, alpha),
        -Complex64::from_polar(FRAC_1_SQRT_2, beta),
        Complex64::new(0.0, 0.0),
    ])
}

fn measure(basis: [Ket4; 4], s: Setting) -> Spectral4 {
    Spectral4::new(basis, DEFAULT_LABELS, 1e-9)
        .expect("reference bases are orthonormal")
        .with_setting(s)
}

fn model(state: Density4, bases: [[Ket4; 4]; 4]) -> QuantumModel {
    let ms = [0, 1, 2, 3].map(|k| measure(bases[k], Setting::ALL[k]));
    QuantumModel::new(state, ms).expect("settings are tagged in order")
}

pub fn nnmb2(alpha: f64, beta: f64) -> QuantumModel {
    let p = phased_plus(alpha, beta);
    let q = phased_minus(alpha, beta);
    let e = Ket4::basis;
    model(
        Density4::pure(&p).expect("unit vector"),
        [
            [e(0), e(1), e(2), e(3)],
            [p, q, e(0), e(3)],
            [p, e(0), q, e(3)],
            [p, e(0), e(3), q],
        ],
    )
}

pub fn nonlocal_box(alpha: f64, beta: f64) -> QuantumModel {
    let p = phased_plus(alpha, beta);
    let q = phased_minus(alpha, beta);
    let e = Ket4::basis;
    let f = [p, e(0), e(3), q];
    model(
        Density4::mixture(&[(0.5, p), (0.5, q)]).expect("equal weights"),
        [[e(0), e(1), e(2), e(3)], f, f, f],
    )
}

/// `(|01⟩ − |10⟩)/√2`
pub fn singlet_state() -> Ket4 {
    Ket4::from_real([0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
}

/// Product measurements along polarizer angles; `E(x, y) = −cos 2(x − y)`.
pub fn singlet(a: f64, a_prime: f64, b: f64, b_prime: f64) -> QuantumModel {
    let locals = LocalSettings {
        a: Spectral2::polarizer(a),
        a_prime: Spectral2::polarizer(a_prime),
        b: Spectral2::polarizer(b),
        b_prime: Spectral2::polarizer(b_prime),
    };
    QuantumModel::new(
        Density4::pure(&singlet_state()).expect("unit vector"),
        locals.measurements(),
    )
    .expect("settings are tagged in order")
}

/// Anticorrelated on AB, correlated elsewhere, uniform marginals.
pub fn pr_box_tables() -> JointTables {
    let anti = OutcomeDistribution([0.0, 0.5, 0.5, 0.0]);
    let corr = OutcomeDistribution([0.5, 0.0, 0.0, 0.5]);
    JointTables([anti, corr, corr, corr])
}

/// Known values a reference scenario must reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedReport {
    pub tables: Option<JointTables>,
    pub delta: f64,
    pub delta_max_sym: f64,
    pub marginal_max: f64,
    /// `(Σ_j p(A_1 B_j), Σ_j p(A_1 B′_j))` when the marginal law breaks.
    pub marginal_mismatch: Option<(f64, f64)>,
    pub category: Category,
    /// Diagonal of the Bell operator when it is diagonal.
    pub bell_diagonal: Option<[f64; 4]>,
    /// Whether the nonselective Lüders update leaves the state unchanged for
    /// every setting.
    pub lueders_fixed: Option<bool>,
}

pub fn expected_report(kind: &ReferenceKind) -> ExpectedReport {
    let tsirelson = 2.0 * core::f64::consts::SQRT_2;
    match kind {
        ReferenceKind::Nnmb2 { .. } => ExpectedReport {
            tables: Some(JointTables([
                OutcomeDistribution([0.0, 0.5, 0.5, 0.0]),
                OutcomeDistribution([1.0, 0.0, 0.0, 0.0]),
                OutcomeDistribution([1.0, 0.0, 0.0, 0.0]),
                OutcomeDistribution([1.0, 0.0, 0.0, 0.0]),
            ])),
            delta: 4.0,
            delta_max_sym: 4.0,
            marginal_max: 0.5,
            marginal_mismatch: Some((0.5, 1.0)),
            category: Category::NonlocalNonMarginal2,
            bell_diagonal: None,
            lueders_fixed: None,
        },
        ReferenceKind::NonlocalBox { .. } => ExpectedReport {
            tables: Some(pr_box_tables()),
            delta: 4.0,
            delta_max_sym: 4.0,
            marginal_max: 0.0,
            marginal_mismatch: None,
            category: Category::NonlocalBox,
            bell_diagonal: Some([-4.0, 4.0, 4.0, -4.0]),
            lueders_fixed: Some(true),
        },
        ReferenceKind::Singlet { .. } => ExpectedReport {
            tables: None,
            delta: tsirelson,
            delta_max_sym: tsirelson,
            marginal_max: 0.0,
            marginal_mismatch: None,
            category: Category::Customary,
            bell_diagonal: None,
            lueders_fixed: None,
        },
        ReferenceKind::PrBoxTables => ExpectedReport {
            tables: Some(pr_box_tables()),
            delta: 4.0,
            delta_max_sym: 4.0,
            marginal_max: 0.0,
            marginal_mismatch: None,
            category: Category::NonlocalBox,
            bell_diagonal: None,
            lueders_fixed: None,
        },
    }
}
