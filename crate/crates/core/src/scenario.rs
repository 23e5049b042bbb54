//! Bell-test scenarios: a state with four coincidence measurements, the
//! tables they generate, CHSH quantities, marginal-law deviations and the
//! classification of a scenario.

use core::fmt;

use crate::error::{Error, Result};
use crate::hilbert::{Density4, Op4, DEFAULT_TOL};
use crate::measurement::{
    outcome_probabilities, OutcomeDistribution, Setting, SettingTag, Spectral4,
};
use crate::schmidt::{
    is_product_measurement, schmidt_unchecked, MeasurementStructure, PRODUCT_TOL,
};

/// `2√2`
pub const TSIRELSON_BOUND: f64 = 2.0 * core::f64::consts::SQRT_2;

/// Default tolerance on probabilities (marginal deviations).
pub const PROBABILITY_TOL: f64 = 1e-7;
/// Default tolerance on CHSH thresholds.
pub const DELTA_TOL: f64 = 1e-6;

/// A state together with the four coincidence measurements, indexed by [`Setting`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumModel {
    pub state: Density4,
    measurements: [Spectral4; 4],
}

impl QuantumModel {
    /// Measurements in the order AB, AB′, A′B, A′B′. A measurement already
    /// tagged with a different setting is rejected.
    pub fn new(state: Density4, measurements: [Spectral4; 4]) -> Result<Self> {
        let mut tagged = measurements;
        for (s, m) in Setting::ALL.into_iter().zip(tagged.iter_mut()) {
            match m.tag() {
                Some(SettingTag::Setting(t)) if *t != s => {
                    return Err(Error::TagMismatch {
                        setting: s,
                        tag: *t,
                    })
                }
                Some(_) => {}
                None => *m = m.clone().with_setting(s),
            }
        }
        Ok(QuantumModel {
            state,
            measurements: tagged,
        })
    }

    pub fn measurement(&self, s: Setting) -> &Spectral4 {
        &self.measurements[s.index()]
    }

    pub fn measurements(&self) -> &[Spectral4; 4] {
        &self.measurements
    }
}

/// Outcome tables for AB, AB′, A′B, A′B′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTables(pub [OutcomeDistribution; 4]);

impl JointTables {
    pub fn new(tables: [[f64; 4]; 4], tol: f64) -> Result<Self> {
        let mut out = [OutcomeDistribution::uniform(); 4];
        for (o, t) in out.iter_mut().zip(tables) {
            *o = OutcomeDistribution::new(t, tol)?;
        }
        Ok(JointTables(out))
    }

    pub fn uniform() -> Self {
        JointTables([OutcomeDistribution::uniform(); 4])
    }

    pub fn table(&self, s: Setting) -> &OutcomeDistribution {
        &self.0[s.index()]
    }

    /// `E(X, Y) = p11 + p22 − p12 − p21` for each setting.
    pub fn expectations(&self) -> [f64; 4] {
        [
            self.0[0].correlation(),
            self.0[1].correlation(),
            self.0[2].correlation(),
            self.0[3].correlation(),
        ]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Clips negatives and rescales each table to sum to one. Returns the
    /// largest absolute change made.
    pub fn renormalize(&mut self) -> f64 {
        let before = *self;
        for t in self.0.iter_mut() {
            for p in t.0.iter_mut() {
                *p = p.max(0.0);
            }
            let s = t.sum();
            if s > 0.0 {
                for p in t.0.iter_mut() {
                    *p /= s;
                }
            }
        }
        self.max_abs_diff(&before)
    }
}

/// Born-rule tables of a model.
pub fn scenario_probabilities(model: &QuantumModel) -> JointTables {
    let mut out = [OutcomeDistribution::uniform(); 4];
    for (o, m) in out.iter_mut().zip(model.measurements.iter()) {
        *o = outcome_probabilities(m, &model.state);
    }
    JointTables(out)
}

/// `Δ = E(A′,B′) + E(A,B′) + E(A′,B) − E(A,B)`.
pub fn chsh_delta(t: &JointTables) -> f64 {
    let [ab, abp, apb, apbp] = t.expectations();
    apbp + abp + apb - ab
}

/// The eight CHSH combinations with exactly one minus sign, and their negatives.
///
/// Entry `k < 4` negates the term of setting `Setting::ALL[k]`; entry
/// `k + 4` is the negative of entry `k`. Entry 0 is [`chsh_delta`].
pub fn chsh_variants(t: &JointTables) -> [f64; 8] {
    let e = t.expectations();
    let total: f64 = e.iter().sum();
    let mut out = [0.0; 8];
    for k in 0..4 {
        out[k] = total - 2.0 * e[k];
        out[k + 4] = -out[k];
    }
    out
}

/// Largest CHSH value over the eight sign variants.
pub fn chsh_max_sym(t: &JointTables) -> f64 {
    chsh_variants(t)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Marginal-law deviations.
///
/// Order: A-marginal (i = 1, 2) across AB/AB′; A′-marginal across A′B/A′B′;
/// B-marginal (j = 1, 2) across AB/A′B; B′-marginal across AB′/A′B′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalDeviations {
    pub values: [f64; 8],
    pub max: f64,
}

pub fn marginal_deviation(t: &JointTables) -> MarginalDeviations {
    let [ab, abp, apb, apbp] = t.0;
    let mut values = [0.0; 8];
    for i in 0..2 {
        values[i] = (ab.a_marginal(i) - abp.a_marginal(i)).abs();
        values[2 + i] = (apb.a_marginal(i) - apbp.a_marginal(i)).abs();
        values[4 + i] = (ab.b_marginal(i) - apb.b_marginal(i)).abs();
        values[6 + i] = (abp.b_marginal(i) - apbp.b_marginal(i)).abs();
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    MarginalDeviations { values, max }
}

/// Scenario categories: no CHSH violation, or one of the four violating kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    NoViolation,
    /// Violation within Tsirelson's bound, marginal law holds.
    Customary,
    /// Violation within Tsirelson's bound, marginal law violated.
    NonlocalNonMarginal1,
    /// Violation beyond Tsirelson's bound, marginal law violated.
    NonlocalNonMarginal2,
    /// Violation beyond Tsirelson's bound, marginal law holds.
    NonlocalBox,
}

impl Category {
    /// Short code: `none`, `(i)`, `(ii)`, `(iii)`, `(iv)`.
    pub fn code(self) -> &'static str {
        match self {
            Category::NoViolation => "none",
            Category::Customary => "(i)",
            Category::NonlocalNonMarginal1 => "(ii)",
            Category::NonlocalNonMarginal2 => "(iii)",
            Category::NonlocalBox => "(iv)",
        }
    }

    pub fn from_code(code: &str) -> Option<Category> {
        [
            Category::NoViolation,
            Category::Customary,
            Category::NonlocalNonMarginal1,
            Category::NonlocalNonMarginal2,
            Category::NonlocalBox,
        ]
        .into_iter()
        .find(|c| c.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::NoViolation => "no violation (Kolmogorovian model exists)",
            Category::Customary => "customary quantum situation",
            Category::NonlocalNonMarginal1 => "nonlocal non-marginal box situation 1",
            Category::NonlocalNonMarginal2 => "nonlocal non-marginal box situation 2",
            Category::NonlocalBox => "nonlocal box situation",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds used by [`classify_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTolerance {
    pub probability: f64,
    pub delta: f64,
}

impl Default for ClassifyTolerance {
    fn default() -> Self {
        ClassifyTolerance {
            probability: PROBABILITY_TOL,
            delta: DELTA_TOL,
        }
    }
}

impl ClassifyTolerance {
    pub fn uniform(tol: f64) -> Self {
        ClassifyTolerance {
            probability: tol,
            delta: tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub category: Category,
    pub delta_max_sym: f64,
    pub max_marginal_deviation: f64,
    /// Some measurement must be entangled: the marginal law fails or
    /// Tsirelson's bound is exceeded.
    pub entangled_measurements_required: bool,
}

/// [`classify_with`] using `tol` for both probabilities and CHSH thresholds.
pub fn classify(t: &JointTables, tol: f64) -> Classification {
    classify_with(t, ClassifyTolerance::uniform(tol))
}

/// Boundary cases fall into the lower category.
pub fn classify_with(t: &JointTables, tol: ClassifyTolerance) -> Classification {
    let d = chsh_max_sym(t);
    let m = marginal_deviation(t).max;
    let marginal_holds = m <= tol.probability;
    let beyond_tsirelson = d > TSIRELSON_BOUND + tol.delta;
    let category = if d <= 2.0 + tol.delta {
        Category::NoViolation
    } else if !beyond_tsirelson {
        if marginal_holds {
            Category::Customary
        } else {
            Category::NonlocalNonMarginal1
        }
    } else if marginal_holds {
        Category::NonlocalBox
    } else {
        Category::NonlocalNonMarginal2
    };
    Classification {
        category,
        delta_max_sym: d,
        max_marginal_deviation: m,
        entangled_measurements_required: !marginal_holds || beyond_tsirelson,
    }
}

/// `B = ℰ_{A′B′} + ℰ_{AB′} + ℰ_{A′B} − ℰ_{AB}`; requires ±1 labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellOperator(pub Op4);

pub fn bell_operator(model: &QuantumModel) -> Result<BellOperator> {
    for s in Setting::ALL {
        let m = model.measurement(s);
        if let Some(&label) = m
            .eigenvalues()
            .iter()
            .find(|l| (l.abs() - 1.0).abs() > DEFAULT_TOL)
        {
            return Err(Error::Label { setting: s, label });
        }
    }
    let e = |s: Setting| model.measurement(s).observable();
    Ok(BellOperator(
        e(Setting::ApBp) + e(Setting::ABp) + e(Setting::ApB) - e(Setting::AB),
    ))
}

impl BellOperator {
    /// `Tr[ρ B]`
    pub fn expectation(&self, state: &Density4) -> f64 {
        state.trace_with(&self.0).re
    }
}

/// Everything computed for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub tables: JointTables,
    /// E(A,B), E(A,B′), E(A′,B), E(A′,B′)
    pub expectations: [f64; 4],
    pub delta: f64,
    pub chsh_variants: [f64; 8],
    pub delta_max_sym: f64,
    pub marginal: MarginalDeviations,
    pub category: Category,
    pub entangled_measurements_required: bool,
    /// Known only for pure-state models.
    pub entangled_state: Option<bool>,
    /// Per-setting product test, for models.
    pub measurement_structure: Option<[MeasurementKind; 4]>,
    /// `Tr[ρB]`, for models with ±1 labels.
    pub bell_expectation: Option<f64>,
}

/// Summary of [`MeasurementStructure`] without the factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    Product,
    Entangled,
    Undecided,
}

impl MeasurementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementKind::Product => "product",
            MeasurementKind::Entangled => "entangled",
            MeasurementKind::Undecided => "undecided",
        }
    }
}

impl From<&MeasurementStructure> for MeasurementKind {
    fn from(s: &MeasurementStructure) -> Self {
        match s {
            MeasurementStructure::Product(_) => MeasurementKind::Product,
            MeasurementStructure::Entangled => MeasurementKind::Entangled,
            MeasurementStructure::Undecided => MeasurementKind::Undecided,
        }
    }
}

/// Analyzes bare tables.
pub fn analyze_tables(t: &JointTables, tol: ClassifyTolerance) -> AnalysisReport {
    let c = classify_with(t, tol);
    let variants = chsh_variants(t);
    AnalysisReport {
        tables: *t,
        expectations: t.expectations(),
        delta: variants[0],
        chsh_variants: variants,
        delta_max_sym: c.delta_max_sym,
        marginal: marginal_deviation(t),
        category: c.category,
        entangled_measurements_required: c.entangled_measurements_required,
        entangled_state: None,
        measurement_structure: None,
        bell_expectation: None,
    }
}

/// Analyzes a model: its tables plus state and measurement structure.
pub fn analyze_model(model: &QuantumModel, tol: ClassifyTolerance) -> AnalysisReport {
    let mut r = analyze_tables(&scenario_probabilities(model), tol);
    r.entangled_state = model
        .state
        .as_pure(DEFAULT_TOL)
        .map(|v| !schmidt_unchecked(&v).is_product(PRODUCT_TOL));
    let mut kinds = [MeasurementKind::Undecided; 4];
    for (k, m) in kinds.iter_mut().zip(model.measurements.iter()) {
        *k = MeasurementKind::from(&is_product_measurement(m, PRODUCT_TOL));
    }
    r.measurement_structure = Some(kinds);
    r.bell_expectation = bell_operator(model)
        .ok()
        .map(|b| b.expectation(&model.state));
    r
}
