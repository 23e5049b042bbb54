//! On-disk scenario format and its validation into core types.

use bellkit_core::hilbert::gram_deviation;
use bellkit_core::{
    Amplitude, Density4, JointTables, Ket4, Op4, OutcomeDistribution, QuantumModel, Setting,
    Spectral4, StateHint,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCENARIO_FORMAT: &str = "bellkit-scenario/1";

/// Looser than the core tolerances so hand-typed numbers are accepted. The
/// input is then renormalized and the adjustment reported.
pub const PARSE_TOL: f64 = 1e-6;

pub type Complex = [f64; 2];
pub type VectorSpec = [Complex; 4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

/// One value per setting, keyed `AB`, `ABp`, `ApB`, `ApBp`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerSetting<T> {
    #[serde(rename = "AB")]
    pub ab: T,
    #[serde(rename = "ABp")]
    pub abp: T,
    #[serde(rename = "ApB")]
    pub apb: T,
    #[serde(rename = "ApBp")]
    pub apbp: T,
}

impl<T> PerSetting<T> {
    pub fn from_fn(mut f: impl FnMut(Setting) -> T) -> Self {
        PerSetting {
            ab: f(Setting::AB),
            abp: f(Setting::ABp),
            apb: f(Setting::ApB),
            apbp: f(Setting::ApBp),
        }
    }

    pub fn get(&self, s: Setting) -> &T {
        match s {
            Setting::AB => &self.ab,
            Setting::ABp => &self.abp,
            Setting::ApB => &self.apb,
            Setting::ApBp => &self.apbp,
        }
    }
}

pub type TablesSpec = PerSetting<TableSpec>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Vector(VectorSpec),
    /// Row-major.
    Density([[Complex; 4]; 4]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    pub basis: [VectorSpec; 4],
    pub eigenvalues: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub state: StateSpec,
    pub measurements: PerSetting<MeasurementSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Tables,
    Model,
}

/// A scenario document as written on disk. For `tables` documents the
/// optional `state` is used as the synthesis starting state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format: String,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<TablesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<PerSetting<MeasurementSpec>>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value at {path}: {message}")]
    Validation { path: String, message: String },
}

impl ScenarioError {
    pub fn path(&self) -> &str {
        match self {
            ScenarioError::Parse { path, .. } | ScenarioError::Validation { path, .. } => path,
        }
    }
}

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum ScenarioBody {
    Tables {
        tables: JointTables,
        state: Option<StateHint>,
    },
    Model(QuantumModel),
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub body: ScenarioBody,
    /// Largest absolute change made while renormalizing the input.
    pub adjustment: f64,
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self.body {
            ScenarioBody::Tables { .. } => ScenarioKind::Tables,
            ScenarioBody::Model(_) => ScenarioKind::Model,
        }
    }

    pub fn tables(&self) -> JointTables {
        match &self.body {
            ScenarioBody::Tables { tables, .. } => *tables,
            ScenarioBody::Model(m) => bellkit_core::scenario_probabilities(m),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    validate(&file)
}

pub fn validate(file: &ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.format != SCENARIO_FORMAT {
        return Err(invalid(
            "format",
            format!("expected \"{SCENARIO_FORMAT}\", found \"{}\"", file.format),
        ));
    }
    let mut adjustment: f64 = 0.0;
    let body = match file.kind {
        ScenarioKind::Tables => {
            if file.measurements.is_some() {
                return Err(invalid("measurements", "not allowed in a tables document"));
            }
            let spec = file
                .tables
                .as_ref()
                .ok_or_else(|| invalid("tables", "missing"))?;
            let (tables, adj) = tables_from_spec(spec)?;
            adjustment = adjustment.max(adj);
            let state = match &file.state {
                Some(s) => {
                    let (hint, adj) = state_from_spec(s, "state")?;
                    adjustment = adjustment.max(adj);
                    Some(hint)
                }
                None => None,
            };
            ScenarioBody::Tables { tables, state }
        }
        ScenarioKind::Model => {
            if file.tables.is_some() {
                return Err(invalid("tables", "not allowed in a model document"));
            }
            let state = file
                .state
                .as_ref()
                .ok_or_else(|| invalid("state", "missing"))?;
            let ms = file
                .measurements
                .as_ref()
                .ok_or_else(|| invalid("measurements", "missing"))?;
            let (model, adj) = model_from_spec(&ModelSpec {
                state: state.clone(),
                measurements: ms.clone(),
            })?;
            adjustment = adjustment.max(adj);
            ScenarioBody::Model(model)
        }
    };
    Ok(Scenario { body, adjustment })
}

pub fn tables_from_spec(spec: &TablesSpec) -> Result<(JointTables, f64), ScenarioError> {
    let mut out = [OutcomeDistribution::uniform(); 4];
    for s in Setting::ALL {
        let t = spec.get(s);
        let path = format!("tables.{}", s.key());
        let entries = [
            ("p11", t.p11),
            ("p12", t.p12),
            ("p21", t.p21),
            ("p22", t.p22),
        ];
        for (key, p) in entries {
            if !p.is_finite() || p < -PARSE_TOL {
                return Err(invalid(
                    format!("{path}.{key}"),
                    format!("{p} is not a probability"),
                ));
            }
        }
        let sum: f64 = entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > PARSE_TOL {
            return Err(invalid(path, format!("entries sum to {sum}, expected 1")));
        }
        out[s.index()] = OutcomeDistribution(entries.map(|(_, p)| p));
    }
    let mut tables = JointTables(out);
    let adj = tables.renormalize();
    Ok((tables, adj))
}

pub fn tables_to_spec(t: &JointTables) -> TablesSpec {
    PerSetting::from_fn(|s| {
        let [p11, p12, p21, p22] = t.table(s).0;
        TableSpec { p11, p12, p21, p22 }
    })
}

fn ket(v: &VectorSpec) -> Ket4 {
    Ket4::new(v.map(|[re, im]| Amplitude::new(re, im)))
}

fn vector_spec(k: &Ket4) -> VectorSpec {
    k.0.map(|z| [z.re, z.im])
}

fn check_finite(values: impl IntoIterator<Item = f64>, path: &str) -> Result<(), ScenarioError> {
    match values.into_iter().find(|x| !x.is_finite()) {
        Some(x) => Err(invalid(path, format!("{x} is not finite"))),
        None => Ok(()),
    }
}

fn unit_vector(v: &VectorSpec, path: &str) -> Result<(Ket4, f64), ScenarioError> {
    check_finite(v.iter().flatten().copied(), path)?;
    let k = ket(v);
    let norm = k.norm();
    if (norm - 1.0).abs() > PARSE_TOL {
        return Err(invalid(path, format!("norm is {norm}, expected 1")));
    }
    let unit = k.scale(Amplitude::new(1.0 / norm, 0.0));
    Ok((unit, (norm - 1.0).abs()))
}

fn state_from_spec(spec: &StateSpec, path: &str) -> Result<(StateHint, f64), ScenarioError> {
    match spec {
        StateSpec::Vector(v) => {
            let (k, adj) = unit_vector(v, &format!("{path}.vector"))?;
            Ok((StateHint::Vector(k), adj))
        }
        StateSpec::Density(rows) => {
            let path = format!("{path}.density");
            check_finite(rows.iter().flatten().flatten().copied(), &path)?;
            let m = Op4::from_rows(rows.map(|r| r.map(|[re, im]| Amplitude::new(re, im))));
            let herm = m.hermiticity_deviation();
            if herm > PARSE_TOL {
                return Err(invalid(path, format!("not hermitian (deviation {herm:e})")));
            }
            let h = m.hermitian_part();
            let tr = h.trace().re;
            if (tr - 1.0).abs() > PARSE_TOL {
                return Err(invalid(path, format!("trace is {tr}, expected 1")));
            }
            let fixed = h.scale(1.0 / tr);
            let adj = fixed.max_abs_diff(&m);
            let rho = Density4::from_matrix(fixed).map_err(|e| invalid(path, e))?;
            Ok((StateHint::Density(rho), adj))
        }
    }
}

/// Modified Gram–Schmidt, returning the basis and the largest change.
fn orthonormalize(basis: [Ket4; 4]) -> ([Ket4; 4], f64) {
    let mut out = basis;
    for k in 0..4 {
        let mut v = out[k];
        for prev in &out[..k] {
            v = v - prev.scale(prev.inner(&v));
        }
        let n = v.norm();
        out[k] = v.scale(Amplitude::new(1.0 / n, 0.0));
    }
    let adj = out
        .iter()
        .zip(basis.iter())
        .flat_map(|(a, b)| a.0.iter().zip(b.0.iter()).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    (out, adj)
}

pub fn model_from_spec(spec: &ModelSpec) -> Result<(QuantumModel, f64), ScenarioError> {
    let (hint, mut adjustment) = state_from_spec(&spec.state, "state")?;
    let state = match hint {
        StateHint::Vector(v) => Density4::pure(&v).map_err(|e| invalid("state.vector", e))?,
        StateHint::Density(rho) => rho,
    };
    let mut measurements = Vec::with_capacity(4);
    for s in Setting::ALL {
        let m = spec.measurements.get(s);
        let path = format!("measurements.{}", s.key());
        check_finite(
            m.basis.iter().flatten().flatten().copied(),
            &format!("{path}.basis"),
        )?;
        check_finite(m.eigenvalues, &format!("{path}.eigenvalues"))?;
        let raw = m.basis.each_ref().map(ket);
        let dev = gram_deviation(&raw);
        if dev > PARSE_TOL {
            return Err(invalid(
                format!("{path}.basis"),
                format!("not orthonormal (Gram deviation {dev:e})"),
            ));
        }
        let (basis, adj) = orthonormalize(raw);
        adjustment = adjustment.max(adj);
        let meas = Spectral4::new(basis, m.eigenvalues, 1e-12)
            .map_err(|e| invalid(format!("{path}.basis"), e))?;
        measurements.push(meas.with_setting(s));
    }
    let measurements: [Spectral4; 4] = measurements.try_into().expect("four settings");
    let model = QuantumModel::new(state, measurements).map_err(|e| invalid("measurements", e))?;
    Ok((model, adjustment))
}

pub fn state_to_spec(rho: &Density4) -> StateSpec {
    match rho.as_pure(1e-12) {
        Some(v) => StateSpec::Vector(vector_spec(&v)),
        None => StateSpec::Density(rho.matrix().0.map(|r| r.map(|z| [z.re, z.im]))),
    }
}

pub fn model_to_spec(m: &QuantumModel) -> ModelSpec {
    ModelSpec {
        state: state_to_spec(&m.state),
        measurements: PerSetting::from_fn(|s| {
            let meas = m.measurement(s);
            MeasurementSpec {
                basis: meas.basis().each_ref().map(vector_spec),
                eigenvalues: *meas.eigenvalues(),
            }
        }),
    }
}

impl ScenarioFile {
    pub fn from_tables(t: &JointTables) -> Self {
        ScenarioFile {
            format: SCENARIO_FORMAT.to_owned(),
            kind: ScenarioKind::Tables,
            tables: Some(tables_to_spec(t)),
            state: None,
            measurements: None,
        }
    }

    pub fn from_model(m: &QuantumModel) -> Self {
        let spec = model_to_spec(m);
        ScenarioFile {
            format: SCENARIO_FORMAT.to_owned(),
            kind: ScenarioKind::Model,
            tables: None,
            state: Some(spec.state),
            measurements: Some(spec.measurements),
        }
    }
}
