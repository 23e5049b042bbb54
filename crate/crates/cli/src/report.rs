//! Report documents and their text rendering.

use std::fmt::Write as _;

use bellkit_core::lhv::LhvCertificate;
use bellkit_core::{AnalysisReport, Category, Setting, SynthesisResult, Witness};
use serde::{Deserialize, Serialize};

use crate::schema::{model_to_spec, tables_to_spec, ModelSpec, PerSetting, TablesSpec};

pub const REPORT_FORMAT: &str = "bellkit-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDigest {
    /// File path, or `demo:<kind>` for built-in references.
    pub source: String,
    /// SHA-256 of the input bytes (for demos, of the reference serialized
    /// as a scenario document).
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub tables: TablesSpec,
    pub expectations: PerSetting<f64>,
    pub delta: f64,
    pub chsh_variants: [f64; 8],
    pub delta_max_sym: f64,
    /// Ordered as A (outcomes 1, 2) across AB/ABp, A' across ApB/ApBp,
    /// B across AB/ApB, B' across ABp/ApBp.
    pub marginal_deviations: [f64; 8],
    pub marginal_max: f64,
    pub category: String,
    pub category_name: String,
    pub entangled_measurements_required: bool,
    pub entangled_state: Option<bool>,
    pub measurement_structure: Option<PerSetting<String>>,
    pub bell_expectation: Option<f64>,
}

impl From<&AnalysisReport> for AnalysisSection {
    fn from(r: &AnalysisReport) -> Self {
        AnalysisSection {
            tables: tables_to_spec(&r.tables),
            expectations: PerSetting::from_fn(|s| r.expectations[s.index()]),
            delta: r.delta,
            chsh_variants: r.chsh_variants,
            delta_max_sym: r.delta_max_sym,
            marginal_deviations: r.marginal.values,
            marginal_max: r.marginal.max,
            category: r.category.code().to_owned(),
            category_name: r.category.name().to_owned(),
            entangled_measurements_required: r.entangled_measurements_required,
            entangled_state: r.entangled_state,
            measurement_structure: r
                .measurement_structure
                .map(|k| PerSetting::from_fn(|s| k[s.index()].as_str().to_owned())),
            bell_expectation: r.bell_expectation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessSection {
    Chsh { variant: usize, value: f64 },
    Signaling { index: usize, deviation: f64 },
    Residual,
}

impl From<Witness> for WitnessSection {
    fn from(w: Witness) -> Self {
        match w {
            Witness::Chsh { variant, value } => WitnessSection::Chsh { variant, value },
            Witness::Signaling { index, deviation } => {
                WitnessSection::Signaling { index, deviation }
            }
            Witness::Residual => WitnessSection::Residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhvSection {
    pub feasible: bool,
    pub tolerance: f64,
    /// Strategy weights, indexed by `8(a-1) + 4(a'-1) + 2(b-1) + (b'-1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl LhvSection {
    pub fn new(cert: &LhvCertificate, tolerance: f64) -> Self {
        match *cert {
            LhvCertificate::Feasible {
                weights,
                reconstruction_error,
            } => LhvSection {
                feasible: true,
                tolerance,
                weights: Some(weights.to_vec()),
                reconstruction_error: Some(reconstruction_error),
                witness: None,
                residual: None,
            },
            LhvCertificate::Infeasible { witness, residual } => LhvSection {
                feasible: false,
                tolerance,
                weights: None,
                reconstruction_error: None,
                witness: Some(witness.into()),
                residual: Some(residual),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    pub method: String,
    pub residual: f64,
    pub tolerance: f64,
    pub seed: u64,
    /// Same layout as a `model` scenario document, so it can be fed back in.
    pub model: ModelSpec,
}

impl SynthesisSection {
    pub fn new(res: &SynthesisResult, tolerance: f64, seed: u64) -> Self {
        SynthesisSection {
            method: res.method.as_str().to_owned(),
            residual: res.residual,
            tolerance,
            seed,
            model: model_to_spec(&res.model),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format: String,
    pub command: String,
    pub input: InputDigest,
    /// Largest change made when renormalizing the input.
    pub input_adjustment: f64,
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhv: Option<LhvSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderMode {
    Text,
    Json,
}

pub fn render_report(r: &ReportFile, mode: RenderMode) -> String {
    match mode {
        RenderMode::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report values are finite");
            s.push('\n');
            s
        }
        RenderMode::Text => render_text(r),
    }
}

pub fn parse_report(text: &str) -> serde_json::Result<ReportFile> {
    serde_json::from_str(text)
}

const SETTING_NAMES: [&str; 4] = ["AB", "AB'", "A'B", "A'B'"];

fn category_line(a: &AnalysisSection) -> String {
    let code = Category::from_code(&a.category);
    match code {
        Some(Category::NoViolation) => format!("category: {}", a.category_name),
        _ => format!("category {}: {}", a.category, a.category_name),
    }
}

fn render_text(r: &ReportFile) -> String {
    let a = &r.analysis;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "bellkit {} report", r.command);
    let _ = writeln!(w, "input: {} (sha256 {})", r.input.source, r.input.sha256);
    if r.input_adjustment > 0.0 {
        let _ = writeln!(
            w,
            "input renormalized (max change {:.3e})",
            r.input_adjustment
        );
    }

    if r.command == "classify" {
        let _ = writeln!(w, "{}", category_line(a));
        let _ = writeln!(w, "max CHSH over sign patterns: {:.10}", a.delta_max_sym);
        let _ = writeln!(w, "max marginal deviation: {:.3e}", a.marginal_max);
        let _ = writeln!(
            w,
            "entangled measurements required: {}",
            yes_no(a.entangled_measurements_required)
        );
        return out;
    }

    let _ = writeln!(w);
    let _ = writeln!(
        w,
        "setting        p11         p12         p21         p22           E"
    );
    for (s, name) in Setting::ALL.iter().zip(SETTING_NAMES) {
        let t = a.tables.get(*s);
        let _ = writeln!(
            w,
            "{name:<6} {:>11.8} {:>11.8} {:>11.8} {:>11.8} {:>11.8}",
            t.p11,
            t.p12,
            t.p21,
            t.p22,
            a.expectations.get(*s)
        );
    }
    let _ = writeln!(w);
    let _ = writeln!(
        w,
        "Delta = E(A'B') + E(AB') + E(A'B) - E(AB) = {:.10}",
        a.delta
    );
    let _ = writeln!(w, "max over sign patterns = {:.10}", a.delta_max_sym);

    let _ = writeln!(w);
    let _ = writeln!(w, "marginals          first      second   |difference|");
    let tables = &a.tables;
    let rows = marginal_rows(tables);
    for (k, (label, x, y)) in rows.iter().enumerate() {
        let _ = writeln!(
            w,
            "{label:<14} {x:>10.8} {y:>11.8}   {:.3e}",
            a.marginal_deviations[k]
        );
    }
    let _ = writeln!(w, "max marginal deviation = {:.3e}", a.marginal_max);

    let _ = writeln!(w);
    let _ = writeln!(w, "{}", category_line(a));
    let _ = writeln!(
        w,
        "entangled measurements required: {}",
        yes_no(a.entangled_measurements_required)
    );
    if let Some(e) = a.entangled_state {
        let _ = writeln!(
            w,
            "state: {}",
            if e {
                "entangled (pure)"
            } else {
                "product (pure)"
            }
        );
    }
    if let Some(ms) = &a.measurement_structure {
        let kinds: Vec<String> = Setting::ALL
            .iter()
            .zip(SETTING_NAMES)
            .map(|(s, n)| format!("{n} {}", ms.get(*s)))
            .collect();
        let _ = writeln!(w, "measurements: {}", kinds.join(", "));
    }
    if let Some(b) = a.bell_expectation {
        let _ = writeln!(w, "Tr[rho B] = {b:.10}");
    }

    if let Some(l) = &r.lhv {
        let _ = writeln!(w);
        if l.feasible {
            let _ = writeln!(
                w,
                "local hidden-variable model: found (reconstruction error {:.3e})",
                l.reconstruction_error.unwrap_or(0.0)
            );
            if let Some(ws) = &l.weights {
                for (k, x) in ws.iter().enumerate().filter(|(_, x)| **x > l.tolerance) {
                    let _ = writeln!(w, "  {}  weight {x:.8}", strategy_label(k));
                }
            }
        } else {
            let witness = match l.witness {
                Some(WitnessSection::Chsh { variant, value }) => {
                    format!("CHSH variant {variant} reaches {value:.10}")
                }
                Some(WitnessSection::Signaling { index, deviation }) => {
                    format!(
                        "marginal law fails ({} differs by {deviation:.3e})",
                        rows[index].0
                    )
                }
                Some(WitnessSection::Residual) | None => "no local fit".to_owned(),
            };
            let _ = writeln!(w, "local hidden-variable model: none ({witness})");
            if let Some(res) = l.residual {
                let _ = writeln!(w, "  distance to local polytope: {res:.3e}");
            }
        }
    }

    if let Some(s) = &r.synthesis {
        let _ = writeln!(w);
        let _ = writeln!(
            w,
            "synthesized model: {} (residual {:.3e}, tolerance {:.1e}, seed {})",
            s.method, s.residual, s.tolerance, s.seed
        );
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn strategy_label(k: usize) -> String {
    let bit = |shift: usize| 1 + (k >> shift & 1);
    format!("A={} A'={} B={} B'={}", bit(3), bit(2), bit(1), bit(0))
}

/// Marginal values in the order of `marginal_deviations`.
fn marginal_rows(t: &TablesSpec) -> [(String, f64, f64); 8] {
    let a =
        |x: &crate::schema::TableSpec, i: usize| if i == 0 { x.p11 + x.p12 } else { x.p21 + x.p22 };
    let b =
        |x: &crate::schema::TableSpec, j: usize| if j == 0 { x.p11 + x.p21 } else { x.p12 + x.p22 };
    std::array::from_fn(|k| {
        let o = k % 2;
        match k / 2 {
            0 => (format!("A={} AB/AB'", o + 1), a(&t.ab, o), a(&t.abp, o)),
            1 => (
                format!("A'={} A'B/A'B'", o + 1),
                a(&t.apb, o),
                a(&t.apbp, o),
            ),
            2 => (format!("B={} AB/A'B", o + 1), b(&t.ab, o), b(&t.apb, o)),
            _ => (
                format!("B'={} AB'/A'B'", o + 1),
                b(&t.abp, o),
                b(&t.apbp, o),
            ),
        }
    })
}
