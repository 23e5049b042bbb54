use std::path::PathBuf;
use std::process::Command;

use bellkit::report::{AnalysisSection, InputDigest, LhvSection, SynthesisSection, WitnessSection};
use bellkit::schema::{model_to_spec, ScenarioKind};
use bellkit::{
    parse_report, parse_scenario, render_report, run_command, RenderMode, ReportFile, ScenarioError,
};
use bellkit_core::lhv::lhv_feasible;
use bellkit_core::{
    analyze_model, analyze_tables, synthesize_model, ClassifyTolerance, JointTables,
    OutcomeDistribution, SynthesisRequest,
};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> bellkit::CommandOutput {
    run_command(std::iter::once("bellkit").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> ReportFile {
    let out = run(args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.ends_with('\n'));
    parse_report(&out.stdout).unwrap()
}

#[test]
fn demo_nnmb2_json() {
    let r = json(&["demo", "nnmb2", "--json"]);
    assert!((r.analysis.delta - 4.0).abs() < 1e-10);
    assert_eq!(r.analysis.category, "(iii)");
    assert_eq!(r.format, "bellkit-report/1");
    assert_eq!(r.input.source, "demo:nnmb2");
}

#[test]
fn demo_nonlocal_box() {
    let r = json(&["demo", "nonlocal_box", "--json"]);
    assert!((r.analysis.delta - 4.0).abs() < 1e-10);
    assert!(r.analysis.marginal_max <= 1e-12);
    assert_eq!(r.analysis.category, "(iv)");

    let text = run(&["demo", "nonlocal_box"]).stdout;
    assert!(text.contains("nonlocal box situation"), "{text}");
}

#[test]
fn text_report_names_categories() {
    assert!(run(&["demo", "nnmb2"])
        .stdout
        .contains("nonlocal non-marginal box situation 2"));
    assert!(run(&["demo", "singlet"])
        .stdout
        .contains("customary quantum situation"));
    let uniform = run(&["analyze", &fixture("uniform_tables.json")]).stdout;
    assert!(
        uniform.contains("no violation (Kolmogorovian model exists)"),
        "{uniform}"
    );
}

#[test]
fn text_report_shows_expectations_and_marginals() {
    let text = run(&["demo", "nnmb2"]).stdout;
    assert!(text.contains("Delta = E(A'B') + E(AB') + E(A'B) - E(AB) = 4.0000000000"));
    assert!(
        text.contains("A=1 AB/AB'     0.50000000  1.00000000"),
        "{text}"
    );
    assert!(text.contains("max marginal deviation = 5.000e-1"));
}

#[test]
fn lhv_on_uniform_tables_is_feasible() {
    let r = json(&["lhv", &fixture("uniform_tables.json"), "--json"]);
    let l = r.lhv.unwrap();
    assert!(l.feasible);
    let w = l.weights.unwrap();
    assert_eq!(w.len(), 16);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn lhv_on_pr_box_reports_a_witness() {
    let r = json(&["lhv", &fixture("pr_box_tables.json"), "--json"]);
    let l = r.lhv.unwrap();
    assert!(!l.feasible);
    assert!(
        matches!(l.witness, Some(WitnessSection::Chsh { value, .. }) if (value - 4.0).abs() < 1e-12)
    );
}

#[test]
fn model_document_reproduces_reference() {
    let text = std::fs::read_to_string(fixture("nnmb2_model.json")).unwrap();
    let s = parse_scenario(&text).unwrap();
    assert_eq!(s.kind(), ScenarioKind::Model);
    let r = json(&["analyze", &fixture("nnmb2_model.json"), "--json"]);
    assert!((r.analysis.delta - 4.0).abs() < 1e-10);
    assert_eq!(r.analysis.category, "(iii)");
    assert_eq!(
        r.analysis.bell_expectation.map(|b| (b - 4.0).abs() < 1e-10),
        Some(true)
    );
}

#[test]
fn bad_sum_is_a_validation_error_at_the_table() {
    let text = std::fs::read_to_string(fixture("bad_sum.json")).unwrap();
    match parse_scenario(&text).unwrap_err() {
        ScenarioError::Validation { path, .. } => assert_eq!(path, "tables.AB"),
        e => panic!("unexpected {e:?}"),
    }
    let out = run(&["analyze", &fixture("bad_sum.json")]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("tables.AB"), "{}", out.stderr);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["demo", "nnmb2", "--frobnicate"]).code, 2);
    assert_eq!(run(&["demo", "unknown_kind"]).code, 2);
    assert_eq!(run(&["analyze", "x.json", "--tolerance", "-1"]).code, 2);
    assert_eq!(run(&[]).code, 2);
    let help = run(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("synthesize"));
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["analyze", "/nonexistent/scenario.json"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("error:"));
}

#[test]
fn synthesize_round_trips_and_feeds_back() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "synthesize",
        &fixture("pr_box_tables.json"),
        "--json",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.is_empty());
    let r = parse_report(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let syn = r.synthesis.unwrap();
    assert!(syn.residual <= 1e-9);
    assert_eq!(syn.seed, 7);
    assert_eq!(r.analysis.category, "(iv)");

    // The synthesized model is itself a valid model document.
    let doc = serde_json::json!({
        "format": "bellkit-scenario/1",
        "kind": "model",
        "state": syn.model.state,
        "measurements": syn.model.measurements,
    });
    let model_path = dir.path().join("model.json");
    std::fs::write(&model_path, doc.to_string()).unwrap();
    let again = json(&["analyze", model_path.to_str().unwrap(), "--json"]);
    assert_eq!(again.analysis.category, "(iv)");
    assert!((again.analysis.delta - 4.0).abs() < 1e-9);
}

#[test]
fn commands_are_deterministic() {
    for args in [
        vec!["synthesize", "SEEDED", "--json", "--seed", "42"],
        vec!["lhv", "SEEDED", "--json"],
        vec!["demo", "nonlocal_box", "--json"],
    ] {
        let path = fixture("nnmb2_model.json");
        let args: Vec<&str> = args
            .iter()
            .map(|a| if *a == "SEEDED" { path.as_str() } else { a })
            .collect();
        let first = run(&args);
        assert_eq!(first.code, 0, "{}", first.stderr);
        assert_eq!(first, run(&args));
    }
}

#[test]
fn tolerance_flag_changes_classification_threshold() {
    // A table whose marginal deviation is 1e-5: signaling at the default
    // threshold, not at 1e-3.
    let eps = 1e-5;
    let doc = format!(
        r#"{{"format":"bellkit-scenario/1","kind":"tables","tables":{{
            "AB":{{"p11":0.5,"p12":0,"p21":0,"p22":0.5}},
            "ABp":{{"p11":{},"p12":0,"p21":0,"p22":{}}},
            "ApB":{{"p11":0.5,"p12":0,"p21":0,"p22":0.5}},
            "ApBp":{{"p11":0,"p12":0.5,"p21":0.5,"p22":0}}}}}}"#,
        0.5 + eps,
        0.5 - eps
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    std::fs::write(&p, doc).unwrap();
    let strict = json(&["classify", p.to_str().unwrap(), "--json"]);
    let loose = json(&[
        "classify",
        p.to_str().unwrap(),
        "--json",
        "--tolerance",
        "1e-3",
    ]);
    assert_eq!(strict.analysis.category, "(iii)");
    assert_eq!(loose.analysis.category, "(iv)");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_bellkit");
    let ok = Command::new(bin)
        .args(["demo", "nnmb2", "--json"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let r = parse_report(std::str::from_utf8(&ok.stdout).unwrap()).unwrap();
    assert_eq!(r.analysis.category, "(iii)");

    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));

    let fail = Command::new(bin)
        .args(["lhv", &fixture("bad_sum.json")])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL,
        0.0..1.0f64,
    ]
}

fn tables() -> impl Strategy<Value = JointTables> {
    prop::array::uniform4(prop::array::uniform4(0.0..1.0f64)).prop_map(|rows| {
        JointTables(rows.map(|r| {
            let s: f64 = r.iter().sum::<f64>() + 1e-3;
            OutcomeDistribution(r.map(|x| (x + 2.5e-4) / s))
        }))
    })
}

prop_compose! {
    fn reports()(
        t in tables(),
        adjustment in finite(),
        seed in any::<u64>(),
        digest in "[0-9a-f]{64}",
        source in "[ -~]{0,40}",
        with_lhv in any::<bool>(),
        with_synthesis in any::<bool>(),
    ) -> ReportFile {
        let synthesized = synthesize_model(&SynthesisRequest::new(t).with_seed(seed)).unwrap();
        let analysis = if with_synthesis {
            analyze_model(&synthesized.model, ClassifyTolerance::default())
        } else {
            analyze_tables(&t, ClassifyTolerance::default())
        };
        ReportFile {
            format: "bellkit-report/1".into(),
            command: "analyze".into(),
            input: InputDigest { source, sha256: digest },
            input_adjustment: adjustment,
            analysis: AnalysisSection::from(&analysis),
            lhv: with_lhv.then(|| LhvSection::new(&lhv_feasible(&t, 1e-9), 1e-9)),
            synthesis: with_synthesis.then(|| SynthesisSection::new(&synthesized, 1e-9, seed)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_reports_parse_back_identically(r in reports()) {
        let text = render_report(&r, RenderMode::Json);
        let back = parse_report(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(render_report(&back, RenderMode::Json), text);
    }

    #[test]
    fn synthesized_model_spec_round_trips(t in tables()) {
        let res = synthesize_model(&SynthesisRequest::new(t)).unwrap();
        let spec = model_to_spec(&res.model);
        let (model, adj) = bellkit::schema::model_from_spec(&spec).unwrap();
        prop_assert!(adj < 1e-12);
        let got = bellkit_core::scenario_probabilities(&model);
        prop_assert!(got.max_abs_diff(&t) <= 1e-9);
    }
}
