//! Scenario files, report documents and the `bellkit` command line.

pub mod report;
pub mod schema;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use bellkit_core::lhv::{lhv_feasible, LHV_TOL};
use bellkit_core::synthesis::SYNTHESIS_TOL;
use bellkit_core::{
    analyze_model, analyze_tables, build_reference, synthesize_model, ClassifyTolerance, Reference,
    ReferenceKind, StateHint, SynthesisRequest,
};
use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

pub use report::{parse_report, render_report, RenderMode, ReportFile};
pub use schema::{parse_scenario, Scenario, ScenarioError, ScenarioFile};

use report::{AnalysisSection, InputDigest, LhvSection, SynthesisSection, REPORT_FORMAT};
use schema::ScenarioBody;

#[derive(Debug, Parser)]
#[command(
    name = "bellkit",
    version,
    about = "Analyze, classify and synthesize quantum models of two-party Bell scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Numerical tolerance. Classification threshold for analyze/classify/demo,
    /// reconstruction tolerance for lhv, target residual for synthesize.
    #[arg(long, global = true, value_parser = parse_tolerance)]
    pub tolerance: Option<f64>,

    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Seed for the synthesis optimizer.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis of a tables or model document.
    Analyze { file: PathBuf },
    /// Category of a scenario only.
    Classify { file: PathBuf },
    /// Search for a local hidden-variable model of the tables.
    Lhv { file: PathBuf },
    /// Build a quantum model reproducing the tables.
    Synthesize { file: PathBuf },
    /// Analyze a built-in reference construction.
    Demo { kind: DemoKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoKind {
    #[value(name = "nnmb2")]
    Nnmb2,
    #[value(name = "nonlocal_box")]
    NonlocalBox,
    #[value(name = "singlet")]
    Singlet,
    #[value(name = "pr_box_tables")]
    PrBoxTables,
}

impl DemoKind {
    fn reference(self) -> ReferenceKind {
        let name = match self {
            DemoKind::Nnmb2 => "nnmb2",
            DemoKind::NonlocalBox => "nonlocal_box",
            DemoKind::Singlet => "singlet",
            DemoKind::PrBoxTables => "pr_box_tables",
        };
        ReferenceKind::from_name(name).expect("every demo kind is a reference")
    }
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(format!("{s} is not a positive finite number"))
    }
}

/// Exit code plus whatever the command printed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        CommandOutput {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn failure(message: impl std::fmt::Display) -> Self {
        CommandOutput {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command. Usage
/// errors give exit code 2, analysis and input errors exit code 1.
pub fn run_command<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                CommandOutput::ok(text)
            } else {
                CommandOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> CommandOutput {
    let report = match build_report(cli) {
        Ok(r) => r,
        Err(e) => return CommandOutput::failure(e),
    };
    let mode = if cli.json {
        RenderMode::Json
    } else {
        RenderMode::Text
    };
    let text = render_report(&report, mode);
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => CommandOutput::ok(String::new()),
            Err(e) => CommandOutput::failure(format!("cannot write {}: {e}", path.display())),
        },
        None => CommandOutput::ok(text),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn load(path: &Path) -> Result<(Scenario, InputDigest), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let text =
        std::str::from_utf8(&bytes).map_err(|e| format!("{} is not UTF-8: {e}", path.display()))?;
    let scenario = parse_scenario(text).map_err(|e| format!("{}: {e}", path.display()))?;
    let digest = InputDigest {
        source: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((scenario, digest))
}

fn analysis_of(s: &Scenario, tol: ClassifyTolerance) -> AnalysisSection {
    let report = match &s.body {
        ScenarioBody::Tables { tables, .. } => analyze_tables(tables, tol),
        ScenarioBody::Model(m) => analyze_model(m, tol),
    };
    AnalysisSection::from(&report)
}

fn build_report(cli: &Cli) -> Result<ReportFile, String> {
    let classify_tol = |cmd_uses_it: bool| match cli.tolerance {
        Some(t) if cmd_uses_it => ClassifyTolerance::uniform(t),
        _ => ClassifyTolerance::default(),
    };
    let report = |command: &str, input, adjustment, analysis| ReportFile {
        format: REPORT_FORMAT.to_owned(),
        command: command.to_owned(),
        input,
        input_adjustment: adjustment,
        analysis,
        lhv: None,
        synthesis: None,
    };

    match &cli.command {
        Command::Analyze { file } | Command::Classify { file } => {
            let name = if matches!(cli.command, Command::Analyze { .. }) {
                "analyze"
            } else {
                "classify"
            };
            let (s, digest) = load(file)?;
            let analysis = analysis_of(&s, classify_tol(true));
            Ok(report(name, digest, s.adjustment, analysis))
        }
        Command::Lhv { file } => {
            let (s, digest) = load(file)?;
            let tol = cli.tolerance.unwrap_or(LHV_TOL);
            let cert = lhv_feasible(&s.tables(), tol);
            let mut r = report(
                "lhv",
                digest,
                s.adjustment,
                analysis_of(&s, classify_tol(false)),
            );
            r.lhv = Some(LhvSection::new(&cert, tol));
            Ok(r)
        }
        Command::Synthesize { file } => {
            let (s, digest) = load(file)?;
            let tol = cli.tolerance.unwrap_or(SYNTHESIS_TOL);
            let seed = cli.seed.unwrap_or(0);
            let (targets, hint) = match &s.body {
                ScenarioBody::Tables { tables, state } => (*tables, state.clone()),
                ScenarioBody::Model(m) => (s.tables(), Some(StateHint::Density(m.state.clone()))),
            };
            let mut req = SynthesisRequest::new(targets)
                .with_tolerance(tol)
                .with_seed(seed);
            if let Some(h) = hint {
                req = req.with_state(h);
            }
            let res = synthesize_model(&req).map_err(|e| e.to_string())?;
            let analysis =
                AnalysisSection::from(&analyze_model(&res.model, ClassifyTolerance::default()));
            let mut r = report("synthesize", digest, s.adjustment, analysis);
            r.synthesis = Some(SynthesisSection::new(&res, tol, seed));
            Ok(r)
        }
        Command::Demo { kind } => {
            let reference = build_reference(&kind.reference()).map_err(|e| e.to_string())?;
            let (file, analysis) = match &reference {
                Reference::Model(m) => (
                    ScenarioFile::from_model(m),
                    analyze_model(m, classify_tol(true)),
                ),
                Reference::Tables(t) => (
                    ScenarioFile::from_tables(t),
                    analyze_tables(t, classify_tol(true)),
                ),
            };
            let canonical = serde_json::to_vec(&file).expect("reference values are finite");
            let digest = InputDigest {
                source: format!("demo:{}", kind.reference().name()),
                sha256: sha256_hex(&canonical),
            };
            Ok(report(
                "demo",
                digest,
                0.0,
                AnalysisSection::from(&analysis),
            ))
        }
    }
}
