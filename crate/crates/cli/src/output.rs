use std::io::Write;

use serde::Serialize;

use evicalc::audit::{AuditReport, Verdict};
use evicalc::engine::{beliefs_to_csv, beliefs_to_text, BeliefState, DivergenceTable};

use crate::commands::CliError;
use crate::config::{FormatArg, RunConfig};

pub enum Body {
    Reports(Vec<AuditReport>),
    Beliefs(Vec<BeliefState>),
    Divergence(DivergenceTable),
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    reports: Option<&'a [AuditReport]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beliefs: Option<&'a [BeliefState]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<&'a DivergenceTable>,
}

fn reports_csv(reports: &[AuditReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "measure",
        "axiom",
        "family",
        "verdict",
        "scenarios_total",
        "scenarios_tested",
        "scenarios_skipped",
        "comparisons",
        "max_deviation",
        "witnesses",
        "conclusion",
    ])
    .expect("in-memory write");
    for r in reports {
        w.write_record([
            r.measure.clone(),
            r.axiom.as_str().to_string(),
            r.family.to_string(),
            match r.verdict {
                Verdict::Holds => "holds".into(),
                Verdict::Violated => "violated".into(),
            },
            r.scenarios_total.to_string(),
            r.scenarios_tested.to_string(),
            r.scenarios_skipped.to_string(),
            r.comparisons.to_string(),
            r.max_deviation.to_string(),
            r.witnesses.len().to_string(),
            r.conclusion.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn render(config: &RunConfig, exit_code: u8, body: &Body) -> String {
    match config.format {
        FormatArg::Json => {
            let mut env = Envelope {
                tool: "evicalc",
                version: env!("CARGO_PKG_VERSION"),
                config,
                exit_code,
                reports: None,
                beliefs: None,
                divergence: None,
            };
            match body {
                Body::Reports(r) => env.reports = Some(r),
                Body::Beliefs(b) => env.beliefs = Some(b),
                Body::Divergence(d) => env.divergence = Some(d),
            }
            let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
            s.push('\n');
            s
        }
        FormatArg::Text => match body {
            Body::Reports(r) => r.iter().map(AuditReport::to_text).collect::<Vec<_>>().join("\n"),
            Body::Beliefs(b) => beliefs_to_text(b),
            Body::Divergence(d) => d.to_text(),
        },
        FormatArg::Csv => match body {
            Body::Reports(r) => reports_csv(r),
            Body::Beliefs(b) => beliefs_to_csv(b),
            Body::Divergence(d) => d.to_csv(),
        },
    }
}

pub fn emit(config: &RunConfig, exit_code: u8, body: &Body) -> Result<(), CliError> {
    let text = render(config, exit_code, body);
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {path}: {e}"))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}
