use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculi::{cf_from_probabilities, CalculusKind, EvokingThresholds, LogBase};
use crate::prob::{EvidenceSet, JointDistribution};

use super::{evaluate_case, ground_truth, CaseRecord, EngineError, Rulebase};

/// Calculi compared by default, in output order.
pub const COMPARED_CALCULI: [CalculusKind; 4] = [
    CalculusKind::Lambda,
    CalculusKind::Weight,
    CalculusKind::Cf,
    CalculusKind::Evoking,
];

const RANK_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub calculi: Vec<CalculusKind>,
    pub log_base: LogBase,
    pub thresholds: EvokingThresholds,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            calculi: COMPARED_CALCULI.to_vec(),
            log_base: LogBase::default(),
            thresholds: EvokingThresholds::default(),
        }
    }
}

/// What a row's error is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBasis {
    /// Reconstructed posterior against the enumerated posterior.
    Posterior,
    /// Accumulated certainty factor against the one implied by the
    /// enumerated prior and posterior.
    CertaintyFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisDivergence {
    pub hypothesis: String,
    pub truth_posterior: f64,
    pub truth_cf: Option<f64>,
    pub accumulated: f64,
    pub engine_posterior: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub case_id: String,
    pub observed: EvidenceSet,
    pub calculus: CalculusKind,
    pub error_basis: Option<ErrorBasis>,
    pub hypotheses: Vec<HypothesisDivergence>,
    pub max_abs_error: Option<f64>,
    /// Fraction of hypothesis pairs ordered as the enumeration orders them;
    /// engine ties count one half. Absent with fewer than two distinct
    /// true posteriors.
    pub rank_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalculusSummary {
    pub calculus: CalculusKind,
    pub rows: usize,
    pub max_abs_error: Option<f64>,
    pub mean_rank_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTable {
    pub hypotheses: Vec<String>,
    pub calculi: Vec<CalculusKind>,
    pub rows: Vec<DivergenceRow>,
    pub summary: Vec<CalculusSummary>,
    pub notes: Vec<String>,
}

fn rank_agreement(truth: &[f64], engine: &[f64]) -> Option<f64> {
    let mut pairs = 0usize;
    let mut score = 0.0;
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            let t = truth[i] - truth[j];
            if t.abs() <= RANK_TIE {
                continue;
            }
            pairs += 1;
            let e = engine[i] - engine[j];
            if e.abs() <= RANK_TIE {
                score += 0.5;
            } else if e.signum() == t.signum() {
                score += 1.0;
            }
        }
    }
    (pairs > 0).then(|| score / pairs as f64)
}

fn max_option(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// Scores every case under each calculus with rulebases derived from the
/// models and sets each result beside the enumerated posterior.
///
/// Each model contributes one hypothesis; hypothesis names must differ.
pub fn compare_calculi(
    models: &[JointDistribution],
    cases: &[CaseRecord],
    options: &CompareOptions,
) -> Result<DivergenceTable, EngineError> {
    if models.is_empty() {
        return Err(EngineError::NoModels);
    }
    let mut names = BTreeSet::new();
    for m in models {
        if !names.insert(m.schema().hypothesis()) {
            return Err(EngineError::DuplicateHypothesis(m.schema().hypothesis().to_string()));
        }
    }
    let hypotheses: Vec<String> = models.iter().map(|m| m.schema().hypothesis().to_string()).collect();
    let priors: Vec<f64> = models
        .iter()
        .map(|m| m.posterior(&m.hypothesis(), &EvidenceSet::empty()))
        .collect::<Result<_, _>>()?;
    let rulebases: Vec<Rulebase> = options
        .calculi
        .iter()
        .map(|&kind| {
            let parts = models
                .iter()
                .map(|m| Rulebase::derive(m, kind, options.log_base, &options.thresholds))
                .collect::<Result<Vec<_>, _>>()?;
            Rulebase::merge(parts)
        })
        .collect::<Result<_, EngineError>>()?;

    let per_case: Vec<Vec<DivergenceRow>> = cases
        .par_iter()
        .map(|case| {
            let truth: Vec<f64> = models
                .iter()
                .map(|m| ground_truth(m, case))
                .collect::<Result<_, _>>()?;
            let mut rows = Vec::with_capacity(rulebases.len());
            for (rb, &kind) in rulebases.iter().zip(&options.calculi) {
                let state = evaluate_case(rb, case, kind, None)?;
                let mut cells = Vec::with_capacity(models.len());
                let mut engine_scores = Vec::with_capacity(models.len());
                for (k, h) in hypotheses.iter().enumerate() {
                    let b = state.belief(h).expect("every model contributes its hypothesis");
                    let truth_cf = cf_from_probabilities(priors[k], truth[k]).ok();
                    let accumulated = b.accumulated.value();
                    let abs_error = match kind {
                        CalculusKind::Lambda | CalculusKind::Weight => {
                            b.posterior.map(|p| (p - truth[k]).abs())
                        }
                        CalculusKind::Cf => truth_cf.map(|t| (accumulated - t).abs()),
                        _ => None,
                    };
                    engine_scores.push(b.posterior.unwrap_or(accumulated));
                    cells.push(HypothesisDivergence {
                        hypothesis: h.clone(),
                        truth_posterior: truth[k],
                        truth_cf,
                        accumulated,
                        engine_posterior: b.posterior,
                        abs_error,
                    });
                }
                let error_basis = match kind {
                    CalculusKind::Lambda | CalculusKind::Weight => Some(ErrorBasis::Posterior),
                    CalculusKind::Cf => Some(ErrorBasis::CertaintyFactor),
                    _ => None,
                };
                rows.push(DivergenceRow {
                    case_id: case.id.clone(),
                    observed: case.observed.clone(),
                    calculus: kind,
                    error_basis,
                    max_abs_error: max_option(cells.iter().map(|c| c.abs_error)),
                    rank_agreement: rank_agreement(&truth, &engine_scores),
                    hypotheses: cells,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_, EngineError>>()?;
    let rows: Vec<DivergenceRow> = per_case.into_iter().flatten().collect();

    let summary = options
        .calculi
        .iter()
        .map(|&kind| {
            let mine: Vec<&DivergenceRow> = rows.iter().filter(|r| r.calculus == kind).collect();
            let ranks: Vec<f64> = mine.iter().filter_map(|r| r.rank_agreement).collect();
            CalculusSummary {
                calculus: kind,
                rows: mine.len(),
                max_abs_error: max_option(mine.iter().map(|r| r.max_abs_error)),
                mean_rank_agreement: (!ranks.is_empty())
                    .then(|| ranks.iter().sum::<f64>() / ranks.len() as f64),
            }
        })
        .collect();
    let mut notes = vec![
        "cf and evoking rules fire on present findings only; explicitly absent findings contribute nothing to them"
            .to_string(),
    ];
    if options.calculi.contains(&CalculusKind::Cf) {
        notes.push(
            "no posterior is reconstructed from certainty factors; cf error compares the accumulated cf with the cf implied by the true prior and posterior"
                .into(),
        );
    }
    Ok(DivergenceTable {
        hypotheses,
        calculi: options.calculi.clone(),
        rows,
        summary,
        notes,
    })
}

pub(crate) fn align<const N: usize>(rows: &[[String; N]]) -> String {
    let mut widths = [0usize; N];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.6e}"))
}

impl DivergenceTable {
    pub fn summary_for(&self, calculus: CalculusKind) -> Option<&CalculusSummary> {
        self.summary.iter().find(|s| s.calculus == calculus)
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![[
            "case".to_string(),
            "calculus".into(),
            "hypothesis".into(),
            "truth".into(),
            "accumulated".into(),
            "engine_posterior".into(),
            "abs_error".into(),
            "rank_agreement".into(),
        ]];
        for r in &self.rows {
            for h in &r.hypotheses {
                rows.push([
                    r.case_id.clone(),
                    r.calculus.to_string(),
                    h.hypothesis.clone(),
                    format!("{:.9}", h.truth_posterior),
                    format!("{:.9}", h.accumulated),
                    h.engine_posterior.map_or("-".into(), |p| format!("{p:.9}")),
                    fmt_opt(h.abs_error),
                    r.rank_agreement.map_or("-".into(), |a| format!("{a:.3}")),
                ]);
            }
        }
        let mut out = align(&rows);
        out.push('\n');
        let mut sum = vec![[
            "calculus".to_string(),
            "rows".into(),
            "max_abs_error".into(),
            "mean_rank_agreement".into(),
        ]];
        for s in &self.summary {
            sum.push([
                s.calculus.to_string(),
                s.rows.to_string(),
                fmt_opt(s.max_abs_error),
                s.mean_rank_agreement.map_or("-".into(), |a| format!("{a:.3}")),
            ]);
        }
        out.push_str(&align(&sum));
        for n in &self.notes {
            out.push_str("note: ");
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    /// One record per case and calculus; per-hypothesis fields are
    /// prefixed with the hypothesis name.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "case".to_string(),
            "observed".into(),
            "calculus".into(),
            "error_basis".into(),
            "max_abs_error".into(),
            "rank_agreement".into(),
        ];
        for h in &self.hypotheses {
            for field in ["truth", "accumulated", "engine_posterior", "abs_error"] {
                header.push(format!("{h}_{field}"));
            }
        }
        w.write_record(&header).expect("in-memory write");
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            let mut rec = vec![
                r.case_id.clone(),
                r.observed.to_vec().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                r.calculus.to_string(),
                match r.error_basis {
                    Some(ErrorBasis::Posterior) => "posterior".into(),
                    Some(ErrorBasis::CertaintyFactor) => "certainty_factor".into(),
                    None => String::new(),
                },
                opt(r.max_abs_error),
                opt(r.rank_agreement),
            ];
            for h in &r.hypotheses {
                rec.push(h.truth_posterior.to_string());
                rec.push(h.accumulated.to_string());
                rec.push(opt(h.engine_posterior));
                rec.push(opt(h.abs_error));
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
