use clap::ValueEnum;
use serde::Serialize;

use evicalc::calculi::CalculusKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureArg {
    Lambda,
    Weight,
    Cf,
    Posterior,
    Evoking,
}

impl MeasureArg {
    pub fn kind(self) -> CalculusKind {
        match self {
            MeasureArg::Lambda => CalculusKind::Lambda,
            MeasureArg::Weight => CalculusKind::Weight,
            MeasureArg::Cf => CalculusKind::Cf,
            MeasureArg::Posterior => CalculusKind::Posterior,
            MeasureArg::Evoking => CalculusKind::Evoking,
        }
    }
}

/// Calculi a rulebase can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalculusArg {
    Lambda,
    Weight,
    Cf,
    Evoking,
}

impl CalculusArg {
    pub fn kind(self) -> CalculusKind {
        match self {
            CalculusArg::Lambda => CalculusKind::Lambda,
            CalculusArg::Weight => CalculusKind::Weight,
            CalculusArg::Cf => CalculusKind::Cf,
            CalculusArg::Evoking => CalculusKind::Evoking,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    CiGrid,
    CiRandom,
    GeneralRandom,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomArg {
    All,
    Modularity,
    UpdateProperty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoArg {
    MycinCounterexample,
    CfLimitTrap,
    InternistModularity,
}

/// Everything that determines a run's output. Embedded in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo: Option<DemoArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom: Option<AxiomArg>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub calculi: Vec<CalculusKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub match_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_tol: Option<f64>,
    pub log_base: String,
    pub thresholds: [f64; 4],
    pub format: FormatArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<String>,
}

impl RunConfig {
    pub fn new(command: &'static str, format: FormatArg) -> Self {
        RunConfig {
            command,
            demo: None,
            measure: None,
            axiom: None,
            calculi: Vec::new(),
            family: None,
            seed: None,
            samples: None,
            arity: None,
            tol: None,
            match_tol: None,
            collision_tol: None,
            log_base: evicalc::LogBase::default().to_string(),
            thresholds: evicalc::EvokingThresholds::default().cuts(),
            format,
            out: None,
            models: Vec::new(),
            rules: None,
            cases: None,
        }
    }
}
