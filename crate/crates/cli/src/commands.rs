use std::fmt;
use std::path::{Path, PathBuf};

use evicalc::audit::{
    audit_evoking_strengths, check_cf_limit_case, check_marginal_independence_trap, check_modularity,
    check_update_property, reproduce_mycin_counterexample, AuditError, AuditReport, ScenarioFamily,
    DEFAULT_TOLERANCE, GRID_RATIOS,
};
use evicalc::calculi::{measure_by_name, CalcError, CalculusKind};
use evicalc::engine::{
    compare_calculi, evaluate_cases, exhaustive_cases, sampled_cases, CaseFile, CaseRecord,
    CompareOptions, EngineError, Rulebase, COMPARED_CALCULI,
};
use evicalc::{EvidenceSet, JointDistribution, ModelSpec, ProbError};

use crate::config::{AxiomArg, DemoArg, FamilyArg, MeasureArg, RunConfig};
use crate::output::{emit, Body};
use crate::{CalculusArgs, Command, OutputArgs, EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED};

/// Shared findings beyond this many are sampled rather than enumerated.
const MAX_EXHAUSTIVE_FINDINGS: usize = 10;

/// Priors for the small-prior limit demonstration.
const SMALL_PRIORS: [f64; 3] = [1e-6, 1e-4, 1e-3];
const SMALL_PRIOR_EPSILON: f64 = 1e-2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::InvalidTolerance(_)
            | AuditError::ArityTooSmall { .. }
            | AuditError::EmptyFamily => CliError::Usage(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ProbError> for CliError {
    fn from(e: ProbError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CalcError> for CliError {
    fn from(e: CalcError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    ModelSpec::from_json(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn path_strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn apply_output(config: &mut RunConfig, output: &OutputArgs) {
    config.out = output.out.as_ref().map(|p| p.display().to_string());
}

fn apply_calculus(config: &mut RunConfig, calculus: &CalculusArgs) {
    config.log_base = calculus.log_base.to_string();
    config.thresholds = calculus.thresholds.cuts();
}

pub fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Audit {
            measure,
            axiom,
            family,
            seed,
            samples,
            arity,
            tol,
            match_tol,
            collision_tol,
            model,
            calculus,
            output,
        } => {
            let family = family.unwrap_or(if model.is_empty() {
                FamilyArg::CiGrid
            } else {
                FamilyArg::Explicit
            });
            let arity = arity.unwrap_or(if family == FamilyArg::CiRandom { 3 } else { 2 });
            let mut config = RunConfig::new("audit", output.format);
            config.measure = Some(measure);
            config.axiom = Some(axiom);
            config.family = Some(family);
            config.tol = Some(tol);
            config.match_tol = Some(match_tol);
            config.collision_tol = Some(collision_tol);
            config.models = path_strings(&model);
            match family {
                FamilyArg::CiRandom | FamilyArg::GeneralRandom => {
                    config.seed = Some(seed);
                    config.samples = Some(samples);
                    config.arity = Some(arity);
                }
                FamilyArg::CiGrid => config.arity = Some(arity),
                FamilyArg::Explicit => {}
            }
            apply_calculus(&mut config, &calculus);
            apply_output(&mut config, &output);

            let scenarios = match family {
                FamilyArg::CiGrid => ScenarioFamily::ci_grid(arity),
                FamilyArg::CiRandom => ScenarioFamily::CiRandom {
                    samples,
                    seed,
                    arity,
                },
                FamilyArg::GeneralRandom => ScenarioFamily::GeneralRandom {
                    samples,
                    seed,
                    arity,
                },
                FamilyArg::Explicit => {
                    if model.is_empty() {
                        return Err(CliError::Usage("the explicit family needs at least one --model".into()));
                    }
                    ScenarioFamily::Explicit {
                        models: model.iter().map(|p| load_model(p)).collect::<Result<_, _>>()?,
                    }
                }
            };
            let reports = audit(measure, axiom, &scenarios, &calculus, tol, match_tol, collision_tol)?;
            let code = if reports.iter().any(AuditReport::is_violated) {
                EXIT_VIOLATED
            } else {
                EXIT_OK
            };
            emit(&config, code, &Body::Reports(reports))?;
            Ok(code)
        }
        Command::Demo {
            name,
            calculus,
            output,
        } => {
            let mut config = RunConfig::new("demo", output.format);
            config.demo = Some(name);
            apply_calculus(&mut config, &calculus);
            apply_output(&mut config, &output);
            let reports = match name {
                DemoArg::MycinCounterexample => vec![reproduce_mycin_counterexample()?],
                DemoArg::CfLimitTrap => {
                    let small = ScenarioFamily::CiGrid {
                        priors: SMALL_PRIORS.to_vec(),
                        ratios: GRID_RATIOS.to_vec(),
                        arity: 2,
                    };
                    vec![
                        check_marginal_independence_trap(&ScenarioFamily::ci_grid(2), DEFAULT_TOLERANCE)?,
                        check_cf_limit_case(&small, SMALL_PRIOR_EPSILON)?,
                    ]
                }
                DemoArg::InternistModularity => vec![
                    audit_evoking_strengths(
                        &ScenarioFamily::mycin_counterexample(),
                        calculus.thresholds,
                        DEFAULT_TOLERANCE,
                    )?,
                    audit_evoking_strengths(&ScenarioFamily::ci_grid(2), calculus.thresholds, DEFAULT_TOLERANCE)?,
                ],
            };
            emit(&config, EXIT_OK, &Body::Reports(reports))?;
            Ok(EXIT_OK)
        }
        Command::Eval {
            rules,
            case,
            calculus,
            output,
        } => {
            let mut config = RunConfig::new("eval", output.format);
            config.rules = Some(rules.display().to_string());
            config.cases = Some(case.display().to_string());
            apply_output(&mut config, &output);
            let rulebase = Rulebase::from_json(&read(&rules)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", rules.display())))?;
            let kind = calculus.map_or(rulebase.kind(), |c| c.kind());
            config.calculi = vec![kind];
            config.log_base = rulebase.log_base().to_string();
            let cases = load_cases(&case)?;
            let states = evaluate_cases(&rulebase, &cases, kind, None)?;
            emit(&config, EXIT_OK, &Body::Beliefs(states))?;
            Ok(EXIT_OK)
        }
        Command::Compare {
            model,
            case,
            calculus,
            samples,
            seed,
            calculus_args,
            output,
        } => {
            let mut config = RunConfig::new("compare", output.format);
            config.models = path_strings(&model);
            config.cases = case.as_ref().map(|p| p.display().to_string());
            apply_calculus(&mut config, &calculus_args);
            apply_output(&mut config, &output);
            let calculi: Vec<CalculusKind> = if calculus.is_empty() {
                COMPARED_CALCULI.to_vec()
            } else {
                calculus.iter().map(|c| c.kind()).collect()
            };
            config.calculi = calculi.clone();
            let models: Vec<JointDistribution> = model
                .iter()
                .map(|p| {
                    load_model(p)?
                        .to_joint()
                        .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
                })
                .collect::<Result<_, _>>()?;
            let cases = match &case {
                Some(path) => load_cases(path)?,
                None => {
                    let shared: Vec<String> = models[0]
                        .schema()
                        .evidence()
                        .iter()
                        .filter(|v| models.iter().all(|m| m.schema().evidence_index(v).is_some()))
                        .cloned()
                        .collect();
                    if shared.len() > MAX_EXHAUSTIVE_FINDINGS {
                        config.seed = Some(seed);
                        config.samples = Some(samples);
                        sampled_cases(&shared, samples, seed)
                    } else {
                        exhaustive_cases(&shared)
                    }
                }
            };
            let options = CompareOptions {
                calculi,
                log_base: calculus_args.log_base,
                thresholds: calculus_args.thresholds,
            };
            let table = compare_calculi(&models, &cases, &options)?;
            emit(&config, EXIT_OK, &Body::Divergence(table))?;
            Ok(EXIT_OK)
        }
    }
}

fn audit(
    measure: MeasureArg,
    axiom: AxiomArg,
    family: &ScenarioFamily,
    calculus: &CalculusArgs,
    tol: f64,
    match_tol: f64,
    collision_tol: f64,
) -> Result<Vec<AuditReport>, CliError> {
    let m = measure_by_name(measure.kind().as_str(), calculus.log_base, calculus.thresholds)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut reports = Vec::new();
    if matches!(axiom, AxiomArg::All | AxiomArg::Modularity) {
        reports.push(if measure == MeasureArg::Evoking {
            audit_evoking_strengths(family, calculus.thresholds, tol)?
        } else {
            check_modularity(m.as_ref(), family, tol)?
        });
    }
    if matches!(axiom, AxiomArg::All | AxiomArg::UpdateProperty) {
        reports.push(check_update_property(m.as_ref(), family, collision_tol, match_tol)?);
    }
    Ok(reports)
}

/// A blank file is one case with nothing observed.
fn load_cases(path: &Path) -> Result<Vec<CaseRecord>, CliError> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Ok(vec![CaseRecord::new("empty", EvidenceSet::empty())]);
    }
    Ok(CaseFile::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .cases)
}
