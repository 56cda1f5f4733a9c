use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::prob::{Finding, JointDistribution, ModelSpec, NaiveBayesModel, Schema};

use super::AuditError;

/// Priors of the default conditional-independence grid.
pub const GRID_PRIORS: [f64; 6] = [0.01, 0.1, 0.3, 0.5, 0.7, 0.9];
/// Per-finding likelihood ratios of the default grid.
pub const GRID_RATIOS: [f64; 5] = [1.0 / 99.0, 1.0 / 3.0, 1.0, 3.0, 99.0];

/// Range of every parameter drawn by `ci-random`.
const RANDOM_PARAMETER_RANGE: std::ops::Range<f64> = 0.01..0.99;

/// The universe of distributions an axiom is quantified over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioFamily {
    /// Naive-Bayes models over every prior and every per-finding ratio combination.
    CiGrid {
        priors: Vec<f64>,
        ratios: Vec<f64>,
        arity: usize,
    },
    /// Naive-Bayes models with parameters drawn uniformly from `[0.01, 0.99)`.
    CiRandom { samples: usize, seed: u64, arity: usize },
    /// Arbitrary tables drawn from a flat Dirichlet over all cells.
    GeneralRandom { samples: usize, seed: u64, arity: usize },
    Explicit { models: Vec<ModelSpec> },
}

/// One distribution of a family, with a stable id.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: usize,
    pub label: String,
    pub dist: JointDistribution,
}

impl ScenarioFamily {
    pub fn ci_grid(arity: usize) -> Self {
        ScenarioFamily::CiGrid {
            priors: GRID_PRIORS.to_vec(),
            ratios: GRID_RATIOS.to_vec(),
            arity,
        }
    }

    /// `p(H) = .01` with two conditionally independent findings of ratio 99.
    pub fn mycin_counterexample() -> Self {
        ScenarioFamily::Explicit {
            models: vec![ModelSpec::NaiveBayes(counterexample_model())],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioFamily::CiGrid { .. } => "ci-grid",
            ScenarioFamily::CiRandom { .. } => "ci-random",
            ScenarioFamily::GeneralRandom { .. } => "general-random",
            ScenarioFamily::Explicit { .. } => "explicit",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioFamily::CiRandom { seed, .. } | ScenarioFamily::GeneralRandom { seed, .. } => {
                Some(*seed)
            }
            _ => None,
        }
    }

    /// Materializes the family. Identical parameters give bit-identical
    /// scenarios.
    pub fn scenarios(&self) -> Result<Vec<Scenario>, AuditError> {
        let out = match self {
            ScenarioFamily::CiGrid {
                priors,
                ratios,
                arity,
            } => {
                let mut out = Vec::new();
                for &prior in priors {
                    for combo in ratio_combinations(ratios, *arity) {
                        let model = NaiveBayesModel::from_ratios(prior, &combo)?;
                        out.push(Scenario {
                            id: out.len(),
                            label: format!("prior={prior} ratios={}", format_ratios(&combo)),
                            dist: JointDistribution::from_naive_bayes(&model)?,
                        });
                    }
                }
                out
            }
            ScenarioFamily::CiRandom {
                samples,
                seed,
                arity,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*samples);
                for id in 0..*samples {
                    let prior = rng.random_range(RANDOM_PARAMETER_RANGE);
                    let findings = (1..=*arity)
                        .map(|i| {
                            let p_h = rng.random_range(RANDOM_PARAMETER_RANGE);
                            let p_nh = rng.random_range(RANDOM_PARAMETER_RANGE);
                            Finding::new(format!("E{i}"), p_h, p_nh)
                        })
                        .collect();
                    let model = NaiveBayesModel::new("H", prior, findings)?;
                    out.push(Scenario {
                        id,
                        label: format!("ci-random seed={seed} sample={id}"),
                        dist: JointDistribution::from_naive_bayes(&model)?,
                    });
                }
                out
            }
            ScenarioFamily::GeneralRandom {
                samples,
                seed,
                arity,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let schema = Schema::numbered(*arity);
                let cells = 1usize << (arity + 1);
                let mut out = Vec::with_capacity(*samples);
                for id in 0..*samples {
                    let mut entries: Vec<f64> = (0..cells).map(|_| rng.sample(Exp1)).collect();
                    let total: f64 = entries.iter().sum();
                    entries.iter_mut().for_each(|p| *p /= total);
                    out.push(Scenario {
                        id,
                        label: format!("general-random seed={seed} sample={id}"),
                        dist: JointDistribution::from_table(schema.clone(), &entries)?,
                    });
                }
                out
            }
            ScenarioFamily::Explicit { models } => models
                .iter()
                .enumerate()
                .map(|(id, m)| {
                    Ok(Scenario {
                        id,
                        label: format!("explicit model {id}"),
                        dist: m.to_joint()?,
                    })
                })
                .collect::<Result<Vec<_>, AuditError>>()?,
        };
        if out.is_empty() {
            return Err(AuditError::EmptyFamily);
        }
        Ok(out)
    }
}

impl fmt::Display for ScenarioFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioFamily::CiGrid {
                priors,
                ratios,
                arity,
            } => write!(
                f,
                "ci-grid (n={arity}, priors {priors:?} x ratios {})",
                format_ratios(ratios)
            ),
            ScenarioFamily::CiRandom {
                samples,
                seed,
                arity,
            } => write!(f, "ci-random (n={arity}, {samples} samples, seed {seed})"),
            ScenarioFamily::GeneralRandom {
                samples,
                seed,
                arity,
            } => write!(f, "general-random (n={arity}, {samples} samples, seed {seed})"),
            ScenarioFamily::Explicit { models } => write!(f, "explicit ({} models)", models.len()),
        }
    }
}

pub(crate) fn counterexample_model() -> NaiveBayesModel {
    NaiveBayesModel::new(
        "H",
        0.01,
        vec![Finding::new("E1", 0.99, 0.01), Finding::new("E2", 0.99, 0.01)],
    )
    .expect("fixed parameters are valid")
}

fn ratio_combinations(ratios: &[f64], arity: usize) -> Vec<Vec<f64>> {
    let mut combos = vec![Vec::new()];
    for _ in 0..arity {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                ratios.iter().map(move |&r| {
                    let mut next = c.clone();
                    next.push(r);
                    next
                })
            })
            .collect();
    }
    combos
}

fn format_ratio(r: f64) -> String {
    if r < 1.0 && ((1.0 / r).round() - 1.0 / r).abs() < 1e-9 {
        format!("1/{}", (1.0 / r).round())
    } else {
        format!("{r}")
    }
}

fn format_ratios(ratios: &[f64]) -> String {
    let parts: Vec<String> = ratios.iter().map(|&r| format_ratio(r)).collect();
    format!("[{}]", parts.join(", "))
}
