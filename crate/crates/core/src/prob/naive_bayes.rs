use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::proposition::valid_name;
use super::ProbError;

/// One finding of a naive-Bayes model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    /// Sensitivity `p(E | H)`.
    pub p_given_h: f64,
    /// False-positive rate `p(E | ~H)`.
    pub p_given_not_h: f64,
}

impl Finding {
    pub fn new(name: impl Into<String>, p_given_h: f64, p_given_not_h: f64) -> Self {
        Self {
            name: name.into(),
            p_given_h,
            p_given_not_h,
        }
    }

    /// A finding with likelihood ratio `ratio`, parameterised as
    /// `p(E|H) = ratio / (1 + ratio)` and `p(E|~H) = 1 / (1 + ratio)`.
    pub fn from_ratio(name: impl Into<String>, ratio: f64) -> Self {
        Self::new(name, ratio / (1.0 + ratio), 1.0 / (1.0 + ratio))
    }

    /// `p(E|H) / p(E|~H)`.
    pub fn likelihood_ratio(&self) -> f64 {
        self.p_given_h / self.p_given_not_h
    }

    /// `p(~E|H) / p(~E|~H)`, the ratio contributed by an absent finding.
    pub fn absent_likelihood_ratio(&self) -> f64 {
        (1.0 - self.p_given_h) / (1.0 - self.p_given_not_h)
    }
}

/// Prior plus per-finding sensitivities and false-positive rates. Findings
/// are conditionally independent given the hypothesis and its negation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct NaiveBayesModel {
    hypothesis: String,
    prior: f64,
    findings: Vec<Finding>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default = "default_hypothesis")]
    hypothesis: String,
    prior: f64,
    findings: Vec<Finding>,
}

fn default_hypothesis() -> String {
    "H".to_string()
}

impl TryFrom<RawModel> for NaiveBayesModel {
    type Error = ProbError;

    fn try_from(raw: RawModel) -> Result<Self, Self::Error> {
        NaiveBayesModel::new(raw.hypothesis, raw.prior, raw.findings)
    }
}

impl From<NaiveBayesModel> for RawModel {
    fn from(model: NaiveBayesModel) -> Self {
        RawModel {
            hypothesis: model.hypothesis,
            prior: model.prior,
            findings: model.findings,
        }
    }
}

fn open_unit(name: String, value: f64) -> Result<(), ProbError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ProbError::ParameterOutOfRange { name, value })
    }
}

impl NaiveBayesModel {
    pub fn new(
        hypothesis: impl Into<String>,
        prior: f64,
        findings: Vec<Finding>,
    ) -> Result<Self, ProbError> {
        let model = Self {
            hypothesis: hypothesis.into(),
            prior,
            findings,
        };
        model.validate()?;
        Ok(model)
    }

    /// Hypothesis `H` with findings `E1..En` of the given likelihood ratios.
    pub fn from_ratios(prior: f64, ratios: &[f64]) -> Result<Self, ProbError> {
        let findings = ratios
            .iter()
            .enumerate()
            .map(|(i, &r)| Finding::from_ratio(format!("E{}", i + 1), r))
            .collect();
        Self::new("H", prior, findings)
    }

    pub(crate) fn validate(&self) -> Result<(), ProbError> {
        if !valid_name(&self.hypothesis) {
            return Err(ProbError::InvalidName(self.hypothesis.clone()));
        }
        open_unit("prior".into(), self.prior)?;
        let mut seen = HashSet::new();
        seen.insert(self.hypothesis.as_str());
        for f in &self.findings {
            if !valid_name(&f.name) {
                return Err(ProbError::InvalidName(f.name.clone()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(ProbError::DuplicateVariable(f.name.clone()));
            }
            open_unit(format!("p({}|{})", f.name, self.hypothesis), f.p_given_h)?;
            open_unit(format!("p({}|~{})", f.name, self.hypothesis), f.p_given_not_h)?;
        }
        Ok(())
    }

    pub fn hypothesis(&self) -> &str {
        &self.hypothesis
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn finding(&self, name: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{EvidenceSet, JointDistribution, Proposition};

    #[test]
    fn expansion_hand_multiplied() {
        let model = NaiveBayesModel::new("H", 0.5, vec![Finding::new("E", 0.8, 0.2)]).unwrap();
        let d = JointDistribution::from_naive_bayes(&model).unwrap();
        // H E = .5*.8, H ~E = .5*.2, ~H E = .5*.2, ~H ~E = .5*.8
        let expected = [0.4, 0.1, 0.1, 0.4];
        for (got, want) in d.entries().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn counterexample_parameters_give_ratio_99() {
        let model = NaiveBayesModel::new(
            "H",
            0.01,
            vec![Finding::new("E1", 0.99, 0.01), Finding::new("E2", 0.99, 0.01)],
        )
        .unwrap();
        let d = JointDistribution::from_naive_bayes(&model).unwrap();
        let lambda = d
            .likelihood_ratio(
                &Proposition::positive("H"),
                &EvidenceSet::single(Proposition::positive("E1")),
                &EvidenceSet::empty(),
            )
            .unwrap();
        assert!((lambda - 99.0).abs() < 1e-9);
        assert_eq!(Finding::from_ratio("E", 99.0).p_given_h, 0.99);
        assert_eq!(Finding::from_ratio("E", 99.0).p_given_not_h, 0.01);
    }

    #[test]
    fn uninformative_finding() {
        let model = NaiveBayesModel::from_ratios(0.5, &[1.0]).unwrap();
        let d = JointDistribution::from_naive_bayes(&model).unwrap();
        let h = Proposition::positive("H");
        let e1 = EvidenceSet::single(Proposition::positive("E1"));
        assert_eq!(d.likelihood_ratio(&h, &e1, &EvidenceSet::empty()).unwrap(), 1.0);
        assert_eq!(d.posterior(&h, &e1).unwrap(), 0.5);
    }

    #[test]
    fn parameters_must_be_strictly_inside_unit_interval() {
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(
                NaiveBayesModel::new("H", bad, vec![]),
                Err(ProbError::ParameterOutOfRange { .. })
            ));
            assert!(matches!(
                NaiveBayesModel::new("H", 0.5, vec![Finding::new("E", bad, 0.5)]),
                Err(ProbError::ParameterOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn deserialization_validates() {
        let ok: NaiveBayesModel = serde_json::from_str(
            r#"{"prior": 0.2, "findings": [{"name": "E", "p_given_h": 0.7, "p_given_not_h": 0.1}]}"#,
        )
        .unwrap();
        assert_eq!(ok.hypothesis(), "H");
        assert!(serde_json::from_str::<NaiveBayesModel>(
            r#"{"prior": 1.0, "findings": []}"#
        )
        .is_err());
    }
}
