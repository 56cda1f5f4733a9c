use crate::prob::{EvidenceSet, JointDistribution, ProbError, Proposition};

use super::{CalcError, CalculusKind, LogBase};

/// `log_base lambda(h, evidence, prior)`.
pub fn weight_of_evidence(
    dist: &JointDistribution,
    hypothesis: &Proposition,
    evidence: &EvidenceSet,
    prior: &EvidenceSet,
    base: LogBase,
) -> Result<f64, CalcError> {
    let lambda = dist.likelihood_ratio(hypothesis, evidence, prior)?;
    Ok(base.log(lambda))
}

/// Likelihood ratios chain by multiplication.
pub fn combine_lambdas(first: f64, second: f64) -> Result<f64, CalcError> {
    for v in [first, second] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CalcError::OutOfRange {
                kind: CalculusKind::Lambda,
                value: v,
            });
        }
    }
    let product = first * second;
    if !(product.is_finite() && product > 0.0) {
        return Err(CalcError::OutOfRange {
            kind: CalculusKind::Lambda,
            value: product,
        });
    }
    Ok(product)
}

/// Weights of evidence add.
pub fn combine_weights(weights: &[f64]) -> f64 {
    weights.iter().sum()
}

/// Posterior from a prior and a total weight: posterior odds are
/// `prior / (1 - prior) * base^weight`.
///
/// Evaluated as a logistic of the log-odds so that large weights do not
/// overflow.
pub fn posterior_from_weight(prior: f64, total_weight: f64, base: LogBase) -> Result<f64, CalcError> {
    if !(prior > 0.0 && prior < 1.0) {
        return Err(CalcError::InvalidPrior(prior));
    }
    if !total_weight.is_finite() {
        return Err(CalcError::OutOfRange {
            kind: CalculusKind::Weight,
            value: total_weight,
        });
    }
    if total_weight == 0.0 {
        return Ok(prior);
    }
    let log_odds = prior.ln() - (1.0 - prior).ln() + total_weight * base.ln_base();
    Ok(logistic(log_odds))
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Certainty factor from a prior and posterior belief: the normalized
/// increase toward 1 when belief rises, the normalized decrease toward 0
/// when it falls, and exactly 0 when it is unchanged.
pub fn cf_from_probabilities(prior: f64, posterior: f64) -> Result<f64, CalcError> {
    if !(prior > 0.0 && prior < 1.0) {
        return Err(ProbError::DegenerateBelief { posterior: prior }.into());
    }
    if !(0.0..=1.0).contains(&posterior) {
        return Err(CalcError::OutOfRange {
            kind: CalculusKind::Posterior,
            value: posterior,
        });
    }
    let cf = if posterior > prior {
        (posterior - prior) / (1.0 - prior)
    } else if posterior < prior {
        (posterior - prior) / prior
    } else {
        0.0
    };
    Ok(cf.clamp(-1.0, 1.0))
}

/// `CF(h, evidence)` against the unconditioned prior.
pub fn certainty_factor(
    dist: &JointDistribution,
    hypothesis: &Proposition,
    evidence: &EvidenceSet,
) -> Result<f64, CalcError> {
    certainty_factor_conditional(dist, hypothesis, evidence, &EvidenceSet::empty())
}

/// `CF(h, evidence, prior)`: the certainty factor with every probability
/// conditioned on the prior evidence.
pub fn certainty_factor_conditional(
    dist: &JointDistribution,
    hypothesis: &Proposition,
    evidence: &EvidenceSet,
    prior: &EvidenceSet,
) -> Result<f64, CalcError> {
    let before = dist.posterior(hypothesis, prior)?;
    let after = dist.posterior(hypothesis, &evidence.union(prior)?)?;
    cf_from_probabilities(before, after)
}

/// The EMYCIN parallel-combination function.
///
/// Same-sign factors reinforce (`x + y - xy`, `x + y + xy`); mixed signs
/// use `(x + y) / (1 - min(|x|, |y|))`. Zero is an exact identity and
/// `+1`/`-1` are absorbing, which keeps the function associative at the
/// boundary in floating point.
pub fn mycin_combine(x: f64, y: f64) -> Result<f64, CalcError> {
    for v in [x, y] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(CalcError::OutOfRange {
                kind: CalculusKind::Cf,
                value: v,
            });
        }
    }
    if (x == 1.0 && y == -1.0) || (x == -1.0 && y == 1.0) {
        return Err(CalcError::ContradictoryCertainty);
    }
    if x == 0.0 {
        return Ok(y);
    }
    if y == 0.0 {
        return Ok(x);
    }
    if x == 1.0 || y == 1.0 {
        return Ok(1.0);
    }
    if x == -1.0 || y == -1.0 {
        return Ok(-1.0);
    }
    let combined = if x > 0.0 && y > 0.0 {
        x + y - x * y
    } else if x < 0.0 && y < 0.0 {
        x + y + x * y
    } else {
        (x + y) / (1.0 - x.abs().min(y.abs()))
    };
    Ok(combined.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::NaiveBayesModel;

    fn lit(s: &str) -> Proposition {
        s.parse().unwrap()
    }

    fn set(lits: &[&str]) -> EvidenceSet {
        EvidenceSet::from_literals(lits.iter().map(|s| lit(s))).unwrap()
    }

    fn counterexample() -> JointDistribution {
        JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.01, &[99.0, 99.0]).unwrap())
            .unwrap()
    }

    #[test]
    fn weight_examples() {
        let d = counterexample();
        let h = lit("H");
        let w = weight_of_evidence(&d, &h, &set(&["E1"]), &EvidenceSet::empty(), LogBase::NATURAL)
            .unwrap();
        assert!((w - 4.59512).abs() < 1e-5);
        let w_neg =
            weight_of_evidence(&d, &lit("~H"), &set(&["E1"]), &EvidenceSet::empty(), LogBase::NATURAL)
                .unwrap();
        assert!((w + w_neg).abs() < 1e-12);
        let u = JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.5, &[1.0]).unwrap())
            .unwrap();
        assert_eq!(
            weight_of_evidence(&u, &h, &set(&["E1"]), &EvidenceSet::empty(), LogBase::NATURAL).unwrap(),
            0.0
        );
    }

    #[test]
    fn lambda_combination() {
        assert_eq!(combine_lambdas(99.0, 99.0).unwrap(), 9801.0);
        assert_eq!(combine_lambdas(7.5, 1.0).unwrap(), 7.5);
        assert_eq!(combine_lambdas(2.0, 5.0).unwrap(), 10.0);
        assert!(combine_lambdas(0.0, 5.0).is_err());
        assert!(combine_lambdas(f64::MAX, 10.0).is_err());
    }

    #[test]
    fn lambda_product_matches_enumeration() {
        let model = NaiveBayesModel::from_ratios(0.5, &[2.0, 5.0]).unwrap();
        let d = JointDistribution::from_naive_bayes(&model).unwrap();
        let joint = d
            .likelihood_ratio(&lit("H"), &set(&["E1", "E2"]), &EvidenceSet::empty())
            .unwrap();
        assert!((joint - combine_lambdas(2.0, 5.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn weight_combination() {
        assert_eq!(combine_weights(&[]), 0.0);
        let w = 99f64.ln();
        assert!((combine_weights(&[w, w]) - 9801f64.ln()).abs() < 1e-9);
        assert_eq!(combine_weights(&[1.25, -1.25]), 0.0);
    }

    #[test]
    fn posterior_from_weight_examples() {
        let p = posterior_from_weight(0.01, 9801f64.ln(), LogBase::NATURAL).unwrap();
        assert!((p - 0.99).abs() < 1e-12);
        assert_eq!(posterior_from_weight(0.37, 0.0, LogBase::NATURAL).unwrap(), 0.37);
        let p = posterior_from_weight(0.5, 3f64.ln(), LogBase::NATURAL).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
        let p = posterior_from_weight(0.5, 3f64.log10(), LogBase::TEN).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
        assert!(posterior_from_weight(0.0, 1.0, LogBase::NATURAL).is_err());
        assert!(posterior_from_weight(1.0, 1.0, LogBase::NATURAL).is_err());
        assert!(posterior_from_weight(0.5, 1e6, LogBase::NATURAL).unwrap() <= 1.0);
    }

    #[test]
    fn cf_examples() {
        let cf = cf_from_probabilities(0.01, 0.5).unwrap();
        assert!((cf - 0.49495).abs() < 1e-5);
        assert_eq!(cf_from_probabilities(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(cf_from_probabilities(0.5, 0.25).unwrap(), -0.5);
        assert!(matches!(
            cf_from_probabilities(0.0, 0.5),
            Err(CalcError::Prob(ProbError::DegenerateBelief { .. }))
        ));
        assert!(cf_from_probabilities(1.0, 0.5).is_err());
    }

    #[test]
    fn cf_with_prior_evidence() {
        let d = counterexample();
        let h = lit("H");
        let e1 = set(&["E1"]);
        let e2 = set(&["E2"]);
        assert_eq!(
            certainty_factor_conditional(&d, &h, &e1, &EvidenceSet::empty()).unwrap(),
            certainty_factor(&d, &h, &e1).unwrap()
        );
        let cf_2_1 = certainty_factor_conditional(&d, &h, &e2, &e1).unwrap();
        assert!((cf_2_1 - 0.98).abs() < 1e-9);
        let cf_12 = certainty_factor(&d, &h, &set(&["E1", "E2"])).unwrap();
        assert!((cf_12 - 0.98990).abs() < 1e-5);
    }

    #[test]
    fn mycin_combination_examples() {
        assert_eq!(mycin_combine(0.37, 0.0).unwrap(), 0.37);
        assert_eq!(mycin_combine(0.0, -0.37).unwrap(), -0.37);
        assert_eq!(mycin_combine(0.5, 0.5).unwrap(), 0.75);
        assert!((mycin_combine(0.8, -0.4).unwrap() - 0.66667).abs() < 1e-5);
        assert!((mycin_combine(-0.5, -0.5).unwrap() + 0.75).abs() < 1e-15);
        assert_eq!(mycin_combine(1.0, -1.0), Err(CalcError::ContradictoryCertainty));
        assert_eq!(mycin_combine(1.0, -0.3).unwrap(), 1.0);
        assert!(mycin_combine(1.2, 0.0).is_err());
    }
}
