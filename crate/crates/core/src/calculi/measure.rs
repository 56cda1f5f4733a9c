use crate::prob::{EvidenceSet, JointDistribution, Proposition};

use super::{
    certainty_factor_conditional, combine_lambdas, mycin_combine, CalcError, CalculusKind,
    CalculusValue, EvokingThresholds, LogBase,
};

/// A belief update `U(h, evidence, prior)`, optionally with a declared
/// combination function for chaining two updates.
pub trait UpdateMeasure: Send + Sync {
    fn name(&self) -> String;

    fn kind(&self) -> CalculusKind;

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError>;

    /// Combines `U(h, E1, e)` with `U(h, E2, E1 e)`. `None` when the
    /// calculus declares no combinator.
    fn combine(
        &self,
        _first: CalculusValue,
        _second: CalculusValue,
    ) -> Option<Result<CalculusValue, CalcError>> {
        None
    }

    /// Coordinate in which two values are compared when searching for
    /// functional dependence. Identity except for multiplicative scales.
    fn coordinate(&self, value: CalculusValue) -> f64 {
        value.value()
    }
}

fn expect(kind: CalculusKind, value: CalculusValue) -> Result<f64, CalcError> {
    if value.kind() == kind {
        Ok(value.value())
    } else {
        Err(CalcError::KindMismatch {
            expected: kind,
            found: value.kind(),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LikelihoodRatioMeasure;

impl UpdateMeasure for LikelihoodRatioMeasure {
    fn name(&self) -> String {
        "lambda".into()
    }

    fn kind(&self) -> CalculusKind {
        CalculusKind::Lambda
    }

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError> {
        let lambda = dist.likelihood_ratio(hypothesis, evidence, prior)?;
        CalculusValue::new(CalculusKind::Lambda, lambda)
    }

    fn combine(
        &self,
        first: CalculusValue,
        second: CalculusValue,
    ) -> Option<Result<CalculusValue, CalcError>> {
        Some((|| {
            let a = expect(CalculusKind::Lambda, first)?;
            let b = expect(CalculusKind::Lambda, second)?;
            Ok(CalculusValue::Lambda(combine_lambdas(a, b)?))
        })())
    }

    fn coordinate(&self, value: CalculusValue) -> f64 {
        value.value().ln()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WeightMeasure {
    pub base: LogBase,
}

impl UpdateMeasure for WeightMeasure {
    fn name(&self) -> String {
        if self.base.is_natural() {
            "weight".into()
        } else {
            format!("weight(base {})", self.base)
        }
    }

    fn kind(&self) -> CalculusKind {
        CalculusKind::Weight
    }

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError> {
        let lambda = dist.likelihood_ratio(hypothesis, evidence, prior)?;
        CalculusValue::new(CalculusKind::Weight, self.base.log(lambda))
    }

    fn combine(
        &self,
        first: CalculusValue,
        second: CalculusValue,
    ) -> Option<Result<CalculusValue, CalcError>> {
        Some((|| {
            let a = expect(CalculusKind::Weight, first)?;
            let b = expect(CalculusKind::Weight, second)?;
            CalculusValue::new(CalculusKind::Weight, a + b)
        })())
    }
}

/// Certainty factor conditioned on prior evidence; with empty prior
/// evidence this is the unconditioned certainty factor.
#[derive(Debug, Clone, Copy, Default)]
pub struct CertaintyFactorMeasure;

impl UpdateMeasure for CertaintyFactorMeasure {
    fn name(&self) -> String {
        "cf".into()
    }

    fn kind(&self) -> CalculusKind {
        CalculusKind::Cf
    }

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError> {
        let cf = certainty_factor_conditional(dist, hypothesis, evidence, prior)?;
        CalculusValue::new(CalculusKind::Cf, cf)
    }

    fn combine(
        &self,
        first: CalculusValue,
        second: CalculusValue,
    ) -> Option<Result<CalculusValue, CalcError>> {
        Some((|| {
            let a = expect(CalculusKind::Cf, first)?;
            let b = expect(CalculusKind::Cf, second)?;
            Ok(CalculusValue::Cf(mycin_combine(a, b)?))
        })())
    }
}

/// The posterior `p(h | evidence prior)` read as if it were an update.
#[derive(Debug, Clone, Copy, Default)]
pub struct PosteriorMeasure;

impl UpdateMeasure for PosteriorMeasure {
    fn name(&self) -> String {
        "posterior".into()
    }

    fn kind(&self) -> CalculusKind {
        CalculusKind::Posterior
    }

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError> {
        let p = dist.posterior(hypothesis, &evidence.union(prior)?)?;
        CalculusValue::new(CalculusKind::Posterior, p)
    }
}

/// Evoking strength: the posterior bucketed by [`EvokingThresholds`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EvokingMeasure {
    pub thresholds: EvokingThresholds,
}

impl UpdateMeasure for EvokingMeasure {
    fn name(&self) -> String {
        "evoking".into()
    }

    fn kind(&self) -> CalculusKind {
        CalculusKind::Evoking
    }

    fn evaluate(
        &self,
        dist: &JointDistribution,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<CalculusValue, CalcError> {
        let p = dist.posterior(hypothesis, &evidence.union(prior)?)?;
        Ok(CalculusValue::Evoking(self.thresholds.strength(p)?))
    }
}

/// Looks up a measure by its command-line name.
pub fn measure_by_name(
    name: &str,
    base: LogBase,
    thresholds: EvokingThresholds,
) -> Result<Box<dyn UpdateMeasure>, CalcError> {
    let kind: CalculusKind = name.parse()?;
    Ok(match kind {
        CalculusKind::Lambda => Box::new(LikelihoodRatioMeasure),
        CalculusKind::Weight => Box::new(WeightMeasure { base }),
        CalculusKind::Cf => Box::new(CertaintyFactorMeasure),
        CalculusKind::Posterior => Box::new(PosteriorMeasure),
        CalculusKind::Evoking => Box::new(EvokingMeasure { thresholds }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::NaiveBayesModel;

    #[test]
    fn lookup() {
        for kind in CalculusKind::ALL {
            let m = measure_by_name(kind.as_str(), LogBase::NATURAL, EvokingThresholds::default())
                .unwrap();
            assert_eq!(m.kind(), kind);
        }
        assert!(matches!(
            measure_by_name("frobnitz", LogBase::NATURAL, EvokingThresholds::default()),
            Err(CalcError::UnknownMeasure(_))
        ));
    }

    #[test]
    fn combinators_declared_where_they_exist() {
        let d = JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.2, &[3.0]).unwrap())
            .unwrap();
        let h = Proposition::positive("H");
        let e = EvidenceSet::single(Proposition::positive("E1"));
        let none = EvidenceSet::empty();
        let lam = LikelihoodRatioMeasure;
        let v = lam.evaluate(&d, &h, &e, &none).unwrap();
        let c = lam.combine(v, v).unwrap().unwrap();
        assert!((c.value() - 9.0).abs() < 1e-12);
        assert!(lam.combine(v, CalculusValue::Cf(0.1)).unwrap().is_err());
        assert!(PosteriorMeasure.combine(v, v).is_none());
        assert!(EvokingMeasure::default().combine(v, v).is_none());
        assert_eq!(
            EvokingMeasure::default().evaluate(&d, &h, &e, &none).unwrap(),
            CalculusValue::Evoking(3)
        );
    }
}
