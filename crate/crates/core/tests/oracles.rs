//! Brute-force and closed-form oracles, written without touching the
//! crate's own enumeration code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evicalc::audit::reproduce_mycin_counterexample;
use evicalc::calculi::{
    cf_from_probabilities, certainty_factor, certainty_factor_conditional, mycin_combine,
    posterior_from_weight,
};
use evicalc::engine::{evaluate_case, exhaustive_cases, Rulebase};
use evicalc::prob::Finding;
use evicalc::{
    CalculusKind, EvidenceSet, EvokingThresholds, JointDistribution, LogBase, NaiveBayesModel,
    Proposition, Schema,
};

fn lit(s: &str) -> Proposition {
    s.parse().unwrap()
}

fn set(lits: &[&str]) -> EvidenceSet {
    EvidenceSet::from_literals(lits.iter().map(|s| lit(s))).unwrap()
}

/// Row `r` of an external table: bit `n` (from the top) is H, then E1..En,
/// with 0 meaning true.
fn decode(row: usize, n: usize) -> (bool, Vec<bool>) {
    let h = row >> n & 1 == 0;
    let e = (0..n).map(|k| row >> (n - 1 - k) & 1 == 0).collect();
    (h, e)
}

fn oracle_naive_bayes(prior: f64, params: &[(f64, f64)]) -> Vec<f64> {
    let n = params.len();
    (0..1usize << (n + 1))
        .map(|row| {
            let (h, e) = decode(row, n);
            let mut p = if h { prior } else { 1.0 - prior };
            for (k, &(ph, pn)) in params.iter().enumerate() {
                let q = if h { ph } else { pn };
                p *= if e[k] { q } else { 1.0 - q };
            }
            p
        })
        .collect()
}

/// `observed[k]` is `None` for unobserved, `Some(present)` otherwise.
fn oracle_posterior(entries: &[f64], n: usize, observed: &[Option<bool>]) -> f64 {
    let mut on = 0.0;
    let mut total = 0.0;
    for (row, &p) in entries.iter().enumerate() {
        let (h, e) = decode(row, n);
        if observed.iter().zip(&e).all(|(o, &v)| o.is_none_or(|want| want == v)) {
            total += p;
            if h {
                on += p;
            }
        }
    }
    on / total
}

fn observation_set(observed: &[Option<bool>]) -> EvidenceSet {
    EvidenceSet::from_literals(observed.iter().enumerate().filter_map(|(k, o)| {
        o.map(|present| {
            let name = format!("E{}", k + 1);
            if present {
                Proposition::positive(name)
            } else {
                Proposition::negated(name)
            }
        })
    }))
    .unwrap()
}

fn all_observations(n: usize) -> Vec<Vec<Option<bool>>> {
    (0..3usize.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let d = code % 3;
                    code /= 3;
                    match d {
                        0 => None,
                        1 => Some(true),
                        _ => Some(false),
                    }
                })
                .collect()
        })
        .collect()
}

const PARAMS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[test]
fn naive_bayes_expansion_matches_product_formula() {
    for &prior in &PARAMS {
        for &a in &PARAMS {
            for &b in &PARAMS {
                for &c in &PARAMS {
                    let params = [(a, b), (c, a), (b, c)];
                    let model = NaiveBayesModel::new(
                        "H",
                        prior,
                        params
                            .iter()
                            .enumerate()
                            .map(|(k, &(ph, pn))| Finding::new(format!("E{}", k + 1), ph, pn))
                            .collect(),
                    )
                    .unwrap();
                    let d = JointDistribution::from_naive_bayes(&model).unwrap();
                    let expected = oracle_naive_bayes(prior, &params);
                    for (got, want) in d.entries().iter().zip(&expected) {
                        assert!((got - want).abs() < 1e-15);
                    }
                    for row in 0..expected.len() {
                        let (h, e) = decode(row, 3);
                        assert!((d.entry(h, &e).unwrap() - expected[row]).abs() < 1e-15);
                    }
                }
            }
        }
    }
}

#[test]
fn general_table_queries_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=4usize);
        let raw: Vec<f64> = (0..1usize << (n + 1)).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let entries: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let d = JointDistribution::from_table(Schema::numbered(n), &entries).unwrap();
        let h = lit("H");
        for obs in all_observations(n) {
            let given = observation_set(&obs);
            let want = oracle_posterior(&entries, n, &obs);
            assert!((d.posterior(&h, &given).unwrap() - want).abs() < 1e-12);
            let odds = d.odds(&h, &given).unwrap();
            assert!((odds / (1.0 + odds) - want).abs() < 1e-12);
        }
        // lambda(H, E1, nothing) straight from sums of rows.
        let mut m = [[0.0; 2]; 2];
        for (row, &p) in entries.iter().enumerate() {
            let (hv, e) = decode(row, n);
            m[usize::from(hv)][usize::from(e[0])] += p;
        }
        let want = (m[1][1] / (m[1][0] + m[1][1])) / (m[0][1] / (m[0][0] + m[0][1]));
        let got = d.likelihood_ratio(&h, &set(&["E1"]), &EvidenceSet::empty()).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12);
    }
}

fn counterexample() -> JointDistribution {
    JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.01, &[99.0, 99.0]).unwrap()).unwrap()
}

#[test]
fn counterexample_closed_forms() {
    let d = counterexample();
    let h = lit("H");
    let none = EvidenceSet::empty();
    // Prior odds 1/99 times 99 per finding.
    assert!((d.posterior(&h, &set(&["E1"])).unwrap() - 0.5).abs() < 1e-12);
    assert!((d.posterior(&h, &set(&["E1", "E2"])).unwrap() - 0.99).abs() < 1e-12);
    assert!((d.likelihood_ratio(&h, &set(&["E1"]), &none).unwrap() - 99.0).abs() < 1e-9);
    assert!((d.likelihood_ratio(&h, &set(&["E2"]), &set(&["E1"])).unwrap() - 99.0).abs() < 1e-9);

    let cf_e1 = (0.5 - 0.01) / (1.0 - 0.01);
    let cf_both = (0.99 - 0.01) / (1.0 - 0.01);
    let cf_e2_given_e1 = (0.99 - 0.5) / (1.0 - 0.5);
    assert!((certainty_factor(&d, &h, &set(&["E1"])).unwrap() - cf_e1).abs() < 1e-12);
    assert!((certainty_factor(&d, &h, &set(&["E2"])).unwrap() - cf_e1).abs() < 1e-12);
    assert!((certainty_factor(&d, &h, &set(&["E1", "E2"])).unwrap() - cf_both).abs() < 1e-12);
    let c = certainty_factor_conditional(&d, &h, &set(&["E2"]), &set(&["E1"])).unwrap();
    assert!((c - 0.98).abs() < 1e-12);
    assert!((c - cf_e2_given_e1).abs() < 1e-12);
    assert!(c - cf_e1 > 0.4);

    let combined = cf_e1 + cf_e1 - cf_e1 * cf_e1;
    assert!((mycin_combine(cf_e1, cf_e1).unwrap() - combined).abs() < 1e-15);
    assert!((combined - cf_both).abs() > 0.2);

    let report = reproduce_mycin_counterexample().unwrap();
    assert!((report.quantity("p(H|E1)").unwrap() - 0.5).abs() < 1e-12);
    assert!((report.quantity("p(H|E1E2)").unwrap() - 0.99).abs() < 1e-12);
    assert!((report.quantity("CF(H,E2,E1)").unwrap() - 0.98).abs() < 1e-12);
    assert!((report.quantity("CF(H,E2,∅)").unwrap() - cf_e1).abs() < 1e-12);
    assert!((report.quantity("modularity_gap").unwrap() - (0.98 - cf_e1)).abs() < 1e-12);
}

#[test]
fn cf_definition_by_cases() {
    let grid: Vec<f64> = (1..20).map(|i| f64::from(i) / 20.0).collect();
    for &prior in &grid {
        for &post in grid.iter().chain([0.0, 1.0].iter()) {
            let want = if post > prior {
                (post - prior) / (1.0 - prior)
            } else if post < prior {
                (post - prior) / prior
            } else {
                0.0
            };
            assert!((cf_from_probabilities(prior, post).unwrap() - want).abs() < 1e-15);
        }
    }
}

#[test]
fn mycin_combine_hand_values() {
    let cases = [
        (0.5, 0.5, 0.75),
        (-0.5, -0.5, -0.75),
        (0.6, -0.4, 0.2 / 0.6),
        (-0.6, 0.4, -0.2 / 0.6),
        (0.3, 0.0, 0.3),
        (0.9, 1.0, 1.0),
        (-0.2, -1.0, -1.0),
    ];
    for (x, y, want) in cases {
        assert!((mycin_combine(x, y).unwrap() - want).abs() < 1e-15, "{x} {y}");
    }
    assert!(mycin_combine(1.0, -1.0).is_err());
    assert!(mycin_combine(1.5, 0.0).is_err());
}

#[test]
fn mycin_combine_associative_on_grid() {
    let grid: Vec<f64> = (0..21).map(|i| -1.0 + f64::from(i) / 10.0).collect();
    let mut checked = 0;
    for &x in &grid {
        for &y in &grid {
            for &z in &grid {
                let left = mycin_combine(x, y).and_then(|xy| mycin_combine(xy, z));
                let right = mycin_combine(y, z).and_then(|yz| mycin_combine(x, yz));
                if let (Ok(l), Ok(r)) = (left, right) {
                    assert!((l - r).abs() < 1e-12, "{x} {y} {z}: {l} vs {r}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 9000);
}

#[test]
fn weight_reconstruction_in_base_ten() {
    let w = 99f64.log10();
    assert!((posterior_from_weight(0.01, 2.0 * w, LogBase::TEN).unwrap() - 0.99).abs() < 1e-12);
    assert!((posterior_from_weight(0.01, w, LogBase::TEN).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(posterior_from_weight(0.3, 0.0, LogBase::TEN).unwrap(), 0.3);
}

#[test]
fn engine_weight_posterior_matches_odds_product() {
    let h = "H";
    for &prior in &PARAMS {
        let params = [(0.7, 0.2), (0.4, 0.9), (0.55, 0.5)];
        let model = NaiveBayesModel::new(
            h,
            prior,
            params
                .iter()
                .enumerate()
                .map(|(k, &(ph, pn))| Finding::new(format!("E{}", k + 1), ph, pn))
                .collect(),
        )
        .unwrap();
        let d = JointDistribution::from_naive_bayes(&model).unwrap();
        let rb = Rulebase::derive(&d, CalculusKind::Weight, LogBase::NATURAL, &EvokingThresholds::default()).unwrap();
        let names: Vec<String> = (1..=3).map(|k| format!("E{k}")).collect();
        for case in exhaustive_cases(&names) {
            let mut odds = prior / (1.0 - prior);
            for (k, &(ph, pn)) in params.iter().enumerate() {
                match case.observed.get(&names[k]) {
                    Some(p) if p.is_positive() => odds *= ph / pn,
                    Some(_) => odds *= (1.0 - ph) / (1.0 - pn),
                    None => {}
                }
            }
            let want = odds / (1.0 + odds);
            let state = evaluate_case(&rb, &case, CalculusKind::Weight, None).unwrap();
            let got = state.belief(h).unwrap().posterior.unwrap();
            assert!((got - want).abs() < 1e-12, "{}: {got} vs {want}", case.id);
        }
    }
}

#[test]
fn default_evoking_buckets() {
    let t = EvokingThresholds::default();
    for (p, s) in [(0.0, 0), (0.05, 1), (0.1, 1), (0.2, 2), (0.5, 3), (0.8, 4), (0.97, 4), (1.0, 5)] {
        assert_eq!(t.strength(p).unwrap(), s, "{p}");
    }
}
