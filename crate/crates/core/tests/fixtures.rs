//! Corpora shaped like the two annotated sets: an analysis set of 79 rated
//! answers and a test set of 154.

use std::collections::BTreeMap;

use truthscore::classify::TypeRules;
use truthscore::corpus::{rating_distribution, Language};
use truthscore::eval::{evaluate, EvalOptions};
use truthscore::features::{FeatureConfig, FeatureExtractor, LanguageResources};
use truthscore::score::Scorer;
use truthscore::synthetic;

fn scorer() -> Scorer {
    let mut res = LanguageResources::builtin(Language::English);
    res.lexicon = res.lexicon.with_company_terms(synthetic::company_terms());
    Scorer::new(
        TypeRules::default(),
        FeatureExtractor::new(FeatureConfig::default(), res, None).unwrap(),
    )
}

fn check(counts: BTreeMap<u8, usize>, seed: u64) {
    let ds = synthetic::rated(&counts, seed);
    assert_eq!(rating_distribution(&ds), counts);

    let (report, results) = evaluate(&ds, &scorer(), None, &EvalOptions::default()).unwrap();
    assert_eq!(report.records, counts.values().sum::<usize>());
    assert_eq!(report.abstained, 0);
    let corr = report.correlation.expect("rated corpus has a correlation");
    assert!(corr.rho > 0.5, "rho {}", corr.rho);
    assert!(corr.p_value < 0.01);

    let table_total: usize = report.threshold_table.values().map(|r| r.n).sum();
    assert_eq!(table_total, results.len());
    for (rating, row) in &report.threshold_table {
        assert!((row.below + row.at + row.above - 1.0).abs() < 1e-9, "rating {rating}");
    }
    let low = &report.threshold_table[&1];
    assert_eq!(low.below, 1.0, "every rating-1 answer should be gated");
}

#[test]
fn analysis_set_shape() {
    check(BTreeMap::from([(1, 22), (2, 2), (3, 8), (4, 6), (5, 41)]), 79);
}

#[test]
fn test_set_shape() {
    check(BTreeMap::from([(1, 32), (2, 5), (3, 19), (4, 16), (5, 82)]), 154);
}
