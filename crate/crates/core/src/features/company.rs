//! Company-specific vocabulary.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::textprep::{preprocess, Lexicon, PrepProfile, Token};

use super::{Diagnostics, FeatureName, FeatureValue};

/// Ranks help-document words by frequency, keeps the `n` most frequent and
/// drops those found in the general-language word list.
///
/// Ranking is by descending count, then alphabetically, so ties at the cut
/// are resolved deterministically. Only tokens containing a letter are
/// counted. General-list words are compared both as written and as lemmas.
/// The result is in rank order.
pub fn build_company_lexicon<S: AsRef<str>>(
    help_docs: &[S],
    general_wordlist: &HashSet<String>,
    n: usize,
    profile: &PrepProfile,
    lex: &Lexicon,
) -> Vec<(String, usize)> {
    if help_docs.is_empty() {
        log::warn!("no help documents given; company lexicon is empty");
        return Vec::new();
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for doc in help_docs {
        for tok in preprocess(doc.as_ref(), profile, lex) {
            if tok.lemma.chars().any(char::is_alphabetic) {
                *counts.entry(tok.lemma).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);

    let mut general: HashSet<String> = general_wordlist.iter().map(|w| w.to_lowercase()).collect();
    let lemmatized: Vec<String> = general
        .iter()
        .filter_map(|w| lex.lemma(w).map(str::to_string))
        .collect();
    general.extend(lemmatized);

    let out: Vec<(String, usize)> = ranked.into_iter().filter(|(w, _)| !general.contains(w)).collect();
    if out.is_empty() {
        log::warn!("every frequent help-document word is in the general word list");
    }
    out
}

/// Distinct company terms in the answer, saturating at `cap`.
pub fn company_terms_feature(answer: &[Token], company_terms: &HashSet<String>, cap: usize) -> FeatureValue {
    let cap = cap.max(1);
    let matched: BTreeSet<&str> = answer
        .iter()
        .map(|t| t.lemma.as_str())
        .filter(|l| company_terms.contains(*l))
        .collect();
    let value = matched.len().min(cap) as f64 / cap as f64;
    FeatureValue::new(
        FeatureName::CompanyTerms,
        value,
        Diagnostics::CompanyTerms {
            matched: matched.into_iter().map(str::to_string).collect(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::tokenize;

    fn set(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn build(docs: &[&str], general: &[&str], n: usize) -> Vec<String> {
        build_company_lexicon(docs, &set(general), n, &PrepProfile::dutch(), &Lexicon::empty())
            .into_iter()
            .map(|(w, _)| w)
            .collect()
    }

    #[test]
    fn general_words_excluded() {
        let out = build(&["klik op profitanalyzer", "profitanalyzer toont het menu"], &["klik", "op", "het", "menu"], 100);
        assert_eq!(out, vec!["profitanalyzer", "toont"]);
    }

    #[test]
    fn ties_cut_alphabetically() {
        // Hand corpus of five words; counts: e=3, d=2, a=b=c=1.
        let docs = ["e d a", "e d b", "e c"];
        assert_eq!(build(&docs, &[], 3), vec!["e", "d", "a"]);
        assert_eq!(build(&docs, &[], 4), vec!["e", "d", "a", "b"]);
        // Cut happens before filtering against the general list.
        assert_eq!(build(&docs, &["d"], 3), vec!["e", "a"]);
    }

    #[test]
    fn n_larger_than_vocabulary() {
        assert_eq!(build(&["x y x"], &[], 1000), vec!["x", "y"]);
    }

    #[test]
    fn empty_inputs() {
        assert!(build(&[], &[], 10).is_empty());
        assert!(build(&["a b"], &["a", "b"], 10).is_empty());
    }

    #[test]
    fn numbers_are_not_terms() {
        assert_eq!(build(&["2024 2024 fout404"], &[], 10), vec!["fout404"]);
    }

    #[test]
    fn feature_saturates() {
        let terms = set(&["a", "b", "c", "d"]);
        let f = |s: &str| company_terms_feature(&tokenize(s), &terms, 3).value;
        assert_eq!(f("x y z"), 0.0);
        assert!((f("a a x") - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(f("a b c d"), 1.0);
    }
}
