//! Signal words marking a complex (non-generic) answer.

use crate::textprep::{lemmas, Lexicon, PrepProfile, SignalKind, Token};

use super::{Diagnostics, FeatureName, FeatureValue};

/// Signal phrases of the four families, pre-normalized to lemma sequences
/// with the same profile as the answers they are matched against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalLists {
    lists: Vec<(SignalKind, Vec<Vec<String>>)>,
}

impl SignalLists {
    /// Phrases that normalize to nothing (e.g. all stopwords) are dropped.
    pub fn new(lex: &Lexicon, profile: &PrepProfile) -> Self {
        let lists = SignalKind::ALL
            .into_iter()
            .map(|kind| {
                let phrases = lex
                    .signal_list(kind)
                    .iter()
                    .map(|p| lemmas(p, profile, lex))
                    .filter(|p| !p.is_empty())
                    .collect();
                (kind, phrases)
            })
            .collect();
        SignalLists { lists }
    }
}

fn contains_phrase(haystack: &[&str], phrase: &[String]) -> bool {
    haystack
        .windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(a, b)| *a == b))
}

/// Fraction of the four signal families with at least one phrase in the
/// answer.
pub fn complex_answer_feature(answer: &[Token], signals: &SignalLists) -> FeatureValue {
    let words: Vec<&str> = answer.iter().map(|t| t.lemma.as_str()).collect();
    let matched: Vec<SignalKind> = signals
        .lists
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| contains_phrase(&words, p)))
        .map(|(k, _)| *k)
        .collect();
    let value = matched.len() as f64 / SignalKind::ALL.len() as f64;
    FeatureValue::new(
        FeatureName::ComplexAnswer,
        value,
        Diagnostics::ComplexAnswer { lists_matched: matched },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::preprocess;

    fn lists() -> (Lexicon, SignalLists) {
        let lex = Lexicon::empty()
            .with_stopwords(["for", "the"])
            .with_signal_list(SignalKind::Perspective, ["according to"])
            .with_signal_list(SignalKind::Comparison, ["whereas", "just like"])
            .with_signal_list(SignalKind::Examples, ["for example"])
            .with_signal_list(SignalKind::Reasoning, ["because"]);
        let s = SignalLists::new(&lex, &PrepProfile::dutch());
        (lex, s)
    }

    fn score(text: &str) -> f64 {
        let (lex, s) = lists();
        complex_answer_feature(&preprocess(text, &PrepProfile::dutch(), &lex), &s).value
    }

    #[test]
    fn all_four_lists() {
        assert_eq!(
            score("According to the docs, because X whereas Y, for example Z."),
            1.0
        );
    }

    #[test]
    fn no_matches() {
        assert_eq!(score("Open the menu."), 0.0);
    }

    #[test]
    fn two_of_four() {
        assert_eq!(score("Just like before, it fails because of X. Because!"), 0.5);
    }

    #[test]
    fn phrase_must_be_contiguous() {
        assert_eq!(score("according, to"), 0.25);
        assert_eq!(score("according the to"), 0.0);
    }

    #[test]
    fn stopword_profile_normalizes_phrases() {
        let (lex, _) = lists();
        let english = PrepProfile::english();
        let s = SignalLists::new(&lex, &english);
        let v = complex_answer_feature(&preprocess("For example: this.", &english, &lex), &s);
        assert_eq!(v.value, 0.25);
    }
}
