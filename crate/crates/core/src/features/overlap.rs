use std::collections::{BTreeSet, HashSet};

use crate::textprep::Token;

use super::{Diagnostics, FeatureName, FeatureValue};

/// Share of the message's distinct content words that the answer repeats.
/// Content words are message lemmas that are not stopwords, whatever the
/// active profile. A message without content words scores 0.
pub fn prompt_overlap_feature(message: &[Token], answer: &[Token], stopwords: &HashSet<String>) -> FeatureValue {
    let content: BTreeSet<&str> = message
        .iter()
        .map(|t| t.lemma.as_str())
        .filter(|l| !stopwords.contains(*l))
        .collect();
    let answer_words: HashSet<&str> = answer.iter().map(|t| t.lemma.as_str()).collect();
    let shared: Vec<String> = content
        .iter()
        .filter(|w| answer_words.contains(*w))
        .map(|w| w.to_string())
        .collect();
    let value = if content.is_empty() {
        0.0
    } else {
        shared.len() as f64 / content.len() as f64
    };
    FeatureValue::new(
        FeatureName::PromptOverlap,
        value,
        Diagnostics::PromptOverlap {
            shared,
            content_words: content.len(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::tokenize;

    fn overlap(m: &str, a: &str, stop: &[&str]) -> f64 {
        let stop: HashSet<String> = stop.iter().map(|s| s.to_string()).collect();
        prompt_overlap_feature(&tokenize(m), &tokenize(a), &stop).value
    }

    #[test]
    fn full_overlap() {
        assert_eq!(overlap("tax rates", "The tax rates are set here", &[]), 1.0);
    }

    #[test]
    fn disjoint() {
        assert_eq!(overlap("tax rates", "open the menu", &[]), 0.0);
    }

    #[test]
    fn half() {
        // Content words {adjust, tax, rates, manually}; answer repeats two.
        assert_eq!(
            overlap("How do I adjust the tax rates manually?", "Adjust rates in settings.", &["how", "do", "i", "the"]),
            0.5
        );
    }

    #[test]
    fn only_stopwords() {
        assert_eq!(overlap("how do i", "how do i", &["how", "do", "i"]), 0.0);
    }
}
