//! Verb / nominal-subject pairs.
//!
//! The default [`NearestNounExtractor`] pairs every verb with the closest
//! noun before it in the same sentence, using a small part-of-speech
//! lexicon. Any other extractor (for instance one backed by a dependency
//! parser) can be plugged in through [`PairExtractor`].

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::corpus::Language;
use crate::textprep::{sentences, Token};

use super::{Diagnostics, FeatureError, FeatureName, FeatureValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    ProperNoun,
    Verb,
}

impl PosTag {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_uppercase().as_str() {
            "NOUN" => Some(PosTag::Noun),
            "PROPN" => Some(PosTag::ProperNoun),
            "VERB" => Some(PosTag::Verb),
            _ => None,
        }
    }

    fn is_nominal(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::ProperNoun)
    }
}

/// `word<TAB>tag[<TAB>lemma]` entries. The first entry for a word wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PosLexicon {
    entries: HashMap<String, (PosTag, Option<String>)>,
}

const NL_POS: &str = include_str!("../../data/nl/pos.tsv");
const EN_POS: &str = include_str!("../../data/en/pos.tsv");

impl PosLexicon {
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let tag = cols.get(1).and_then(|t| PosTag::parse(t));
            let (Some(word), Some(tag)) = (cols.first(), tag) else {
                return Err(FeatureError::Config(format!(
                    "POS lexicon line {}: expected `word<TAB>NOUN|PROPN|VERB[<TAB>lemma]`",
                    i + 1
                )));
            };
            let lemma = cols
                .get(2)
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty());
            entries.entry(word.trim().to_lowercase()).or_insert((tag, lemma));
        }
        Ok(PosLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FeatureError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn builtin(language: Language) -> Self {
        let src = match language {
            Language::Dutch => NL_POS,
            Language::English => EN_POS,
        };
        Self::parse(src).expect("built-in POS lexicon")
    }

    /// Looks the token up by lowercased surface, then by lemma. Returns the
    /// tag and the lemma to report.
    pub fn tag(&self, token: &Token) -> Option<(PosTag, String)> {
        let surface = token.surface.to_lowercase();
        self.entries
            .get(&surface)
            .or_else(|| self.entries.get(&token.lemma))
            .map(|(tag, lemma)| (*tag, lemma.clone().unwrap_or_else(|| token.lemma.clone())))
    }
}

/// `(verb, subject)` lemma pair.
pub type SubjectPair = (String, String);

pub trait PairExtractor: Send + Sync {
    /// Pairs found in one sentence. An error skips the sentence.
    fn extract_sentence(&self, sentence: &[Token]) -> Result<Vec<SubjectPair>, String>;
}

#[derive(Debug, Clone, Default)]
pub struct NearestNounExtractor {
    pos: PosLexicon,
}

impl NearestNounExtractor {
    pub fn new(pos: PosLexicon) -> Self {
        NearestNounExtractor { pos }
    }
}

impl PairExtractor for NearestNounExtractor {
    fn extract_sentence(&self, sentence: &[Token]) -> Result<Vec<SubjectPair>, String> {
        let mut pairs = Vec::new();
        let mut last_noun: Option<String> = None;
        for tok in sentence {
            match self.pos.tag(tok) {
                Some((tag, lemma)) if tag.is_nominal() => last_noun = Some(lemma),
                Some((PosTag::Verb, lemma)) => {
                    if let Some(subject) = &last_noun {
                        pairs.push((lemma, subject.clone()));
                    }
                }
                _ => {}
            }
        }
        Ok(pairs)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubjectPairs {
    pub pairs: BTreeSet<SubjectPair>,
    /// One message per sentence the extractor failed on.
    pub skipped: Vec<String>,
}

pub fn extract_subject_pairs(tokens: &[Token], extractor: &dyn PairExtractor) -> SubjectPairs {
    let mut out = SubjectPairs::default();
    for (i, sentence) in sentences(tokens).into_iter().enumerate() {
        match extractor.extract_sentence(sentence) {
            Ok(pairs) => out.pairs.extend(pairs),
            Err(e) => {
                log::debug!("subject extraction skipped sentence {i}: {e}");
                out.skipped.push(format!("sentence {i}: {e}"));
            }
        }
    }
    out
}

/// Share of answer pairs that also occur in the context; 0.5 when the
/// answer yields no pairs.
pub fn subject_combination_feature(answer: &SubjectPairs, context: &SubjectPairs) -> FeatureValue {
    let missing: Vec<SubjectPair> = answer.pairs.difference(&context.pairs).cloned().collect();
    let value = if answer.pairs.is_empty() {
        0.5
    } else {
        (answer.pairs.len() - missing.len()) as f64 / answer.pairs.len() as f64
    };
    FeatureValue::new(
        FeatureName::SubjectCombination,
        value,
        Diagnostics::SubjectCombination {
            answer_pairs: answer.pairs.len(),
            missing,
            skipped_sentences: answer.skipped.len() + context.skipped.len(),
        },
    )
}
