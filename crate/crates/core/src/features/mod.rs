//! The seven truthfulness features. Every feature maps an answer and its
//! context to a value in `[0, 1]` plus diagnostics explaining the value.

mod company;
mod complex;
mod components;
mod guide;
mod hal;
mod overlap;
mod subject;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Language, Record};
use crate::textprep::{preprocess, Lexicon, PrepProfile, SignalKind, Token};

pub use company::{build_company_lexicon, company_terms_feature};
pub use complex::{complex_answer_feature, SignalLists};
pub use components::{
    components_defined_feature, extract_components, Component, ComponentPatterns, DEFAULT_COMPONENT_PATTERNS,
};
pub use guide::{
    bag_cosine, extract_guides, verbatim_guide_feature, Guide, GuideMatching, GuidePatterns, DEFAULT_GUIDE_PATTERNS,
};
pub use hal::{hal_feature, HalMatrix};
pub use overlap::prompt_overlap_feature;
pub use subject::{
    extract_subject_pairs, subject_combination_feature, NearestNounExtractor, PairExtractor, PosLexicon, PosTag,
    SubjectPair, SubjectPairs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureName {
    CompanyTerms,
    ComponentsDefined,
    ComplexAnswer,
    PromptOverlap,
    Hal,
    SubjectCombination,
    VerbatimGuide,
}

impl FeatureName {
    pub const ALL: [FeatureName; 7] = [
        FeatureName::CompanyTerms,
        FeatureName::ComponentsDefined,
        FeatureName::ComplexAnswer,
        FeatureName::PromptOverlap,
        FeatureName::Hal,
        FeatureName::SubjectCombination,
        FeatureName::VerbatimGuide,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureName::CompanyTerms => "company_terms",
            FeatureName::ComponentsDefined => "components_defined",
            FeatureName::ComplexAnswer => "complex_answer",
            FeatureName::PromptOverlap => "prompt_overlap",
            FeatureName::Hal => "hal",
            FeatureName::SubjectCombination => "subject_combination",
            FeatureName::VerbatimGuide => "verbatim_guide",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureName {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase().replace('-', "_");
        FeatureName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| FeatureError::Config(format!("unknown feature `{s}`")))
    }
}

/// Per-feature explanation of a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    None,
    CompanyTerms {
        matched: Vec<String>,
    },
    Components {
        found: Vec<String>,
        undefined: Vec<String>,
    },
    ComplexAnswer {
        lists_matched: Vec<SignalKind>,
    },
    PromptOverlap {
        shared: Vec<String>,
        content_words: usize,
    },
    Hal {
        windows: Vec<usize>,
        /// `None` where the answer had no word pairs.
        per_window: Vec<Option<f64>>,
    },
    SubjectCombination {
        answer_pairs: usize,
        missing: Vec<SubjectPair>,
        skipped_sentences: usize,
    },
    VerbatimGuide {
        answer_guides: usize,
        context_guides: usize,
        /// `(answer guide, context guide)` indices of the first match.
        matched: Option<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureValue {
    pub name: FeatureName,
    pub value: f64,
    pub diagnostics: Diagnostics,
}

impl FeatureValue {
    pub fn new(name: FeatureName, value: f64, diagnostics: Diagnostics) -> Self {
        debug_assert!((0.0..=1.0).contains(&value), "{name} = {value}");
        FeatureValue {
            name,
            value: value.clamp(0.0, 1.0),
            diagnostics,
        }
    }

    /// A value without diagnostics.
    pub fn bare(name: FeatureName, value: f64) -> Self {
        FeatureValue::new(name, value, Diagnostics::None)
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid pattern `{pattern}`: {reason}")]
    Pattern { pattern: String, reason: String },
    #[error("record `{record_id}` has no English translation")]
    MissingTranslation { record_id: String },
    #[error("invalid feature configuration: {0}")]
    Config(String),
    #[error("feature vector must hold each of the seven features once, in order")]
    Incomplete,
}

/// All seven feature values, in [`FeatureName::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FeatureValue>", into = "Vec<FeatureValue>")]
pub struct FeatureVector {
    values: Vec<FeatureValue>,
}

impl TryFrom<Vec<FeatureValue>> for FeatureVector {
    type Error = FeatureError;

    fn try_from(values: Vec<FeatureValue>) -> Result<Self, Self::Error> {
        FeatureVector::new(values)
    }
}

impl From<FeatureVector> for Vec<FeatureValue> {
    fn from(v: FeatureVector) -> Self {
        v.values
    }
}

impl FeatureVector {
    /// Accepts the values in any order; rejects missing or repeated names.
    pub fn new(mut values: Vec<FeatureValue>) -> Result<Self, FeatureError> {
        values.sort_by_key(|v| v.name);
        if values.iter().map(|v| v.name).ne(FeatureName::ALL) {
            return Err(FeatureError::Incomplete);
        }
        Ok(FeatureVector { values })
    }

    /// Values without diagnostics.
    pub fn from_values(values: [f64; 7]) -> Self {
        FeatureVector {
            values: FeatureName::ALL
                .into_iter()
                .zip(values)
                .map(|(n, v)| FeatureValue::bare(n, v))
                .collect(),
        }
    }

    pub fn get(&self, name: FeatureName) -> &FeatureValue {
        &self.values[name.index()]
    }

    pub fn value(&self, name: FeatureName) -> f64 {
        self.get(name).value
    }

    pub fn values(&self) -> [f64; 7] {
        FeatureName::ALL.map(|n| self.value(n))
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureValue> {
        self.values.iter()
    }

    pub fn set(&mut self, value: FeatureValue) {
        let i = value.name.index();
        self.values[i] = value;
    }

    /// Components named in the answer but absent from the context.
    pub fn undefined_components(&self) -> &[String] {
        match &self.get(FeatureName::ComponentsDefined).diagnostics {
            Diagnostics::Components { undefined, .. } => undefined,
            _ => &[],
        }
    }

    pub fn guide_matched(&self) -> bool {
        matches!(
            self.get(FeatureName::VerbatimGuide).diagnostics,
            Diagnostics::VerbatimGuide { matched: Some(_), .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub company_cap: usize,
    pub company_lexicon_size: usize,
    pub hal_windows: Vec<usize>,
    pub hal_top_k: usize,
    pub sim_threshold: f64,
    pub len_tolerance: usize,
    pub component_patterns: Vec<String>,
    pub guide_patterns: Vec<String>,
    /// Part-of-speech lexicon for the subject extractor; built-in when unset.
    pub pos_lexicon: Option<PathBuf>,
    pub include_system_prompt_in_context: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            company_cap: 3,
            company_lexicon_size: 10_000,
            hal_windows: vec![10],
            hal_top_k: 20,
            sim_threshold: 0.8,
            len_tolerance: 1,
            component_patterns: DEFAULT_COMPONENT_PATTERNS.iter().map(|s| s.to_string()).collect(),
            guide_patterns: DEFAULT_GUIDE_PATTERNS.iter().map(|s| s.to_string()).collect(),
            pos_lexicon: None,
            include_system_prompt_in_context: true,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::Config(m.to_string()));
        if self.company_cap == 0 {
            return bad("company_cap must be at least 1");
        }
        if self.company_lexicon_size == 0 {
            return bad("company_lexicon_size must be at least 1");
        }
        if self.hal_windows.is_empty() || self.hal_windows.contains(&0) {
            return bad("hal_windows must be a non-empty list of sizes >= 1");
        }
        if self.hal_top_k == 0 {
            return bad("hal_top_k must be at least 1");
        }
        if !(self.sim_threshold > 0.0 && self.sim_threshold <= 1.0) {
            return bad("sim_threshold must be in (0, 1]");
        }
        Ok(())
    }
}

/// Preprocessing profile, word lists and subject extractor for one language.
#[derive(Clone)]
pub struct LanguageResources {
    pub language: Language,
    pub profile: PrepProfile,
    pub lexicon: Lexicon,
    pub pairs: Arc<dyn PairExtractor>,
}

impl fmt::Debug for LanguageResources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LanguageResources")
            .field("language", &self.language)
            .field("profile", &self.profile.name)
            .finish_non_exhaustive()
    }
}

impl LanguageResources {
    /// Built-in lists with the language's default profile.
    pub fn builtin(language: Language) -> Self {
        let profile = match language {
            Language::Dutch => PrepProfile::dutch(),
            Language::English => PrepProfile::english(),
        };
        LanguageResources::new(language, profile, Lexicon::builtin(language))
    }

    /// Uses the built-in part-of-speech lexicon of `language`.
    pub fn new(language: Language, profile: PrepProfile, lexicon: Lexicon) -> Self {
        LanguageResources {
            language,
            profile,
            lexicon,
            pairs: Arc::new(NearestNounExtractor::new(PosLexicon::builtin(language))),
        }
    }

    pub fn with_pair_extractor(mut self, pairs: Arc<dyn PairExtractor>) -> Self {
        self.pairs = pairs;
        self
    }
}

/// Computes feature vectors for records.
///
/// Without English resources all features run on the record's own text. With
/// them, HAL, subject combination and verbatim guide run on the English
/// translation, which then becomes mandatory; the other four features always
/// use the original text.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    native: LanguageResources,
    translated: Option<LanguageResources>,
    components: ComponentPatterns,
    guides: GuidePatterns,
    signals: SignalLists,
}

impl FeatureExtractor {
    pub fn new(
        config: FeatureConfig,
        native: LanguageResources,
        translated: Option<LanguageResources>,
    ) -> Result<Self, FeatureError> {
        config.validate()?;
        let components = ComponentPatterns::new(&config.component_patterns)?;
        let guides = GuidePatterns::new(&config.guide_patterns)?;
        let signals = SignalLists::new(&native.lexicon, &native.profile);
        Ok(FeatureExtractor {
            config,
            native,
            translated,
            components,
            guides,
            signals,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn uses_translation(&self) -> bool {
        self.translated.is_some()
    }

    /// `translation` is required exactly when the extractor was built with
    /// English resources; it is ignored otherwise.
    pub fn extract(&self, record: &Record, translation: Option<&Record>) -> Result<FeatureVector, FeatureError> {
        let cfg = &self.config;
        let include = cfg.include_system_prompt_in_context;
        let native = &self.native;
        let context = record.context_text(include);

        let answer_tokens = preprocess(&record.answer, &native.profile, &native.lexicon);
        let message_tokens = preprocess(&record.message, &native.profile, &native.lexicon);

        let company = company_terms_feature(&answer_tokens, native.lexicon.company_terms(), cfg.company_cap);
        let components = components_defined_feature(&record.answer, &context, &self.components);
        let complex = complex_answer_feature(&answer_tokens, &self.signals);
        let overlap = prompt_overlap_feature(&message_tokens, &answer_tokens, native.lexicon.stopwords());

        let (res, source) = match &self.translated {
            None => (native, record),
            Some(en) => {
                let t = translation
                    .filter(|t| t.language == Language::English)
                    .ok_or_else(|| FeatureError::MissingTranslation {
                        record_id: record.id.clone(),
                    })?;
                (en, t)
            }
        };
        let src_context = if std::ptr::eq(source, record) {
            context
        } else {
            source.context_text(include)
        };

        let src_answer_tokens = preprocess(&source.answer, &res.profile, &res.lexicon);
        let src_context_tokens = preprocess(&src_context, &res.profile, &res.lexicon);
        let as_lemmas = |t: &[Token]| t.iter().map(|t| t.lemma.clone()).collect::<Vec<_>>();
        let hal = hal_feature(
            &as_lemmas(&src_answer_tokens),
            &as_lemmas(&src_context_tokens),
            &cfg.hal_windows,
            cfg.hal_top_k,
        );

        let answer_pairs = extract_subject_pairs(&src_answer_tokens, res.pairs.as_ref());
        let context_pairs = extract_subject_pairs(&src_context_tokens, res.pairs.as_ref());
        let subject = subject_combination_feature(&answer_pairs, &context_pairs);

        let guide = verbatim_guide_feature(
            &source.answer,
            &source.context_sections(include),
            &self.guides,
            GuideMatching {
                sim_threshold: cfg.sim_threshold,
                len_tolerance: cfg.len_tolerance,
            },
            &res.profile,
            &res.lexicon,
        );

        FeatureVector::new(vec![company, components, complex, overlap, hal, subject, guide])
    }
}

/// One-off extraction with a freshly built extractor.
pub fn extract_all(
    record: &Record,
    translation: Option<&Record>,
    config: &FeatureConfig,
    native: LanguageResources,
    translated: Option<LanguageResources>,
) -> Result<FeatureVector, FeatureError> {
    FeatureExtractor::new(config.clone(), native, translated)?.extract(record, translation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ContextDoc;

    fn dutch() -> FeatureExtractor {
        FeatureExtractor::new(FeatureConfig::default(), LanguageResources::builtin(Language::Dutch), None).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for n in FeatureName::ALL {
            assert_eq!(n.as_str().parse::<FeatureName>().unwrap(), n);
            assert_eq!(serde_json::to_string(&n).unwrap(), format!("\"{}\"", n.as_str()));
        }
        assert!("bogus".parse::<FeatureName>().is_err());
    }

    #[test]
    fn vector_requires_all_seven() {
        let v = FeatureVector::from_values([0.0; 7]);
        let mut vals: Vec<FeatureValue> = v.clone().into();
        vals.reverse();
        assert_eq!(FeatureVector::new(vals.clone()).unwrap(), v);
        vals.pop();
        assert!(FeatureVector::new(vals.clone()).is_err());
        vals.push(FeatureValue::bare(FeatureName::Hal, 0.0));
        assert!(FeatureVector::new(vals).is_err());
    }

    #[test]
    fn vector_serde_round_trip() {
        let v = FeatureVector::from_values([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<FeatureVector>(&s).unwrap(), v);
    }

    #[test]
    fn empty_answer_defaults() {
        let r = Record::new("r", "Kan ik dat zien?", "").with_context(ContextDoc::new("d", "", "Klik op: Salaris."));
        let v = dutch().extract(&r, None).unwrap();
        assert_eq!(
            v.values(),
            [0.0, 1.0, 0.0, 0.0, 0.5, 0.5, 0.0]
        );
    }

    #[test]
    fn english_mode_needs_translation() {
        let ex = FeatureExtractor::new(
            FeatureConfig::default(),
            LanguageResources::builtin(Language::Dutch),
            Some(LanguageResources::builtin(Language::English)),
        )
        .unwrap();
        let r = Record::new("r7", "Is dat mogelijk?", "Ja.");
        match ex.extract(&r, None) {
            Err(FeatureError::MissingTranslation { record_id }) => assert_eq!(record_id, "r7"),
            other => panic!("{other:?}"),
        }
        // A record still tagged Dutch does not count as a translation.
        assert!(ex.extract(&r, Some(&r)).is_err());
        let t = Record::new("r7", "Is that possible?", "Yes.").with_language(Language::English);
        assert!(ex.extract(&r, Some(&t)).is_ok());
    }

    #[test]
    fn translated_features_use_english_text() {
        let ex = FeatureExtractor::new(
            FeatureConfig::default(),
            LanguageResources::builtin(Language::Dutch),
            Some(LanguageResources::builtin(Language::English)),
        )
        .unwrap();
        let guide = "1. Open the menu\n2. Choose salary";
        let r = Record::new("r", "Hoe doe ik dat?", "1. Open het menu\n2. Kies salaris")
            .with_context(ContextDoc::new("d", "", "1. Open het menu\n2. Kies salaris"));
        let t = Record::new("r", "How do I do that?", guide)
            .with_context(ContextDoc::new("d", "", "Nothing numbered here."))
            .with_language(Language::English);
        let v = ex.extract(&r, Some(&t)).unwrap();
        assert_eq!(v.value(FeatureName::VerbatimGuide), 0.0);
        assert!(dutch().extract(&r, None).unwrap().guide_matched());
    }

    #[test]
    fn guides_do_not_run_across_documents() {
        let r = Record::new("r", "Hoe?", "1. a b\n2. c d\n3. e f")
            .with_context(ContextDoc::new("d1", "", "1. a b"))
            .with_context(ContextDoc::new("d2", "", "2. c d\n3. e f"));
        let v = dutch().extract(&r, None).unwrap();
        assert!(!v.guide_matched());
    }

    #[test]
    fn config_validation() {
        let mut c = FeatureConfig::default();
        assert!(c.validate().is_ok());
        c.hal_windows = vec![0];
        assert!(c.validate().is_err());
        let c = FeatureConfig {
            sim_threshold: 0.0,
            ..FeatureConfig::default()
        };
        assert!(c.validate().is_err());
        let c: FeatureConfig = toml::from_str("hal_windows = [1, 5]\ncompany_cap = 2").unwrap();
        assert_eq!(c.hal_windows, vec![1, 5]);
        assert_eq!(c.sim_threshold, 0.8);
        assert!(toml::from_str::<FeatureConfig>("unknown = 1").is_err());
    }

    #[test]
    fn undefined_component_flips_when_context_gains_it() {
        let r = Record::new("r", "Kan dat?", "Klik op: Winstanalyse.").with_context(ContextDoc::new("d", "", "Klik op: Salaris."));
        assert_eq!(dutch().extract(&r, None).unwrap().value(FeatureName::ComponentsDefined), 0.0);
        let r = r.with_context(ContextDoc::new("d2", "", "Het scherm Winstanalyse toont de winst."));
        assert_eq!(dutch().extract(&r, None).unwrap().value(FeatureName::ComponentsDefined), 1.0);
    }
}
