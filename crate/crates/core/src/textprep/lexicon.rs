use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Language;

use super::normalize_word;

/// The four signal-word families that mark a complex answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Perspective,
    Comparison,
    Examples,
    Reasoning,
}

impl SignalKind {
    pub const ALL: [SignalKind; 4] = [
        SignalKind::Perspective,
        SignalKind::Comparison,
        SignalKind::Examples,
        SignalKind::Reasoning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Perspective => "perspective",
            SignalKind::Comparison => "comparison",
            SignalKind::Examples => "examples",
            SignalKind::Reasoning => "reasoning",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: expected `surface<TAB>lemma`")]
    LemmaLine { file: String, line: usize },
    #[error("lemma `{0}` must be a single word")]
    BadLemma(String),
}

/// Word collections used by preprocessing and the features. All entries are
/// stored lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
    signal_lists: BTreeMap<SignalKind, Vec<String>>,
    general_wordlist: HashSet<String>,
    company_terms: HashSet<String>,
}

/// Optional lexicon file overrides. Missing entries fall back to the
/// built-in lists of the chosen language.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub perspective: Option<PathBuf>,
    pub comparison: Option<PathBuf>,
    pub examples: Option<PathBuf>,
    pub reasoning: Option<PathBuf>,
    pub general_wordlist: Option<PathBuf>,
    pub company_terms: Option<PathBuf>,
}

mod builtin {
    pub mod nl {
        pub const STOPWORDS: &str = include_str!("../../data/nl/stopwords.txt");
        pub const LEMMAS: &str = include_str!("../../data/nl/lemmas.tsv");
        pub const PERSPECTIVE: &str = include_str!("../../data/nl/signal_perspective.txt");
        pub const COMPARISON: &str = include_str!("../../data/nl/signal_comparison.txt");
        pub const EXAMPLES: &str = include_str!("../../data/nl/signal_examples.txt");
        pub const REASONING: &str = include_str!("../../data/nl/signal_reasoning.txt");
        pub const GENERAL: &str = include_str!("../../data/nl/general_wordlist.txt");
    }
    pub mod en {
        pub const STOPWORDS: &str = include_str!("../../data/en/stopwords.txt");
        pub const LEMMAS: &str = include_str!("../../data/en/lemmas.tsv");
        pub const PERSPECTIVE: &str = include_str!("../../data/en/signal_perspective.txt");
        pub const COMPARISON: &str = include_str!("../../data/en/signal_comparison.txt");
        pub const EXAMPLES: &str = include_str!("../../data/en/signal_examples.txt");
        pub const REASONING: &str = include_str!("../../data/en/signal_reasoning.txt");
        pub const GENERAL: &str = include_str!("../../data/en/general_wordlist.txt");
    }
}

/// Non-empty, non-comment lines.
pub(crate) fn word_lines(s: &str) -> impl Iterator<Item = &str> {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_lemma_table(s: &str, file: &str) -> Result<Vec<(String, String)>, LexiconError> {
    let mut out = Vec::new();
    for (i, line) in s.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        match (cols.next(), cols.next()) {
            (Some(surface), Some(lemma)) if !surface.trim().is_empty() => {
                out.push((surface.to_string(), lemma.to_string()))
            }
            _ => {
                return Err(LexiconError::LemmaLine {
                    file: file.to_string(),
                    line: i + 1,
                })
            }
        }
    }
    Ok(out)
}

impl Lexicon {
    pub fn empty() -> Self {
        Lexicon::default()
    }

    /// The placeholder lists shipped with the crate.
    pub fn builtin(language: Language) -> Self {
        use builtin::*;
        let (stop, lemmas, lists, general) = match language {
            Language::Dutch => (
                nl::STOPWORDS,
                nl::LEMMAS,
                [nl::PERSPECTIVE, nl::COMPARISON, nl::EXAMPLES, nl::REASONING],
                nl::GENERAL,
            ),
            Language::English => (
                en::STOPWORDS,
                en::LEMMAS,
                [en::PERSPECTIVE, en::COMPARISON, en::EXAMPLES, en::REASONING],
                en::GENERAL,
            ),
        };
        let mut lex = Lexicon::empty()
            .with_stopwords(word_lines(stop))
            .with_lemmas(parse_lemma_table(lemmas, "built-in lemmas").expect("built-in lemmas"))
            .expect("built-in lemmas")
            .with_general_wordlist(word_lines(general));
        for (kind, src) in SignalKind::ALL.into_iter().zip(lists) {
            lex = lex.with_signal_list(kind, word_lines(src));
        }
        lex
    }

    /// Built-in lists for `language`, with every file named in `paths`
    /// replacing the corresponding list.
    pub fn load(language: Language, paths: &LexiconPaths) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::builtin(language);
        if let Some(p) = &paths.stopwords {
            lex.stopwords.clear();
            lex = lex.with_stopwords(word_lines(&read(p)?));
        }
        if let Some(p) = &paths.lemmas {
            lex.lemmas.clear();
            let pairs = parse_lemma_table(&read(p)?, &p.display().to_string())?;
            lex = lex.with_lemmas(pairs)?;
        }
        let lists = [
            (SignalKind::Perspective, &paths.perspective),
            (SignalKind::Comparison, &paths.comparison),
            (SignalKind::Examples, &paths.examples),
            (SignalKind::Reasoning, &paths.reasoning),
        ];
        for (kind, path) in lists {
            if let Some(p) = path {
                lex.signal_lists.remove(&kind);
                lex = lex.with_signal_list(kind, word_lines(&read(p)?));
            }
        }
        if let Some(p) = &paths.general_wordlist {
            lex.general_wordlist.clear();
            lex = lex.with_general_wordlist(word_lines(&read(p)?));
        }
        if let Some(p) = &paths.company_terms {
            lex = lex.with_company_terms(word_lines(&read(p)?));
        }
        Ok(lex)
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords
            .extend(words.into_iter().map(|w| w.as_ref().trim().to_lowercase()));
        self
    }

    /// Adds surface→lemma entries. Chains (`a→b`, `b→c`) are resolved so
    /// that every lemma maps to itself; cycles resolve to their smallest
    /// member.
    pub fn with_lemmas<I, A, B>(mut self, pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        for (surface, lemma) in pairs {
            let surface = normalize_word(surface.as_ref());
            let lemma = normalize_word(lemma.as_ref());
            if lemma.is_empty() || lemma.chars().any(char::is_whitespace) {
                return Err(LexiconError::BadLemma(lemma));
            }
            if surface.is_empty() {
                continue;
            }
            self.lemmas.insert(surface, lemma);
        }
        self.close_lemma_chains();
        Ok(self)
    }

    fn close_lemma_chains(&mut self) {
        let mut resolved = HashMap::with_capacity(self.lemmas.len());
        for start in self.lemmas.keys() {
            let mut path = vec![start.as_str()];
            let mut cur = self.lemmas[start].as_str();
            let target = loop {
                if let Some(pos) = path.iter().position(|p| *p == cur) {
                    break path[pos..].iter().min().copied().unwrap_or(cur);
                }
                match self.lemmas.get(cur) {
                    Some(next) => {
                        path.push(cur);
                        cur = next.as_str();
                    }
                    None => break cur,
                }
            };
            resolved.insert(start.clone(), target.to_string());
        }
        self.lemmas = resolved;
    }

    pub fn with_signal_list<I, S>(mut self, kind: SignalKind, phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let list = self.signal_lists.entry(kind).or_default();
        for p in phrases {
            let p = p.as_ref().trim().to_lowercase();
            if !p.is_empty() && !list.contains(&p) {
                list.push(p);
            }
        }
        self
    }

    pub fn with_general_wordlist<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.general_wordlist
            .extend(words.into_iter().map(|w| w.as_ref().trim().to_lowercase()));
        self
    }

    pub fn with_company_terms<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.company_terms
            .extend(words.into_iter().map(|w| w.as_ref().trim().to_lowercase()));
        self
    }

    pub fn lemma(&self, word: &str) -> Option<&str> {
        match self.lemmas.get(word) {
            Some(l) => Some(l),
            None if word.chars().any(char::is_uppercase) => {
                self.lemmas.get(&word.to_lowercase()).map(String::as_str)
            }
            None => None,
        }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn signal_list(&self, kind: SignalKind) -> &[String] {
        self.signal_lists.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn general_wordlist(&self) -> &HashSet<String> {
        &self.general_wordlist
    }

    pub fn company_terms(&self) -> &HashSet<String> {
        &self.company_terms
    }
}
