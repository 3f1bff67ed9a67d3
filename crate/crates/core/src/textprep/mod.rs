//! Tokenization and the lowercase / lemmatize / stopword-strip pipeline.

mod lexicon;
pub mod translate;

pub use lexicon::{Lexicon, LexiconError, LexiconPaths, SignalKind};

use serde::{Deserialize, Serialize};

/// Sentence-final punctuation seen directly after a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminator {
    Period,
    Question,
    Exclamation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    /// Normalized form that features compare on.
    pub lemma: String,
    /// Index of the token in the tokenized source.
    pub position: usize,
    pub terminator: Option<Terminator>,
}

fn is_separator(c: char) -> bool {
    !c.is_alphanumeric()
}

fn terminator_in(s: &str) -> Option<Terminator> {
    if s.contains(['?', '？']) {
        Some(Terminator::Question)
    } else if s.contains('!') {
        Some(Terminator::Exclamation)
    } else if s.contains(['.', '…']) {
        Some(Terminator::Period)
    } else {
        None
    }
}

/// Splits on Unicode whitespace and strips leading and trailing punctuation
/// from each piece. Inner punctuation (`e-mail`, `v2.1`) is kept. Punctuation
/// that stands alone attaches its terminator to the previous token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    for chunk in text.split_whitespace() {
        let core = chunk.trim_matches(is_separator);
        if core.is_empty() {
            if let (Some(t), Some(last)) = (terminator_in(chunk), tokens.last_mut()) {
                last.terminator.get_or_insert(t);
            }
            continue;
        }
        let start = chunk.len() - chunk.trim_start_matches(is_separator).len();
        let trailing = &chunk[start + core.len()..];
        tokens.push(Token {
            surface: core.to_string(),
            lemma: core.to_lowercase(),
            position: tokens.len(),
            terminator: terminator_in(trailing),
        });
    }
    tokens
}

/// Which normalization steps to run. Steps always run in the order
/// lowercase, lemmatize, strip stopwords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepProfile {
    pub name: String,
    pub lowercase: bool,
    pub lemmatize: bool,
    pub strip_stopwords: bool,
}

impl PrepProfile {
    pub fn dutch() -> Self {
        PrepProfile {
            name: "dutch".into(),
            lowercase: true,
            lemmatize: true,
            strip_stopwords: false,
        }
    }

    pub fn english() -> Self {
        PrepProfile {
            name: "english".into(),
            lowercase: true,
            lemmatize: true,
            strip_stopwords: true,
        }
    }
}

pub(crate) fn normalize_word(s: &str) -> String {
    s.to_lowercase().trim_matches(is_separator).to_string()
}

/// Tokenizes and normalizes `text`. The result is stable under a second
/// pass: preprocessing the space-joined lemmas yields the same lemmas.
pub fn preprocess(text: &str, profile: &PrepProfile, lex: &Lexicon) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    for tok in tokenize(text) {
        let mut form = if profile.lowercase {
            normalize_word(&tok.surface)
        } else {
            tok.surface.clone()
        };
        let dropped = form.is_empty()
            || {
                if profile.lemmatize {
                    if let Some(lemma) = lex.lemma(&form) {
                        form = lemma.to_string();
                    }
                }
                profile.strip_stopwords && lex.is_stopword(&form)
            };
        if dropped {
            if let (Some(t), Some(last)) = (tok.terminator, out.last_mut()) {
                last.terminator.get_or_insert(t);
            }
            continue;
        }
        out.push(Token {
            surface: tok.surface,
            lemma: form,
            position: tok.position,
            terminator: tok.terminator,
        });
    }
    out
}

/// Lemma sequence of `text` under `profile`.
pub fn lemmas(text: &str, profile: &PrepProfile, lex: &Lexicon) -> Vec<String> {
    preprocess(text, profile, lex).into_iter().map(|t| t.lemma).collect()
}

/// Splits a token stream at sentence terminators.
pub fn sentences(tokens: &[Token]) -> Vec<&[Token]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.terminator.is_some() {
            out.push(&tokens[start..=i]);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        out.push(&tokens[start..]);
    }
    out
}
