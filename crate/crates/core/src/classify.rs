//! Rule-based message-type classification.
//!
//! A message is lowercased and scanned against ordered pattern lists. The
//! first list that shares a pattern with the message decides the type; when
//! no list matches the message is [`MessageType::Unspecified`]. The Reasoning
//! stage additionally fires on any message without a question mark.
//!
//! Patterns are plain substrings. Leading and trailing spaces inside a
//! pattern are significant (`"how "` does not match `"however"`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The seven user-message types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageType {
    Error,
    General,
    Reasoning,
    Instruction,
    Binary,
    Action,
    Unspecified,
}

impl MessageType {
    pub const ALL: [MessageType; 7] = [
        MessageType::Error,
        MessageType::General,
        MessageType::Reasoning,
        MessageType::Instruction,
        MessageType::Binary,
        MessageType::Action,
        MessageType::Unspecified,
    ];

    /// The order in which pattern lists must appear in a rules file.
    pub const RULE_ORDER: [MessageType; 5] = [
        MessageType::Error,
        MessageType::General,
        MessageType::Reasoning,
        MessageType::Instruction,
        MessageType::Binary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageType::Error => "error",
            MessageType::General => "general",
            MessageType::Reasoning => "reasoning",
            MessageType::Instruction => "instruction",
            MessageType::Binary => "binary",
            MessageType::Action => "action",
            MessageType::Unspecified => "unspecified",
        }
    }
}

impl fmt::Display for MessageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageType {
    type Err = RulesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageType::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| RulesError::UnknownType(s.to_string()))
    }
}

/// Only Binary and Instruction messages receive a truthfulness score.
pub fn is_scorable(t: MessageType) -> bool {
    matches!(t, MessageType::Binary | MessageType::Instruction)
}

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("cannot read rules file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid rules file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("pattern lists must appear in the order error, general, reasoning, instruction, binary; found {0:?}")]
    Order(Vec<MessageType>),
    #[error("empty pattern in the `{0}` list")]
    EmptyPattern(MessageType),
}

/// Ordered pattern lists driving [`classify_message`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRules {
    lists: Vec<(MessageType, Vec<String>)>,
    reasoning_no_question_mark: bool,
}

#[derive(Debug, Deserialize, Serialize)]
struct RulesFile {
    #[serde(default = "default_true")]
    reasoning_matches_missing_question_mark: bool,
    types: Vec<RulesEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RulesEntry {
    #[serde(rename = "type")]
    kind: String,
    patterns: Vec<String>,
}

fn default_true() -> bool {
    true
}

const DEFAULT_RULES: &str = include_str!("../data/rules.toml");

impl TypeRules {
    /// Builds rules from lists given in classification order. Patterns are
    /// lowercased; surrounding spaces are kept.
    pub fn new(
        lists: Vec<(MessageType, Vec<String>)>,
        reasoning_no_question_mark: bool,
    ) -> Result<Self, RulesError> {
        let order: Vec<MessageType> = lists.iter().map(|(t, _)| *t).collect();
        if order != MessageType::RULE_ORDER {
            return Err(RulesError::Order(order));
        }
        let mut normalized = Vec::with_capacity(lists.len());
        for (kind, patterns) in lists {
            let mut out = Vec::with_capacity(patterns.len());
            for p in patterns {
                if p.is_empty() {
                    return Err(RulesError::EmptyPattern(kind));
                }
                out.push(p.to_lowercase());
            }
            normalized.push((kind, out));
        }
        Ok(TypeRules {
            lists: normalized,
            reasoning_no_question_mark,
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self, RulesError> {
        let file: RulesFile = toml::from_str(s)?;
        let lists = file
            .types
            .into_iter()
            .map(|e| Ok((e.kind.parse::<MessageType>()?, e.patterns)))
            .collect::<Result<Vec<_>, RulesError>>()?;
        TypeRules::new(lists, file.reasoning_matches_missing_question_mark)
    }

    pub fn load(path: &Path) -> Result<Self, RulesError> {
        let s = std::fs::read_to_string(path).map_err(|source| RulesError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        let file = RulesFile {
            reasoning_matches_missing_question_mark: self.reasoning_no_question_mark,
            types: self
                .lists
                .iter()
                .map(|(t, p)| RulesEntry {
                    kind: t.as_str().to_string(),
                    patterns: p.clone(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("rules serialize")
    }

    pub fn lists(&self) -> &[(MessageType, Vec<String>)] {
        &self.lists
    }

    pub fn reasoning_no_question_mark(&self) -> bool {
        self.reasoning_no_question_mark
    }
}

impl Default for TypeRules {
    /// The built-in pattern fragments.
    fn default() -> Self {
        TypeRules::from_toml_str(DEFAULT_RULES).expect("built-in rules are valid")
    }
}

/// Assigns a message type using the ordered pattern lists.
///
/// The question-mark test inspects the raw message, since punctuation does
/// not survive preprocessing.
pub fn classify_message(message: &str, rules: &TypeRules) -> MessageType {
    let lower = message.to_lowercase();
    for (kind, patterns) in &rules.lists {
        if patterns.iter().any(|p| lower.contains(p.as_str())) {
            return *kind;
        }
        if *kind == MessageType::Reasoning
            && rules.reasoning_no_question_mark
            && !has_question_mark(message)
        {
            return MessageType::Reasoning;
        }
    }
    MessageType::Unspecified
}

pub fn has_question_mark(text: &str) -> bool {
    text.contains(['?', '？', '¿'])
}

/// Per-type counts over a batch of labels. Every type is present in the map.
pub fn histogram<I: IntoIterator<Item = MessageType>>(labels: I) -> BTreeMap<MessageType, usize> {
    let mut h: BTreeMap<MessageType, usize> = MessageType::ALL.into_iter().map(|t| (t, 0)).collect();
    for t in labels {
        *h.entry(t).or_default() += 1;
    }
    h
}
