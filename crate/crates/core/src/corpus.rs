//! Rated message/answer/context records and line-delimited dataset I/O.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::MessageType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Language {
    #[default]
    #[serde(rename = "nl")]
    Dutch,
    #[serde(rename = "en")]
    English,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::Dutch => "nl",
            Language::English => "en",
        }
    }
}

/// Why a support employee rejected an answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    Truthfulness,
    Relatedness,
    Completeness,
}

/// One retrieved document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDoc {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
}

impl ContextDoc {
    pub fn new(id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        ContextDoc {
            id: id.into(),
            title: title.into(),
            body: body.into(),
        }
    }
}

/// A message, the generated answer and the context it was generated from.
///
/// `type_label` and `second_type_label` hold human message-type annotations
/// used for classifier evaluation and inter-annotator agreement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub message: String,
    pub answer: String,
    #[serde(default)]
    pub context: Vec<ContextDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_rating: Option<u8>,
    #[serde(default)]
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_reasons: Option<BTreeSet<RejectionReason>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_label: Option<MessageType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_type_label: Option<MessageType>,
}

const RECORD_FIELDS: [&str; 10] = [
    "id",
    "message",
    "answer",
    "context",
    "system_prompt",
    "human_rating",
    "language",
    "rejection_reasons",
    "type_label",
    "second_type_label",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("record id is empty")]
    EmptyId,
    #[error("message is empty")]
    EmptyMessage,
    #[error("answer is empty")]
    EmptyAnswer,
    #[error("human_rating {0} outside 1..=5")]
    Rating(u8),
    #[error("context document `{0}` has an empty body")]
    EmptyBody(String),
    #[error("context document id `{0}` repeated")]
    DuplicateDoc(String),
}

impl Record {
    /// A Dutch, unrated record with no context.
    pub fn new(id: impl Into<String>, message: impl Into<String>, answer: impl Into<String>) -> Self {
        Record {
            id: id.into(),
            message: message.into(),
            answer: answer.into(),
            context: Vec::new(),
            system_prompt: None,
            human_rating: None,
            language: Language::Dutch,
            rejection_reasons: None,
            type_label: None,
            second_type_label: None,
        }
    }

    pub fn with_context(mut self, doc: ContextDoc) -> Self {
        self.context.push(doc);
        self
    }

    pub fn with_rating(mut self, rating: u8) -> Self {
        self.human_rating = Some(rating);
        self
    }

    pub fn with_language(mut self, language: Language) -> Self {
        self.language = language;
        self
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.id.trim().is_empty() {
            return Err(ValidationError::EmptyId);
        }
        if self.message.trim().is_empty() {
            return Err(ValidationError::EmptyMessage);
        }
        if self.answer.trim().is_empty() {
            return Err(ValidationError::EmptyAnswer);
        }
        if let Some(r) = self.human_rating {
            if !(1..=5).contains(&r) {
                return Err(ValidationError::Rating(r));
            }
        }
        let mut seen = HashSet::new();
        for doc in &self.context {
            if doc.body.trim().is_empty() {
                return Err(ValidationError::EmptyBody(doc.id.clone()));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(ValidationError::DuplicateDoc(doc.id.clone()));
            }
        }
        Ok(())
    }

    /// The text the answer is checked against: every document title and
    /// body, followed by the system prompt when requested.
    pub fn context_text(&self, include_system_prompt: bool) -> String {
        let mut parts: Vec<&str> = Vec::new();
        for doc in &self.context {
            if !doc.title.trim().is_empty() {
                parts.push(&doc.title);
            }
            parts.push(&doc.body);
        }
        if include_system_prompt {
            if let Some(p) = &self.system_prompt {
                parts.push(p);
            }
        }
        parts.join("\n\n")
    }

    /// Context split per source (documents, then system prompt), for
    /// features that must not join structure across documents.
    pub fn context_sections(&self, include_system_prompt: bool) -> Vec<&str> {
        let mut out: Vec<&str> = self.context.iter().map(|d| d.body.as_str()).collect();
        if include_system_prompt {
            if let Some(p) = &self.system_prompt {
                out.push(p);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<Record>,
}

/// A line that could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub dataset: Dataset,
    pub skipped: Vec<SkippedLine>,
    /// Field names seen in the file that are not part of the record format.
    pub unknown_fields: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate record id `{id}` on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("cannot serialize record `{0}`: {1}")]
    Serialize(String, serde_json::Error),
}

fn parse_line(line: &str, unknown: &mut BTreeSet<String>) -> Result<Record, String> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    for key in obj.keys() {
        if !RECORD_FIELDS.contains(&key.as_str()) {
            unknown.insert(key.clone());
        }
    }
    let record: Record = serde_json::from_value(value).map_err(|e| e.to_string())?;
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

/// Reads a line-delimited dataset. Blank lines are ignored; malformed lines
/// are reported in [`LoadReport::skipped`]. Duplicate ids are fatal.
pub fn load_dataset(path: &Path, name: &str) -> Result<LoadReport, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    read_dataset(BufReader::new(file), name).map_err(|e| match e {
        CorpusError::Io { source, .. } => io_err(source),
        other => other,
    })
}

pub fn read_dataset<R: BufRead>(reader: R, name: &str) -> Result<LoadReport, CorpusError> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut unknown = BTreeSet::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: name.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, &mut unknown) {
            Ok(record) => {
                if !ids.insert(record.id.clone()) {
                    return Err(CorpusError::DuplicateId {
                        id: record.id,
                        line: line_no,
                    });
                }
                records.push(record);
            }
            Err(reason) => {
                log::warn!("{name}: skipping line {line_no}: {reason}");
                skipped.push(SkippedLine {
                    line: line_no,
                    reason,
                });
            }
        }
    }
    for field in &unknown {
        log::warn!("{name}: ignoring unknown field `{field}`");
    }
    Ok(LoadReport {
        dataset: Dataset {
            name: name.to_string(),
            records,
        },
        skipped,
        unknown_fields: unknown,
    })
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut out: W) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: ds.name.clone(),
        source,
    };
    for r in &ds.records {
        let line = serde_json::to_string(r).map_err(|e| CorpusError::Serialize(r.id.clone(), e))?;
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_dataset(ds, BufWriter::new(file))
}

/// Counts of human ratings 1..=5. Every rating is present in the map;
/// unrated records are not counted.
pub fn rating_distribution(ds: &Dataset) -> BTreeMap<u8, usize> {
    let mut counts: BTreeMap<u8, usize> = (1..=5).map(|r| (r, 0)).collect();
    for r in ds.records.iter().filter_map(|r| r.human_rating) {
        *counts.entry(r).or_default() += 1;
    }
    counts
}
