//! Feature aggregation into a 1 to 5 score, override rules and abstention.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_message, is_scorable, MessageType, TypeRules};
use crate::corpus::{Dataset, Record};
use crate::features::{Diagnostics, FeatureError, FeatureExtractor, FeatureName, FeatureVector};

/// Version of the scored-record output format.
pub const SCHEMA_VERSION: u32 = 1;

/// Neutral score used for the "do not send" gate.
pub const DEFAULT_THRESHOLD: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("feature sum {sum} outside [0, {max}]")]
    SumOutOfRange { sum: f64, max: usize },
    #[error("record `{record_id}`: {source}")]
    Feature {
        record_id: String,
        #[source]
        source: FeatureError,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("cannot write scored records: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize scored record: {0}")]
    Serialize(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Override {
    #[default]
    None,
    /// An answer component is missing from the context: score 1.
    ComponentFail,
    /// An answer guide mirrors a context guide: score 5.
    GuideMatch,
}

/// Equal-weight sum of the seven features.
pub fn aggregate(fv: &FeatureVector) -> f64 {
    aggregate_excluding(fv, None)
}

/// Sum over every feature except `excluded`.
pub fn aggregate_excluding(fv: &FeatureVector, excluded: Option<FeatureName>) -> f64 {
    FeatureName::ALL
        .into_iter()
        .filter(|n| Some(*n) != excluded)
        .map(|n| fv.value(n))
        .sum()
}

/// Maps a sum over seven features onto `[1, 5]`.
pub fn to_scale(sum: f64) -> Result<f64, ScoreError> {
    to_scale_with(sum, FeatureName::ALL.len())
}

/// Maps a sum over `n` features affinely from `[0, n]` onto `[1, 5]`.
pub fn to_scale_with(sum: f64, n: usize) -> Result<f64, ScoreError> {
    if n == 0 || !(0.0..=n as f64).contains(&sum) {
        return Err(ScoreError::SumOutOfRange { sum, max: n });
    }
    Ok(1.0 + 4.0 * sum / n as f64)
}

/// A missing component forces 1, else a matched guide forces 5.
pub fn apply_overrides(base: f64, fv: &FeatureVector) -> (f64, Override) {
    apply_overrides_excluding(base, fv, None)
}

/// As [`apply_overrides`], with the override owned by `excluded` disabled.
pub fn apply_overrides_excluding(base: f64, fv: &FeatureVector, excluded: Option<FeatureName>) -> (f64, Override) {
    if excluded != Some(FeatureName::ComponentsDefined) && !fv.undefined_components().is_empty() {
        (1.0, Override::ComponentFail)
    } else if excluded != Some(FeatureName::VerbatimGuide) && fv.guide_matched() {
        (5.0, Override::GuideMatch)
    } else {
        (base, Override::None)
    }
}

/// Score of a feature vector, optionally leaving one feature out of both
/// the sum and the overrides.
pub fn score_from_features(fv: &FeatureVector, excluded: Option<FeatureName>) -> Result<(f64, Override), ScoreError> {
    let n = FeatureName::ALL.len() - usize::from(excluded.is_some());
    let base = to_scale_with(aggregate_excluding(fv, excluded), n)?;
    Ok(apply_overrides_excluding(base, fv, excluded))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub record_id: String,
    pub message_type: MessageType,
    pub abstained: bool,
    pub score: Option<f64>,
    #[serde(rename = "override")]
    pub override_rule: Override,
    pub features: Option<FeatureVector>,
}

impl ScoreResult {
    fn abstain(record_id: &str, message_type: MessageType) -> Self {
        ScoreResult {
            record_id: record_id.to_string(),
            message_type,
            abstained: true,
            score: None,
            override_rule: Override::None,
            features: None,
        }
    }
}

/// Classifier plus feature extractor.
#[derive(Debug, Clone)]
pub struct Scorer {
    rules: TypeRules,
    extractor: FeatureExtractor,
}

impl Scorer {
    pub fn new(rules: TypeRules, extractor: FeatureExtractor) -> Self {
        Scorer { rules, extractor }
    }

    pub fn rules(&self) -> &TypeRules {
        &self.rules
    }

    pub fn extractor(&self) -> &FeatureExtractor {
        &self.extractor
    }

    /// Classifies the original message and scores Binary and Instruction
    /// records; every other type abstains.
    pub fn score_record(&self, record: &Record, translation: Option<&Record>) -> Result<ScoreResult, ScoreError> {
        let message_type = classify_message(&record.message, &self.rules);
        if !is_scorable(message_type) {
            return Ok(ScoreResult::abstain(&record.id, message_type));
        }
        let fv = self
            .extractor
            .extract(record, translation)
            .map_err(|source| ScoreError::Feature {
                record_id: record.id.clone(),
                source,
            })?;
        let (score, override_rule) = score_from_features(&fv, None)?;
        Ok(ScoreResult {
            record_id: record.id.clone(),
            message_type,
            abstained: false,
            score: Some(score),
            override_rule,
            features: Some(fv),
        })
    }

    /// Scores every record on `workers` threads (0 = all cores). Results
    /// keep the dataset order.
    pub fn score_dataset(
        &self,
        ds: &Dataset,
        translations: Option<&HashMap<String, Record>>,
        workers: usize,
    ) -> Result<Vec<ScoreResult>, ScoreError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ScoreError::Pool(e.to_string()))?;
        pool.install(|| {
            ds.records
                .par_iter()
                .map(|r| self.score_record(r, translations.and_then(|t| t.get(&r.id))))
                .collect()
        })
    }
}

/// Number of scored records below `threshold`; these should not be sent.
pub fn count_below(results: &[ScoreResult], threshold: f64) -> usize {
    results.iter().filter(|r| r.score.is_some_and(|s| s < threshold)).count()
}

/// One line of scored output: the input record plus the scoring result.
#[derive(Debug, Serialize)]
pub struct ScoredRecord<'a> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub record: &'a Record,
    pub message_type: MessageType,
    pub abstained: bool,
    pub score: Option<f64>,
    #[serde(rename = "override")]
    pub override_rule: Override,
    pub features: Option<BTreeMap<FeatureName, f64>>,
    pub diagnostics: Option<BTreeMap<FeatureName, &'a Diagnostics>>,
}

impl<'a> ScoredRecord<'a> {
    pub fn new(record: &'a Record, result: &'a ScoreResult) -> Self {
        let features = result
            .features
            .as_ref()
            .map(|fv| fv.iter().map(|v| (v.name, v.value)).collect());
        let diagnostics = result
            .features
            .as_ref()
            .map(|fv| fv.iter().map(|v| (v.name, &v.diagnostics)).collect());
        ScoredRecord {
            schema_version: SCHEMA_VERSION,
            record,
            message_type: result.message_type,
            abstained: result.abstained,
            score: result.score,
            override_rule: result.override_rule,
            features,
            diagnostics,
        }
    }
}

/// Writes one JSON object per line. Records and results are paired by
/// position.
pub fn write_scored<W: Write>(records: &[Record], results: &[ScoreResult], mut out: W) -> Result<(), ScoreError> {
    debug_assert_eq!(records.len(), results.len());
    for (rec, res) in records.iter().zip(results) {
        serde_json::to_writer(&mut out, &ScoredRecord::new(rec, res))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
