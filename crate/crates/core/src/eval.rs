//! Evaluation against human ratings and annotations: rank correlation,
//! agreement, classifier metrics, margin and threshold tables, ablation and
//! the report writer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::classify::{classify_message, MessageType};
use crate::corpus::{Dataset, Record};
use crate::features::{FeatureName, FeatureVector};
use crate::score::{score_from_features, Override, ScoreError, ScoreResult, Scorer, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation undefined: input is constant")]
    Constant,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot write summary: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    TDistribution,
    Permutation { permutations: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: PValueMethod,
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn check_paired(xs: &[f64], ys: &[f64]) -> Result<(), EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(EvalError::TooFew { needed: 3, got: xs.len() });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(EvalError::Constant);
    }
    Ok(())
}

fn t_test_p(rho: f64, n: usize) -> f64 {
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Spearman's rho with a two-sided p-value from the t approximation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Correlation, EvalError> {
    check_paired(xs, ys)?;
    let rho = pearson(&average_ranks(xs), &average_ranks(ys));
    Ok(Correlation {
        rho,
        p_value: t_test_p(rho, xs.len()),
        n: xs.len(),
        method: PValueMethod::TDistribution,
    })
}

/// Spearman's rho with a two-sided permutation p-value,
/// `(1 + #{|rho_perm| >= |rho|}) / (1 + permutations)`.
pub fn spearman_permutation(xs: &[f64], ys: &[f64], permutations: usize, seed: u64) -> Result<Correlation, EvalError> {
    check_paired(xs, ys)?;
    let rx = average_ranks(xs);
    let mut ry = average_ranks(ys);
    let rho = pearson(&rx, &ry);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        ry.shuffle(&mut rng);
        if pearson(&rx, &ry).abs() >= rho.abs() - 1e-12 {
            extreme += 1;
        }
    }
    Ok(Correlation {
        rho,
        p_value: (1 + extreme) as f64 / (1 + permutations) as f64,
        n: xs.len(),
        method: PValueMethod::Permutation { permutations, seed },
    })
}

/// Cohen's kappa for two annotators. Perfect agreement on a single label
/// gives 1.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(EvalError::TooFew { needed: 1, got: 0 });
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ca: HashMap<&T, f64> = HashMap::new();
    let mut cb: HashMap<&T, f64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
    }
    let expected: f64 = ca
        .iter()
        .map(|(k, na)| na * cb.get(k).copied().unwrap_or(0.0))
        .sum::<f64>()
        / (n * n);
    if (1.0 - expected).abs() < 1e-15 {
        return Ok(if observed == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((observed - expected) / (1.0 - expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Macro average over every label present in either list.
    All,
    Binary,
    Instruction,
    /// Whether the label is one of the two scored types.
    BinaryOrInstruction,
}

impl Scope {
    pub const ALL: [Scope; 4] = [Scope::All, Scope::Binary, Scope::Instruction, Scope::BinaryOrInstruction];

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::Binary => "binary",
            Scope::Instruction => "instruction",
            Scope::BinaryOrInstruction => "binary_or_instruction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub support: usize,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Precision and recall from counts. With no positives on either side both
/// are 1; otherwise an empty denominator gives 0.
fn precision_recall(tp: usize, fp: usize, fn_: usize) -> (f64, f64) {
    if tp + fp + fn_ == 0 {
        return (1.0, 1.0);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    (ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

/// Precision, recall, F1 and accuracy of `predicted` against `actual`. F1
/// is always the harmonic mean of the reported precision and recall.
pub fn classifier_metrics(predicted: &[MessageType], actual: &[MessageType], scope: Scope) -> Result<Metrics, EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(EvalError::TooFew { needed: 1, got: 0 });
    }
    let n = predicted.len();
    let one_vs_rest = |positive: &dyn Fn(MessageType) -> bool| {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (positive(p), positive(a)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        (tp, fp, fn_, tn)
    };
    let binary_metrics = |positive: &dyn Fn(MessageType) -> bool| {
        let (tp, fp, fn_, tn) = one_vs_rest(positive);
        let (precision, recall) = precision_recall(tp, fp, fn_);
        Metrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            accuracy: (tp + tn) as f64 / n as f64,
            support: tp + fn_,
        }
    };
    Ok(match scope {
        Scope::Binary => binary_metrics(&|t| t == MessageType::Binary),
        Scope::Instruction => binary_metrics(&|t| t == MessageType::Instruction),
        Scope::BinaryOrInstruction => {
            binary_metrics(&|t| matches!(t, MessageType::Binary | MessageType::Instruction))
        }
        Scope::All => {
            let classes: BTreeSet<MessageType> = predicted.iter().chain(actual).copied().collect();
            let mut sum_p = 0.0;
            let mut sum_r = 0.0;
            for &c in &classes {
                let (tp, fp, fn_, _) = one_vs_rest(&|t| t == c);
                let (p, r) = precision_recall(tp, fp, fn_);
                sum_p += p;
                sum_r += r;
            }
            let k = classes.len() as f64;
            let (precision, recall) = (sum_p / k, sum_r / k);
            let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
            Metrics {
                precision,
                recall,
                f1: harmonic(precision, recall),
                accuracy: correct as f64 / n as f64,
                support: n,
            }
        }
    })
}

/// Per rating, the fraction of scores within `margin` of the rating
/// (boundary inclusive).
pub fn margin_accuracy(scores: &[f64], ratings: &[u8], margin: f64) -> Result<BTreeMap<u8, f64>, EvalError> {
    if scores.len() != ratings.len() {
        return Err(EvalError::LengthMismatch {
            left: scores.len(),
            right: ratings.len(),
        });
    }
    let mut counts: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for (&s, &r) in scores.iter().zip(ratings) {
        let e = counts.entry(r).or_default();
        e.1 += 1;
        // Tolerance absorbs rounding in scores such as 1 + 4 * s / 7.
        if (s - f64::from(r)).abs() <= margin + 1e-9 {
            e.0 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(r, (hit, n))| (r, hit as f64 / n as f64))
        .collect())
}

/// Distribution of predicted scores for one human rating.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    /// Forced to 1 by a missing component.
    pub eq1: f64,
    pub below: f64,
    /// Exactly at the threshold; in neither `below` nor `above`.
    pub at: f64,
    pub above: f64,
    /// Forced to 5 by a matched guide.
    pub eq5: f64,
}

/// Threshold table over `(rating, result)` pairs. Abstained results are
/// ignored.
pub fn threshold_table(rows: &[(u8, &ScoreResult)], threshold: f64) -> BTreeMap<u8, ThresholdRow> {
    let mut counts: BTreeMap<u8, [usize; 6]> = BTreeMap::new();
    for (rating, res) in rows {
        let Some(score) = res.score else { continue };
        let c = counts.entry(*rating).or_default();
        c[0] += 1;
        c[1] += usize::from(res.override_rule == Override::ComponentFail);
        if score < threshold {
            c[2] += 1;
        } else if score > threshold {
            c[4] += 1;
        } else {
            c[3] += 1;
        }
        c[5] += usize::from(res.override_rule == Override::GuideMatch);
    }
    counts
        .into_iter()
        .map(|(r, c)| {
            let f = |k: usize| c[k] as f64 / c[0] as f64;
            (
                r,
                ThresholdRow {
                    n: c[0],
                    eq1: f(1),
                    below: f(2),
                    at: f(3),
                    above: f(4),
                    eq5: f(5),
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub feature: FeatureName,
    pub rho_without: f64,
    /// `rho_all - rho_without`; positive when the feature helps.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub rho_all: f64,
    pub rows: Vec<AblationRow>,
}

/// Re-scores precomputed feature vectors with each feature left out in turn
/// and compares the correlation with the ratings.
pub fn ablation(rows: &[(&FeatureVector, u8)]) -> Result<Ablation, EvalError> {
    let ratings: Vec<f64> = rows.iter().map(|(_, r)| f64::from(*r)).collect();
    let scores_without = |excluded: Option<FeatureName>| -> Result<Vec<f64>, EvalError> {
        rows.iter()
            .map(|(fv, _)| Ok(score_from_features(fv, excluded)?.0))
            .collect()
    };
    let rho_all = spearman(&scores_without(None)?, &ratings)?.rho;
    let rows = FeatureName::ALL
        .into_iter()
        .map(|f| {
            let rho_without = spearman(&scores_without(Some(f))?, &ratings)?.rho;
            Ok(AblationRow {
                feature: f,
                rho_without,
                delta: rho_all - rho_without,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(Ablation { rho_all, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub threshold: f64,
    pub margin: f64,
    /// Permutation p-values instead of the t approximation.
    pub permutations: Option<usize>,
    pub seed: u64,
    pub ablate: bool,
    pub workers: usize,
    /// Size of the lowest-agreement list.
    pub lowest: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: crate::score::DEFAULT_THRESHOLD,
            margin: 1.0,
            permutations: None,
            seed: 0,
            ablate: false,
            workers: 0,
            lowest: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub record_id: String,
    pub rating: u8,
    pub score: f64,
    pub abs_error: f64,
    pub message_type: MessageType,
    #[serde(rename = "override")]
    pub override_rule: Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: FeatureName,
    pub correlation: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub dataset: String,
    pub records: usize,
    pub scored: usize,
    pub abstained: usize,
    pub threshold: f64,
    pub margin: f64,
    /// Scored records below the threshold.
    pub below_threshold: usize,
    /// `None` when fewer than three rated, scored records or constant input.
    pub correlation: Option<Correlation>,
    pub correlation_note: Option<String>,
    pub feature_correlations: Vec<FeatureCorrelation>,
    pub margin_accuracy: BTreeMap<u8, f64>,
    pub threshold_table: BTreeMap<u8, ThresholdRow>,
    pub classifier_metrics: BTreeMap<Scope, Metrics>,
    pub kappa: Option<f64>,
    pub ablation: Option<Ablation>,
    pub lowest_agreement: Vec<Disagreement>,
}

impl EvalReport {
    /// Number of records that are both rated and scored.
    pub fn n(&self) -> usize {
        self.correlation.map_or(0, |c| c.n)
    }
}

/// Scores the dataset and computes every metric. Nothing is written.
pub fn evaluate(
    ds: &Dataset,
    scorer: &Scorer,
    translations: Option<&HashMap<String, Record>>,
    opts: &EvalOptions,
) -> Result<(EvalReport, Vec<ScoreResult>), EvalError> {
    if ds.records.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let results = scorer.score_dataset(ds, translations, opts.workers)?;
    let paired: Vec<(&Record, &ScoreResult)> = ds.records.iter().zip(&results).collect();

    let rated: Vec<(u8, &ScoreResult)> = paired
        .iter()
        .filter_map(|(rec, res)| Some((rec.human_rating?, *res)))
        .filter(|(_, res)| res.score.is_some())
        .collect();
    let scores: Vec<f64> = rated.iter().map(|(_, r)| r.score.unwrap_or_default()).collect();
    let ratings: Vec<u8> = rated.iter().map(|(r, _)| *r).collect();
    let ratings_f: Vec<f64> = ratings.iter().map(|r| f64::from(*r)).collect();

    let correlate = |xs: &[f64]| match opts.permutations {
        Some(k) => spearman_permutation(xs, &ratings_f, k, opts.seed),
        None => spearman(xs, &ratings_f),
    };
    let (correlation, correlation_note) = match correlate(&scores) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(format!("not applicable: {e}"))),
    };
    let feature_correlations = FeatureName::ALL
        .into_iter()
        .map(|f| {
            let xs: Vec<f64> = rated
                .iter()
                .filter_map(|(_, r)| r.features.as_ref().map(|fv| fv.value(f)))
                .collect();
            FeatureCorrelation {
                feature: f,
                correlation: correlate(&xs).ok(),
            }
        })
        .collect();

    let labeled: Vec<(MessageType, MessageType)> = ds
        .records
        .iter()
        .filter_map(|r| Some((classify_message(&r.message, scorer.rules()), r.type_label?)))
        .collect();
    let mut classifier = BTreeMap::new();
    if !labeled.is_empty() {
        let (pred, gold): (Vec<_>, Vec<_>) = labeled.into_iter().unzip();
        for scope in Scope::ALL {
            classifier.insert(scope, classifier_metrics(&pred, &gold, scope)?);
        }
    }
    let (first, second): (Vec<_>, Vec<_>) = ds
        .records
        .iter()
        .filter_map(|r| Some((r.type_label?, r.second_type_label?)))
        .unzip();
    let kappa = if first.is_empty() {
        None
    } else {
        Some(cohen_kappa(&first, &second)?)
    };

    let ablation = if opts.ablate && correlation.is_some() {
        let rows: Vec<(&FeatureVector, u8)> = rated
            .iter()
            .filter_map(|(rating, r)| Some((r.features.as_ref()?, *rating)))
            .collect();
        Some(ablation(&rows)?)
    } else {
        None
    };

    let mut lowest: Vec<Disagreement> = rated
        .iter()
        .map(|(rating, r)| {
            let score = r.score.unwrap_or_default();
            Disagreement {
                record_id: r.record_id.clone(),
                rating: *rating,
                score,
                abs_error: (score - f64::from(*rating)).abs(),
                message_type: r.message_type,
                override_rule: r.override_rule,
            }
        })
        .collect();
    lowest.sort_by(|a, b| {
        b.abs_error
            .total_cmp(&a.abs_error)
            .then_with(|| a.record_id.cmp(&b.record_id))
    });
    lowest.truncate(opts.lowest);

    let scored = results.iter().filter(|r| !r.abstained).count();
    let report = EvalReport {
        schema_version: SCHEMA_VERSION,
        dataset: ds.name.clone(),
        records: results.len(),
        scored,
        abstained: results.len() - scored,
        threshold: opts.threshold,
        margin: opts.margin,
        below_threshold: crate::score::count_below(&results, opts.threshold),
        correlation,
        correlation_note,
        feature_correlations,
        margin_accuracy: margin_accuracy(&scores, &ratings, opts.margin)?,
        threshold_table: threshold_table(&rated, opts.threshold),
        classifier_metrics: classifier,
        kappa,
        ablation,
        lowest_agreement: lowest,
    };
    Ok((report, results))
}

/// Runs [`evaluate`] and writes the tables, `summary.json` and a plain-text
/// `report.txt` into `out_dir`.
pub fn report(
    ds: &Dataset,
    scorer: &Scorer,
    translations: Option<&HashMap<String, Record>>,
    opts: &EvalOptions,
    out_dir: &Path,
) -> Result<EvalReport, EvalError> {
    let (report, _) = evaluate(ds, scorer, translations, opts)?;
    write_report(&report, out_dir)?;
    Ok(report)
}

pub fn write_report(report: &EvalReport, out_dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(out_dir)?;

    let mut w = csv::Writer::from_path(out_dir.join("classification.csv"))?;
    w.write_record(["scope", "precision", "recall", "f1", "accuracy", "support"])?;
    for (scope, m) in &report.classifier_metrics {
        w.serialize((scope.as_str(), m.precision, m.recall, m.f1, m.accuracy, m.support))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("correlation.csv"))?;
    w.write_record(["subject", "rho", "p_value", "n"])?;
    let mut corr_row = |name: &str, c: &Option<Correlation>| match c {
        Some(c) => w.serialize((name, Some(c.rho), Some(c.p_value), c.n)),
        None => w.serialize((name, None::<f64>, None::<f64>, 0)),
    };
    corr_row("score", &report.correlation)?;
    for fc in &report.feature_correlations {
        corr_row(fc.feature.as_str(), &fc.correlation)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("thresholds.csv"))?;
    w.write_record(["rating", "n", "eq1", "below", "at", "above", "eq5", "margin_accuracy"])?;
    for (rating, row) in &report.threshold_table {
        let margin = report.margin_accuracy.get(rating).copied();
        w.serialize((rating, row.n, row.eq1, row.below, row.at, row.above, row.eq5, margin))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("lowest_agreement.csv"))?;
    for d in &report.lowest_agreement {
        w.serialize(d)?;
    }
    w.flush()?;

    if let Some(ab) = &report.ablation {
        let mut w = csv::Writer::from_path(out_dir.join("ablation.csv"))?;
        w.write_record(["feature", "rho_all", "rho_without", "delta"])?;
        for row in &ab.rows {
            w.serialize((row.feature.as_str(), ab.rho_all, row.rho_without, row.delta))?;
        }
        w.flush()?;
    }

    let mut summary = serde_json::to_string_pretty(report)?;
    summary.push('\n');
    std::fs::write(out_dir.join("summary.json"), summary)?;
    std::fs::write(out_dir.join("report.txt"), render_text(report))?;
    Ok(())
}

fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Human-readable tables.
pub fn render_text(r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dataset {}: {} records, {} scored, {} abstained", r.dataset, r.records, r.scored, r.abstained);
    let _ = writeln!(s, "{} scored records below threshold {}", r.below_threshold, r.threshold);

    let _ = writeln!(s, "\nmessage type detection");
    if r.classifier_metrics.is_empty() {
        let _ = writeln!(s, "  no type annotations");
    } else {
        let _ = writeln!(s, "  {:<24}{:>10}{:>10}{:>10}{:>10}", "scope", "f1", "accuracy", "precision", "recall");
        for (scope, m) in &r.classifier_metrics {
            let _ = writeln!(
                s,
                "  {:<24}{:>10.2}{:>10.2}{:>10.2}{:>10.2}",
                scope.as_str(),
                m.f1,
                m.accuracy,
                m.precision,
                m.recall
            );
        }
    }
    if let Some(k) = r.kappa {
        let _ = writeln!(s, "  annotator agreement (Cohen's kappa): {k:.2}");
    }

    let _ = writeln!(s, "\ncorrelation with human ratings (Spearman)");
    match (&r.correlation, &r.correlation_note) {
        (Some(c), _) => {
            let _ = writeln!(s, "  rho {:.2}{} (p = {:.4}, n = {})", c.rho, stars(c.p_value), c.p_value, c.n);
        }
        (None, note) => {
            let _ = writeln!(s, "  {}", note.as_deref().unwrap_or("not applicable"));
        }
    }
    for fc in &r.feature_correlations {
        match &fc.correlation {
            Some(c) => {
                let _ = writeln!(s, "  {:<22}{:>7.2}{:<3} p = {:.4}", fc.feature.as_str(), c.rho, stars(c.p_value), c.p_value);
            }
            None => {
                let _ = writeln!(s, "  {:<22}{:>7}", fc.feature.as_str(), "n/a");
            }
        }
    }

    if !r.threshold_table.is_empty() {
        let _ = writeln!(s, "\nscore distribution per rating (threshold {}, margin {})", r.threshold, r.margin);
        let _ = writeln!(
            s,
            "  {:<7}{:>5}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}",
            "rating", "n", "==1", "below", "at", "above", "==5", "margin"
        );
        for (rating, row) in &r.threshold_table {
            let pct = |x: f64| format!("{:.0}%", 100.0 * x);
            let margin = r.margin_accuracy.get(rating).map_or("-".into(), |m| pct(*m));
            let _ = writeln!(
                s,
                "  {:<7}{:>5}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}",
                rating,
                row.n,
                pct(row.eq1),
                pct(row.below),
                pct(row.at),
                pct(row.above),
                pct(row.eq5),
                margin
            );
        }
    }

    if let Some(ab) = &r.ablation {
        let _ = writeln!(s, "\nablation (rho with all features {:.3})", ab.rho_all);
        for row in &ab.rows {
            let _ = writeln!(s, "  {:<22} without {:>7.3}  delta {:>+7.3}", row.feature.as_str(), row.rho_without, row.delta);
        }
    }

    if !r.lowest_agreement.is_empty() {
        let _ = writeln!(s, "\nlowest agreement");
        for d in &r.lowest_agreement {
            let _ = writeln!(s, "  {:<16} rating {} score {:.2}", d.record_id, d.rating, d.score);
        }
    }
    s
}
