//! Hyperspace Analogue to Language co-occurrence matrices.
//!
//! Every pair of distinct words at distance `d <= window` contributes
//! `window - d + 1` to the pair's weight, so adjacent words weigh most.
//! Pairs are unordered: `weight(a, b) == weight(b, a)`.

use std::collections::HashMap;

use super::{Diagnostics, FeatureName, FeatureValue};

#[derive(Debug, Clone)]
pub struct HalMatrix {
    window: usize,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// Sorted by packed pair key.
    weights: Vec<(u64, f64)>,
    max_weight: f64,
}

impl HalMatrix {
    /// Panics if `window` is zero.
    pub fn build<S: AsRef<str>>(tokens: &[S], window: usize) -> Self {
        assert!(window >= 1, "HAL window must be at least 1");
        let mut vocab = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let ids: Vec<u32> = tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                if let Some(&id) = index.get(t) {
                    return id;
                }
                let id = vocab.len() as u32;
                vocab.push(t.to_string());
                index.insert(t.to_string(), id);
                id
            })
            .collect();

        // Integer weights packed as `(low id << 32 | high id, weight)`; sorting
        // and merging is much cheaper than hashing every increment.
        let mut entries: Vec<(u64, u64)> = Vec::with_capacity(ids.len() * window);
        for (i, &a) in ids.iter().enumerate() {
            for (d, &b) in ids[i + 1..].iter().take(window).enumerate() {
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    entries.push(((u64::from(lo) << 32) | u64::from(hi), (window - d) as u64));
                }
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut weights: Vec<(u64, f64)> = Vec::new();
        for (key, w) in entries {
            match weights.last_mut() {
                Some(last) if last.0 == key => last.1 += w as f64,
                _ => weights.push((key, w as f64)),
            }
        }
        let max_weight = weights.iter().map(|e| e.1).fold(0.0, f64::max);
        HalMatrix {
            window,
            vocab,
            index,
            weights,
            max_weight,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weight(&self, a: &str, b: &str) -> f64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&x), Some(&y)) if x != y => {
                let key = if x < y { (x, y) } else { (y, x) };
                let key = (u64::from(key.0) << 32) | u64::from(key.1);
                self.weights
                    .binary_search_by_key(&key, |e| e.0)
                    .map_or(0.0, |i| self.weights[i].1)
            }
            _ => 0.0,
        }
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// All pairs as `(a, b, weight)` with `a < b`, sorted by `(a, b)`.
    pub fn pairs(&self) -> Vec<(&str, &str, f64)> {
        let mut out: Vec<_> = self
            .weights
            .iter()
            .map(|&(key, w)| {
                let (x, y) = ((key >> 32) as usize, (key & 0xffff_ffff) as usize);
                let (a, b) = (self.vocab[x].as_str(), self.vocab[y].as_str());
                if a < b {
                    (a, b, w)
                } else {
                    (b, a, w)
                }
            })
            .collect();
        out.sort_by(|l, r| (l.0, l.1).cmp(&(r.0, r.1)));
        out
    }

    /// The `k` heaviest pairs; equal weights are ordered by `(a, b)`.
    pub fn top_pairs(&self, k: usize) -> Vec<(&str, &str, f64)> {
        let mut pairs = self.pairs();
        pairs.sort_by(|l, r| r.2.total_cmp(&l.2).then_with(|| (l.0, l.1).cmp(&(r.0, r.1))));
        pairs.truncate(k);
        pairs
    }
}

/// Mean grounding of the answer's strongest pairs in one window, or `None`
/// when the answer has no pairs.
fn grounding(answer: &HalMatrix, context: &HalMatrix, top_k: usize) -> Option<f64> {
    let top = answer.top_pairs(top_k);
    if top.is_empty() {
        return None;
    }
    let ctx_max = context.max_weight();
    let ans_max = answer.max_weight();
    let sum: f64 = top
        .iter()
        .map(|&(a, b, w)| {
            if ctx_max == 0.0 {
                return 0.0;
            }
            let ctx = context.weight(a, b) / ctx_max;
            let ans = w / ans_max;
            (ctx / ans).min(1.0)
        })
        .sum();
    Some(sum / top.len() as f64)
}

/// Averages, over the configured windows, how well the answer's strongest
/// co-occurrences are reproduced in the context. Both matrices are scaled
/// by their own maximum weight before comparison. An answer without any
/// pair scores 0.5.
pub fn hal_feature<S: AsRef<str>>(
    answer: &[S],
    context: &[S],
    windows: &[usize],
    top_k: usize,
) -> FeatureValue {
    let mut per_window = Vec::with_capacity(windows.len());
    for &w in windows {
        let a = HalMatrix::build(answer, w);
        let c = HalMatrix::build(context, w);
        per_window.push(grounding(&a, &c, top_k));
    }
    let defined: Vec<f64> = per_window.iter().flatten().copied().collect();
    let value = if defined.is_empty() {
        0.5
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    FeatureValue::new(
        FeatureName::Hal,
        value,
        Diagnostics::Hal {
            windows: windows.to_vec(),
            per_window,
        },
    )
}
