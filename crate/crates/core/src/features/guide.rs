//! Numbered step-by-step guides and their similarity to context guides.

use std::collections::HashMap;

use regex::Regex;

use crate::textprep::{lemmas, Lexicon, PrepProfile};

use super::{Diagnostics, FeatureError, FeatureName, FeatureValue};

/// Each pattern matches one numbered line and must define the groups `num`
/// (the step number) and `step` (the step text).
pub const DEFAULT_GUIDE_PATTERNS: &[&str] = &[
    r"^\s*(?P<num>\d+)\s*[.)]\s+(?P<step>.+)$",
    r"(?i)^\s*(?:stap|step)\s+(?P<num>\d+)\s*[:.)-]?\s+(?P<step>.+)$",
];

#[derive(Debug, Clone)]
pub struct GuidePatterns {
    patterns: Vec<Regex>,
}

impl GuidePatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, FeatureError> {
        let patterns = patterns
            .iter()
            .map(|p| {
                let p = p.as_ref();
                let re = Regex::new(p).map_err(|e| FeatureError::Pattern {
                    pattern: p.to_string(),
                    reason: e.to_string(),
                })?;
                let names: Vec<&str> = re.capture_names().flatten().collect();
                if !names.contains(&"num") || !names.contains(&"step") {
                    return Err(FeatureError::Pattern {
                        pattern: p.to_string(),
                        reason: "guide patterns need `num` and `step` groups".into(),
                    });
                }
                Ok(re)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GuidePatterns { patterns })
    }

    fn numbered_line<'a>(&self, line: &'a str) -> Option<(u64, &'a str)> {
        self.patterns.iter().find_map(|re| {
            let caps = re.captures(line)?;
            let num = caps.name("num")?.as_str().parse().ok()?;
            let step = caps.name("step")?.as_str().trim();
            (!step.is_empty()).then_some((num, step))
        })
    }
}

impl Default for GuidePatterns {
    fn default() -> Self {
        GuidePatterns::new(DEFAULT_GUIDE_PATTERNS).expect("default guide patterns")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guide {
    steps: Vec<String>,
}

impl Guide {
    /// `None` for fewer than two steps.
    pub fn new(steps: Vec<String>) -> Option<Self> {
        (steps.len() >= 2).then_some(Guide { steps })
    }

    pub fn steps(&self) -> &[String] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Splits `text` into maximal runs of consecutively numbered lines. Blank
/// lines inside a run are allowed; a prose line or a number that does not
/// follow its predecessor ends the run.
pub fn extract_guides(text: &str, patterns: &GuidePatterns) -> Vec<Guide> {
    let mut guides = Vec::new();
    let mut run: Vec<String> = Vec::new();
    let mut last: Option<u64> = None;
    let mut flush = |run: &mut Vec<String>| {
        if let Some(g) = Guide::new(std::mem::take(run)) {
            guides.push(g);
        }
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match patterns.numbered_line(line) {
            Some((n, step)) => {
                if last.is_some_and(|prev| n != prev + 1) {
                    flush(&mut run);
                }
                run.push(step.to_string());
                last = Some(n);
            }
            None => {
                flush(&mut run);
                last = None;
            }
        }
    }
    flush(&mut run);
    guides
}

fn term_frequencies(words: &[String]) -> HashMap<&str, f64> {
    let mut tf = HashMap::new();
    for w in words {
        *tf.entry(w.as_str()).or_insert(0.0) += 1.0;
    }
    tf
}

/// Cosine similarity of term-frequency vectors. Two empty bags are
/// identical; one empty bag is orthogonal to anything.
pub fn bag_cosine(a: &[String], b: &[String]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let (ta, tb) = (term_frequencies(a), term_frequencies(b));
    let dot: f64 = ta.iter().map(|(w, x)| x * tb.get(w).copied().unwrap_or(0.0)).sum();
    let sq = |t: &HashMap<&str, f64>| t.values().map(|x| x * x).sum::<f64>();
    (dot / (sq(&ta) * sq(&tb)).sqrt()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuideMatching {
    pub sim_threshold: f64,
    pub len_tolerance: usize,
}

fn guides_match(a: &[Vec<String>], c: &[Vec<String>], m: GuideMatching) -> bool {
    a.len().abs_diff(c.len()) <= m.len_tolerance
        && a.iter().zip(c).all(|(x, y)| bag_cosine(x, y) >= m.sim_threshold)
}

/// 1.0 when some answer guide mirrors some context guide, 0.0 otherwise
/// (including answers without a guide). Guides are extracted from each
/// context section separately. The first match in (answer guide, context
/// guide) order is reported.
pub fn verbatim_guide_feature<S: AsRef<str>>(
    answer: &str,
    context: &[S],
    patterns: &GuidePatterns,
    matching: GuideMatching,
    profile: &PrepProfile,
    lex: &Lexicon,
) -> FeatureValue {
    let normalize = |g: Guide| -> Vec<Vec<String>> { g.steps.iter().map(|s| lemmas(s, profile, lex)).collect() };
    let answer_guides: Vec<_> = extract_guides(answer, patterns).into_iter().map(normalize).collect();
    let context_guides: Vec<_> = if answer_guides.is_empty() {
        Vec::new()
    } else {
        context
            .iter()
            .flat_map(|c| extract_guides(c.as_ref(), patterns))
            .map(normalize)
            .collect()
    };
    let matched = answer_guides.iter().enumerate().find_map(|(i, a)| {
        context_guides
            .iter()
            .position(|c| guides_match(a, c, matching))
            .map(|j| (i, j))
    });
    FeatureValue::new(
        FeatureName::VerbatimGuide,
        if matched.is_some() { 1.0 } else { 0.0 },
        Diagnostics::VerbatimGuide {
            answer_guides: answer_guides.len(),
            context_guides: context_guides.len(),
            matched,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: GuideMatching = GuideMatching {
        sim_threshold: 0.8,
        len_tolerance: 1,
    };

    fn guides(text: &str) -> Vec<Vec<String>> {
        extract_guides(text, &GuidePatterns::default())
            .into_iter()
            .map(|g| g.steps)
            .collect()
    }

    fn feature(answer: &str, context: &str) -> f64 {
        verbatim_guide_feature(
            answer,
            &[context],
            &GuidePatterns::default(),
            M,
            &PrepProfile::dutch(),
            &Lexicon::empty(),
        )
        .value
    }

    #[test]
    fn two_numbered_lines() {
        assert_eq!(guides("1. open settings\n2. click salary"), vec![vec!["open settings", "click salary"]]);
        assert_eq!(guides("1) a\n2) b\n3) c")[0].len(), 3);
    }

    #[test]
    fn step_keyword() {
        assert_eq!(guides("Stap 1: open het menu\nStap 2: kies salaris")[0], vec!["open het menu", "kies salaris"]);
        assert_eq!(guides("Step 1 open\nstep 2 close").len(), 1);
    }

    #[test]
    fn prose_and_single_lines() {
        assert!(guides("Open the settings and click salary.").is_empty());
        assert!(guides("1. only one step").is_empty());
    }

    #[test]
    fn maximal_runs() {
        // Two runs split by prose, then a restart in numbering.
        let text = "Intro\n1. a\n2. b\nthen\n1. c\n\n2. d\n3. e\n1. f\n2. g";
        assert_eq!(
            guides(text),
            vec![vec!["a", "b"], vec!["c", "d", "e"], vec!["f", "g"]]
        );
    }

    #[test]
    fn cosine_values() {
        let w = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        assert_eq!(bag_cosine(&w("a b"), &w("b a")), 1.0);
        assert_eq!(bag_cosine(&w("a b"), &w("c d")), 0.0);
        assert!((bag_cosine(&w("a b"), &w("a c")) - 0.5).abs() < 1e-12);
        assert_eq!(bag_cosine(&[], &[]), 1.0);
        assert_eq!(bag_cosine(&w("a"), &[]), 0.0);
    }

    #[test]
    fn verbatim_copy_matches() {
        let ctx = "Doe het zo:\n1. Open het menu\n2. Kies Salaris\n3. Klik op opslaan";
        assert_eq!(feature("1. Open het menu\n2. Kies Salaris\n3. Klik op opslaan", ctx), 1.0);
    }

    #[test]
    fn disjoint_steps_do_not_match() {
        let ctx = "1. Open het menu\n2. Kies Salaris";
        assert_eq!(feature("1. Bel de helpdesk\n2. Wacht rustig af", ctx), 0.0);
    }

    #[test]
    fn no_answer_guide() {
        assert_eq!(feature("Ja, dat kan.", "1. a b\n2. c d"), 0.0);
    }

    #[test]
    fn length_tolerance() {
        let ctx = "1. open the menu\n2. choose salary\n3. choose year\n4. press save\n5. close window\n6. log out";
        let five = "1. open the menu\n2. choose salary\n3. choose year\n4. press save\n5. close window";
        let four = "1. open the menu\n2. choose salary\n3. choose year\n4. press save";
        assert_eq!(feature(five, ctx), 1.0);
        assert_eq!(feature(four, ctx), 0.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        // "a b c d e" vs "a b c d f": cosine = 4/5 = 0.8 exactly.
        assert_eq!(feature("1. a b c d e\n2. x y", "1. a b c d f\n2. x y"), 1.0);
        assert_eq!(feature("1. a b c e\n2. x y", "1. a b c f\n2. x y"), 0.0);
    }

    #[test]
    fn bad_patterns() {
        assert!(GuidePatterns::new(&[r"^(\d+)\. (.+)$"]).is_err());
        assert!(GuidePatterns::new(&["("]).is_err());
    }

    #[test]
    fn appending_context_copy_flips_to_match() {
        let answer = "1. Open het menu\n2. Kies Salaris";
        let ctx = "Geen stappen hier.";
        assert_eq!(feature(answer, ctx), 0.0);
        assert_eq!(feature(answer, &format!("{ctx}\n\n{answer}")), 1.0);
    }
}
