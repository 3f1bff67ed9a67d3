//! UI components (buttons, menus, settings) named in an answer.
//!
//! Help documents introduce components with a fixed markup, e.g.
//! `Klik op: Salaris`, and generated answers reuse that markup, so a regex
//! over trigger phrases finds them. An answer naming a component that does
//! not occur in the context is likely untrue.

use regex::Regex;

use super::{Diagnostics, FeatureError, FeatureName, FeatureValue};

/// Default trigger patterns (Dutch and English). The `name` group captures
/// the component up to the end of the line or clause.
pub const DEFAULT_COMPONENT_PATTERNS: &[&str] = &[
    r"(?i)\b(?:klik\s+op|ga\s+naar|kies\s+voor)\s*:\s*(?P<name>[^\n.!?;,]+)",
    r"(?i)\b(?:click\s+on|go\s+to|navigate\s+to)\s*:\s*(?P<name>[^\n.!?;,]+)",
];

#[derive(Debug, Clone)]
pub struct ComponentPatterns {
    patterns: Vec<Regex>,
}

impl ComponentPatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, FeatureError> {
        let patterns = patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref()).map_err(|e| FeatureError::Pattern {
                    pattern: p.as_ref().to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComponentPatterns { patterns })
    }
}

impl Default for ComponentPatterns {
    fn default() -> Self {
        ComponentPatterns::new(DEFAULT_COMPONENT_PATTERNS).expect("default component patterns")
    }
}

/// A normalized component name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component(String);

impl Component {
    /// Returns `None` when nothing is left after normalization.
    pub fn new(raw: &str) -> Option<Self> {
        let n = normalize(raw);
        let n = n.trim_matches(|c: char| "\"'`‘’“”«»*:;()[]".contains(c)).trim();
        (!n.is_empty()).then(|| Component(n.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Lowercases and collapses whitespace runs to single spaces.
pub(crate) fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn extract_components(text: &str, patterns: &ComponentPatterns) -> Vec<Component> {
    let mut out = Vec::new();
    for re in &patterns.patterns {
        for caps in re.captures_iter(text) {
            let m = caps.name("name").or_else(|| caps.get(1));
            if let Some(c) = m.and_then(|m| Component::new(m.as_str())) {
                out.push(c);
            }
        }
    }
    out
}

/// 1.0 when every component named in the answer occurs in the context
/// (including answers naming no component), 0.0 otherwise.
pub fn components_defined_feature(answer: &str, context: &str, patterns: &ComponentPatterns) -> FeatureValue {
    let context = normalize(context);
    let mut found: Vec<String> = extract_components(answer, patterns)
        .into_iter()
        .map(|c| c.0)
        .collect();
    found.sort();
    found.dedup();
    let undefined: Vec<String> = found
        .iter()
        .filter(|c| !context.contains(c.as_str()))
        .cloned()
        .collect();
    let value = if undefined.is_empty() { 1.0 } else { 0.0 };
    FeatureValue::new(
        FeatureName::ComponentsDefined,
        value,
        Diagnostics::Components { found, undefined },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(text: &str) -> Vec<String> {
        extract_components(text, &ComponentPatterns::default())
            .into_iter()
            .map(|c| c.0)
            .collect()
    }

    #[test]
    fn extracts_trigger_phrase() {
        assert_eq!(names("Klik op: Salaris"), vec!["salaris"]);
        assert_eq!(names("Click on: salary."), vec!["salary"]);
        assert_eq!(names("Ga naar:  'Instellingen > Loon'\nen verder"), vec!["instellingen > loon"]);
    }

    #[test]
    fn no_trigger_no_components() {
        assert!(names("Dat kan via het menu.").is_empty());
    }

    #[test]
    fn known_miss_without_markup() {
        assert!(names("The salary button should be clicked").is_empty());
    }

    #[test]
    fn defined_component() {
        let v = components_defined_feature(
            "Klik op: Salaris.",
            "In het menu klik op: Salaris om verder te gaan.",
            &ComponentPatterns::default(),
        );
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn undefined_component() {
        let v = components_defined_feature(
            "Klik op: Winstanalyse.",
            "Klik op: Salaris.",
            &ComponentPatterns::default(),
        );
        assert_eq!(v.value, 0.0);
        match v.diagnostics {
            Diagnostics::Components { undefined, .. } => assert_eq!(undefined, vec!["winstanalyse"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_components_is_vacuously_defined() {
        let v = components_defined_feature("Ja, dat kan.", "", &ComponentPatterns::default());
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn context_whitespace_is_normalized() {
        let v = components_defined_feature(
            "Click on: Tax  Rates",
            "the page\nTax\n  rates lists",
            &ComponentPatterns::default(),
        );
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn custom_pattern_group_one() {
        let p = ComponentPatterns::new(&[r"\[([^\]]+)\]"]).unwrap();
        let found: Vec<_> = extract_components("Press [OK] then [Cancel]", &p).into_iter().map(|c| c.0).collect();
        assert_eq!(found, vec!["ok", "cancel"]);
        assert!(ComponentPatterns::new(&["("]).is_err());
    }
}
