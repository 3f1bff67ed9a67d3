use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use truthscore::features::FeatureConfig;
use truthscore::score::DEFAULT_THRESHOLD;
use truthscore::textprep::LexiconPaths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Original (Dutch) text for every feature.
    #[default]
    Dutch,
    /// English text: translated on the fly, or records already in English.
    English,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Message-type rules; built-in rules when unset.
    pub rules: Option<PathBuf>,
    pub dutch_lexicon: LexiconPaths,
    pub english_lexicon: LexiconPaths,
    /// JSONL translation cache; in memory when unset.
    pub translation_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Translation {
    pub enabled: bool,
    /// `http(s)://...` for a JSON translation service or `stub:<file.tsv>`
    /// for a fixed dictionary.
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub retries: u32,
}

impl Default for Translation {
    fn default() -> Self {
        Translation {
            enabled: false,
            endpoint: None,
            timeout_ms: 10_000,
            retries: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scoring {
    pub threshold: f64,
}

impl Default for Scoring {
    fn default() -> Self {
        Scoring {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub profile: Profile,
    pub include_system_prompt_in_context: bool,
    pub paths: Paths,
    pub translation: Translation,
    pub scoring: Scoring,
    pub features: FeatureConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            profile: Profile::Dutch,
            include_system_prompt_in_context: true,
            paths: Paths::default(),
            translation: Translation::default(),
            scoring: Scoring::default(),
            features: FeatureConfig::default(),
        }
    }
}

impl AppConfig {
    /// Reads a TOML file. Relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: AppConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(dir) = path.parent() {
            cfg.resolve_relative(dir);
        }
        Ok(cfg)
    }

    fn resolve_relative(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = dir.join(&*q);
                }
            }
        };
        fix(&mut self.paths.rules);
        fix(&mut self.paths.translation_cache);
        fix(&mut self.features.pos_lexicon);
        for lex in [&mut self.paths.dutch_lexicon, &mut self.paths.english_lexicon] {
            for p in [
                &mut lex.stopwords,
                &mut lex.lemmas,
                &mut lex.perspective,
                &mut lex.comparison,
                &mut lex.examples,
                &mut lex.reasoning,
                &mut lex.general_wordlist,
                &mut lex.company_terms,
            ] {
                fix(p);
            }
        }
        if let Some(ep) = &mut self.translation.endpoint {
            if let Some(file) = ep.strip_prefix("stub:") {
                let p = Path::new(file);
                if p.is_relative() {
                    *ep = format!("stub:{}", dir.join(p).display());
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if !self.scoring.threshold.is_finite() || !(1.0..=5.0).contains(&self.scoring.threshold) {
            bail!("scoring.threshold must be within [1, 5]");
        }
        if self.translation.enabled && self.profile != Profile::English {
            bail!("translation requires the english profile");
        }
        if self.translation.enabled && self.translation.endpoint.is_none() {
            bail!("translation.enabled needs translation.endpoint");
        }
        Ok(())
    }
}
