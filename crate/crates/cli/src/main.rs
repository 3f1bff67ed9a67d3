mod config;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use truthscore::classify::{classify_message, histogram, MessageType, TypeRules};
use truthscore::corpus::{load_dataset, Dataset, Language, Record};
use truthscore::eval::{self, EvalOptions};
use truthscore::features::{
    build_company_lexicon, FeatureExtractor, LanguageResources, NearestNounExtractor, PosLexicon,
};
use truthscore::score::{count_below, write_scored, Scorer};
use truthscore::textprep::translate::{
    translate_record, HttpTranslator, StubTranslator, TranslationCache, TranslationClient,
};
use truthscore::textprep::{Lexicon, LexiconPaths, PrepProfile};

use config::{AppConfig, Profile};

#[derive(Parser, Debug)]
#[command(name = "truthscore", version, about = "Reference-free truthfulness scores for chatbot answers")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "TRUTHSCORE_CONFIG")]
    config: Option<PathBuf>,
    /// Text profile; overrides the config file.
    #[arg(long, global = true, value_enum, env = "TRUTHSCORE_PROFILE")]
    profile: Option<Profile>,
    /// Scoring threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0, env = "TRUTHSCORE_WORKERS")]
    workers: usize,
    /// Seed for randomized modes.
    #[arg(long, global = true, env = "TRUTHSCORE_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a company-terms list from help documentation.
    BuildLexicon {
        /// Directory of plain-text help documents.
        #[arg(long)]
        help_docs: PathBuf,
        /// General-language word list (one word per line).
        #[arg(long)]
        general: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assign message types and print a histogram.
    Classify {
        #[arg(long)]
        dataset: PathBuf,
        /// Rules file; overrides the config file.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Write `id<TAB>type` lines here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every record and write JSON lines.
    Score {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: ScoringArgs,
    },
    /// Score and compare against human ratings and type annotations.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: ScoringArgs,
        #[arg(long)]
        margin: Option<f64>,
        /// Permutation p-values; needs --seed.
        #[arg(long)]
        permutations: Option<usize>,
        /// Add a leave-one-feature-out table.
        #[arg(long)]
        ablate: bool,
    },
    /// Manage the translation cache.
    TranslateCache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args, Debug)]
struct ScoringArgs {
    /// Translate Dutch records to English before the translation-dependent
    /// features; implies the english profile.
    #[arg(long)]
    translate: bool,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    /// Translate every record of a dataset into the cache.
    Warm {
        #[arg(long)]
        dataset: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    if let Some(p) = cli.profile {
        cfg.profile = p;
    }
    match cli.command {
        Command::BuildLexicon {
            help_docs,
            general,
            n,
            out,
        } => cmd_build_lexicon(&cfg, &help_docs, general.as_deref(), n, &out),
        Command::Classify { dataset, rules, out } => {
            let rules = rules.or(cfg.paths.rules.clone());
            cmd_classify(&dataset, rules.as_deref(), out.as_deref())
        }
        Command::Score { dataset, out, common } => {
            apply_scoring_args(&mut cfg, &common);
            cfg.validate()?;
            cmd_score(&cfg, &dataset, &out, cli.workers)
        }
        Command::Evaluate {
            dataset,
            out_dir,
            common,
            margin,
            permutations,
            ablate,
        } => {
            apply_scoring_args(&mut cfg, &common);
            cfg.validate()?;
            if permutations.is_some() && cli.seed.is_none() {
                bail!("--permutations needs an explicit --seed");
            }
            let opts = EvalOptions {
                threshold: cfg.scoring.threshold,
                margin: margin.unwrap_or(1.0),
                permutations,
                seed: cli.seed.unwrap_or(0),
                ablate,
                workers: cli.workers,
                ..EvalOptions::default()
            };
            cmd_evaluate(&cfg, &dataset, &out_dir, &opts)
        }
        Command::TranslateCache {
            action: CacheAction::Warm { dataset },
        } => {
            cfg.translation.enabled = true;
            cfg.profile = Profile::English;
            cfg.validate()?;
            cmd_warm(&cfg, &dataset)
        }
    }
}

fn apply_scoring_args(cfg: &mut AppConfig, args: &ScoringArgs) {
    if args.translate {
        cfg.translation.enabled = true;
        cfg.profile = Profile::English;
    }
    if let Some(t) = args.threshold {
        cfg.scoring.threshold = t;
    }
    cfg.features.include_system_prompt_in_context = cfg.include_system_prompt_in_context;
}

fn load(path: &Path) -> Result<Dataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let rep = load_dataset(path, &name).with_context(|| format!("loading {}", path.display()))?;
    for s in &rep.skipped {
        log::warn!("{}: skipped line {}: {}", path.display(), s.line, s.reason);
    }
    if !rep.unknown_fields.is_empty() {
        log::info!("ignored fields: {}", rep.unknown_fields.iter().cloned().collect::<Vec<_>>().join(", "));
    }
    Ok(rep.dataset)
}

fn load_rules(path: Option<&Path>) -> Result<TypeRules> {
    match path {
        Some(p) => TypeRules::load(p).with_context(|| format!("loading rules {}", p.display())),
        None => Ok(TypeRules::default()),
    }
}

fn resources(language: Language, paths: &LexiconPaths) -> Result<LanguageResources> {
    let profile = match language {
        Language::Dutch => PrepProfile::dutch(),
        Language::English => PrepProfile::english(),
    };
    let lexicon = Lexicon::load(language, paths).with_context(|| format!("loading {language:?} lexicon"))?;
    Ok(LanguageResources::new(language, profile, lexicon))
}

fn translator(cfg: &AppConfig) -> Result<Box<dyn TranslationClient>> {
    let endpoint = cfg.translation.endpoint.as_deref().context("no translation endpoint configured")?;
    Ok(match endpoint.strip_prefix("stub:") {
        Some(file) => Box::new(StubTranslator::load(Path::new(file))?),
        None => Box::new(HttpTranslator::new(
            endpoint,
            Duration::from_millis(cfg.translation.timeout_ms),
            cfg.translation.retries,
        )),
    })
}

fn open_cache(cfg: &AppConfig) -> Result<TranslationCache> {
    Ok(match &cfg.paths.translation_cache {
        Some(p) => TranslationCache::open(p)?,
        None => TranslationCache::in_memory(),
    })
}

fn translate_all(cfg: &AppConfig, ds: &Dataset) -> Result<HashMap<String, Record>> {
    let client = translator(cfg)?;
    let cache = open_cache(cfg)?;
    let before = cache.len();
    let mut out = HashMap::with_capacity(ds.records.len());
    for r in &ds.records {
        let t = translate_record(r, client.as_ref(), &cache)?;
        out.insert(r.id.clone(), t);
    }
    log::info!("translation cache: {} new entries, {} total", cache.len() - before, cache.len());
    Ok(out)
}

/// Builds the scorer and, in translated mode, the English copies.
fn prepare(cfg: &AppConfig, ds: &Dataset) -> Result<(Scorer, Option<HashMap<String, Record>>)> {
    let rules = load_rules(cfg.paths.rules.as_deref())?;
    let (native, mut translated, translations) = match (cfg.profile, cfg.translation.enabled) {
        (Profile::Dutch, _) => (resources(Language::Dutch, &cfg.paths.dutch_lexicon)?, None, None),
        (Profile::English, false) => {
            if let Some(r) = ds.records.iter().find(|r| r.language != Language::English) {
                bail!(
                    "record {} is not tagged English; the english profile without translation needs English records",
                    r.id
                );
            }
            (resources(Language::English, &cfg.paths.english_lexicon)?, None, None)
        }
        (Profile::English, true) => (
            resources(Language::Dutch, &cfg.paths.dutch_lexicon)?,
            Some(resources(Language::English, &cfg.paths.english_lexicon)?),
            Some(translate_all(cfg, ds)?),
        ),
    };
    let mut native = native;
    if let Some(p) = &cfg.features.pos_lexicon {
        let pos = PosLexicon::load(p)?;
        let target = translated.as_mut().unwrap_or(&mut native);
        *target = target.clone().with_pair_extractor(Arc::new(NearestNounExtractor::new(pos)));
    }
    let extractor = FeatureExtractor::new(cfg.features.clone(), native, translated)?;
    Ok((Scorer::new(rules, extractor), translations))
}

fn cmd_build_lexicon(cfg: &AppConfig, dir: &Path, general: Option<&Path>, n: usize, out: &Path) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no help documents in {}", dir.display());
    }
    let docs = files
        .iter()
        .map(|p| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;

    let language = match cfg.profile {
        Profile::Dutch => Language::Dutch,
        Profile::English => Language::English,
    };
    let paths = match language {
        Language::Dutch => &cfg.paths.dutch_lexicon,
        Language::English => &cfg.paths.english_lexicon,
    };
    let res = resources(language, paths)?;
    let general_words: HashSet<String> = match general {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect(),
        None => res.lexicon.general_wordlist().clone(),
    };
    let terms = build_company_lexicon(&docs, &general_words, n, &res.profile, &res.lexicon);
    if terms.is_empty() {
        log::warn!("company lexicon is empty; every frequent word is in the general list");
    }
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    for (word, _) in &terms {
        writeln!(w, "{word}")?;
    }
    w.flush()?;
    println!("{} terms from {} documents written to {}", terms.len(), docs.len(), out.display());
    Ok(())
}

fn print_histogram(hist: &BTreeMap<MessageType, usize>) {
    for t in MessageType::ALL {
        println!("{:<12} {}", t.as_str(), hist.get(&t).copied().unwrap_or(0));
    }
}

fn cmd_classify(dataset: &Path, rules: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let rules = load_rules(rules)?;
    let ds = load(dataset)?;
    let labels: Vec<MessageType> = ds.records.iter().map(|r| classify_message(&r.message, &rules)).collect();
    if let Some(out) = out {
        let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
        for (r, t) in ds.records.iter().zip(&labels) {
            writeln!(w, "{}\t{}", r.id, t.as_str())?;
        }
        w.flush()?;
    }
    print_histogram(&histogram(labels));
    Ok(())
}

fn cmd_score(cfg: &AppConfig, dataset: &Path, out: &Path, workers: usize) -> Result<()> {
    let ds = load(dataset)?;
    let (scorer, translations) = prepare(cfg, &ds)?;
    let results = scorer.score_dataset(&ds, translations.as_ref(), workers)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_scored(&ds.records, &results, BufWriter::new(file))?;

    let scored = results.iter().filter(|r| !r.abstained).count();
    let below = count_below(&results, cfg.scoring.threshold);
    println!("{} records, {} scored, {} abstained", results.len(), scored, results.len() - scored);
    println!("{below} scored records below {} (do not send)", cfg.scoring.threshold);
    Ok(())
}

fn cmd_evaluate(cfg: &AppConfig, dataset: &Path, out_dir: &Path, opts: &EvalOptions) -> Result<()> {
    let ds = load(dataset)?;
    let (scorer, translations) = prepare(cfg, &ds)?;
    let report = eval::report(&ds, &scorer, translations.as_ref(), opts, out_dir)?;
    print!("{}", eval::render_text(&report));
    Ok(())
}

fn cmd_warm(cfg: &AppConfig, dataset: &Path) -> Result<()> {
    if cfg.paths.translation_cache.is_none() {
        bail!("paths.translation_cache must be set to warm a cache");
    }
    let ds = load(dataset)?;
    let dutch: Vec<Record> = ds
        .records
        .iter()
        .filter(|r| r.language == Language::Dutch)
        .cloned()
        .collect();
    let skipped = ds.records.len() - dutch.len();
    let warmed = translate_all(
        cfg,
        &Dataset {
            name: ds.name.clone(),
            records: dutch,
        },
    )?;
    println!("{} records translated, {skipped} non-Dutch records skipped", warmed.len());
    Ok(())
}
