//! Machine translation of records, with a persistent line-delimited cache.
//!
//! [`TranslationClient`] has two implementations: [`HttpTranslator`] speaks a
//! small JSON protocol (`{source_lang, target_lang, text}` → `{text}`), and
//! [`StubTranslator`] is a deterministic dictionary-backed client for tests
//! and offline runs.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Language, Record};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("http error: {0}")]
    Http(String),
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("no translation available for `{0}`")]
    Missing(String),
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("record `{0}` is not Dutch")]
    NotDutch(String),
    #[error("record `{record_id}`: translating `{field}` failed: {source}")]
    Field {
        record_id: String,
        field: String,
        #[source]
        source: ClientError,
    },
    #[error("translation cache {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("stub dictionary {path}: {reason}")]
    Stub { path: String, reason: String },
}

pub trait TranslationClient: Send + Sync {
    fn translate(&self, text: &str, source: Language, target: Language) -> Result<String, ClientError>;
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    source_lang: &'a str,
    target_lang: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct HttpResponse {
    text: String,
}

/// JSON-over-HTTP translation client. Every request is attempted
/// `1 + retries` times.
pub struct HttpTranslator {
    endpoint: String,
    agent: ureq::Agent,
    retries: u32,
}

impl HttpTranslator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(true)
            .build()
            .into();
        HttpTranslator {
            endpoint: endpoint.into(),
            agent,
            retries,
        }
    }

    fn attempt(&self, req: &HttpRequest<'_>) -> Result<String, ClientError> {
        let mut resp = self.agent.post(&self.endpoint).send_json(req).map_err(|e| match e {
            ureq::Error::Timeout(t) => ClientError::Timeout(t.to_string()),
            other => ClientError::Http(other.to_string()),
        })?;
        let body: HttpResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Protocol(e.to_string()))?;
        Ok(body.text)
    }
}

impl TranslationClient for HttpTranslator {
    fn translate(&self, text: &str, source: Language, target: Language) -> Result<String, ClientError> {
        let req = HttpRequest {
            source_lang: source.code(),
            target_lang: target.code(),
            text,
        };
        let mut last = None;
        for attempt in 0..=self.retries {
            match self.attempt(&req) {
                Ok(t) => return Ok(t),
                Err(e) => {
                    log::warn!("translation attempt {} failed: {e}", attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

/// Dictionary-backed translator. A text with an exact entry is replaced as a
/// whole; otherwise each whitespace-separated word with an entry (compared
/// case-insensitively, ignoring surrounding punctuation) is replaced and all
/// other words are kept.
#[derive(Debug, Clone, Default)]
pub struct StubTranslator {
    entries: HashMap<String, String>,
}

impl StubTranslator {
    pub fn new<I, A, B>(entries: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        StubTranslator {
            entries: entries
                .into_iter()
                .map(|(a, b)| (a.into().to_lowercase(), b.into()))
                .collect(),
        }
    }

    /// Loads `source<TAB>translation` lines.
    pub fn load(path: &Path) -> Result<Self, TranslateError> {
        let err = |reason: String| TranslateError::Stub {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("line {}: expected a tab", i + 1)))?;
            entries.push((a.trim().to_string(), b.trim().to_string()));
        }
        Ok(StubTranslator::new(entries))
    }
}

impl TranslationClient for StubTranslator {
    fn translate(&self, text: &str, _source: Language, _target: Language) -> Result<String, ClientError> {
        if let Some(t) = self.entries.get(&text.trim().to_lowercase()) {
            return Ok(t.clone());
        }
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while !rest.is_empty() {
            let ws_end = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
            out.push_str(&rest[..ws_end]);
            rest = &rest[ws_end..];
            let word_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let word = &rest[..word_end];
            let core = word.trim_matches(|c: char| !c.is_alphanumeric());
            match self.entries.get(&core.to_lowercase()) {
                Some(t) if !core.is_empty() => out.push_str(&word.replacen(core, t, 1)),
                _ => out.push_str(word),
            }
            rest = &rest[word_end..];
        }
        Ok(out)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    key: String,
    source: String,
    translated: String,
}

/// Translation cache keyed by language pair and SHA-256 of the source text.
///
/// Reads are concurrent; inserts are serialized and appended to the backing
/// file as they happen.
pub struct TranslationCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, String>>,
    writer: Mutex<Option<BufWriter<File>>>,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        TranslationCache {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    /// Opens (creating if needed) a cache file. Unparseable lines are
    /// skipped with a warning.
    pub fn open(path: &Path) -> Result<Self, TranslateError> {
        let cache_err = |source| TranslateError::Cache {
            path: path.display().to_string(),
            source,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(cache_err)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(cache_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(l) => {
                        entries.insert(l.key, l.translated);
                    }
                    Err(e) => log::warn!("{}: skipping cache line {}: {e}", path.display(), i + 1),
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(cache_err)?;
        Ok(TranslationCache {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(BufWriter::new(file))),
        })
    }

    pub fn key(source: Language, target: Language, text: &str) -> String {
        let digest = Sha256::digest(text.as_bytes());
        format!("{}-{}:{}", source.code(), target.code(), hex::encode(digest))
    }

    pub fn get(&self, source: Language, target: Language, text: &str) -> Option<String> {
        let key = Self::key(source, target, text);
        self.entries.read().expect("cache lock").get(&key).cloned()
    }

    pub fn insert(
        &self,
        source: Language,
        target: Language,
        text: &str,
        translated: &str,
    ) -> Result<(), TranslateError> {
        let key = Self::key(source, target, text);
        let mut writer = self.writer.lock().expect("cache writer lock");
        {
            let mut entries = self.entries.write().expect("cache lock");
            if entries.get(&key).map(String::as_str) == Some(translated) {
                return Ok(());
            }
            entries.insert(key.clone(), translated.to_string());
        }
        if let Some(w) = writer.as_mut() {
            let line = serde_json::to_string(&CacheLine {
                key,
                source: text.to_string(),
                translated: translated.to_string(),
            })
            .expect("cache line serializes");
            let path = self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            writeln!(w, "{line}")
                .and_then(|_| w.flush())
                .map_err(|source| TranslateError::Cache { path, source })?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn translate_field(
    record_id: &str,
    field: String,
    text: &str,
    client: &dyn TranslationClient,
    cache: &TranslationCache,
) -> Result<String, TranslateError> {
    let (src, tgt) = (Language::Dutch, Language::English);
    if let Some(hit) = cache.get(src, tgt, text) {
        return Ok(hit);
    }
    let translated = client
        .translate(text, src, tgt)
        .map_err(|source| TranslateError::Field {
            record_id: record_id.to_string(),
            field,
            source,
        })?;
    cache.insert(src, tgt, text, &translated)?;
    Ok(translated)
}

/// Returns an English copy of a Dutch record. Message, answer, system
/// prompt and every context title and body are translated; either all
/// fields succeed or an error naming the first failing field is returned.
pub fn translate_record(
    r: &Record,
    client: &dyn TranslationClient,
    cache: &TranslationCache,
) -> Result<Record, TranslateError> {
    if r.language != Language::Dutch {
        return Err(TranslateError::NotDutch(r.id.clone()));
    }
    let tr = |field: String, text: &str| translate_field(&r.id, field, text, client, cache);
    let mut out = r.clone();
    out.message = tr("message".into(), &r.message)?;
    out.answer = tr("answer".into(), &r.answer)?;
    for (i, doc) in out.context.iter_mut().enumerate() {
        if !doc.title.trim().is_empty() {
            doc.title = tr(format!("context[{i}].title"), &doc.title)?;
        }
        doc.body = tr(format!("context[{i}].body"), &doc.body)?;
    }
    if let Some(p) = &r.system_prompt {
        out.system_prompt = Some(tr("system_prompt".into(), p)?);
    }
    out.language = Language::English;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ContextDoc;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting<C> {
        inner: C,
        calls: AtomicUsize,
    }

    impl<C: TranslationClient> TranslationClient for Counting<C> {
        fn translate(&self, text: &str, s: Language, t: Language) -> Result<String, ClientError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.translate(text, s, t)
        }
    }

    struct TimingOut;

    impl TranslationClient for TimingOut {
        fn translate(&self, _: &str, _: Language, _: Language) -> Result<String, ClientError> {
            Err(ClientError::Timeout("5000ms".into()))
        }
    }

    fn record() -> Record {
        Record::new("r1", "Hoe wijzig ik de belasting?", "Open de belasting pagina.")
            .with_context(ContextDoc::new("d1", "", "De belasting staat onder Salaris."))
    }

    fn stub() -> StubTranslator {
        StubTranslator::new([("belasting", "tax"), ("salaris", "salary"), ("de", "the")])
    }

    #[test]
    fn stub_translates_deterministically() {
        let cache = TranslationCache::in_memory();
        let out = translate_record(&record(), &stub(), &cache).unwrap();
        assert_eq!(out.language, Language::English);
        assert_eq!(out.context[0].body, "the tax staat onder salary.");
        assert_eq!(out.message, "Hoe wijzig ik the tax?");
        // Original untouched.
        assert_eq!(record().language, Language::Dutch);
        assert_eq!(cache.len(), 3);
    }

    #[test]
    fn cache_hits_skip_client() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let cache = TranslationCache::open(&path).unwrap();
            translate_record(&record(), &stub(), &cache).unwrap();
        }
        let cache = TranslationCache::open(&path).unwrap();
        assert_eq!(cache.len(), 3);
        let counting = Counting {
            inner: stub(),
            calls: AtomicUsize::new(0),
        };
        let a = translate_record(&record(), &counting, &cache).unwrap();
        assert_eq!(counting.calls.load(Ordering::SeqCst), 0);
        let b = translate_record(&record(), &TimingOut, &cache).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failure_names_field() {
        let cache = TranslationCache::in_memory();
        let err = translate_record(&record(), &TimingOut, &cache).unwrap_err();
        match err {
            TranslateError::Field { record_id, field, source } => {
                assert_eq!(record_id, "r1");
                assert_eq!(field, "message");
                assert!(matches!(source, ClientError::Timeout(_)));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn partial_failure_emits_nothing() {
        struct FailOnContext;
        impl TranslationClient for FailOnContext {
            fn translate(&self, text: &str, _: Language, _: Language) -> Result<String, ClientError> {
                if text.contains("Salaris") {
                    Err(ClientError::Http("503".into()))
                } else {
                    Ok(text.to_uppercase())
                }
            }
        }
        let cache = TranslationCache::in_memory();
        let err = translate_record(&record(), &FailOnContext, &cache).unwrap_err();
        assert!(err.to_string().contains("context[0].body"), "{err}");
    }

    #[test]
    fn english_record_rejected() {
        let r = record().with_language(Language::English);
        assert!(matches!(
            translate_record(&r, &stub(), &TranslationCache::in_memory()),
            Err(TranslateError::NotDutch(_))
        ));
    }

    #[test]
    fn cache_key_depends_on_pair_and_text() {
        let a = TranslationCache::key(Language::Dutch, Language::English, "x");
        let b = TranslationCache::key(Language::English, Language::Dutch, "x");
        let c = TranslationCache::key(Language::Dutch, Language::English, "y");
        assert!(a.starts_with("nl-en:"));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), "nl-en:".len() + 64);
    }

    #[test]
    fn concurrent_inserts_are_all_persisted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let cache = TranslationCache::open(&path).unwrap();
        std::thread::scope(|s| {
            for t in 0..8 {
                let cache = &cache;
                s.spawn(move || {
                    for i in 0..50 {
                        let text = format!("t{t}-{i}");
                        cache.insert(Language::Dutch, Language::English, &text, &text.to_uppercase()).unwrap();
                    }
                });
            }
        });
        drop(cache);
        let reopened = TranslationCache::open(&path).unwrap();
        assert_eq!(reopened.len(), 400);
        assert_eq!(
            reopened.get(Language::Dutch, Language::English, "t3-7").as_deref(),
            Some("T3-7")
        );
    }
}
