//! Toxicity scoring and threshold filtering.
//!
//! Two providers implement [`ToxicityScorer`]: [`RemoteScorer`], an HTTP client for an
//! AnalyzeComment-style endpoint, and [`StubScorer`], a deterministic lexicon counter for
//! tests and offline runs. The stub's lexicon and slope are arbitrary fixtures and carry
//! no scientific meaning.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::{debug, warn};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.7;
pub const DEFAULT_ENDPOINT: &str =
    "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze";
pub const DEFAULT_API_KEY_ENV: &str = "PERSPECTIVE_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    Remote,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicityScore {
    #[serde(rename = "id")]
    pub record_id: String,
    pub value: f64,
    pub provider: Provider,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToxicityConfig {
    pub threshold: f64,
    pub endpoint: String,
    pub max_retries: u32,
    pub requests_per_second: f64,
    /// Upper bound on in-flight requests.
    pub concurrency: usize,
    /// First retry delay; doubles on every further attempt.
    pub backoff_base_ms: u64,
    pub timeout_secs: u64,
    pub api_key_env: String,
}

impl Default for ToxicityConfig {
    fn default() -> Self {
        ToxicityConfig {
            threshold: DEFAULT_THRESHOLD,
            endpoint: DEFAULT_ENDPOINT.to_string(),
            max_retries: 5,
            requests_per_second: 1.0,
            concurrency: 4,
            backoff_base_ms: 500,
            timeout_secs: 30,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
        }
    }
}

impl ToxicityConfig {
    pub fn validate(&self) -> Result<()> {
        validate_threshold(self.threshold)?;
        if !(self.requests_per_second.is_finite() && self.requests_per_second > 0.0) {
            return Err(Error::config("requests_per_second must be positive"));
        }
        if self.concurrency == 0 {
            return Err(Error::config("concurrency must be at least 1"));
        }
        if self.endpoint.is_empty() {
            return Err(Error::config("endpoint is empty"));
        }
        Ok(())
    }
}

pub fn validate_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "toxicity threshold {threshold} is outside [0, 1]"
        )))
    }
}

pub trait ToxicityScorer {
    fn provider(&self) -> Provider;

    /// One score in `[0, 1]` per text, in input order.
    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>>;
}

/// Lowercase terms counted by [`StubScorer`].
pub const STUB_LEXICON: &[&str] = &[
    "idiot",
    "idiots",
    "stupid",
    "moron",
    "morons",
    "dumb",
    "hate",
    "disgusting",
    "pathetic",
    "shit",
    "crap",
    "damn",
    "hell",
    "trash",
    "garbage",
    "scum",
    "loser",
    "losers",
    "liar",
    "liars",
    "fool",
    "clown",
    "clowns",
    "evil",
    "sick",
    "nasty",
    "ugly",
    "freak",
    "filthy",
    "disgrace",
    "shameful",
    "coward",
    "cowards",
];

/// Each lexicon hit adds 1/3, saturating at 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubScorer;

impl StubScorer {
    pub fn score(text: &str) -> f64 {
        let hits = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .filter(|w| {
                let lower = w.to_lowercase();
                STUB_LEXICON.contains(&lower.as_str())
            })
            .count();
        (hits as f64 / 3.0).min(1.0)
    }
}

impl ToxicityScorer for StubScorer {
    fn provider(&self) -> Provider {
        Provider::Stub
    }

    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>> {
        Ok(score_stub(texts))
    }
}

pub fn score_stub(texts: &[&str]) -> Vec<f64> {
    texts.iter().map(|t| StubScorer::score(t)).collect()
}

/// Spaces request start times at least `1 / requests_per_second` apart.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(requests_per_second: f64) -> Self {
        RateLimiter {
            interval: Duration::from_secs_f64(1.0 / requests_per_second),
            next_slot: Mutex::new(None),
        }
    }

    /// Blocks until the caller may start a request.
    pub fn acquire(&self) {
        let slot = {
            let mut next = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}

pub struct RemoteScorer {
    config: ToxicityConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

enum Attempt {
    Done(f64),
    Transient(String),
}

impl RemoteScorer {
    /// Reads the API key from the environment variable named in the config, if set.
    pub fn from_env(config: ToxicityConfig) -> Result<Self> {
        let key = std::env::var(&config.api_key_env).ok();
        Self::new(config, key)
    }

    pub fn new(config: ToxicityConfig, api_key: Option<String>) -> Result<Self> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        let limiter = RateLimiter::new(config.requests_per_second);
        Ok(RemoteScorer {
            config,
            api_key,
            agent,
            limiter,
        })
    }

    fn url(&self) -> String {
        match &self.api_key {
            Some(key) => {
                let sep = if self.config.endpoint.contains('?') {
                    '&'
                } else {
                    '?'
                };
                format!("{}{sep}key={key}", self.config.endpoint)
            }
            None => self.config.endpoint.clone(),
        }
    }

    pub fn request_body(text: &str) -> Value {
        json!({
            "comment": { "text": text },
            "requestedAttributes": { "TOXICITY": {} }
        })
    }

    /// Pulls `attributeScores.TOXICITY.summaryScore.value` and range-checks it.
    pub fn parse_response(index: usize, body: &Value) -> Result<f64> {
        let value = body
            .pointer("/attributeScores/TOXICITY/summaryScore/value")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Protocol {
                index,
                message: "response lacks attributeScores.TOXICITY.summaryScore.value".into(),
            })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Protocol {
                index,
                message: format!("score {value} is outside [0, 1]"),
            });
        }
        Ok(value)
    }

    fn attempt(&self, index: usize, url: &str, body: &Value) -> Result<Attempt> {
        self.limiter.acquire();
        let response = match self.agent.post(url).send_json(body) {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Transient(e.to_string())),
        };
        let status = response.status().as_u16();
        if status == 429 || (500..600).contains(&status) {
            return Ok(Attempt::Transient(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(Error::Provider {
                index,
                message: format!("HTTP {status}"),
            });
        }
        let parsed: Value = response
            .into_body()
            .read_json()
            .map_err(|e| Error::Protocol {
                index,
                message: format!("unreadable response body: {e}"),
            })?;
        Self::parse_response(index, &parsed).map(Attempt::Done)
    }

    fn score_one(&self, index: usize, text: &str) -> Result<f64> {
        let url = self.url();
        let body = Self::request_body(text);
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let factor = 1u64 << (attempt - 1).min(20);
                let delay =
                    Duration::from_millis(self.config.backoff_base_ms.saturating_mul(factor));
                debug!(index, attempt, ?delay, "retrying after transient failure");
                thread::sleep(delay);
            }
            match self.attempt(index, &url, &body)? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Transient(msg) => {
                    warn!(index, attempt, %msg, "transient scoring failure");
                    last = msg;
                }
            }
        }
        Err(Error::Provider {
            index,
            message: format!("retries exhausted: {last}"),
        })
    }
}

impl ToxicityScorer for RemoteScorer {
    fn provider(&self) -> Provider {
        Provider::Remote
    }

    fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>> {
        if texts.is_empty() {
            return Err(Error::input("no texts to score"));
        }
        let next = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let results: Mutex<Vec<Option<Result<f64>>>> =
            Mutex::new((0..texts.len()).map(|_| None).collect());
        let workers = self.config.concurrency.min(texts.len());

        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    if abort.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= texts.len() {
                        break;
                    }
                    let r = self.score_one(i, texts[i]);
                    if r.is_err() {
                        abort.store(true, Ordering::Relaxed);
                    }
                    results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
                });
            }
        });

        let results = results.into_inner().unwrap_or_else(|e| e.into_inner());
        let mut values = Vec::with_capacity(texts.len());
        let mut first_err = None;
        for r in results {
            match r {
                Some(Ok(v)) => values.push(v),
                Some(Err(e)) => {
                    first_err.get_or_insert(e);
                }
                None => {}
            }
        }
        match first_err {
            Some(e) => Err(e),
            None => Ok(values),
        }
    }
}

pub fn score_remote(texts: &[&str], config: &ToxicityConfig) -> Result<Vec<f64>> {
    RemoteScorer::from_env(config.clone())?.score_texts(texts)
}

/// Scores every record not already present in `cache`, then returns scores for the whole
/// corpus keyed by record id. New scores are inserted into the cache.
pub fn score_corpus(
    corpus: &Corpus,
    scorer: &dyn ToxicityScorer,
    cache: &mut ScoreCache,
) -> Result<HashMap<String, ToxicityScore>> {
    let missing: Vec<_> = corpus.iter().filter(|r| !cache.contains(&r.id)).collect();
    if !missing.is_empty() {
        let texts: Vec<&str> = missing.iter().map(|r| r.text.as_str()).collect();
        let values = scorer.score_texts(&texts)?;
        for (r, value) in missing.iter().zip(values) {
            cache.insert(ToxicityScore {
                record_id: r.id.clone(),
                value,
                provider: scorer.provider(),
            });
        }
    }
    Ok(corpus
        .iter()
        .filter_map(|r| cache.get(&r.id).map(|s| (r.id.clone(), s.clone())))
        .collect())
}

/// Keeps records scoring at least `threshold`, preserving order.
pub fn filter_toxic(
    corpus: &Corpus,
    scores: &HashMap<String, ToxicityScore>,
    threshold: f64,
) -> Result<Corpus> {
    validate_threshold(threshold)?;
    if let Some(r) = corpus.iter().find(|r| !scores.contains_key(&r.id)) {
        return Err(Error::input(format!(
            "no toxicity score for record {}",
            r.id
        )));
    }
    Ok(corpus.retain(|r| scores[&r.id].value >= threshold))
}

/// Score cache persisted as JSON Lines of `{id, value, provider}`, ordered by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreCache {
    scores: std::collections::BTreeMap<String, ToxicityScore>,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut cache = ScoreCache::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let score: ToxicityScore = serde_json::from_str(t)
                .map_err(|e| Error::input(format!("score cache line {}: {e}", idx + 1)))?;
            if !(0.0..=1.0).contains(&score.value) {
                return Err(Error::input(format!(
                    "score cache line {}: value {} is outside [0, 1]",
                    idx + 1,
                    score.value
                )));
            }
            cache.insert(score);
        }
        Ok(cache)
    }

    pub fn write<W: Write>(&self, mut out: W, header: Option<&str>) -> Result<()> {
        if let Some(h) = header {
            writeln!(out, "{h}")?;
        }
        for s in self.scores.values() {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.scores.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&ToxicityScore> {
        self.scores.get(id)
    }

    pub fn insert(&mut self, score: ToxicityScore) {
        self.scores.insert(score.record_id.clone(), score);
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn into_map(self) -> HashMap<String, ToxicityScore> {
        self.scores.into_iter().collect()
    }
}
