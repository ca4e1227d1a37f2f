//! Record ingestion and per-record annotation.
//!
//! Input is JSON Lines with required `id`, `user`, `created_at` (RFC 3339) and `text`
//! fields, plus optional `verified` and `followers`. Any other field is kept verbatim in
//! [`TweetRecord::metadata`]. Lines that are blank or start with `#` are skipped, so the
//! normalized corpus written by [`write_jsonl`] (which carries a `#` header line) parses back
//! to the same corpus.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{Map, Value};
use tracing::warn;

use crate::error::{Error, Result};

/// Maximum handle length accepted as a mention.
pub const MAX_HANDLE_LEN: usize = 15;

/// Keys recomputed from `text` on every parse; their input values are ignored.
const DERIVED_KEYS: [&str; 3] = ["hashtags", "mentions", "retweet_of"];

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: String,
    /// Handle without the leading `@`.
    pub author: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    /// Lowercased, `#` stripped, in order of appearance.
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    /// Set iff the text begins with `RT @handle`; always equals `mentions[0]`.
    pub retweet_of: Option<String>,
    pub verified: Option<bool>,
    pub followers: Option<u64>,
    pub metadata: Map<String, Value>,
}

impl TweetRecord {
    /// Builds a record and derives hashtags, mentions and retweet structure from `text`.
    pub fn new(
        id: impl Into<String>,
        author: impl Into<String>,
        created_at: DateTime<Utc>,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        let hashtags = extract_hashtags(&text);
        let mentions = extract_mentions(&text);
        let retweet_of = retweet_target(&text);
        TweetRecord {
            id: id.into(),
            author: author.into(),
            created_at,
            text,
            hashtags,
            mentions,
            retweet_of,
            verified: None,
            followers: None,
            metadata: Map::new(),
        }
    }

    fn from_json(value: Value) -> std::result::Result<Self, String> {
        let Value::Object(mut obj) = value else {
            return Err("line is not a JSON object".into());
        };
        let id = take_string(&mut obj, "id")?;
        if id.is_empty() {
            return Err("field `id` is empty".into());
        }
        let user = take_string(&mut obj, "user")?;
        let author = user.strip_prefix('@').unwrap_or(&user).to_string();
        if author.is_empty() {
            return Err("field `user` is empty".into());
        }
        let created_raw = take_string(&mut obj, "created_at")?;
        let created_at = DateTime::parse_from_rfc3339(&created_raw)
            .map_err(|e| format!("field `created_at` is not RFC 3339: {e}"))?
            .with_timezone(&Utc);
        let text = take_string(&mut obj, "text")?;

        let verified = match obj.remove("verified") {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(b),
            Some(_) => return Err("field `verified` is not a boolean".into()),
        };
        let followers = match obj.remove("followers") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or("field `followers` is not a non-negative integer")?,
            ),
        };
        for key in DERIVED_KEYS {
            obj.remove(key);
        }

        let mut record = TweetRecord::new(id, author, created_at, text);
        record.verified = verified;
        record.followers = followers;
        record.metadata = obj;
        Ok(record)
    }

    /// Normalized JSON form: schema fields, derived annotations, then preserved metadata.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("id".into(), self.id.clone().into());
        obj.insert("user".into(), self.author.clone().into());
        obj.insert(
            "created_at".into(),
            self.created_at
                .to_rfc3339_opts(SecondsFormat::AutoSi, true)
                .into(),
        );
        obj.insert("text".into(), self.text.clone().into());
        if let Some(v) = self.verified {
            obj.insert("verified".into(), v.into());
        }
        if let Some(f) = self.followers {
            obj.insert("followers".into(), f.into());
        }
        obj.insert("hashtags".into(), self.hashtags.clone().into());
        obj.insert("mentions".into(), self.mentions.clone().into());
        if let Some(rt) = &self.retweet_of {
            obj.insert("retweet_of".into(), rt.clone().into());
        }
        for (k, v) in &self.metadata {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

fn take_string(obj: &mut Map<String, Value>, key: &str) -> std::result::Result<String, String> {
    match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(format!("field `{key}` is not a string")),
        None => Err(format!("missing field `{key}`")),
    }
}

/// An ordered, id-unique collection of records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    pub dropped_duplicates: usize,
    pub dropped_invalid: usize,
}

impl Corpus {
    /// Deduplicates by id (first occurrence wins) and sorts by `(created_at, id)`.
    pub fn from_records(records: impl IntoIterator<Item = TweetRecord>) -> Self {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut dropped_duplicates = 0;
        for r in records {
            if seen.insert(r.id.clone()) {
                kept.push(r);
            } else {
                dropped_duplicates += 1;
            }
        }
        sort_records(&mut kept);
        Corpus {
            records: kept,
            dropped_duplicates,
            dropped_invalid: 0,
        }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TweetRecord> {
        self.records.iter()
    }

    /// Keeps records matching `pred`, preserving order. Drop counters carry over.
    pub fn retain(&self, mut pred: impl FnMut(&TweetRecord) -> bool) -> Corpus {
        Corpus {
            records: self.records.iter().filter(|r| pred(r)).cloned().collect(),
            dropped_duplicates: self.dropped_duplicates,
            dropped_invalid: self.dropped_invalid,
        }
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a TweetRecord;
    type IntoIter = std::slice::Iter<'a, TweetRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

fn sort_records(records: &mut [TweetRecord]) {
    records.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then_with(|| a.id.cmp(&b.id))
    });
}

/// Parses a JSON Lines stream into a corpus.
///
/// Malformed lines are logged with their 1-based line number and counted in
/// `dropped_invalid`; repeated ids keep the first occurrence.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    let mut dropped_duplicates = 0;
    let mut dropped_invalid = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed = serde_json::from_str::<Value>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(TweetRecord::from_json);
        match parsed {
            Ok(record) => {
                if seen.insert(record.id.clone()) {
                    records.push(record);
                } else {
                    dropped_duplicates += 1;
                }
            }
            Err(reason) => {
                warn!(line = idx + 1, %reason, "skipping malformed record");
                dropped_invalid += 1;
            }
        }
    }

    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    sort_records(&mut records);
    Ok(Corpus {
        records,
        dropped_duplicates,
        dropped_invalid,
    })
}

pub fn parse_str(input: &str) -> Result<Corpus> {
    parse_records(input.as_bytes())
}

/// Writes one normalized JSON object per record after an optional `#` header line.
pub fn write_jsonl<W: Write>(mut out: W, corpus: &Corpus, header: Option<&str>) -> Result<()> {
    if let Some(h) = header {
        writeln!(out, "{h}")?;
    }
    for r in corpus {
        serde_json::to_writer(&mut out, &r.to_json())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Every `#tag` token, lowercased with the `#` removed. Duplicates are kept.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while let Some(&(j, d)) = chars.peek() {
            if !is_word_char(d) {
                break;
            }
            end = j + d.len_utf8();
            chars.next();
        }
        if end > start {
            tags.push(text[start..end].to_lowercase());
        }
    }
    tags
}

/// Byte ranges `(at, end)` of every mention token: `at` is the `@` position and
/// `text[at + 1..end]` the handle.
fn mention_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut prev: Option<char> = None;
    for (i, c) in text.char_indices() {
        let preceded_ok = prev.is_none_or(|p| !is_word_char(p));
        prev = Some(c);
        if c != '@' || !preceded_ok {
            continue;
        }
        let rest = &text[i + 1..];
        let len = rest
            .find(|ch: char| !is_handle_char(ch))
            .unwrap_or(rest.len());
        if (1..=MAX_HANDLE_LEN).contains(&len) {
            spans.push((i, i + 1 + len));
        }
    }
    spans
}

/// Every `@handle` whose `@` starts the text or follows a non-word character, with a
/// handle of 1 to 15 ASCII letters, digits or underscores. Order and duplicates are kept.
pub fn extract_mentions(text: &str) -> Vec<String> {
    mention_spans(text)
        .into_iter()
        .map(|(at, end)| text[at + 1..end].to_string())
        .collect()
}

fn retweet_target(text: &str) -> Option<String> {
    let rest = text.strip_prefix("RT ")?;
    if !rest.starts_with('@') {
        return None;
    }
    let (at, end) = mention_spans(text).into_iter().next()?;
    (at == 3).then(|| text[at + 1..end].to_string())
}

/// Interaction carried by a record.
///
/// A retweet's prefix mention becomes the retweet target only; any further mentions in the
/// retweeted body are reported as `body_mentions` and still count as mention relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    Retweet {
        target: String,
        body_mentions: Vec<String>,
    },
    Mention {
        targets: Vec<String>,
    },
    None,
}

impl Relation {
    /// Targets of mention edges, including mentions inside a retweet body.
    pub fn mention_targets(&self) -> &[String] {
        match self {
            Relation::Retweet { body_mentions, .. } => body_mentions,
            Relation::Mention { targets } => targets,
            Relation::None => &[],
        }
    }

    pub fn retweet_target(&self) -> Option<&str> {
        match self {
            Relation::Retweet { target, .. } => Some(target),
            _ => None,
        }
    }
}

pub fn classify_relation(record: &TweetRecord) -> Relation {
    match &record.retweet_of {
        Some(target) => Relation::Retweet {
            target: target.clone(),
            body_mentions: record.mentions.iter().skip(1).cloned().collect(),
        },
        None if record.mentions.is_empty() => Relation::None,
        None => Relation::Mention {
            targets: record.mentions.clone(),
        },
    }
}

/// Strips platform syntax ahead of embedding: the leading `RT` marker, every mention,
/// and every whitespace-delimited token starting with `http`. Whitespace is collapsed.
pub fn clean_for_embedding(text: &str) -> String {
    let mut tokens = text.split_whitespace().peekable();
    if tokens.peek() == Some(&"RT") {
        tokens.next();
    }
    let mut out: Vec<String> = Vec::new();
    for token in tokens {
        if token.starts_with("http") {
            continue;
        }
        let spans = mention_spans(token);
        if spans.is_empty() {
            out.push(token.to_string());
            continue;
        }
        let mut kept = String::with_capacity(token.len());
        let mut cursor = 0;
        for (at, end) in spans {
            kept.push_str(&token[cursor..at]);
            cursor = end;
        }
        kept.push_str(&token[cursor..]);
        // Punctuation left over from "@user:" carries nothing.
        if kept.chars().any(char::is_alphanumeric) {
            out.push(kept);
        }
    }
    out.join(" ")
}

/// Drops records whose `(author, text)` repeats an earlier record. Returns the reduced
/// corpus and the number of records removed.
pub fn dedup_for_network(corpus: &Corpus) -> (Corpus, usize) {
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    let mut keep = Vec::with_capacity(corpus.len());
    for r in corpus {
        keep.push(seen.insert((r.author.as_str(), r.text.as_str())));
    }
    let mut flags = keep.into_iter();
    let reduced = corpus.retain(|_| flags.next().unwrap_or(false));
    let removed = corpus.len() - reduced.len();
    (reduced, removed)
}
