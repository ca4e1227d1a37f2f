//! Temporal and compositional tallies over categorized records.
//!
//! Days are UTC calendar dates and weeks are ISO-8601 weeks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use chrono::{Datelike, NaiveDate};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::report::{csv_writer, ReportHeader};
use crate::topics::Category;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DailySeries {
    pub counts: BTreeMap<(NaiveDate, Category), u64>,
}

impl DailySeries {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn date_totals(&self) -> BTreeMap<NaiveDate, u64> {
        let mut totals = BTreeMap::new();
        for ((d, _), c) in &self.counts {
            *totals.entry(*d).or_insert(0) += c;
        }
        totals
    }

    /// The `k` busiest days, ties by earlier date.
    pub fn top_days(&self, k: usize) -> Vec<(NaiveDate, u64)> {
        let mut days: Vec<_> = self.date_totals().into_iter().collect();
        days.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        days.truncate(k);
        days
    }
}

/// Counts per UTC date and category. `categories` is parallel to the corpus records.
pub fn daily_volume(corpus: &Corpus, categories: &[Option<Category>]) -> Result<DailySeries> {
    if categories.len() != corpus.len() {
        return Err(Error::input(format!(
            "{} categories for {} records",
            categories.len(),
            corpus.len()
        )));
    }
    let mut counts = BTreeMap::new();
    for (r, c) in corpus.iter().zip(categories) {
        let c = c.ok_or_else(|| Error::input(format!("record {} has no category", r.id)))?;
        *counts.entry((r.created_at.date_naive(), c)).or_insert(0) += 1;
    }
    Ok(DailySeries { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoWeek {
    pub year: i32,
    pub week: u32,
}

impl IsoWeek {
    pub fn of(date: NaiveDate) -> Self {
        let w = date.iso_week();
        IsoWeek {
            year: w.year(),
            week: w.week(),
        }
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

/// Category shares, indexed by [`Category::index`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompositionTable {
    pub weekly: BTreeMap<IsoWeek, [f64; 5]>,
    pub overall: [f64; 5],
}

fn shares(counts: &[u64; 5]) -> [f64; 5] {
    let total: u64 = counts.iter().sum();
    counts.map(|c| c as f64 / total as f64)
}

pub fn composition(series: &DailySeries) -> Result<CompositionTable> {
    if series.is_empty() {
        return Err(Error::input("composition of an empty series"));
    }
    let mut weekly_counts: BTreeMap<IsoWeek, [u64; 5]> = BTreeMap::new();
    let mut overall = [0u64; 5];
    for ((date, cat), &n) in &series.counts {
        weekly_counts.entry(IsoWeek::of(*date)).or_default()[cat.index()] += n;
        overall[cat.index()] += n;
    }
    Ok(CompositionTable {
        weekly: weekly_counts
            .into_iter()
            .map(|(w, c)| (w, shares(&c)))
            .collect(),
        overall: shares(&overall),
    })
}

/// Top `n` hashtags by count, ties by tag.
pub fn hashtag_counts(corpus: &Corpus, n: usize) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for r in corpus {
        for t in &r.hashtags {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut rows: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(n);
    rows
}

/// For each edge target, the number of distinct linking records per category. A record
/// linking to the same user twice counts once; records without a category are skipped.
pub fn user_category_mentions(
    graph: &InteractionGraph,
    categories: &HashMap<String, Category>,
) -> BTreeMap<String, [u64; 5]> {
    let pairs: BTreeSet<(usize, &str)> = graph
        .edges()
        .iter()
        .map(|e| (e.target, e.record_id.as_str()))
        .collect();
    let mut out: BTreeMap<String, [u64; 5]> = BTreeMap::new();
    for (target, record) in pairs {
        if let Some(c) = categories.get(record) {
            out.entry(graph.name(target).to_string()).or_default()[c.index()] += 1;
        }
    }
    out
}

pub fn write_daily_csv<W: Write>(
    out: W,
    series: &DailySeries,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["date", "category", "count"])?;
    for ((d, c), n) in &series.counts {
        w.write_record([d.to_string(), c.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Every week lists all five categories, zeros included.
pub fn write_weekly_csv<W: Write>(
    out: W,
    table: &CompositionTable,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["iso_week", "category", "share"])?;
    for (week, shares) in &table.weekly {
        for c in Category::ALL {
            w.write_record([
                week.to_string(),
                c.to_string(),
                shares[c.index()].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_hashtags_csv<W: Write>(
    out: W,
    rows: &[(String, u64)],
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["tag", "count"])?;
    for (t, c) in rows {
        w.write_record([t.as_str(), &c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_user_categories_csv<W: Write>(
    out: W,
    tallies: &BTreeMap<String, [u64; 5]>,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["username", "D", "H", "O", "P", "R"])?;
    for (user, counts) in tallies {
        let mut row = vec![user.clone()];
        row.extend(counts.iter().map(u64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_peaks_csv<W: Write>(
    out: W,
    days: &[(NaiveDate, u64)],
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["date", "count"])?;
    for (d, c) in days {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
