//! CSV exports for fitted topics.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Deserialize;

use super::{Category, CategoryMap, TopicModel};
use crate::error::{Error, Result};
use crate::report::{csv_reader, csv_writer, ReportHeader};

/// `topic_id,size,category,keyword_1..keyword_n`, with `n` the configured keyword count.
/// Short keyword lists are padded with empty cells.
pub fn write_topics_csv<W: Write>(
    out: W,
    model: &TopicModel,
    map: &CategoryMap,
    header: &ReportHeader,
) -> Result<()> {
    let n = model.config.keywords_per_topic;
    let mut w = csv_writer(out, header)?;
    let mut head = vec!["topic_id".to_string(), "size".into(), "category".into()];
    head.extend((1..=n).map(|i| format!("keyword_{i}")));
    w.write_record(&head)?;
    for (t, size) in model.topic_sizes().into_iter().enumerate() {
        let mut row = vec![
            t.to_string(),
            size.to_string(),
            map.get(t).map(|c| c.to_string()).unwrap_or_default(),
        ];
        let words = &model.keywords[t];
        row.extend((0..n).map(|i| words.get(i).cloned().unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `record_id,x,y,topic_id,category` for every clustered record. `coords` pairs a corpus
/// row with its plotting coordinates; a missing second axis is written as 0.
pub fn write_topic_map_csv<W: Write>(
    out: W,
    model: &TopicModel,
    coords: &[(usize, Vec<f64>)],
    categories: &[Option<Category>],
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["record_id", "x", "y", "topic_id", "category"])?;
    for (row, xy) in coords {
        let axis = |i: usize| xy.get(i).copied().unwrap_or(0.0).to_string();
        w.write_record([
            model.record_ids[*row].clone(),
            axis(0),
            axis(1),
            model.assignments[*row]
                .map(|t| t.to_string())
                .unwrap_or_default(),
            categories[*row].map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `record_id,topic_id,category` for every record; blank cells mark records without a
/// topic.
pub fn write_record_topics_csv<W: Write>(
    out: W,
    model: &TopicModel,
    categories: &[Option<Category>],
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["record_id", "topic_id", "category"])?;
    for (i, id) in model.record_ids.iter().enumerate() {
        w.write_record([
            id.clone(),
            model.assignments[i]
                .map(|t| t.to_string())
                .unwrap_or_default(),
            categories[i].map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordTopic {
    pub topic: Option<usize>,
    pub category: Option<Category>,
}

/// Reads the output of [`write_record_topics_csv`], keyed by record id.
pub fn read_record_topics_csv<R: Read>(input: R) -> Result<HashMap<String, RecordTopic>> {
    #[derive(Deserialize)]
    struct Row {
        record_id: String,
        topic_id: String,
        category: String,
    }
    let mut out = HashMap::new();
    for row in csv_reader(input).deserialize::<Row>() {
        let row = row?;
        let topic = match row.topic_id.as_str() {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| Error::input(format!("bad topic id `{s}`")))?,
            ),
        };
        let category = match row.category.as_str() {
            "" => None,
            s => Some(s.parse()?),
        };
        out.insert(row.record_id, RecordTopic { topic, category });
    }
    Ok(out)
}
