//! Shared output plumbing. Every CSV and JSON Lines file starts with one `#` line naming
//! the tool version, the run seed and the configuration hash; readers skip it.

use std::fmt;
use std::io::{Read, Write};

use crate::error::Result;

pub const TOOL_NAME: &str = "toxiscope";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportHeader {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl ReportHeader {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        ReportHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: config_hash.into(),
        }
    }
}

impl fmt::Display for ReportHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "# {TOOL_NAME} {} seed={} config={}",
            self.version, self.seed, self.config_hash
        )
    }
}

/// CSV writer positioned after the header comment.
pub fn csv_writer<W: Write>(mut out: W, header: &ReportHeader) -> Result<csv::Writer<W>> {
    writeln!(out, "{header}")?;
    Ok(csv::WriterBuilder::new().from_writer(out))
}

/// CSV reader that skips `#` comment lines.
pub fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trips_through_reader() {
        let h = ReportHeader::new(7, "abc");
        let mut w = csv_writer(Vec::new(), &h).unwrap();
        w.write_record(["a", "b"]).unwrap();
        w.write_record(["1", "2"]).unwrap();
        let bytes = w.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("# toxiscope "));
        assert!(text.lines().next().unwrap().ends_with("seed=7 config=abc"));
        let mut r = csv_reader(bytes.as_slice());
        let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(&rows[0][1], "2");
    }
}
