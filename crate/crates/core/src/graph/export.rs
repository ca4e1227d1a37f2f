//! CSV exports for network results.

use std::collections::HashMap;
use std::io::Write;

use super::{
    classify_account, CentralityTable, CommunityPartition, NetworkStats, RankMetric, RankedUser,
    UserProfile,
};
use crate::error::Result;
use crate::report::{csv_writer, ReportHeader};

pub const STATS_COLUMNS: [&str; 8] = [
    "vertices",
    "total_edges",
    "duplicated_edges",
    "unique_edges",
    "self_loops",
    "connected_components",
    "max_geodesic",
    "avg_geodesic",
];

/// Formats the stats row; the average geodesic is printed with four decimals.
pub fn stats_row(s: &NetworkStats) -> [String; 8] {
    [
        s.vertices.to_string(),
        s.total_edges.to_string(),
        s.duplicated_edges.to_string(),
        s.unique_edges.to_string(),
        s.self_loops.to_string(),
        s.connected_components.to_string(),
        s.max_geodesic.to_string(),
        format!("{:.4}", s.avg_geodesic),
    ]
}

pub fn write_stats_csv<W: Write>(
    out: W,
    stats: &NetworkStats,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(STATS_COLUMNS)?;
    w.write_record(stats_row(stats))?;
    w.flush()?;
    Ok(())
}

/// `vertex,in_degree,out_degree,betweenness,cluster,account_type`.
pub fn write_centrality_csv<W: Write>(
    out: W,
    table: &CentralityTable,
    partition: &CommunityPartition,
    profiles: &HashMap<String, UserProfile>,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record([
        "vertex",
        "in_degree",
        "out_degree",
        "betweenness",
        "cluster",
        "account_type",
    ])?;
    for (v, name) in table.vertices.iter().enumerate() {
        let account = profiles
            .get(name)
            .map(classify_account)
            .unwrap_or(super::AccountType::IndOther);
        w.write_record([
            name.clone(),
            table.in_degree[v].to_string(),
            table.out_degree[v].to_string(),
            table.betweenness[v].to_string(),
            partition.label_of(v).to_string(),
            account.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `vertex,community,label`.
pub fn write_partition_csv<W: Write>(
    out: W,
    partition: &CommunityPartition,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["vertex", "community", "label"])?;
    for (v, name) in partition.vertices.iter().enumerate() {
        w.write_record([
            name.as_str(),
            &partition.assignment[v].to_string(),
            partition.label_of(v),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `rank,username,<metric>,cluster,verified,account_type`.
pub fn write_ranked_csv<W: Write>(
    out: W,
    rows: &[RankedUser],
    metric: RankMetric,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    let metric_name = match metric {
        RankMetric::InDegree => "in_degree",
        RankMetric::Betweenness => "betweenness",
    };
    w.write_record([
        "rank",
        "username",
        metric_name,
        "cluster",
        "verified",
        "account_type",
    ])?;
    for (i, r) in rows.iter().enumerate() {
        let value = match metric {
            RankMetric::InDegree => format!("{}", r.value as u64),
            RankMetric::Betweenness => r.value.to_string(),
        };
        w.write_record([
            (i + 1).to_string(),
            r.username.clone(),
            value,
            r.cluster.clone().unwrap_or_default(),
            r.verified.to_string(),
            r.account_type.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{summarize, InteractionGraph, RelationKind::Mention};

    #[test]
    fn stats_row_matches_fixture() {
        let g = InteractionGraph::from_edges([
            ("b", "a", Mention, "1"),
            ("b", "a", Mention, "2"),
            ("c", "a", Mention, "3"),
            ("d", "d", Mention, "4"),
        ]);
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &summarize(&g), &ReportHeader::new(0, "x")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(2), Some("4,4,1,3,1,2,2,1.3333"));
    }
}
