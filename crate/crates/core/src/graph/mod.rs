//! Directed user interaction graphs built from mentions and retweets.
//!
//! Vertices are usernames, indexed in lexicographic order. Edges keep their multiplicity
//! and the record that produced them. Two derived views feed the metrics:
//!
//! - the *directed unique-edge view* (distinct `(source, target)` pairs, self-loops
//!   removed) for degree and betweenness centrality;
//! - the *undirected simple view* (the same pairs with direction dropped) for components,
//!   geodesics and communities.

pub mod centrality;
pub mod community;
pub mod export;
pub mod rank;
pub mod stats;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use centrality::{betweenness_centrality, degree_centrality, CentralityTable, Degrees};
pub use community::{cnm_communities, modularity, CommunityPartition};
pub use export::{
    stats_row, write_centrality_csv, write_partition_csv, write_ranked_csv, write_stats_csv,
    STATS_COLUMNS,
};
pub use rank::{
    classify_account, profiles_from_corpus, rank_users, read_profiles_csv, AccountType, ManualType,
    RankMetric, RankedUser, UserProfile, HIGH_IMPACT_FOLLOWERS,
};
pub use stats::{summarize, summarize_with, GeodesicMode, NetworkStats};

use crate::corpus::{classify_relation, Corpus};
use crate::error::{Error, Result};
use crate::report::{csv_reader, csv_writer, ReportHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Mention,
    Retweet,
}

impl RelationKind {
    pub const ALL: [RelationKind; 2] = [RelationKind::Mention, RelationKind::Retweet];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Mention => "mention",
            RelationKind::Retweet => "retweet",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mention" | "mentions" => Ok(RelationKind::Mention),
            "retweet" | "retweets" => Ok(RelationKind::Retweet),
            other => Err(Error::input(format!("unknown relation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub relation: RelationKind,
    pub record_id: String,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
}

impl InteractionGraph {
    /// Builds a graph from `(source, target, relation, record_id)` tuples; the vertex set
    /// is every endpoint.
    pub fn from_edges<I, S>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, S, RelationKind, S)>,
        S: Into<String>,
    {
        let raw: Vec<(String, String, RelationKind, String)> = edges
            .into_iter()
            .map(|(s, t, r, id)| (s.into(), t.into(), r, id.into()))
            .collect();
        let names: BTreeSet<&str> = raw
            .iter()
            .flat_map(|(s, t, _, _)| [s.as_str(), t.as_str()])
            .collect();
        let vertices: Vec<String> = names.into_iter().map(String::from).collect();
        let index: HashMap<String, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let edges = raw
            .into_iter()
            .map(|(s, t, relation, record_id)| Edge {
                source: index[&s],
                target: index[&t],
                relation,
                record_id,
            })
            .collect();
        InteractionGraph {
            vertices,
            index,
            edges,
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    /// Distinct `(source, target)` pairs, self-loops included.
    pub fn unique_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.source, e.target)).collect()
    }

    /// Sorted out-neighbors over distinct non-self-loop pairs.
    pub fn directed_unique(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (s, t) in self.unique_pairs() {
            if s != t {
                out[s].push(t);
            }
        }
        out
    }

    /// Sorted in-neighbors over distinct non-self-loop pairs.
    pub fn directed_unique_in(&self) -> Vec<Vec<usize>> {
        let mut inn = vec![Vec::new(); self.vertices.len()];
        for (s, t) in self.unique_pairs() {
            if s != t {
                inn[t].push(s);
            }
        }
        inn.iter_mut().for_each(|l| l.sort_unstable());
        inn
    }

    /// Sorted neighbors with direction dropped, duplicates and self-loops removed.
    pub fn undirected_simple(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.vertices.len()];
        for e in &self.edges {
            if !e.is_self_loop() {
                adj[e.source].insert(e.target);
                adj[e.target].insert(e.source);
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }
}

/// One edge per retweet (`author -> retweeted user`) or per mention outside the retweet
/// prefix (`author -> mentioned user`), in corpus order.
pub fn build_graph(corpus: &Corpus, relation: RelationKind) -> InteractionGraph {
    let mut edges = Vec::new();
    for r in corpus {
        let rel = classify_relation(r);
        match relation {
            RelationKind::Retweet => {
                if let Some(t) = rel.retweet_target() {
                    edges.push((r.author.clone(), t.to_string(), relation, r.id.clone()));
                }
            }
            RelationKind::Mention => {
                for t in rel.mention_targets() {
                    edges.push((r.author.clone(), t.clone(), relation, r.id.clone()));
                }
            }
        }
    }
    InteractionGraph::from_edges(edges)
}

/// Edge list with columns `source,target,relation,record_id`.
pub fn write_edges_csv<'a, W: Write>(
    out: W,
    graphs: impl IntoIterator<Item = &'a InteractionGraph>,
    header: &ReportHeader,
) -> Result<()> {
    let mut w = csv_writer(out, header)?;
    w.write_record(["source", "target", "relation", "record_id"])?;
    for g in graphs {
        for e in g.edges() {
            w.write_record([
                g.name(e.source),
                g.name(e.target),
                e.relation.as_str(),
                e.record_id.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an edge list, keeping only rows of `relation` when given.
pub fn read_edges_csv<R: Read>(
    input: R,
    relation: Option<RelationKind>,
) -> Result<InteractionGraph> {
    #[derive(Deserialize)]
    struct Row {
        source: String,
        target: String,
        relation: RelationKind,
        record_id: String,
    }
    let mut rows = Vec::new();
    for row in csv_reader(input).deserialize::<Row>() {
        let row = row?;
        if row.source.is_empty() || row.target.is_empty() {
            return Err(Error::input("edge list row with an empty endpoint"));
        }
        if relation.is_none_or(|r| r == row.relation) {
            rows.push((row.source, row.target, row.relation, row.record_id));
        }
    }
    Ok(InteractionGraph::from_edges(rows))
}
