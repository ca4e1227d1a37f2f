//! Greedy modularity agglomeration (Clauset-Newman-Moore).
//!
//! Runs on the undirected simple view with `m` edges. For communities `i`, `j` with total
//! degrees `d_i`, `d_j` and `l_ij` edges between them, merging changes modularity by
//!
//! ```text
//! dQ = 2 * (l_ij / 2m - d_i * d_j / 4m^2) = (2m * l_ij - d_i * d_j) / 2m^2
//! ```
//!
//! The numerator is an integer, so the heap orders merges exactly and ties fall through to
//! the deterministic rule: smallest `(min member, max member)` pair of community
//! representatives, where a representative is the community's lexicographically smallest
//! username.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::InteractionGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    pub vertices: Vec<String>,
    /// Community per vertex. Community `c` carries label `labels[c]` (`G{c + 1}`); ids are
    /// ordered by decreasing size, ties by smallest member username.
    pub assignment: Vec<usize>,
    pub labels: Vec<String>,
    pub modularity: f64,
}

impl CommunityPartition {
    pub fn label_of(&self, vertex: usize) -> &str {
        &self.labels[self.assignment[vertex]]
    }

    pub fn label_for(&self, username: &str) -> Option<&str> {
        self.vertices
            .iter()
            .position(|v| v == username)
            .map(|v| self.label_of(v))
    }

    pub fn community_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.labels.len()];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Every vertex alone; used when modularity is undefined.
    pub fn singletons(graph: &InteractionGraph) -> Self {
        let groups: Vec<Vec<usize>> = (0..graph.vertex_count()).map(|v| vec![v]).collect();
        let (assignment, labels) = label_groups(graph.vertex_count(), groups);
        CommunityPartition {
            vertices: graph.vertices().to_vec(),
            assignment,
            labels,
            modularity: f64::NAN,
        }
    }
}

/// Numbers groups by size (descending) then smallest member. Members are vertex indices,
/// which follow username order.
fn label_groups(n: usize, mut groups: Vec<Vec<usize>>) -> (Vec<usize>, Vec<String>) {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut assignment = vec![0; n];
    for (c, g) in groups.iter().enumerate() {
        for &v in g {
            assignment[v] = c;
        }
    }
    let labels = (1..=groups.len()).map(|i| format!("G{i}")).collect();
    (assignment, labels)
}

/// `Q = sum_i (e_ii - a_i^2)` of `assignment` on the undirected simple view, with `e_ii`
/// the fraction of edges inside community `i` and `a_i` the fraction of edge endpoints in
/// it. `None` when the view has no edges.
pub fn modularity(graph: &InteractionGraph, assignment: &[usize]) -> Option<f64> {
    let adj = graph.undirected_simple();
    let degrees: Vec<u64> = adj.iter().map(|l| l.len() as u64).collect();
    let two_m: u64 = degrees.iter().sum();
    if two_m == 0 {
        return None;
    }
    let k = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut inside = vec![0u64; k];
    let mut endpoints = vec![0u64; k];
    for (v, nbrs) in adj.iter().enumerate() {
        endpoints[assignment[v]] += degrees[v];
        for &w in nbrs {
            if v < w && assignment[v] == assignment[w] {
                inside[assignment[v]] += 1;
            }
        }
    }
    let m = (two_m / 2) as f64;
    let two_m = two_m as f64;
    Some(
        inside
            .iter()
            .zip(&endpoints)
            .map(|(&l, &d)| l as f64 / m - (d as f64 / two_m).powi(2))
            .sum(),
    )
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    gain: i128,
    reps: Reverse<(usize, usize)>,
    a: usize,
    b: usize,
    version_a: u32,
    version_b: u32,
}

struct Agglomeration {
    two_m: i128,
    links: Vec<HashMap<usize, i128>>,
    degree: Vec<i128>,
    rep: Vec<usize>,
    version: Vec<u32>,
    alive: Vec<bool>,
    members: Vec<Vec<usize>>,
    heap: BinaryHeap<Candidate>,
}

impl Agglomeration {
    fn push(&mut self, a: usize, b: usize) {
        let l = self.links[a][&b];
        let gain = self.two_m * l - self.degree[a] * self.degree[b];
        let (ra, rb) = (self.rep[a], self.rep[b]);
        self.heap.push(Candidate {
            gain,
            reps: Reverse((ra.min(rb), ra.max(rb))),
            a,
            b,
            version_a: self.version[a],
            version_b: self.version[b],
        });
    }

    fn is_current(&self, c: &Candidate) -> bool {
        self.alive[c.a]
            && self.alive[c.b]
            && self.version[c.a] == c.version_a
            && self.version[c.b] == c.version_b
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (keep, gone) = if self.links[a].len() >= self.links[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        let moved = std::mem::take(&mut self.links[gone]);
        self.links[keep].remove(&gone);
        for (k, l) in moved {
            if k == keep {
                continue;
            }
            self.links[k].remove(&gone);
            *self.links[k].entry(keep).or_insert(0) += l;
            *self.links[keep].entry(k).or_insert(0) += l;
        }
        self.degree[keep] += self.degree[gone];
        self.rep[keep] = self.rep[keep].min(self.rep[gone]);
        self.version[keep] += 1;
        self.alive[gone] = false;
        let members = std::mem::take(&mut self.members[gone]);
        self.members[keep].extend(members);

        let mut neighbors: Vec<usize> = self.links[keep].keys().copied().collect();
        neighbors.sort_unstable();
        for k in neighbors {
            self.push(keep, k);
        }
    }
}

/// Greedy agglomeration from singletons, merging the pair with the largest modularity gain
/// until no merge gains.
pub fn cnm_communities(graph: &InteractionGraph) -> Result<CommunityPartition> {
    let adj = graph.undirected_simple();
    let n = adj.len();
    let two_m: usize = adj.iter().map(Vec::len).sum();
    if two_m == 0 {
        return Err(Error::UndefinedModularity);
    }

    let mut agg = Agglomeration {
        two_m: two_m as i128,
        links: adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&w| (w, 1)).collect())
            .collect(),
        degree: adj.iter().map(|l| l.len() as i128).collect(),
        rep: (0..n).collect(),
        version: vec![0; n],
        alive: vec![true; n],
        members: (0..n).map(|v| vec![v]).collect(),
        heap: BinaryHeap::new(),
    };
    for (v, nbrs) in adj.iter().enumerate() {
        for &w in nbrs {
            if v < w {
                agg.push(v, w);
            }
        }
    }

    while let Some(c) = agg.heap.pop() {
        if !agg.is_current(&c) {
            continue;
        }
        if c.gain <= 0 {
            break;
        }
        agg.merge(c.a, c.b);
    }

    let groups: Vec<Vec<usize>> = agg
        .members
        .into_iter()
        .zip(&agg.alive)
        .filter(|(_, &alive)| alive)
        .map(|(m, _)| m)
        .collect();
    let (assignment, labels) = label_groups(n, groups);
    let modularity = modularity(graph, &assignment).ok_or(Error::UndefinedModularity)?;
    Ok(CommunityPartition {
        vertices: graph.vertices().to_vec(),
        assignment,
        labels,
        modularity,
    })
}
