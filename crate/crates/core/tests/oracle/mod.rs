//! Slow reference implementations for graph checks. Shared by the core graph tests and
//! the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toxiscope::graph::{InteractionGraph, RelationKind};

/// A random digraph on `n` named vertices, with duplicate edges and self-loops mixed in.
/// Every vertex carries a self-loop so it exists in the graph even when isolated.
pub struct RandomGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RandomGraph {
    pub fn generate(seed: u64, n: usize, density: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
        for s in 0..n {
            for t in 0..n {
                if s != t && rng.random_bool(density) {
                    edges.push((s, t));
                    if rng.random_bool(0.1) {
                        edges.push((s, t));
                    }
                }
            }
        }
        RandomGraph { n, edges }
    }

    /// Zero-padded names keep lexicographic order equal to numeric order.
    pub fn name(v: usize) -> String {
        format!("v{v:03}")
    }

    pub fn build(&self) -> InteractionGraph {
        InteractionGraph::from_edges(self.edges.iter().enumerate().map(|(i, &(s, t))| {
            (
                Self::name(s),
                Self::name(t),
                RelationKind::Mention,
                i.to_string(),
            )
        }))
    }

    /// Distinct directed pairs without self-loops.
    pub fn unique(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().copied().filter(|(s, t)| s != t).collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; self.n]; self.n];
        for (s, t) in self.unique() {
            a[s][t] = true;
        }
        a
    }

    pub fn undirected(&self) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; self.n]; self.n];
        for (s, t) in self.unique() {
            a[s][t] = true;
            a[t][s] = true;
        }
        a
    }
}

const INF: usize = usize::MAX;

/// All-pairs distances by Floyd-Warshall.
pub fn distances(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut d = vec![vec![INF; n]; n];
    for (s, row) in adj.iter().enumerate() {
        d[s][s] = 0;
        for (t, &e) in row.iter().enumerate() {
            if e && s != t {
                d[s][t] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Shortest-path counts: `sigma[s][t]` sums `sigma[s][u]` over edges `u -> t` with
/// `d(s, u) + 1 = d(s, t)`, evaluated in increasing distance.
pub fn path_counts(adj: &[Vec<bool>], d: &[Vec<usize>]) -> Vec<Vec<u128>> {
    let n = adj.len();
    let mut sigma = vec![vec![0u128; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&t| d[s][t] != INF).collect();
        order.sort_by_key(|&t| d[s][t]);
        sigma[s][s] = 1;
        for &t in &order {
            if t == s {
                continue;
            }
            sigma[s][t] = (0..n)
                .filter(|&u| adj[u][t] && d[s][u] != INF && d[s][u] + 1 == d[s][t])
                .map(|u| sigma[s][u])
                .sum();
        }
    }
    sigma
}

/// Betweenness straight from its definition: for each ordered pair `s != t` with a path
/// and each `v` distinct from both, the share `sigma_sv * sigma_vt / sigma_st` of
/// shortest paths through `v`.
pub fn betweenness_by_definition(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let d = distances(adj);
    let sigma = path_counts(adj, &d);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t || d[s][t] == INF {
                continue;
            }
            for v in 0..n {
                if v == s || v == t || d[s][v] == INF || d[v][t] == INF {
                    continue;
                }
                if d[s][v] + d[v][t] == d[s][t] {
                    b[v] += (sigma[s][v] * sigma[v][t]) as f64 / sigma[s][t] as f64;
                }
            }
        }
    }
    b
}

/// Betweenness by listing every simple path; only feasible for small graphs.
#[allow(clippy::needless_range_loop)]
pub fn betweenness_by_paths(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let mut b = vec![0.0; n];
    for s in 0..n {
        let mut paths: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        let mut stack = vec![vec![s]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            paths[last].push(path.clone());
            for w in 0..n {
                if adj[last][w] && !path.contains(&w) {
                    let mut next = path.clone();
                    next.push(w);
                    stack.push(next);
                }
            }
        }
        for t in 0..n {
            if t == s || paths[t].is_empty() {
                continue;
            }
            let shortest = paths[t].iter().map(Vec::len).min().unwrap();
            let geodesics: Vec<_> = paths[t].iter().filter(|p| p.len() == shortest).collect();
            for p in &geodesics {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / geodesics.len() as f64;
                }
            }
        }
    }
    b
}

/// Newman's `Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`.
pub fn newman_modularity(undirected: &[Vec<bool>], assignment: &[usize]) -> Option<f64> {
    let n = undirected.len();
    let k: Vec<f64> = undirected
        .iter()
        .map(|r| r.iter().filter(|&&e| e).count() as f64)
        .collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return None;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                let a = if undirected[i][j] { 1.0 } else { 0.0 };
                q += a - k[i] * k[j] / two_m;
            }
        }
    }
    Some(q / two_m)
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// Highest modularity over all partitions.
pub fn max_modularity(undirected: &[Vec<bool>]) -> Option<f64> {
    set_partitions(undirected.len())
        .iter()
        .filter_map(|p| newman_modularity(undirected, p))
        .max_by(f64::total_cmp)
}

/// Whether two assignments describe the same grouping, ignoring labels.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let n = a.len();
    (0..n).all(|i| (0..n).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}
