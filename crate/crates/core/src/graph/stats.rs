use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InteractionGraph;

/// Whether geodesic statistics follow edge direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeodesicMode {
    #[default]
    Undirected,
    Directed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NetworkStats {
    pub vertices: usize,
    pub total_edges: usize,
    pub duplicated_edges: usize,
    pub unique_edges: usize,
    pub self_loops: usize,
    pub connected_components: usize,
    pub max_geodesic: usize,
    pub avg_geodesic: f64,
}

/// Network statistics with undirected geodesics.
pub fn summarize(graph: &InteractionGraph) -> NetworkStats {
    summarize_with(graph, GeodesicMode::Undirected)
}

/// Edge counts come from the multigraph; components always use the undirected simple
/// view. Geodesics average over connected pairs only (unordered pairs when undirected,
/// ordered reachable pairs when directed).
pub fn summarize_with(graph: &InteractionGraph, mode: GeodesicMode) -> NetworkStats {
    let n = graph.vertex_count();
    if n == 0 {
        return NetworkStats::default();
    }
    let total_edges = graph.edges().len();
    let unique_edges = graph.unique_pairs().len();
    let self_loops = graph.edges().iter().filter(|e| e.is_self_loop()).count();

    let undirected = graph.undirected_simple();
    let connected_components = count_components(&undirected);

    let adjacency = match mode {
        GeodesicMode::Undirected => undirected,
        GeodesicMode::Directed => graph.directed_unique(),
    };
    // (sum of distances, reachable pairs, max distance) per source
    let (sum, pairs, max) = (0..n)
        .into_par_iter()
        .map(|s| bfs_profile(&adjacency, s))
        .reduce(
            || (0u64, 0u64, 0usize),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)),
        );
    let avg_geodesic = if pairs == 0 {
        0.0
    } else {
        sum as f64 / pairs as f64
    };

    NetworkStats {
        vertices: n,
        total_edges,
        duplicated_edges: total_edges - unique_edges,
        unique_edges,
        self_loops,
        connected_components,
        max_geodesic: max,
        avg_geodesic,
    }
}

fn bfs_profile(adj: &[Vec<usize>], source: usize) -> (u64, u64, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([source]);
    dist[source] = 0;
    let (mut sum, mut pairs, mut max) = (0u64, 0u64, 0usize);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                sum += dist[w] as u64;
                pairs += 1;
                max = max.max(dist[w]);
                queue.push_back(w);
            }
        }
    }
    (sum, pairs, max)
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}
