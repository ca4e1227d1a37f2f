use std::collections::VecDeque;

use rayon::prelude::*;

use super::InteractionGraph;

/// Sources per accumulation block. Partial sums are added in block order, so results do
/// not depend on the thread count.
const BLOCK: usize = 64;
/// Blocks evaluated concurrently before folding into the total.
const WAVE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
}

/// In- and out-degree over distinct `(source, target)` pairs, self-loops excluded.
pub fn degree_centrality(graph: &InteractionGraph) -> Degrees {
    let n = graph.vertex_count();
    let mut in_degree = vec![0; n];
    let mut out_degree = vec![0; n];
    for (s, t) in graph.unique_pairs() {
        if s != t {
            out_degree[s] += 1;
            in_degree[t] += 1;
        }
    }
    Degrees {
        in_degree,
        out_degree,
    }
}

/// Unnormalized betweenness on the directed unique-edge view: for every vertex `v`, the
/// sum over ordered pairs `s != t`, both different from `v`, of the share of shortest
/// `s -> t` paths through `v`. Uses per-source dependency accumulation over BFS DAGs.
pub fn betweenness_centrality(graph: &InteractionGraph) -> Vec<f64> {
    let n = graph.vertex_count();
    let out = graph.directed_unique();
    let inn = graph.directed_unique_in();
    let sources: Vec<usize> = (0..n).collect();
    let blocks: Vec<&[usize]> = sources.chunks(BLOCK).collect();

    let mut total = vec![0.0; n];
    for wave in blocks.chunks(WAVE) {
        let partials: Vec<Vec<f64>> = wave
            .par_iter()
            .map(|block| {
                let mut acc = vec![0.0; n];
                let mut scratch = Scratch::new(n);
                for &s in *block {
                    scratch.accumulate(s, &out, &inn, &mut acc);
                }
                acc
            })
            .collect();
        for p in partials {
            total.iter_mut().zip(&p).for_each(|(t, x)| *t += x);
        }
    }
    total
}

struct Scratch {
    dist: Vec<i64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }

    fn accumulate(&mut self, s: usize, out: &[Vec<usize>], inn: &[Vec<usize>], acc: &mut [f64]) {
        for &v in &self.order {
            self.dist[v] = -1;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
        }
        self.order.clear();

        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            for &w in &out[v] {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }

        // reverse BFS order: every successor's dependency is final before its predecessors
        for &w in self.order.iter().rev() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in &inn[w] {
                if self.dist[v] >= 0 && self.dist[v] + 1 == self.dist[w] {
                    self.delta[v] += self.sigma[v] * coeff;
                }
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Degrees and betweenness for every vertex, indexed like [`InteractionGraph::vertices`].
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    pub vertices: Vec<String>,
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
    pub betweenness: Vec<f64>,
}

impl CentralityTable {
    pub fn compute(graph: &InteractionGraph) -> Self {
        let Degrees {
            in_degree,
            out_degree,
        } = degree_centrality(graph);
        CentralityTable {
            vertices: graph.vertices().to_vec(),
            in_degree,
            out_degree,
            betweenness: betweenness_centrality(graph),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RelationKind::Mention;

    fn graph(edges: &[(&str, &str)]) -> InteractionGraph {
        InteractionGraph::from_edges(
            edges
                .iter()
                .map(|(s, t)| (s.to_string(), t.to_string(), Mention, String::new())),
        )
    }

    #[test]
    fn in_degree_counts_unique_edges() {
        let g = graph(&[("b", "a"), ("c", "a")]);
        let d = degree_centrality(&g);
        let a = g.vertex_index("a").unwrap();
        assert_eq!((d.in_degree[a], d.out_degree[a]), (2, 0));

        let g = graph(&[("b", "a"), ("b", "a"), ("x", "x")]);
        let d = degree_centrality(&g);
        assert_eq!(d.in_degree[g.vertex_index("a").unwrap()], 1);
        let x = g.vertex_index("x").unwrap();
        assert_eq!((d.in_degree[x], d.out_degree[x]), (0, 0));
    }

    #[test]
    fn path_middle_vertex() {
        let g = graph(&[("a", "b"), ("b", "c")]);
        assert_eq!(betweenness_centrality(&g), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn bidirected_triangle_is_zero() {
        let g = graph(&[
            ("a", "b"),
            ("b", "a"),
            ("b", "c"),
            ("c", "b"),
            ("a", "c"),
            ("c", "a"),
        ]);
        assert_eq!(betweenness_centrality(&g), vec![0.0; 3]);
    }

    #[test]
    fn split_paths_share_credit() {
        // s -> {x, y} -> t: each middle vertex carries half of the single pair
        let g = graph(&[("s", "x"), ("s", "y"), ("x", "t"), ("y", "t")]);
        let b = betweenness_centrality(&g);
        assert_eq!(b[g.vertex_index("x").unwrap()], 0.5);
        assert_eq!(b[g.vertex_index("y").unwrap()], 0.5);
        assert_eq!(b[g.vertex_index("s").unwrap()], 0.0);
    }

    #[test]
    fn empty_graph() {
        assert!(betweenness_centrality(&InteractionGraph::default()).is_empty());
    }
}
