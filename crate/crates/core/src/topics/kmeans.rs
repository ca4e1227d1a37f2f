use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each point to its assigned centroid.
    pub objective: f64,
    /// `history[0]` is the objective of the seeded start; `history[t]` follows iteration `t`.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids)).collect()
}

fn objective(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Moves the farthest point (from its current centroid) into each empty cluster, then
/// recomputes every centroid as its cluster mean.
fn update_centroids(
    points: &[Vec<f64>],
    assignments: &mut [usize],
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let k = previous.len();
    let dim = points[0].len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut moved = vec![false; points.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if moved[i] || sizes[assignments[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &previous[assignments[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        // k <= n guarantees a cluster with at least two members while one is empty
        let (i, _) = far.expect("a donor cluster exists when k <= n");
        sizes[assignments[i]] -= 1;
        sizes[empty] = 1;
        assignments[i] = empty;
        moved[i] = true;
    }

    let mut sums = vec![vec![0.0; dim]; k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
    }
    for (s, &n) in sums.iter_mut().zip(&sizes) {
        s.iter_mut().for_each(|x| *x /= n as f64);
    }
    sums
}

/// Lloyd's algorithm with squared-Euclidean assignment.
///
/// Starts from `k` distinct points sampled with `seed` and stops once an iteration leaves
/// every assignment unchanged, or after `max_iterations`. Ties go to the lower cluster index.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iterations: usize,
) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > n {
        return Err(Error::input(format!("k = {k} exceeds the {n} points")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::input("points have unequal dimension"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = rand::seq::index::sample(&mut rng, n, k).into_vec();
    seeds.sort_unstable();
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&i| points[i].clone()).collect();

    let mut assignments = assign_all(points, &centroids);
    let mut history = vec![objective(points, &assignments, &centroids)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        centroids = update_centroids(points, &mut assignments, &centroids);
        let next = assign_all(points, &centroids);
        history.push(objective(points, &next, &centroids));
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }

    let objective = *history.last().expect("history is never empty");
    Ok(KMeansResult {
        assignments,
        centroids,
        objective,
        history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 10.0).collect())
            .collect()
    }

    #[test]
    fn single_cluster_is_mean() {
        let pts = random_points(13, 4, 1);
        let r = kmeans(&pts, 1, 0, 50).unwrap();
        for j in 0..4 {
            let mean = pts.iter().map(|p| p[j]).sum::<f64>() / 13.0;
            assert!((r.centroids[0][j] - mean).abs() < 1e-9);
        }
        assert!(r.converged);
    }

    #[test]
    fn two_blobs_split_exactly() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
            vec![10.0, 10.0],
            vec![10.0, 10.0],
        ];
        for seed in 0..20 {
            let r = kmeans(&pts, 2, seed, 100).unwrap();
            assert_eq!(r.assignments[0], r.assignments[1]);
            assert_eq!(r.assignments[1], r.assignments[2]);
            assert_eq!(r.assignments[3], r.assignments[4]);
            assert_ne!(r.assignments[0], r.assignments[3]);
            let mut cs = r.centroids.clone();
            cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(cs, vec![vec![0.0, 0.0], vec![10.0, 10.0]]);
            assert_eq!(r.objective, 0.0);
        }
    }

    #[test]
    fn objective_is_monotone_and_matches_recomputation() {
        let pts = random_points(40, 3, 77);
        let r = kmeans(&pts, 4, 5, 100).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", r.history);
        }
        assert!(r.objective <= r.history[1]);
        let direct: f64 = pts
            .iter()
            .zip(&r.assignments)
            .map(|(p, &a)| {
                p.iter()
                    .zip(&r.centroids[a])
                    .map(|(x, c)| (x - c).powi(2))
                    .sum::<f64>()
            })
            .sum();
        assert!((direct - r.objective).abs() < 1e-9);
    }

    #[test]
    fn empty_clusters_are_reseeded() {
        // repeated points make coincident seeds, leaving a cluster empty
        let mut pts = vec![vec![1.0, 1.0]; 5];
        pts.push(vec![4.0, 0.0]);
        pts.push(vec![0.0, 5.0]);
        for seed in 0..10 {
            let r = kmeans(&pts, 3, seed, 20).unwrap();
            let mut sizes = [0; 3];
            for &a in &r.assignments {
                sizes[a] += 1;
            }
            assert!(sizes.iter().all(|&s| s > 0), "{sizes:?}");
            assert!(r.centroids.iter().flatten().all(|x| x.is_finite()));
            assert!(r.converged);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let pts = random_points(50, 2, 3);
        assert_eq!(
            kmeans(&pts, 5, 9, 100).unwrap(),
            kmeans(&pts, 5, 9, 100).unwrap()
        );
    }

    #[test]
    fn rejects_bad_k() {
        let pts = random_points(3, 2, 3);
        assert!(matches!(kmeans(&pts, 4, 0, 10), Err(Error::Input(_))));
        assert!(matches!(kmeans(&pts, 0, 0, 10), Err(Error::Input(_))));
    }

    #[test]
    fn zero_iterations_returns_seeded_start() {
        let pts = random_points(10, 2, 3);
        let r = kmeans(&pts, 3, 1, 0).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.history.len(), 1);
        assert!(!r.converged);
    }
}
