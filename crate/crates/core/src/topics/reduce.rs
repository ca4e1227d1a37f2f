use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracing::debug;

use crate::error::{Error, Result};

/// Maps `n × D` rows to `n × d`.
pub trait Reducer {
    fn reduce(&self, rows: &[Vec<f64>], d: usize, seed: u64) -> Result<Vec<Vec<f64>>>;
}

/// Principal components by power iteration with deflation.
///
/// Each component is iterated until successive unit vectors differ by less than
/// `tolerance`, is re-orthogonalized against earlier components on every step, and has its
/// sign fixed so the largest-magnitude loading is positive.
#[derive(Debug, Clone, Copy)]
pub struct Pca {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for Pca {
    fn default() -> Self {
        Pca {
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    pub mean: Vec<f64>,
    /// Unit-norm, mutually orthogonal, in decreasing eigenvalue order.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component (covariance normalized by `n - 1`).
    pub eigenvalues: Vec<f64>,
}

impl PcaFit {
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(row.iter().zip(&self.mean))
                    .map(|(ci, (x, m))| ci * (x - m))
                    .sum()
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes keep the basis orthogonal to rounding error
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, bi)| *x -= p * bi);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Unit vector orthogonal to `basis`, built from the standard basis vector with the
/// largest residual. Used once the remaining variance is numerically zero.
fn complete_basis(dim: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best = vec![0.0; dim];
    let mut best_norm = -1.0;
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        orthogonalize(&mut e, basis);
        let n = dot(&e, &e);
        if n > best_norm + 1e-12 {
            best_norm = n;
            best = e;
        }
    }
    normalize(&mut best);
    best
}

fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

impl Pca {
    pub fn fit(&self, rows: &[Vec<f64>], d: usize, seed: u64) -> Result<PcaFit> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::input(
                "dimensionality reduction needs at least 2 rows",
            ));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("rows have unequal dimension"));
        }
        if d == 0 || d > dim {
            return Err(Error::input(format!(
                "target dimension {d} must be in 1..={dim}"
            )));
        }

        let mut mean = vec![0.0; dim];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut cov = vec![vec![0.0; dim]; dim];
        for r in rows {
            let c: Vec<f64> = r.iter().zip(&mean).map(|(x, m)| x - m).collect();
            for i in 0..dim {
                if c[i] == 0.0 {
                    continue;
                }
                let ci = c[i];
                for (j, cj) in c.iter().enumerate().skip(i) {
                    cov[i][j] += ci * cj;
                }
            }
        }
        let denom = (n - 1) as f64;
        #[allow(clippy::needless_range_loop)]
        for i in 0..dim {
            for j in i..dim {
                cov[i][j] /= denom;
                cov[j][i] = cov[i][j];
            }
        }

        let trace: f64 = (0..dim).map(|i| cov[i][i]).sum();
        let negligible = 1e-13 * trace.max(f64::MIN_POSITIVE);
        let mut work = cov.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut eigenvalues = Vec::with_capacity(d);

        for k in 0..d {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut v, &components);
            if normalize(&mut v) == 0.0 {
                v = complete_basis(dim, &components);
            }
            let mut converged = false;
            let mut degenerate = false;
            for _ in 0..self.max_iterations {
                let mut w = matvec(&work, &v);
                orthogonalize(&mut w, &components);
                if normalize(&mut w) <= negligible {
                    degenerate = true;
                    break;
                }
                if dot(&w, &v) < 0.0 {
                    w.iter_mut().for_each(|x| *x = -*x);
                }
                let delta = w
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                v = w;
                if delta < self.tolerance {
                    converged = true;
                    break;
                }
            }
            if degenerate {
                v = complete_basis(dim, &components);
            } else if !converged {
                debug!(component = k, "power iteration hit the iteration cap");
            }
            fix_sign(&mut v);

            let lambda_work = dot(&v, &matvec(&work, &v));
            for i in 0..dim {
                for j in 0..dim {
                    work[i][j] -= lambda_work * v[i] * v[j];
                }
            }
            eigenvalues.push(dot(&v, &matvec(&cov, &v)).max(0.0));
            components.push(v);
        }

        Ok(PcaFit {
            mean,
            components,
            eigenvalues,
        })
    }
}

impl Reducer for Pca {
    fn reduce(&self, rows: &[Vec<f64>], d: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let fit = self.fit(rows, d, seed)?;
        Ok(rows.iter().map(|r| fit.project(r)).collect())
    }
}
