//! Embedding-based topic modeling: clean, embed, reduce, cluster, then describe clusters
//! with c-TF-IDF keywords.
//!
//! The default reducer is deterministic PCA rather than UMAP; any [`Reducer`] can be
//! plugged in. Clustering happens in the reduced space. Texts that embed to the zero
//! vector (empty after cleaning) are kept in the model with no topic.

pub mod category;
pub mod ctfidf;
pub mod embed;
pub mod export;
pub mod kmeans;
pub mod reduce;

use serde::{Deserialize, Serialize};

pub use category::{apply_categories, Category, CategoryMap};
pub use ctfidf::{fit_ctfidf, tokenize, top_keywords, CTfIdfModel};
pub use embed::{embed, EmbeddingMatrix, EmbeddingProvider, HashingEmbedder, DEFAULT_DIM};
pub use export::{
    read_record_topics_csv, write_record_topics_csv, write_topic_map_csv, write_topics_csv,
    RecordTopic,
};
pub use kmeans::{kmeans, KMeansResult};
pub use reduce::{Pca, PcaFit, Reducer};

use crate::corpus::{clean_for_embedding, Corpus};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicConfig {
    pub k: usize,
    pub reduce_dim: usize,
    /// Dimension of the plotting export.
    pub viz_dim: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub keywords_per_topic: usize,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            k: 50,
            reduce_dim: 5,
            viz_dim: 2,
            seed: 0,
            max_iterations: 300,
            keywords_per_topic: 10,
        }
    }
}

impl TopicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("topics.k must be at least 1"));
        }
        if self.reduce_dim == 0 || self.viz_dim == 0 {
            return Err(Error::config("reduction dimensions must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TopicModel {
    /// Record ids in corpus order.
    pub record_ids: Vec<String>,
    pub cleaned: Vec<String>,
    pub embeddings: EmbeddingMatrix,
    /// Reduced vectors of the clustered rows, in the order of [`Self::clustered_rows`].
    pub reduced: Vec<Vec<f64>>,
    pub clustered_rows: Vec<usize>,
    /// Topic per record; `None` for texts that could not be embedded.
    pub assignments: Vec<Option<usize>>,
    pub centroids: Vec<Vec<f64>>,
    pub kmeans_objective: f64,
    pub kmeans_iterations: usize,
    pub ctfidf: CTfIdfModel,
    pub keywords: Vec<Vec<String>>,
    pub config: TopicConfig,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn topic_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for t in self.assignments.iter().flatten() {
            sizes[*t] += 1;
        }
        sizes
    }

    /// Low-dimensional coordinates of every clustered record for plotting, as
    /// `(row, coordinates)` pairs.
    pub fn visualization(&self, reducer: &dyn Reducer) -> Result<Vec<(usize, Vec<f64>)>> {
        let rows: Vec<Vec<f64>> = self
            .clustered_rows
            .iter()
            .map(|&i| self.embeddings.vectors[i].clone())
            .collect();
        let dim = self.config.viz_dim.min(self.embeddings.dim);
        let coords = reducer.reduce(&rows, dim, derive_seed(self.config.seed, "viz-reduce"))?;
        Ok(self.clustered_rows.iter().copied().zip(coords).collect())
    }
}

/// Runs the full topic pipeline over `corpus`.
pub fn fit_topics(
    corpus: &Corpus,
    embedder: &dyn EmbeddingProvider,
    reducer: &dyn Reducer,
    config: &TopicConfig,
) -> Result<TopicModel> {
    config.validate()?;
    let cleaned: Vec<String> = corpus
        .iter()
        .map(|r| clean_for_embedding(&r.text))
        .collect();
    let refs: Vec<&str> = cleaned.iter().map(String::as_str).collect();
    let embeddings = embed(&refs, embedder)?;

    let clustered_rows: Vec<usize> = (0..embeddings.len())
        .filter(|&i| !embeddings.is_zero(i))
        .collect();
    if clustered_rows.len() < config.k {
        return Err(Error::input(format!(
            "{} embeddable records is fewer than k = {}",
            clustered_rows.len(),
            config.k
        )));
    }
    let points: Vec<Vec<f64>> = clustered_rows
        .iter()
        .map(|&i| embeddings.vectors[i].clone())
        .collect();

    let reduce_dim = config.reduce_dim.min(embeddings.dim);
    let reduced = if points.len() >= 2 {
        reducer.reduce(&points, reduce_dim, derive_seed(config.seed, "reduce"))?
    } else {
        points.iter().map(|p| p[..reduce_dim].to_vec()).collect()
    };

    let km = kmeans(
        &reduced,
        config.k,
        derive_seed(config.seed, "kmeans"),
        config.max_iterations,
    )?;
    let mut assignments = vec![None; corpus.len()];
    for (&row, &topic) in clustered_rows.iter().zip(&km.assignments) {
        assignments[row] = Some(topic);
    }

    let tokens: Vec<Vec<String>> = cleaned.iter().map(|t| tokenize(t)).collect();
    let ctfidf = fit_ctfidf(&assignments, &tokens, config.k)?;
    let keywords = (0..config.k)
        .map(|t| ctfidf.top_keywords(t, config.keywords_per_topic))
        .collect();

    Ok(TopicModel {
        record_ids: corpus.iter().map(|r| r.id.clone()).collect(),
        cleaned,
        embeddings,
        reduced,
        clustered_rows,
        assignments,
        centroids: km.centroids,
        kmeans_objective: km.objective,
        kmeans_iterations: km.iterations,
        ctfidf,
        keywords,
        config: config.clone(),
    })
}
