use crate::error::{Error, Result};
use crate::seed::fnv1a;

pub const DEFAULT_DIM: usize = 384;

/// Maps cleaned texts to fixed-dimension vectors.
pub trait EmbeddingProvider {
    fn id(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;
}

/// Feature hashing of lowercase word unigrams into `dim` buckets, L2-normalized.
/// Texts without any word map to the zero vector.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
    id: String,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        HashingEmbedder {
            dim,
            id: format!("hashing-unigram-fnv1a-{dim}"),
        }
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for word in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
        {
            let bucket = (fnv1a(word.to_lowercase().as_bytes()) % self.dim as u64) as usize;
            v[bucket] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIM)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        if self.dim == 0 {
            return Err(Error::config("embedding dimension must be positive"));
        }
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub provider_id: String,
}

impl EmbeddingMatrix {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Zero rows carry no signal and are left out of clustering.
    pub fn is_zero(&self, row: usize) -> bool {
        self.vectors[row].iter().all(|&x| x == 0.0)
    }
}

pub fn embed(texts: &[&str], provider: &dyn EmbeddingProvider) -> Result<EmbeddingMatrix> {
    let vectors = provider.embed(texts)?;
    let dim = provider.dim();
    if vectors.len() != texts.len() {
        return Err(Error::Provider {
            index: vectors.len().min(texts.len()),
            message: format!(
                "embedding provider returned {} rows for {} texts",
                vectors.len(),
                texts.len()
            ),
        });
    }
    if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
        return Err(Error::Provider {
            index: i,
            message: format!("row has dimension {} instead of {dim}", vectors[i].len()),
        });
    }
    Ok(EmbeddingMatrix {
        vectors,
        dim,
        provider_id: provider.id().to_string(),
    })
}
