//! Batch analytics for toxic social-media discourse.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`corpus`]: JSON Lines ingestion, hashtag/mention/retweet extraction, text cleaning
//! - [`toxicity`]: pluggable scoring (HTTP client or deterministic lexicon stub) and thresholding
//! - [`topics`]: embedding, PCA reduction, Lloyd's K-Means, c-TF-IDF keywords, categories
//! - [`graph`]: mention/retweet interaction graphs, network statistics, degree and
//!   betweenness centrality, greedy modularity (CNM) communities, user ranking
//! - [`trends`]: daily volumes, ISO-week composition, hashtag and per-user category tallies
//! - [`report`]: CSV/JSONL writers with a provenance header line

pub mod corpus;
pub mod error;
pub mod graph;
pub mod report;
pub mod seed;
pub mod topics;
pub mod toxicity;
pub mod trends;

pub use error::{Error, Result};
