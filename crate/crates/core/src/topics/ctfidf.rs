//! Class-based TF-IDF.
//!
//! Every cluster is concatenated into one class document. For word `x` and class `c`:
//!
//! ```text
//! W(x, c) = tf(x, c) * ln(1 + A / f(x))
//! ```
//!
//! with `tf(x, c)` the count of `x` in class `c`, `f(x)` its count over all classes and `A`
//! the average number of words per class.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Lowercase, split on non-alphanumerics, drop tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CTfIdfModel {
    /// Sorted vocabulary; word indices below refer to positions here.
    pub vocabulary: Vec<String>,
    /// `tf[class][word]`.
    pub tf: Vec<Vec<u64>>,
    /// `f[word]`: frequency summed over classes.
    pub frequency: Vec<u64>,
    /// `A`: total words divided by the number of classes.
    pub avg_words_per_class: f64,
    /// `weights[class][word]`.
    pub weights: Vec<Vec<f64>>,
}

impl CTfIdfModel {
    pub fn num_classes(&self) -> usize {
        self.tf.len()
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|w| w.as_str().cmp(word))
            .ok()
    }

    pub fn weight(&self, word: &str, class: usize) -> f64 {
        self.word_index(word)
            .map_or(0.0, |x| self.weights[class][x])
    }

    /// The `n` highest-weighted words of `class` with nonzero weight, ties broken
    /// lexicographically.
    pub fn top_keywords(&self, class: usize, n: usize) -> Vec<String> {
        let Some(row) = self.weights.get(class) else {
            return Vec::new();
        };
        let mut ranked: Vec<(usize, f64)> = row
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, w)| w > 0.0)
            .collect();
        // vocabulary is sorted, so index order is lexicographic order
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
            .into_iter()
            .take(n)
            .map(|(x, _)| self.vocabulary[x].clone())
            .collect()
    }
}

pub fn top_keywords(model: &CTfIdfModel, topic: usize, n: usize) -> Vec<String> {
    model.top_keywords(topic, n)
}

/// Fits c-TF-IDF over `num_classes` classes. Records assigned `None` are left out; a class
/// without records gets all-zero rows.
pub fn fit_ctfidf(
    assignments: &[Option<usize>],
    tokens: &[Vec<String>],
    num_classes: usize,
) -> Result<CTfIdfModel> {
    if assignments.len() != tokens.len() {
        return Err(Error::input(format!(
            "{} assignments for {} tokenized records",
            assignments.len(),
            tokens.len()
        )));
    }
    if num_classes == 0 {
        return Err(Error::input("c-TF-IDF needs at least one class"));
    }
    if let Some(c) = assignments.iter().flatten().find(|&&c| c >= num_classes) {
        return Err(Error::input(format!(
            "class {c} is out of range for {num_classes} classes"
        )));
    }

    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for (toks, class) in tokens.iter().zip(assignments) {
        if class.is_some() {
            for t in toks {
                vocab.entry(t.as_str()).or_insert(0);
            }
        }
    }
    for (i, idx) in vocab.values_mut().enumerate() {
        *idx = i;
    }
    let vocabulary: Vec<String> = vocab.keys().map(|w| w.to_string()).collect();

    let mut tf = vec![vec![0u64; vocabulary.len()]; num_classes];
    for (toks, class) in tokens.iter().zip(assignments) {
        if let Some(c) = *class {
            for t in toks {
                tf[c][vocab[t.as_str()]] += 1;
            }
        }
    }
    let mut frequency = vec![0u64; vocabulary.len()];
    for row in &tf {
        frequency.iter_mut().zip(row).for_each(|(f, &t)| *f += t);
    }
    let total: u64 = frequency.iter().sum();
    let avg_words_per_class = total as f64 / num_classes as f64;

    let idf: Vec<f64> = frequency
        .iter()
        .map(|&f| (avg_words_per_class / f as f64).ln_1p())
        .collect();
    let weights = tf
        .iter()
        .map(|row| {
            row.iter()
                .zip(&idf)
                .map(|(&t, &w)| if t == 0 { 0.0 } else { t as f64 * w })
                .collect()
        })
        .collect();

    Ok(CTfIdfModel {
        vocabulary,
        tf,
        frequency,
        avg_words_per_class,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(
            tokenize("Hey CDC, a F*ck #monkeypox!"),
            ["hey", "cdc", "ck", "monkeypox"]
        );
        assert!(tokenize("a b c").is_empty());
    }

    #[test]
    fn worked_two_class_value() {
        let m = fit_ctfidf(&[Some(0), Some(1)], &[toks("aa aa bb"), toks("aa")], 2).unwrap();
        assert_eq!(m.avg_words_per_class, 2.0);
        assert_eq!(m.frequency, vec![3, 1]);
        assert!((m.weight("aa", 0) - 1.021651).abs() < 1e-6);
        assert!((m.weight("aa", 0) - 2.0 * (1.0f64 + 2.0 / 3.0).ln()).abs() < 1e-12);
        assert_eq!(m.weight("bb", 1), 0.0);
    }

    #[test]
    fn worked_single_class_value() {
        let m = fit_ctfidf(&[Some(0)], &[toks("aa aa aa aa")], 1).unwrap();
        assert!((m.weight("aa", 0) - 2.772589).abs() < 1e-6);
    }

    #[test]
    fn empty_and_unassigned_classes() {
        let m = fit_ctfidf(&[Some(0), None], &[toks("xx"), toks("yy")], 3).unwrap();
        assert_eq!(m.vocabulary, ["xx"]);
        assert!(m.weights[1].iter().all(|&w| w == 0.0));
        assert!(m.tf[2].iter().all(|&t| t == 0));
        assert!(m.top_keywords(2, 5).is_empty());
    }

    #[test]
    fn keyword_order_and_ties() {
        let m = fit_ctfidf(&[Some(0)], &[toks("vaccine")], 1).unwrap();
        assert_eq!(m.top_keywords(0, 10), ["vaccine"]);
        let m = fit_ctfidf(&[Some(0)], &[toks("zeta alpha")], 1).unwrap();
        assert_eq!(m.top_keywords(0, 10), ["alpha", "zeta"]);
        assert_eq!(m.top_keywords(0, 1), ["alpha"]);
    }

    #[test]
    fn equal_tf_everywhere_gives_equal_weight() {
        let m = fit_ctfidf(
            &[Some(0), Some(1), Some(2)],
            &[toks("ww aa"), toks("ww bb bb"), toks("ww")],
            3,
        )
        .unwrap();
        let w: Vec<f64> = (0..3).map(|c| m.weight("ww", c)).collect();
        assert_eq!(w[0], w[1]);
        assert_eq!(w[1], w[2]);
    }

    #[test]
    fn rejects_mismatched_input() {
        assert!(fit_ctfidf(&[Some(0)], &[], 1).is_err());
        assert!(fit_ctfidf(&[Some(3)], &[toks("aa")], 2).is_err());
    }
}
