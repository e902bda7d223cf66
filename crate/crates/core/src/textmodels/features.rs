use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::ModelError;
use crate::lang::Language;
use crate::scalar::Scalar;

/// Token placed between topic and comment.
pub const SEPARATOR: &str = "<sep>";

/// Unicode words, lowercased for `language`. Punctuation is dropped.
pub fn tokenize(text: &str, language: Language) -> Vec<String> {
    text.unicode_words().map(|w| language.lowercase(w)).collect()
}

/// Topic tokens, the separator, then comment tokens.
pub fn document_tokens(topic: &str, comment: &str, language: Language) -> Vec<String> {
    let mut tokens = tokenize(topic, language);
    tokens.push(SEPARATOR.to_string());
    tokens.extend(tokenize(comment, language));
    tokens
}

/// Contiguous n-grams for every n in `range`, words joined by one space.
pub fn ngrams(tokens: &[String], range: [usize; 2]) -> Vec<String> {
    let mut out = Vec::new();
    for n in range[0].max(1)..=range[1] {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyConfig {
    pub ngram_range: [usize; 2],
    pub min_df: u64,
}

impl Default for VocabularyConfig {
    fn default() -> Self {
        Self { ngram_range: [1, 2], min_df: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Vocabulary<T> {
    pub config: VocabularyConfig,
    pub n_docs: u64,
    /// Sorted terms; a term's position is its feature index.
    pub terms: Vec<String>,
    pub df: Vec<u64>,
    pub idf: Vec<T>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl<T: Scalar> Vocabulary<T> {
    /// Fits on tokenized documents: n-grams with document frequency at least
    /// `min_df`, idf = ln((1 + N) / (1 + df)) + 1.
    pub fn fit(docs: &[Vec<String>], config: VocabularyConfig) -> Result<Self, ModelError> {
        if docs.is_empty() {
            return Err(ModelError::EmptyVocabulary);
        }
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        for doc in docs {
            let mut grams = ngrams(doc, config.ngram_range);
            grams.sort_unstable();
            grams.dedup();
            for g in grams {
                *df.entry(g).or_default() += 1;
            }
        }
        df.retain(|_, d| *d >= config.min_df);
        if df.is_empty() {
            return Err(ModelError::EmptyVocabulary);
        }
        let n = docs.len() as u64;
        let (terms, df): (Vec<String>, Vec<u64>) = df.into_iter().unzip();
        let idf = df.iter().map(|&d| idf_value(n, d)).collect();
        let mut vocab = Self { config, n_docs: n, terms, df, idf, index: HashMap::new() };
        vocab.rebuild_index();
        Ok(vocab)
    }

    /// Restores the term lookup after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// tf·idf over in-vocabulary n-grams, L2-normalized.
    pub fn featurize(&self, tokens: &[String]) -> FeatureVector<T> {
        let mut tf: BTreeMap<usize, u64> = BTreeMap::new();
        for g in ngrams(tokens, self.config.ngram_range) {
            if let Some(i) = self.index_of(&g) {
                *tf.entry(i).or_default() += 1;
            }
        }
        let (indices, mut values): (Vec<u32>, Vec<T>) =
            tf.into_iter().map(|(i, c)| (i as u32, T::of(c as f64) * self.idf[i])).unzip();
        let norm = values.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm > T::zero() {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        FeatureVector { indices, values }
    }
}

pub fn idf_value<T: Scalar>(n_docs: u64, df: u64) -> T {
    T::of(((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0)
}

/// Fits on raw texts of one language.
pub fn fit_vocabulary<T: Scalar>(texts: &[&str], language: Language, config: VocabularyConfig) -> Result<Vocabulary<T>, ModelError> {
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t, language)).collect();
    Vocabulary::fit(&docs, config)
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub indices: Vec<u32>,
    pub values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(indices: Vec<u32>, values: Vec<T>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        Self { indices, values }
    }

    pub fn from_dense(dense: &[T]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        Self { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }
}
