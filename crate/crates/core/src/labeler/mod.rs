//! Supervised canonical segmenter: boundary tagging plus rewriting of
//! surface segments into canonical morphemes.
//!
//! Training aligns each word to its gold morphemes, tags the first
//! character of every aligned span as a boundary, fits an averaged
//! perceptron to those tags, and counts which canonical morpheme each
//! surface span stood for. Prediction runs the tagger (1.5-entmax over the
//! label scores), cuts the word at predicted boundaries and rewrites each
//! piece by the most frequent canonical form seen in training.

mod align;
mod entmax;
mod rewrite;
mod tagger;

pub use align::{align_canonical, AlignedEntry};
pub use entmax::entmax15;
pub use rewrite::RewriteTable;
pub use tagger::{features, train_perceptron, BoundaryLabeling, Label, LinearTagger, TaggedWord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::Segmentation;
use crate::scalar::Real;
use crate::segmenter::Segmenter;
use crate::tsv::WordEntry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelerConfig {
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        LabelerConfig {
            epochs: 10,
            seed: crate::datasets::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundaryLabeler<F: Real = f64> {
    pub tagger: LinearTagger<F>,
    pub rewrites: RewriteTable,
}

/// Trains the tagger and rewrite table on segmented entries.
pub fn train_tagger<F: Real>(train: &[WordEntry], config: &LabelerConfig) -> Result<BoundaryLabeler<F>> {
    if train.is_empty() {
        return Err(Error::Precondition("empty training set".into()));
    }
    let mut examples = Vec::with_capacity(train.len());
    let mut rewrites = RewriteTable::default();
    for entry in train {
        let gold = entry.segmentation.as_ref().ok_or_else(|| {
            Error::Precondition(format!("training entry {:?} has no segmentation", entry.word))
        })?;
        let chars: Vec<char> = entry.word.chars().collect();
        let aligned = align_canonical(&entry.word, gold);
        let nonempty: Vec<usize> = (0..aligned.spans.len())
            .filter(|&k| aligned.spans[k].0 < aligned.spans[k].1)
            .collect();
        for (rank, &k) in nonempty.iter().enumerate() {
            let (s, e) = aligned.spans[k];
            let text: String = chars[s..e].iter().collect();
            let is_final = rank + 1 == nonempty.len();
            rewrites.add(&text, gold.morphemes()[k].as_str(), is_final);
        }
        let starts = nonempty.iter().map(|&k| aligned.spans[k].0);
        examples.push(TaggedWord {
            gold: BoundaryLabeling::from_starts(chars.len(), starts),
            chars,
        });
    }
    let tagger = train_perceptron(&examples, config.epochs, config.seed);
    Ok(BoundaryLabeler { tagger, rewrites })
}

impl<F: Real> BoundaryLabeler<F> {
    /// Surface segments at the predicted boundaries.
    pub fn surface_segments(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.chars().collect();
        self.tagger.label(word).segments(&chars)
    }

    /// Canonical segmentation: surface segments rewritten by the table.
    pub fn predict(&self, word: &str) -> Result<Segmentation> {
        let segments = self.surface_segments(word);
        let last = segments.len().saturating_sub(1);
        let canonical: Vec<String> = segments
            .iter()
            .enumerate()
            .map(|(i, s)| self.rewrites.rewrite(s, i == last))
            .collect();
        Segmentation::from_strs(&canonical)
    }
}

impl<F: Real> Segmenter for BoundaryLabeler<F> {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        self.predict(word)
    }
}
