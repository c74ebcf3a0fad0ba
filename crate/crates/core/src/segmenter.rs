use std::collections::BTreeMap;

use crate::error::Result;
use crate::morph::Segmentation;

/// Word frequencies, ordered for deterministic iteration.
pub type WordCounts = BTreeMap<String, u64>;

/// Counts word types in an iterator of words.
pub fn count_words<'a>(words: impl IntoIterator<Item = &'a str>) -> WordCounts {
    let mut counts = WordCounts::new();
    for w in words {
        *counts.entry(w.to_string()).or_default() += 1;
    }
    counts
}

/// Anything that maps a single word to a segmentation.
pub trait Segmenter {
    fn segment(&self, word: &str) -> Result<Segmentation>;
}

impl<S: Segmenter + ?Sized> Segmenter for &S {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        (**self).segment(word)
    }
}

impl<S: Segmenter + ?Sized> Segmenter for Box<S> {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        (**self).segment(word)
    }
}

/// Builds a surface segmentation from pieces that concatenate to a word.
pub(crate) fn surface(pieces: Vec<String>) -> Result<Segmentation> {
    Segmentation::from_strs(&pieces)
}
