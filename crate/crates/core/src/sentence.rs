//! Context-aware segmentation of whole sentences.
//!
//! Words seen in training keep the analyses they were seen with. When a
//! word had several, the immediate left and right neighbors pick one.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{nfc, Segmentation};
use crate::segmenter::Segmenter;
use crate::tsv::SentenceEntry;

/// Splits on runs of Unicode whitespace. Punctuation stays attached.
pub fn tokenize(sentence: &str) -> Vec<&str> {
    sentence.split_whitespace().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

type AnalysisCounts = BTreeMap<Segmentation, u64>;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "ContextRecords", try_from = "ContextRecords")]
pub struct ContextModel {
    lexicon: BTreeMap<String, AnalysisCounts>,
    neighbors: BTreeMap<(String, String, Side), AnalysisCounts>,
}

impl ContextModel {
    /// Analyses of `word` with their training counts.
    pub fn analyses(&self, word: &str) -> Option<&AnalysisCounts> {
        self.lexicon.get(word)
    }

    /// How often `word` was analysed as `analysis` next to `neighbor`.
    pub fn neighbor_count(&self, word: &str, neighbor: &str, side: Side, analysis: &Segmentation) -> u64 {
        self.neighbors
            .get(&(word.to_string(), neighbor.to_string(), side))
            .and_then(|c| c.get(analysis))
            .copied()
            .unwrap_or(0)
    }

    pub fn n_words(&self) -> usize {
        self.lexicon.len()
    }

    pub fn n_neighbor_keys(&self) -> usize {
        self.neighbors.len()
    }

    fn add(&mut self, tokens: &[&str], segs: &[Segmentation]) {
        for (i, (&word, seg)) in tokens.iter().zip(segs).enumerate() {
            *self
                .lexicon
                .entry(word.to_string())
                .or_default()
                .entry(seg.clone())
                .or_default() += 1;
            let sides = [
                (i.checked_sub(1).map(|j| tokens[j]), Side::Left),
                (tokens.get(i + 1).copied(), Side::Right),
            ];
            for (neighbor, side) in sides {
                if let Some(neighbor) = neighbor {
                    *self
                        .neighbors
                        .entry((word.to_string(), neighbor.to_string(), side))
                        .or_default()
                        .entry(seg.clone())
                        .or_default() += 1;
                }
            }
        }
    }

    /// Picks an analysis for `tokens[i]`, or `None` if the word is unseen.
    /// Several analyses are scored by the product of add-one neighbor
    /// counts; ties go to the higher lexicon count, then fewer morphemes,
    /// then the lexicographically smaller analysis.
    pub fn choose(&self, tokens: &[&str], i: usize) -> Option<&Segmentation> {
        let word = tokens[i];
        let analyses = self.lexicon.get(word)?;
        if analyses.len() == 1 {
            return analyses.keys().next();
        }
        let neighbors = [
            (i.checked_sub(1).map(|j| tokens[j]), Side::Left),
            (tokens.get(i + 1).copied(), Side::Right),
        ];
        let score = |analysis: &Segmentation| -> u128 {
            neighbors
                .iter()
                .filter_map(|&(n, side)| n.map(|n| (n, side)))
                .map(|(n, side)| u128::from(self.neighbor_count(word, n, side, analysis)) + 1)
                .product()
        };
        analyses
            .iter()
            .max_by_key(|&(a, &count)| (score(a), count, Reverse(a.len()), Reverse(a)))
            .map(|(a, _)| a)
    }
}

/// Collects analysis and neighbor counts from segmented sentences.
pub fn train_context(train: &[SentenceEntry]) -> Result<ContextModel> {
    if train.is_empty() {
        return Err(Error::Precondition("empty training set".into()));
    }
    let mut model = ContextModel::default();
    for entry in train {
        let segs = entry.segmented.as_ref().ok_or_else(|| {
            Error::Precondition(format!("training sentence {:?} has no segmentation", entry.sentence))
        })?;
        model.add(&entry.tokens(), segs);
    }
    Ok(model)
}

/// Segments every token of `sentence`. Unseen tokens go to `fallback`; if
/// the fallback fails the token is kept whole.
pub fn segment_sentence<S: Segmenter + ?Sized>(
    sentence: &str,
    context: &ContextModel,
    fallback: &S,
) -> Result<SentenceEntry> {
    let sentence = nfc(sentence);
    let tokens = tokenize(&sentence);
    let mut segs = Vec::with_capacity(tokens.len());
    for i in 0..tokens.len() {
        let seg = match context.choose(&tokens, i) {
            Some(seg) => seg.clone(),
            None => match fallback.segment(tokens[i]) {
                Ok(seg) => seg,
                Err(e) => {
                    warn!("fallback failed on {:?}: {e}", tokens[i]);
                    Segmentation::whole(tokens[i])?
                }
            },
        };
        segs.push(seg);
    }
    SentenceEntry::new(&sentence, Some(segs))
}

#[derive(Serialize, Deserialize)]
struct LexiconRecord {
    word: String,
    analysis: Segmentation,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct NeighborRecord {
    word: String,
    neighbor: String,
    side: Side,
    analysis: Segmentation,
    count: u64,
}

/// Flat, sorted form used in model files.
#[derive(Serialize, Deserialize)]
struct ContextRecords {
    lexicon: Vec<LexiconRecord>,
    neighbors: Vec<NeighborRecord>,
}

impl From<ContextModel> for ContextRecords {
    fn from(model: ContextModel) -> Self {
        let lexicon = model
            .lexicon
            .into_iter()
            .flat_map(|(word, counts)| {
                counts.into_iter().map(move |(analysis, count)| LexiconRecord {
                    word: word.clone(),
                    analysis,
                    count,
                })
            })
            .collect();
        let neighbors = model
            .neighbors
            .into_iter()
            .flat_map(|((word, neighbor, side), counts)| {
                counts.into_iter().map(move |(analysis, count)| NeighborRecord {
                    word: word.clone(),
                    neighbor: neighbor.clone(),
                    side,
                    analysis,
                    count,
                })
            })
            .collect();
        ContextRecords { lexicon, neighbors }
    }
}

impl TryFrom<ContextRecords> for ContextModel {
    type Error = Error;

    fn try_from(records: ContextRecords) -> Result<Self> {
        let mut model = ContextModel::default();
        for r in records.lexicon {
            if r.count == 0 {
                return Err(Error::Model(format!("zero count for {:?}", r.word)));
            }
            *model.lexicon.entry(r.word).or_default().entry(r.analysis).or_default() += r.count;
        }
        for r in records.neighbors {
            let known = model.lexicon.get(&r.word).is_some_and(|a| a.contains_key(&r.analysis));
            if r.count == 0 || !known {
                return Err(Error::Model(format!("neighbor record for unknown analysis of {:?}", r.word)));
            }
            *model
                .neighbors
                .entry((r.word, r.neighbor, r.side))
                .or_default()
                .entry(r.analysis)
                .or_default() += r.count;
        }
        Ok(model)
    }
}
