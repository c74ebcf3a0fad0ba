//! Byte-pair encoding over characters.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::merge::PairStats;
use crate::error::Result;
use crate::morph::Segmentation;
use crate::segmenter::{surface, Segmenter, WordCounts};

/// Ordered merges plus the training alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MergeTable {
    pub merges: Vec<(String, String)>,
    pub alphabet: BTreeSet<char>,
}

impl MergeTable {
    /// Table restricted to its first `n` merges.
    pub fn truncated(&self, n: usize) -> MergeTable {
        MergeTable {
            merges: self.merges.iter().take(n).cloned().collect(),
            alphabet: self.alphabet.clone(),
        }
    }

    /// Checks that every merge operand is a character or an earlier merge result.
    pub fn is_consistent(&self) -> bool {
        let mut known: BTreeSet<String> = self.alphabet.iter().map(|c| c.to_string()).collect();
        for (l, r) in &self.merges {
            if !known.contains(l) || !known.contains(r) {
                return false;
            }
            known.insert(format!("{l}{r}"));
        }
        true
    }
}

/// Learns up to `num_merges` merges. Each step merges the most frequent
/// adjacent pair (frequencies weighted by word counts); ties go to the
/// lexicographically smallest `(left, right)`.
pub fn bpe_train(words: &WordCounts, num_merges: usize) -> MergeTable {
    let mut stats = PairStats::new(words, |c, _| c.to_string());
    let alphabet = words.keys().flat_map(|w| w.chars()).collect();
    let mut merges = Vec::with_capacity(num_merges);
    while merges.len() < num_merges {
        let best = stats
            .pair_counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .max_by(|(pa, ca), (pb, cb)| {
                ca.cmp(cb).then_with(|| {
                    let key = |p: &&(u32, u32)| (&stats.symbols[p.0 as usize], &stats.symbols[p.1 as usize]);
                    key(pb).cmp(&key(pa))
                })
            })
            .map(|(p, _)| *p);
        let Some(pair) = best else { break };
        let left = stats.symbols[pair.0 as usize].clone();
        let right = stats.symbols[pair.1 as usize].clone();
        let merged = stats.intern(&format!("{left}{right}"));
        stats.merge(pair, merged);
        merges.push((left, right));
    }
    MergeTable { merges, alphabet }
}

/// Applies the merges of `table`, in table order, to the characters of `word`.
pub fn bpe_encode(word: &str, table: &MergeTable) -> Vec<String> {
    let ranks: HashMap<(&str, &str), usize> = table
        .merges
        .iter()
        .enumerate()
        .map(|(i, (l, r))| ((l.as_str(), r.as_str()), i))
        .collect();
    encode_with_ranks(word, &ranks)
}

fn encode_with_ranks(word: &str, ranks: &HashMap<(&str, &str), usize>) -> Vec<String> {
    let mut pieces: Vec<String> = word.chars().map(String::from).collect();
    loop {
        // Lowest-ranked pair present; merges created later never outrank it.
        let best = pieces
            .windows(2)
            .filter_map(|w| ranks.get(&(w[0].as_str(), w[1].as_str())).copied())
            .min();
        let Some(rank) = best else { break };
        let mut out = Vec::with_capacity(pieces.len());
        let mut i = 0;
        while i < pieces.len() {
            if i + 1 < pieces.len()
                && ranks.get(&(pieces[i].as_str(), pieces[i + 1].as_str())) == Some(&rank)
            {
                out.push(format!("{}{}", pieces[i], pieces[i + 1]));
                i += 2;
            } else {
                out.push(std::mem::take(&mut pieces[i]));
                i += 1;
            }
        }
        pieces = out;
    }
    pieces
}

impl Segmenter for MergeTable {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        surface(bpe_encode(word, self))
    }
}
