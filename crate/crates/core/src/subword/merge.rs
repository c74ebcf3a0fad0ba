//! Incremental pair statistics shared by the BPE and WordPiece trainers.

use std::collections::{HashMap, HashSet};

use crate::segmenter::WordCounts;

pub(crate) type SymbolId = u32;
pub(crate) type Pair = (SymbolId, SymbolId);

pub(crate) struct PairStats {
    pub symbols: Vec<String>,
    index: HashMap<String, SymbolId>,
    words: Vec<(Vec<SymbolId>, u64)>,
    pub pair_counts: HashMap<Pair, u64>,
    pub symbol_counts: HashMap<SymbolId, u64>,
    locations: HashMap<Pair, HashSet<usize>>,
}

impl PairStats {
    /// `spell` maps (char, position) to the initial symbol string.
    pub fn new(words: &WordCounts, spell: impl Fn(char, usize) -> String) -> Self {
        let mut stats = PairStats {
            symbols: Vec::new(),
            index: HashMap::new(),
            words: Vec::new(),
            pair_counts: HashMap::new(),
            symbol_counts: HashMap::new(),
            locations: HashMap::new(),
        };
        for (word, &count) in words {
            if count == 0 || word.is_empty() {
                continue;
            }
            let ids: Vec<SymbolId> = word
                .chars()
                .enumerate()
                .map(|(i, c)| stats.intern(&spell(c, i)))
                .collect();
            let w = stats.words.len();
            stats.words.push((ids, count));
            stats.add_word(w);
        }
        stats
    }

    pub fn intern(&mut self, symbol: &str) -> SymbolId {
        if let Some(&id) = self.index.get(symbol) {
            return id;
        }
        let id = self.symbols.len() as SymbolId;
        self.symbols.push(symbol.to_string());
        self.index.insert(symbol.to_string(), id);
        id
    }

    fn add_word(&mut self, w: usize) {
        let (ids, count) = &self.words[w];
        for &s in ids {
            *self.symbol_counts.entry(s).or_default() += count;
        }
        for pair in ids.windows(2) {
            let pair = (pair[0], pair[1]);
            *self.pair_counts.entry(pair).or_default() += count;
            self.locations.entry(pair).or_default().insert(w);
        }
    }

    fn remove_word(&mut self, w: usize) {
        let (ids, count) = &self.words[w];
        for &s in ids {
            if let Some(c) = self.symbol_counts.get_mut(&s) {
                *c -= count;
            }
        }
        for pair in ids.windows(2) {
            let pair = (pair[0], pair[1]);
            if let Some(c) = self.pair_counts.get_mut(&pair) {
                *c -= count;
                if *c == 0 {
                    self.pair_counts.remove(&pair);
                }
            }
        }
    }

    /// Replaces every non-overlapping occurrence of `pair`, left to right, by `merged`.
    pub fn merge(&mut self, pair: Pair, merged: SymbolId) {
        let Some(affected) = self.locations.remove(&pair) else {
            return;
        };
        let mut affected: Vec<usize> = affected.into_iter().collect();
        affected.sort_unstable();
        for w in affected {
            if !self.words[w].0.windows(2).any(|p| (p[0], p[1]) == pair) {
                continue;
            }
            self.remove_word(w);
            let ids = &self.words[w].0;
            let mut out = Vec::with_capacity(ids.len());
            let mut i = 0;
            while i < ids.len() {
                if i + 1 < ids.len() && (ids[i], ids[i + 1]) == pair {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(ids[i]);
                    i += 1;
                }
            }
            self.words[w].0 = out;
            self.add_word(w);
        }
    }
}
