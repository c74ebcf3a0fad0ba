//! Morfessor-style baseline: recursive binary splitting under a two-part
//! minimum description length cost.
//!
//! The corpus part codes every morph token with its maximum-likelihood
//! probability, `-sum c(m) ln(c(m) / N)`. The lexicon part spells each
//! distinct morph letter by letter with letter probabilities estimated once
//! from the training words. Costs are in nats.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::morph::Segmentation;
use crate::scalar::Real;
use crate::segmenter::{surface, Segmenter, WordCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MorfessorModel<F: Real = f64> {
    /// Morph token counts.
    pub lexicon: BTreeMap<String, u64>,
    /// Analysis of every training word.
    pub analyses: BTreeMap<String, Vec<String>>,
    /// Spelling cost of each letter.
    pub char_costs: BTreeMap<char, F>,
    pub corpus_cost: F,
    pub lexicon_cost: F,
}

impl<F: Real> MorfessorModel<F> {
    pub fn total_cost(&self) -> F {
        self.corpus_cost + self.lexicon_cost
    }

    fn tokens(&self) -> u64 {
        self.lexicon.values().sum::<u64>()
    }

    /// Best cover by lexicon morph probabilities; characters missing from
    /// the lexicon are spelled out one at a time at a penalty.
    pub fn viterbi(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let total = F::from_count(self.tokens().max(1));
        let max_len = self.lexicon.keys().map(|m| m.chars().count()).max().unwrap_or(1);
        let worst_char = self
            .char_costs
            .values()
            .copied()
            .fold(F::zero(), |a, b| if b > a { b } else { a });
        let unknown = total.ln() + worst_char;
        // best[i]: (cost, pieces, end of first piece) for chars[i..].
        let mut best: Vec<(F, usize, usize)> = vec![(F::infinity(), usize::MAX, n); n + 1];
        best[n] = (F::zero(), 0, n);
        let mut buf = String::new();
        for start in (0..n).rev() {
            buf.clear();
            for end in start + 1..=n.min(start + max_len.max(1)) {
                buf.push(chars[end - 1]);
                let cost = match self.lexicon.get(buf.as_str()) {
                    Some(&c) if c > 0 => (total / F::from_count(c)).ln(),
                    _ if end == start + 1 => unknown,
                    _ => continue,
                };
                let (tail, tail_pieces, _) = best[end];
                let cand = (cost + tail, tail_pieces + 1, end);
                let cur = best[start];
                if cand.0 < cur.0 || (cand.0 == cur.0 && (cand.1 < cur.1 || (cand.1 == cur.1 && cand.2 > cur.2))) {
                    best[start] = cand;
                }
            }
        }
        let mut pieces = Vec::new();
        let mut pos = 0;
        while pos < n {
            let end = best[pos].2;
            pieces.push(chars[pos..end].iter().collect());
            pos = end;
        }
        pieces
    }
}

/// Segments training words by their stored analysis, others by Viterbi.
pub fn morfessor_encode<F: Real>(word: &str, model: &MorfessorModel<F>) -> Vec<String> {
    match model.analyses.get(word) {
        Some(a) => a.clone(),
        None => model.viterbi(word),
    }
}

impl<F: Real> Segmenter for MorfessorModel<F> {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        surface(morfessor_encode(word, self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorfessorConfig {
    pub max_epochs: usize,
    /// Stop when an epoch improves the cost by less than this (nats).
    pub tolerance: f64,
}

impl Default for MorfessorConfig {
    fn default() -> Self {
        MorfessorConfig {
            max_epochs: 20,
            tolerance: 1e-6,
        }
    }
}

/// Total cost after every accepted change, starting with the initial model.
#[derive(Debug, Clone, Default)]
pub struct MorfessorTrace {
    pub costs: Vec<f64>,
    pub epochs: usize,
}

/// Running cost state with O(1) updates.
struct CostState<F: Real> {
    counts: HashMap<String, u64>,
    tokens: u64,
    sum_c_log_c: F,
    lexicon_cost: F,
    char_costs: HashMap<char, F>,
}

fn c_log_c<F: Real>(c: u64) -> F {
    if c == 0 {
        F::zero()
    } else {
        let c = F::from_count(c);
        c * c.ln()
    }
}

impl<F: Real> CostState<F> {
    fn morph_cost(&self, morph: &str) -> F {
        morph
            .chars()
            .map(|c| self.char_costs[&c])
            .fold(F::zero(), |a, b| a + b)
    }

    fn add(&mut self, morph: &str, k: u64) {
        let old = self.counts.get(morph).copied().unwrap_or(0);
        if old == 0 {
            self.lexicon_cost = self.lexicon_cost + self.morph_cost(morph);
        }
        self.sum_c_log_c = self.sum_c_log_c - c_log_c::<F>(old) + c_log_c::<F>(old + k);
        self.counts.insert(morph.to_string(), old + k);
        self.tokens += k;
    }

    fn remove(&mut self, morph: &str, k: u64) {
        let old = self.counts.get(morph).copied().unwrap_or(0);
        debug_assert!(old >= k);
        let new = old - k;
        self.sum_c_log_c = self.sum_c_log_c - c_log_c::<F>(old) + c_log_c::<F>(new);
        if new == 0 {
            self.lexicon_cost = self.lexicon_cost - self.morph_cost(morph);
            self.counts.remove(morph);
        } else {
            self.counts.insert(morph.to_string(), new);
        }
        self.tokens -= k;
    }

    fn corpus_cost(&self) -> F {
        c_log_c::<F>(self.tokens) - self.sum_c_log_c
    }

    fn total(&self) -> F {
        self.corpus_cost() + self.lexicon_cost
    }

    /// Chooses the cheapest of "keep whole" and every binary split of
    /// `text`, commits it, and recurses into both halves of a split.
    fn resplit(&mut self, text: &str, k: u64, out: &mut Vec<String>) {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        self.add(text, k);
        let mut best_cost = self.total();
        self.remove(text, k);
        let mut best_split = None;
        for &(byte, _) in chars.iter().skip(1) {
            let (left, right) = text.split_at(byte);
            self.add(left, k);
            self.add(right, k);
            let cost = self.total();
            self.remove(right, k);
            self.remove(left, k);
            if cost < best_cost {
                best_cost = cost;
                best_split = Some(byte);
            }
        }
        match best_split {
            None => {
                self.add(text, k);
                out.push(text.to_string());
            }
            Some(byte) => {
                let (left, right) = text.split_at(byte);
                self.add(right, k);
                let mut left_out = Vec::new();
                self.resplit(left, k, &mut left_out);
                self.remove(right, k);
                let mut right_out = Vec::new();
                self.resplit(right, k, &mut right_out);
                out.extend(left_out);
                out.extend(right_out);
            }
        }
    }
}

/// Trains the baseline on word counts. Words are revisited in order of
/// decreasing frequency (then lexicographically) until an epoch no longer
/// lowers the cost. A reanalysis that would raise the total cost is undone,
/// so the recorded costs never increase.
pub fn morfessor_train<F: Real>(words: &WordCounts, config: &MorfessorConfig) -> (MorfessorModel<F>, MorfessorTrace) {
    let mut letters: BTreeMap<char, u64> = BTreeMap::new();
    for (w, &c) in words {
        for ch in w.chars() {
            *letters.entry(ch).or_default() += c;
        }
    }
    let symbols = F::from_count(letters.values().sum::<u64>());
    let char_costs: BTreeMap<char, F> = letters
        .iter()
        .map(|(&ch, &c)| (ch, (symbols / F::from_count(c)).ln()))
        .collect();
    let mut state = CostState::<F> {
        counts: HashMap::new(),
        tokens: 0,
        sum_c_log_c: F::zero(),
        lexicon_cost: F::zero(),
        char_costs: char_costs.iter().map(|(&c, &v)| (c, v)).collect(),
    };
    let mut order: Vec<(&String, u64)> = words
        .iter()
        .filter(|(w, &c)| c > 0 && !w.is_empty())
        .map(|(w, &c)| (w, c))
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut analyses: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for &(w, c) in &order {
        state.add(w, c);
        analyses.insert(w.clone(), vec![w.clone()]);
    }
    let mut trace = MorfessorTrace {
        costs: vec![state.total().to_f64().unwrap_or(f64::NAN)],
        epochs: 0,
    };
    let tolerance = F::lit(config.tolerance);
    for _ in 0..config.max_epochs {
        trace.epochs += 1;
        let epoch_start = state.total();
        for &(w, c) in &order {
            let before = state.total();
            let previous = analyses[w.as_str()].clone();
            for m in &previous {
                state.remove(m, c);
            }
            let mut fresh = Vec::new();
            state.resplit(w, c, &mut fresh);
            if state.total() > before {
                for m in &fresh {
                    state.remove(m, c);
                }
                for m in &previous {
                    state.add(m, c);
                }
            } else {
                if fresh != previous {
                    trace.costs.push(state.total().to_f64().unwrap_or(f64::NAN));
                }
                analyses.insert(w.clone(), fresh);
            }
        }
        if epoch_start - state.total() < tolerance {
            break;
        }
    }
    let lexicon = state.counts.iter().map(|(m, &c)| (m.clone(), c)).collect();
    let model = MorfessorModel {
        lexicon,
        analyses,
        char_costs,
        corpus_cost: state.corpus_cost(),
        lexicon_cost: state.lexicon_cost,
    };
    (model, trace)
}
