//! Per-character boundary tagger trained as an averaged perceptron.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::entmax::entmax15;
use crate::scalar::Real;

/// Label of one character: `B` starts a segment, `I` continues one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    I = 0,
    B = 1,
}

/// Per-character labels for a word. The first character is always `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryLabeling {
    pub labels: Vec<Label>,
}

impl BoundaryLabeling {
    /// Labels from segment start offsets (character positions).
    pub fn from_starts(n_chars: usize, starts: impl IntoIterator<Item = usize>) -> Self {
        let mut labels = vec![Label::I; n_chars];
        for s in starts {
            if s < n_chars {
                labels[s] = Label::B;
            }
        }
        if let Some(first) = labels.first_mut() {
            *first = Label::B;
        }
        BoundaryLabeling { labels }
    }

    /// Splits `chars` into the segments the labels describe.
    pub fn segments(&self, chars: &[char]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (c, label) in chars.iter().zip(&self.labels) {
            match (label, out.last_mut()) {
                (Label::I, Some(seg)) => seg.push(*c),
                _ => out.push(c.to_string()),
            }
        }
        out
    }
}

const PAD_LEFT: char = '\u{2}';
const PAD_RIGHT: char = '\u{3}';
const MAX_BUCKET: usize = 6;

/// Feature strings for the gap before character `i`: character n-grams
/// (n <= 3) inside a +-2 window around `i`, and distance buckets from
/// both word edges.
pub fn features(chars: &[char], i: usize) -> Vec<String> {
    let at = |offset: isize| -> char {
        let pos = i as isize + offset;
        if pos < 0 {
            PAD_LEFT
        } else {
            chars.get(pos as usize).copied().unwrap_or(PAD_RIGHT)
        }
    };
    let window: Vec<char> = (-2..=2).map(at).collect();
    let mut out = vec!["bias".to_string()];
    for n in 1..=3 {
        for start in 0..=(window.len() - n) {
            let gram: String = window[start..start + n].iter().collect();
            out.push(format!("{n}g{}:{gram}", start as isize - 2));
        }
    }
    out.push(format!("from_start:{}", i.min(MAX_BUCKET)));
    out.push(format!("from_end:{}", (chars.len() - i).min(MAX_BUCKET)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LinearTagger<F: Real = f64> {
    /// Feature -> weights for `[I, B]`.
    pub weights: BTreeMap<String, [F; 2]>,
}

impl<F: Real> Default for LinearTagger<F> {
    fn default() -> Self {
        LinearTagger {
            weights: BTreeMap::new(),
        }
    }
}

impl<F: Real> LinearTagger<F> {
    /// Raw `[I, B]` scores at position `i`.
    pub fn scores(&self, chars: &[char], i: usize) -> [F; 2] {
        let mut s = [F::zero(); 2];
        for f in features(chars, i) {
            if let Some(w) = self.weights.get(&f) {
                s[0] = s[0] + w[0];
                s[1] = s[1] + w[1];
            }
        }
        s
    }

    /// Boundary probability at each position from 1.5-entmax over the scores.
    pub fn boundary_probs(&self, word: &str) -> Vec<F> {
        let chars: Vec<char> = word.chars().collect();
        (0..chars.len())
            .map(|i| {
                if i == 0 {
                    F::one()
                } else {
                    entmax15(&self.scores(&chars, i))[1]
                }
            })
            .collect()
    }

    /// Most probable label per position; ties keep `I`. The first is forced to `B`.
    pub fn label(&self, word: &str) -> BoundaryLabeling {
        let probs = self.boundary_probs(word);
        let half = F::lit(0.5);
        let labels = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| if i == 0 || p > half { Label::B } else { Label::I })
            .collect();
        BoundaryLabeling { labels }
    }
}

/// Averaged perceptron accumulators (lazy averaging with timestamps).
struct Trainer {
    index: HashMap<String, usize>,
    names: Vec<String>,
    weights: Vec<[f64; 2]>,
    totals: Vec<[f64; 2]>,
    stamps: Vec<[u64; 2]>,
    step: u64,
}

impl Trainer {
    fn new() -> Self {
        Trainer {
            index: HashMap::new(),
            names: Vec::new(),
            weights: Vec::new(),
            totals: Vec::new(),
            stamps: Vec::new(),
            step: 0,
        }
    }

    fn id(&mut self, feature: &str) -> usize {
        if let Some(&id) = self.index.get(feature) {
            return id;
        }
        let id = self.names.len();
        self.index.insert(feature.to_string(), id);
        self.names.push(feature.to_string());
        self.weights.push([0.0; 2]);
        self.totals.push([0.0; 2]);
        self.stamps.push([0; 2]);
        id
    }

    /// The label to penalize, if the gold label does not strictly win.
    fn violation(&self, ids: &[usize], gold: Label) -> Option<Label> {
        let mut s = [0.0; 2];
        for &id in ids {
            s[0] += self.weights[id][0];
            s[1] += self.weights[id][1];
        }
        let other = match gold {
            Label::I => Label::B,
            Label::B => Label::I,
        };
        (s[gold as usize] <= s[other as usize]).then_some(other)
    }

    fn update(&mut self, id: usize, label: Label, delta: f64) {
        let l = label as usize;
        self.totals[id][l] += (self.step - self.stamps[id][l]) as f64 * self.weights[id][l];
        self.stamps[id][l] = self.step;
        self.weights[id][l] += delta;
    }

    fn finish<F: Real>(mut self) -> LinearTagger<F> {
        let step = self.step.max(1);
        let mut weights = BTreeMap::new();
        for id in 0..self.names.len() {
            let mut avg = [F::zero(); 2];
            for l in 0..2 {
                self.totals[id][l] += (step - self.stamps[id][l].min(step)) as f64 * self.weights[id][l];
                avg[l] = F::lit(self.totals[id][l] / step as f64);
            }
            if avg[0] != F::zero() || avg[1] != F::zero() {
                weights.insert(std::mem::take(&mut self.names[id]), avg);
            }
        }
        LinearTagger { weights }
    }
}

/// Training example: the word's characters and gold labels.
pub struct TaggedWord {
    pub chars: Vec<char>,
    pub gold: BoundaryLabeling,
}

/// Averaged perceptron over positions `1..n` of every word, with the
/// example order reshuffled each epoch from `seed`. A tie between the gold
/// and the other label counts as a mistake.
pub fn train_perceptron<F: Real>(examples: &[TaggedWord], epochs: usize, seed: u64) -> LinearTagger<F> {
    let mut trainer = Trainer::new();
    let mut positions: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (w, ex) in examples.iter().enumerate() {
        for i in 1..ex.chars.len() {
            let ids = features(&ex.chars, i).iter().map(|f| trainer.id(f)).collect();
            positions.push((w, i, ids));
        }
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut by_word: Vec<Vec<usize>> = vec![Vec::new(); examples.len()];
    for (p, (w, _, _)) in positions.iter().enumerate() {
        by_word[*w].push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &w in &order {
            for &p in &by_word[w] {
                let (_, i, ref ids) = positions[p];
                trainer.step += 1;
                let gold = examples[w].gold.labels[i];
                if let Some(guess) = trainer.violation(ids, gold) {
                    for &id in ids {
                        trainer.update(id, gold, 1.0);
                        trainer.update(id, guess, -1.0);
                    }
                }
            }
        }
    }
    trainer.finish()
}
