//! Unigram language model over subword pieces.
//!
//! A word's probability is the sum over all covers of the product of piece
//! probabilities. Training alternates EM passes (forward-backward over the
//! segmentation lattice) with pruning of the pieces whose removal costs the
//! least likelihood.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::morph::Segmentation;
use crate::scalar::{log_add, Real};
use crate::segmenter::{surface, Segmenter, WordCounts};

/// Piece table with log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramVocab<F: Real = f64> {
    pieces: Vec<String>,
    log_probs: Vec<F>,
    index: HashMap<String, usize>,
    max_chars: usize,
}

/// Lattice edges leaving each character position: `(end, piece id)`.
pub type Lattice = Vec<Vec<(usize, usize)>>;

impl<F: Real> UnigramVocab<F> {
    /// Builds a vocabulary from log-probabilities. Pieces must be nonempty.
    pub fn from_log_probs(pieces: impl IntoIterator<Item = (String, F)>) -> Result<Self> {
        let sorted: BTreeMap<String, F> = pieces.into_iter().collect();
        if sorted.keys().any(String::is_empty) {
            return Err(Error::Model("empty piece in unigram vocabulary".into()));
        }
        let max_chars = sorted.keys().map(|p| p.chars().count()).max().unwrap_or(0);
        let index = sorted.keys().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let (pieces, log_probs) = sorted.into_iter().unzip();
        Ok(UnigramVocab {
            pieces,
            log_probs,
            index,
            max_chars,
        })
    }

    /// Builds a vocabulary from (unnormalized) probabilities.
    pub fn from_probs(pieces: &[(&str, f64)]) -> Result<Self> {
        let total: f64 = pieces.iter().map(|(_, p)| p).sum();
        Self::from_log_probs(
            pieces
                .iter()
                .map(|(s, p)| (s.to_string(), F::lit(p / total).ln())),
        )
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&str, F)> {
        self.pieces
            .iter()
            .map(String::as_str)
            .zip(self.log_probs.iter().copied())
    }

    pub fn log_prob(&self, piece: &str) -> Option<F> {
        self.index.get(piece).map(|&i| self.log_probs[i])
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.index.contains_key(piece)
    }

    /// Sum of piece probabilities; 1 up to rounding.
    pub fn total_prob(&self) -> F {
        self.log_probs.iter().map(|lp| lp.exp()).sum()
    }

    pub fn lattice(&self, chars: &[char]) -> Lattice {
        let mut edges = vec![Vec::new(); chars.len()];
        let mut buf = String::new();
        for (start, out) in edges.iter_mut().enumerate() {
            buf.clear();
            for end in start + 1..=chars.len().min(start + self.max_chars) {
                buf.push(chars[end - 1]);
                if let Some(&id) = self.index.get(buf.as_str()) {
                    out.push((end, id));
                }
            }
        }
        edges
    }

    /// Log of the total probability of all covers of `word`; `-inf` if none.
    pub fn word_log_likelihood(&self, word: &str) -> F {
        let chars: Vec<char> = word.chars().collect();
        let lattice = self.lattice(&chars);
        self.forward(&lattice, chars.len())[chars.len()]
    }

    fn forward(&self, lattice: &Lattice, n: usize) -> Vec<F> {
        let mut alpha = vec![F::neg_infinity(); n + 1];
        alpha[0] = F::zero();
        for start in 0..n {
            if alpha[start] == F::neg_infinity() {
                continue;
            }
            for &(end, id) in &lattice[start] {
                alpha[end] = log_add(alpha[end], alpha[start] + self.log_probs[id]);
            }
        }
        alpha
    }

    fn backward(&self, lattice: &Lattice, n: usize) -> Vec<F> {
        let mut beta = vec![F::neg_infinity(); n + 1];
        beta[n] = F::zero();
        for start in (0..n).rev() {
            for &(end, id) in &lattice[start] {
                beta[start] = log_add(beta[start], self.log_probs[id] + beta[end]);
            }
        }
        beta
    }

    /// Adds `count` times the posterior expected piece counts of `word` to
    /// `acc`; returns the word's log-likelihood.
    pub fn expected_counts(&self, word: &str, count: F, acc: &mut [F]) -> F {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let lattice = self.lattice(&chars);
        let alpha = self.forward(&lattice, n);
        let z = alpha[n];
        if z == F::neg_infinity() {
            return z;
        }
        let beta = self.backward(&lattice, n);
        for (start, edges) in lattice.iter().enumerate() {
            for &(end, id) in edges {
                let post = (alpha[start] + self.log_probs[id] + beta[end] - z).exp();
                acc[id] = acc[id] + count * post;
            }
        }
        z
    }

    /// Corpus log-likelihood `sum count * log P(word)`.
    pub fn corpus_log_likelihood(&self, words: &WordCounts) -> F {
        words
            .iter()
            .map(|(w, &c)| F::from_count(c) * self.word_log_likelihood(w))
            .sum()
    }

    /// One EM pass. Returns the re-estimated vocabulary and the corpus
    /// log-likelihood under the parameters before the update.
    pub fn em_step(&self, words: &WordCounts, keep: &BTreeSet<String>) -> (Self, F) {
        let mut acc = vec![F::zero(); self.len()];
        let mut loglik = F::zero();
        for (w, &c) in words {
            loglik = loglik + self.expected_counts(w, F::from_count(c), &mut acc);
        }
        (self.reestimate(&acc, keep), loglik)
    }

    /// M-step: probabilities proportional to expected counts. Pieces with no
    /// mass are dropped unless listed in `keep`, which get a log floor.
    fn reestimate(&self, counts: &[F], keep: &BTreeSet<String>) -> Self {
        let total: F = counts.iter().copied().sum();
        let pieces = self
            .pieces
            .iter()
            .zip(counts)
            .filter_map(|(p, &c)| {
                if c > F::zero() && total > F::zero() {
                    Some((p.clone(), (c / total).ln()))
                } else if keep.contains(p) {
                    Some((p.clone(), F::log_floor()))
                } else {
                    None
                }
            });
        Self::from_log_probs(pieces).expect("pieces already validated")
    }

    /// Highest-probability cover. Ties prefer fewer pieces, then a longer
    /// leftmost piece. `None` if the word cannot be covered.
    pub fn viterbi(&self, word: &str) -> Option<(Vec<String>, F)> {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let lattice = self.lattice(&chars);
        // best[i]: best cover of chars[i..] as (score, pieces, first edge).
        let mut best: Vec<Option<(F, usize, usize, usize)>> = vec![None; n + 1];
        best[n] = Some((F::zero(), 0, n, usize::MAX));
        for start in (0..n).rev() {
            let mut current: Option<(F, usize, usize, usize)> = None;
            for &(end, id) in &lattice[start] {
                let Some((tail, tail_pieces, _, _)) = best[end] else { continue };
                let cand = (self.log_probs[id] + tail, tail_pieces + 1, end, id);
                let better = match current {
                    None => true,
                    Some(cur) => {
                        cand.0 > cur.0
                            || (cand.0 == cur.0 && (cand.1 < cur.1 || (cand.1 == cur.1 && cand.2 > cur.2)))
                    }
                };
                if better && cand.0 > F::neg_infinity() {
                    current = Some(cand);
                }
            }
            best[start] = current;
        }
        let (score, ..) = best[0]?;
        let mut pieces = Vec::new();
        let mut pos = 0;
        while pos < n {
            let (_, _, end, id) = best[pos].expect("path is connected");
            pieces.push(self.pieces[id].clone());
            pos = end;
        }
        Some((pieces, score))
    }
}

/// Surface segmentation by Viterbi decoding.
pub fn ulm_encode<F: Real>(word: &str, vocab: &UnigramVocab<F>) -> Result<Vec<String>> {
    vocab
        .viterbi(word)
        .map(|(pieces, _)| pieces)
        .ok_or_else(|| Error::Underivable(word.to_string()))
}

impl<F: Real> Segmenter for UnigramVocab<F> {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        surface(ulm_encode(word, self)?)
    }
}

impl<F: Real> Serialize for UnigramVocab<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_map(self.pieces())
    }
}

impl<'de, F: Real> Deserialize<'de> for UnigramVocab<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, F>::deserialize(deserializer)?;
        Self::from_log_probs(map).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UlmConfig {
    pub vocab_size: usize,
    pub seed_max_len: usize,
    /// Seed vocabulary size as a multiple of `vocab_size`.
    pub seed_factor: usize,
    pub em_iters: usize,
    /// Fraction of prunable pieces kept per pruning round.
    pub shrink: f64,
}

impl Default for UlmConfig {
    fn default() -> Self {
        UlmConfig {
            vocab_size: 8000,
            seed_max_len: 12,
            seed_factor: 4,
            em_iters: 2,
            shrink: 0.75,
        }
    }
}

/// Training trace: corpus log-likelihood before each EM pass.
#[derive(Debug, Clone, Default)]
pub struct UlmTrace {
    pub em_log_likelihoods: Vec<f64>,
    pub vocab_sizes: Vec<usize>,
}

/// Seeds the vocabulary with every character plus the most frequent
/// substrings (scored by frequency times length) of up to `seed_max_len` chars.
pub fn seed_vocab<F: Real>(words: &WordCounts, config: &UlmConfig) -> Result<UnigramVocab<F>> {
    let mut freq: HashMap<String, u64> = HashMap::new();
    for (w, &c) in words {
        let chars: Vec<char> = w.chars().collect();
        for i in 0..chars.len() {
            for j in i + 1..=chars.len().min(i + config.seed_max_len.max(1)) {
                *freq.entry(chars[i..j].iter().collect()).or_default() += c;
            }
        }
    }
    let alphabet: BTreeSet<String> = freq
        .keys()
        .filter(|p| p.chars().count() == 1)
        .cloned()
        .collect();
    if config.vocab_size < alphabet.len() {
        return Err(Error::Config(format!(
            "vocabulary size {} is below the alphabet size {}",
            config.vocab_size,
            alphabet.len()
        )));
    }
    let mut longer: Vec<(&String, u64)> = freq
        .iter()
        .filter(|(p, &c)| p.chars().count() > 1 && c > 1)
        .map(|(p, &c)| (p, c))
        .collect();
    longer.sort_by(|a, b| {
        let score = |(p, c): &(&String, u64)| c * p.chars().count() as u64;
        score(b).cmp(&score(a)).then_with(|| a.0.cmp(b.0))
    });
    let budget = (config.vocab_size * config.seed_factor.max(1)).saturating_sub(alphabet.len());
    let chosen = alphabet
        .iter()
        .map(|p| (p.clone(), freq[p]))
        .chain(longer.into_iter().take(budget).map(|(p, c)| (p.clone(), c)));
    let chosen: Vec<(String, u64)> = chosen.collect();
    let total: u64 = chosen.iter().map(|(_, c)| c).sum();
    UnigramVocab::from_log_probs(
        chosen
            .into_iter()
            .map(|(p, c)| (p, (F::from_count(c) / F::from_count(total)).ln())),
    )
}

/// Trains a unigram vocabulary of (at most) `config.vocab_size` pieces.
pub fn ulm_train<F: Real>(words: &WordCounts, config: &UlmConfig) -> Result<(UnigramVocab<F>, UlmTrace)> {
    let mut vocab: UnigramVocab<F> = seed_vocab(words, config)?;
    let chars: BTreeSet<String> = vocab
        .pieces()
        .filter(|(p, _)| p.chars().count() == 1)
        .map(|(p, _)| p.to_string())
        .collect();
    let mut trace = UlmTrace::default();
    loop {
        for _ in 0..config.em_iters.max(1) {
            let (next, ll) = vocab.em_step(words, &chars);
            trace.em_log_likelihoods.push(ll.to_f64().unwrap_or(f64::NAN));
            vocab = next;
        }
        trace.vocab_sizes.push(vocab.len());
        if vocab.len() <= config.vocab_size {
            break;
        }
        vocab = prune(&vocab, words, &chars, config);
    }
    Ok((vocab, trace))
}

/// Removes the pieces whose loss of Viterbi likelihood is smallest.
fn prune<F: Real>(
    vocab: &UnigramVocab<F>,
    words: &WordCounts,
    keep: &BTreeSet<String>,
    config: &UlmConfig,
) -> UnigramVocab<F> {
    let mut usage = vec![0u64; vocab.len()];
    for (w, &c) in words {
        if let Some((pieces, _)) = vocab.viterbi(w) {
            for p in pieces {
                usage[vocab.index[&p]] += c;
            }
        }
    }
    let mut losses: Vec<(F, &str)> = Vec::new();
    for (id, piece) in vocab.pieces.iter().enumerate() {
        if keep.contains(piece) {
            continue;
        }
        let loss = if usage[id] == 0 {
            F::zero()
        } else {
            let alternative = best_without(vocab, piece, id);
            F::from_count(usage[id]) * (vocab.log_probs[id] - alternative)
        };
        losses.push((loss, piece));
    }
    losses.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(b.1)));
    let excess = vocab.len() - config.vocab_size;
    let by_shrink = losses.len() - ((losses.len() as f64) * config.shrink).floor() as usize;
    let remove: BTreeSet<&str> = losses
        .iter()
        .take(excess.min(by_shrink.max(1)))
        .map(|(_, p)| *p)
        .collect();
    let kept: Vec<(String, F)> = vocab
        .pieces()
        .filter(|(p, _)| !remove.contains(p))
        .map(|(p, lp)| (p.to_string(), lp))
        .collect();
    let total = kept.iter().map(|(_, lp)| lp.exp()).sum::<F>().ln();
    UnigramVocab::from_log_probs(kept.into_iter().map(|(p, lp)| (p, lp - total)))
        .expect("pieces already validated")
}

/// Best Viterbi score of `piece`'s text when the piece itself is unavailable.
fn best_without<F: Real>(vocab: &UnigramVocab<F>, piece: &str, id: usize) -> F {
    let chars: Vec<char> = piece.chars().collect();
    let n = chars.len();
    let lattice = vocab.lattice(&chars);
    let mut best = vec![F::neg_infinity(); n + 1];
    best[0] = F::zero();
    for start in 0..n {
        if best[start] == F::neg_infinity() {
            continue;
        }
        for &(end, edge) in &lattice[start] {
            if edge == id {
                continue;
            }
            let cand = best[start] + vocab.log_probs[edge];
            if cand > best[end] {
                best[end] = cand;
            }
        }
    }
    best[n]
}
