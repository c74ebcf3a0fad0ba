//! Brute-force reference implementations used to check the fast paths.

use std::collections::BTreeMap;

use morphseg::hmm::Slot;
use morphseg::{HmmModel, UnigramVocab};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every way of cutting `word` into nonempty pieces.
pub fn all_splits(word: &str) -> Vec<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n == 0 {
        return vec![];
    }
    (0u32..1 << (n - 1))
        .map(|mask| {
            let mut pieces = Vec::new();
            let mut start = 0;
            for i in 1..n {
                if mask & (1 << (i - 1)) != 0 {
                    pieces.push(chars[start..i].iter().collect());
                    start = i;
                }
            }
            pieces.push(chars[start..].iter().collect());
            pieces
        })
        .collect()
}

pub fn log_sum(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// (best log-probability, log of the summed probability) over all
/// segmentations into vocabulary pieces.
pub fn ulm_enumerate(vocab: &UnigramVocab, word: &str) -> (f64, f64) {
    let scores: Vec<f64> = all_splits(word)
        .into_iter()
        .filter_map(|pieces| {
            pieces
                .iter()
                .map(|p| vocab.log_prob(p))
                .sum::<Option<f64>>()
        })
        .collect();
    (scores.iter().copied().fold(f64::NEG_INFINITY, f64::max), log_sum(&scores))
}

pub fn ulm_score(vocab: &UnigramVocab, pieces: &[String]) -> f64 {
    pieces.iter().map(|p| vocab.log_prob(p).expect("piece in vocabulary")).sum()
}

/// Log-probability of every full path (slot sequence, morpheme and morph per
/// piece) through the slot HMM, computed directly from the parameters.
pub fn hmm_paths(model: &HmmModel, word: &str) -> Vec<f64> {
    let g = model.grammar();
    let mut out = Vec::new();
    for pieces in all_splits(word) {
        // Candidate (slot, log p(morpheme) + log p(morph | morpheme)) per piece.
        let options: Vec<Vec<(usize, f64)>> = pieces
            .iter()
            .map(|piece| {
                let mut opts = Vec::new();
                for slot in Slot::ALL {
                    for (morpheme, &p) in model.lexicon().slot(slot) {
                        for (morph, q) in model.emitter().morphs(morpheme) {
                            if morph == piece {
                                opts.push((slot.index(), p.ln() + q.ln()));
                            }
                        }
                    }
                }
                opts
            })
            .collect();
        let mut stack: Vec<(usize, usize, f64)> = Vec::new();
        for &(s, lp) in &options[0] {
            stack.push((1, s, g.start[s].ln() + lp));
        }
        while let Some((i, prev, score)) = stack.pop() {
            if i == pieces.len() {
                let total = score + g.transitions[prev][3].ln();
                if total > f64::NEG_INFINITY {
                    out.push(total);
                }
                continue;
            }
            for &(s, lp) in &options[i] {
                stack.push((i + 1, s, score + g.transitions[prev][s].ln() + lp));
            }
        }
    }
    out
}

/// Exact 1.5-entmax threshold by bisection on `sum max(0, z - tau)^2 = 1`.
pub fn entmax_bisect(scores: &[f64]) -> Vec<f64> {
    let z: Vec<f64> = scores.iter().map(|s| s / 2.0).collect();
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass = |tau: f64| z.iter().map(|&zi| (zi - tau).max(0.0).powi(2)).sum::<f64>();
    let (mut lo, mut hi) = (max - 1.0, max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let p: Vec<f64> = z.iter().map(|&zi| (zi - tau).max(0.0).powi(2)).collect();
    let total: f64 = p.iter().sum();
    p.into_iter().map(|x| x / total).collect()
}

/// Textbook recursive edit distance.
pub fn naive_levenshtein(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = naive_levenshtein(ra, rb) + usize::from(x != y);
            let del = naive_levenshtein(ra, b) + 1;
            let ins = naive_levenshtein(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// Maximum bipartite matching between equal strings, by exhaustive search.
pub fn max_matching(gold: &[&str], pred: &[&str]) -> usize {
    fn go(i: usize, gold: &[&str], pred: &[&str], used: &mut Vec<bool>) -> usize {
        if i == gold.len() {
            return 0;
        }
        let mut best = go(i + 1, gold, pred, used);
        for j in 0..pred.len() {
            if !used[j] && pred[j] == gold[i] {
                used[j] = true;
                best = best.max(1 + go(i + 1, gold, pred, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, gold, pred, &mut vec![false; pred.len()])
}

pub fn random_string(rng: &mut ChaCha8Rng, alphabet: &[char], len: usize) -> String {
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

fn random_dist(rng: &mut ChaCha8Rng, keys: impl IntoIterator<Item = String>) -> BTreeMap<String, f64> {
    let raw: BTreeMap<String, f64> = keys.into_iter().map(|k| (k, rng.gen_range(0.05..1.0))).collect();
    let total: f64 = raw.values().sum();
    raw.into_iter().map(|(k, v)| (k, v / total)).collect()
}

/// Unigram vocabulary over `abc`: every letter plus random longer pieces,
/// at most `max_pieces` in total.
pub fn random_ulm(rng: &mut ChaCha8Rng, max_pieces: usize) -> UnigramVocab {
    let alphabet = ['a', 'b', 'c'];
    let mut keys: Vec<String> = alphabet.iter().map(|c| c.to_string()).collect();
    let target = rng.gen_range(4..=max_pieces);
    while keys.len() < target {
        let len = rng.gen_range(2..=4);
        let piece = random_string(rng, &alphabet, len);
        if !keys.contains(&piece) {
            keys.push(piece);
        }
    }
    let dist = random_dist(rng, keys);
    UnigramVocab::from_log_probs(dist.into_iter().map(|(k, p)| (k, p.ln()))).unwrap()
}

pub const HMM_ALPHABET: [char; 4] = ['a', 'b', 'c', 'd'];

/// A word of at most `max_len` letters: one to three surface morphs of the
/// model glued together half of the time, random letters otherwise.
pub fn random_hmm_word(rng: &mut ChaCha8Rng, model: &HmmModel, max_len: usize) -> String {
    if rng.gen_bool(0.5) {
        let mut morphs: Vec<String> = Vec::new();
        for slot in Slot::ALL {
            for morpheme in model.lexicon().slot(slot).keys() {
                morphs.extend(model.emitter().morphs(morpheme).into_iter().map(|(m, _)| m.to_string()));
            }
        }
        let mut word = String::new();
        for _ in 0..rng.gen_range(1..=3) {
            let m = morphs.choose(rng).unwrap();
            if word.chars().count() + m.chars().count() <= max_len {
                word.push_str(m);
            }
        }
        if !word.is_empty() {
            return word;
        }
    }
    let len = rng.gen_range(1..=max_len);
    random_string(rng, &HMM_ALPHABET, len)
}

/// Slot HMM over `ab` with up to `max_lexicon` morphemes in total and random
/// allomorphs for some of them.
pub fn random_hmm(rng: &mut ChaCha8Rng, max_lexicon: usize) -> HmmModel {
    use morphseg::hmm::ActiveStates;
    use morphseg::{MorphEmitter, SlotGrammar, SlotLexicon};

    let alphabet = HMM_ALPHABET;
    let pick = |rng: &mut ChaCha8Rng, n: usize| {
        let mut keys = std::collections::BTreeSet::new();
        while keys.len() < n {
            let len = rng.gen_range(1..=3);
            keys.insert(random_string(rng, &alphabet, len));
        }
        keys
    };
    let total = rng.gen_range(3..=max_lexicon);
    let n_root = rng.gen_range(1..=total - 2);
    let n_prefix = rng.gen_range(1..=total - n_root - 1);
    let n_suffix = total - n_root - n_prefix;
    let (prefix, root, suffix) = (pick(rng, n_prefix), pick(rng, n_root), pick(rng, n_suffix));
    let lexicon = SlotLexicon {
        prefix: random_dist(rng, prefix),
        root: random_dist(rng, root),
        suffix: random_dist(rng, suffix),
    };
    let mut emitter = MorphEmitter::default();
    for morpheme in lexicon.root.keys().chain(lexicon.suffix.keys()) {
        if rng.gen_bool(0.3) {
            let mut variants = pick(rng, 2);
            variants.insert(morpheme.clone());
            emitter.table.insert(morpheme.clone(), random_dist(rng, variants));
        }
    }
    let mut start = [0.0; 3];
    let mut transitions = [[0.0; 4]; 3];
    for s in &mut start {
        *s = rng.gen_range(0.0..3.0);
    }
    for row in &mut transitions {
        for t in row.iter_mut() {
            *t = rng.gen_range(0.0..3.0);
        }
    }
    let active = ActiveStates {
        prefix: true,
        suffix: true,
        compound: rng.gen_bool(0.5),
    };
    let grammar = SlotGrammar::from_counts(start, transitions, active, 0.5);
    HmmModel::new(grammar, lexicon, emitter).unwrap()
}
