use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{HmmModel, HmmParams, Slot, END, PROB_FLOOR, START_ALLOWED, TRANSITION_ALLOWED};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::segmenter::WordCounts;

/// Words per E-step shard. Shards are merged in corpus order, so results
/// do not depend on the thread count.
const SHARD: usize = 64;

#[derive(Debug, Clone, PartialEq)]
struct Accumulator<F> {
    start: [F; 3],
    transitions: [[F; 4]; 3],
    lex: Vec<F>,
    emit: Vec<F>,
    log_likelihood: F,
}

impl<F: Real> Accumulator<F> {
    fn new(n_lex: usize, n_emit: usize) -> Self {
        Accumulator {
            start: [F::zero(); 3],
            transitions: [[F::zero(); 4]; 3],
            lex: vec![F::zero(); n_lex],
            emit: vec![F::zero(); n_emit],
            log_likelihood: F::zero(),
        }
    }

    fn merge(&mut self, other: &Self) {
        for s in 0..3 {
            self.start[s] = self.start[s] + other.start[s];
            for t in 0..4 {
                self.transitions[s][t] = self.transitions[s][t] + other.transitions[s][t];
            }
        }
        for (a, &b) in self.lex.iter_mut().zip(&other.lex) {
            *a = *a + b;
        }
        for (a, &b) in self.emit.iter_mut().zip(&other.emit) {
            *a = *a + b;
        }
        self.log_likelihood = self.log_likelihood + other.log_likelihood;
    }
}

/// Posterior expected counts of every parameter over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts<F> {
    pub start: [F; 3],
    pub transitions: [[F; 4]; 3],
    pub lexicon: BTreeMap<(Slot, String), F>,
    /// Keyed by `(morpheme, morph)`.
    pub emissions: BTreeMap<(String, String), F>,
    pub log_likelihood: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace<F> {
    /// Corpus log-likelihood before each update and after the last one.
    pub log_likelihoods: Vec<F>,
    pub iterations: usize,
    pub converged: bool,
}

impl<F: Real> HmmModel<F> {
    fn accumulate(&self, word: &str, count: F, acc: &mut Accumulator<F>) -> Result<()> {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let lattice = self.lattice(&chars);
        let fwd = self.forward(&lattice);
        let z = fwd.log_z;
        if z == F::neg_infinity() {
            return Err(Error::Underivable(word.to_string()));
        }
        let beta = self.backward(&lattice);
        let ls = self.params.grammar.log_start();
        let lt = self.params.grammar.log_transitions();
        for (start, arcs) in lattice.iter().enumerate() {
            for &(end, arc) in arcs {
                let s = arc.slot.index();
                let tail = arc.log_p + beta[end][s] - z;
                let mut total = F::zero();
                if start == 0 {
                    let post = count * (ls[s] + tail).exp();
                    acc.start[s] = acc.start[s] + post;
                    total = post;
                } else {
                    for p in 0..3 {
                        let post = count * (fwd.alpha[start][p] + lt[p][s] + tail).exp();
                        acc.transitions[p][s] = acc.transitions[p][s] + post;
                        total = total + post;
                    }
                }
                acc.lex[arc.lex] = acc.lex[arc.lex] + total;
                acc.emit[arc.emit] = acc.emit[arc.emit] + total;
            }
        }
        for s in 0..3 {
            let post = count * (fwd.alpha[n][s] + lt[s][END] - z).exp();
            acc.transitions[s][END] = acc.transitions[s][END] + post;
        }
        acc.log_likelihood = acc.log_likelihood + count * z;
        Ok(())
    }

    fn e_step(&self, words: &WordCounts) -> Result<Accumulator<F>> {
        let items: Vec<(&String, &u64)> = words.iter().collect();
        let shards: Vec<Result<Accumulator<F>>> = items
            .par_chunks(SHARD)
            .map(|chunk| {
                let mut acc = Accumulator::new(self.lex_keys.len(), self.emit_keys.len());
                for (w, &c) in chunk {
                    self.accumulate(w, F::from_count(c), &mut acc)?;
                }
                Ok(acc)
            })
            .collect();
        let mut total = Accumulator::new(self.lex_keys.len(), self.emit_keys.len());
        for shard in shards {
            total.merge(&shard?);
        }
        Ok(total)
    }

    /// Posterior expected parameter counts. Fails on the first word, in
    /// corpus order, that has no derivation.
    pub fn expected_counts(&self, words: &WordCounts) -> Result<ExpectedCounts<F>> {
        let acc = self.e_step(words)?;
        let mut lexicon = BTreeMap::new();
        for (key, &c) in self.lex_keys.iter().zip(&acc.lex) {
            lexicon.insert(key.clone(), c);
        }
        let mut emissions = BTreeMap::new();
        for (key, &c) in self.emit_keys.iter().zip(&acc.emit) {
            emissions.insert(key.clone(), c);
        }
        Ok(ExpectedCounts {
            start: acc.start,
            transitions: acc.transitions,
            lexicon,
            emissions,
            log_likelihood: acc.log_likelihood,
        })
    }

    /// `sum count * log P(word)`; `-inf` if some word is underivable.
    pub fn corpus_log_likelihood(&self, words: &WordCounts) -> F {
        words
            .iter()
            .map(|(w, &c)| F::from_count(c) * self.word_log_likelihood(w))
            .sum()
    }

    /// M-step. Parameters with no expected mass keep their old values when
    /// their whole distribution saw no mass; otherwise probabilities below
    /// the floor are pruned and the rest renormalized.
    fn reestimate(&self, acc: &Accumulator<F>) -> Result<Self> {
        let floor = F::lit(PROB_FLOOR);
        let old = &self.params;
        let mut params = HmmParams {
            grammar: old.grammar.clone(),
            lexicon: old.lexicon.clone(),
            emitter: old.emitter.clone(),
        };

        if let Some(row) = prune_row(&acc.start, &START_ALLOWED, floor) {
            params.grammar.start = row.try_into().expect("3 entries");
        }
        for from in 0..3 {
            if let Some(row) = prune_row(&acc.transitions[from], &TRANSITION_ALLOWED[from], floor) {
                params.grammar.transitions[from] = row.try_into().expect("4 entries");
            }
        }

        for slot in Slot::ALL {
            let counts: BTreeMap<String, F> = self
                .lex_keys
                .iter()
                .zip(&acc.lex)
                .filter(|((s, _), _)| *s == slot)
                .map(|((_, m), &c)| (m.clone(), c))
                .collect();
            if let Some(dist) = prune_map(counts, floor, None) {
                *params.lexicon.slot_mut(slot) = dist;
            }
        }

        let mut morph_counts: BTreeMap<&str, BTreeMap<String, F>> = BTreeMap::new();
        for ((morpheme, morph), &c) in self.emit_keys.iter().zip(&acc.emit) {
            if old.emitter.table.contains_key(morpheme) {
                morph_counts.entry(morpheme).or_default().insert(morph.clone(), c);
            }
        }
        for (morpheme, counts) in morph_counts {
            if let Some(dist) = prune_map(counts, floor, Some(morpheme)) {
                params.emitter.table.insert(morpheme.to_string(), dist);
            }
        }
        HmmModel::try_from(params)
    }
}

fn prune_row<F: Real>(counts: &[F], allowed: &[bool], floor: F) -> Option<Vec<F>> {
    let total: F = counts.iter().zip(allowed).filter(|(_, &a)| a).map(|(&c, _)| c).sum();
    if !(total > F::zero()) {
        return None;
    }
    let row: Vec<F> = counts
        .iter()
        .zip(allowed)
        .map(|(&c, &a)| if a && c / total >= floor { c / total } else { F::zero() })
        .collect();
    let kept: F = row.iter().copied().sum();
    Some(row.into_iter().map(|p| p / kept).collect())
}

/// Normalizes, drops entries below `floor` and renormalizes. `keep` is
/// raised to the floor instead of being dropped.
fn prune_map<F: Real>(counts: BTreeMap<String, F>, floor: F, keep: Option<&str>) -> Option<BTreeMap<String, F>> {
    let total: F = counts.values().copied().sum();
    if !(total > F::zero()) {
        return None;
    }
    let dist: BTreeMap<String, F> = counts
        .into_iter()
        .filter_map(|(m, c)| {
            let p = c / total;
            if p >= floor {
                Some((m, p))
            } else if keep == Some(m.as_str()) {
                Some((m, floor))
            } else {
                None
            }
        })
        .collect();
    let kept: F = dist.values().copied().sum();
    Some(dist.into_iter().map(|(m, p)| (m, p / kept)).collect())
}

/// EM over the segmentation lattice. Stops after `max_iters` updates or
/// when the corpus log-likelihood improves by less than `tol`.
pub fn em_train<F: Real>(
    model: &HmmModel<F>,
    words: &WordCounts,
    max_iters: usize,
    tol: F,
) -> Result<(HmmModel<F>, EmTrace<F>)> {
    if words.is_empty() {
        return Err(Error::Precondition("empty training corpus".into()));
    }
    let mut current = model.clone();
    let mut trace = EmTrace {
        log_likelihoods: Vec::new(),
        iterations: 0,
        converged: false,
    };
    loop {
        let acc = current.e_step(words)?;
        let ll = acc.log_likelihood;
        if let Some(&prev) = trace.log_likelihoods.last() {
            if ll - prev < tol {
                trace.log_likelihoods.push(ll);
                trace.converged = true;
                break;
            }
        }
        trace.log_likelihoods.push(ll);
        if trace.iterations == max_iters {
            break;
        }
        current = current.reestimate(&acc)?;
        trace.iterations += 1;
    }
    Ok((current, trace))
}
