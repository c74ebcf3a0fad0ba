use log::warn;

use super::{Arc, HmmModel, Slot, END};
use crate::error::Result;
use crate::morph::Segmentation;
use crate::scalar::{log_add, log_sum_exp, Real};

/// Arcs leaving each character position as `(end, arc)`.
pub(crate) type WordLattice<F> = Vec<Vec<(usize, Arc<F>)>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub slot: Slot,
    pub morpheme: String,
    pub morph: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation<F> {
    pub steps: Vec<DerivationStep>,
    pub log_prob: F,
}

impl<F> Derivation<F> {
    /// Canonical morphemes in order.
    pub fn morphemes(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.morpheme.as_str()).collect()
    }

    /// Surface morphs in order; they concatenate to the decoded word.
    pub fn morphs(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.morph.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub segmentation: Segmentation,
    /// Set when the word had no derivation and was returned whole.
    pub fallback: bool,
}

pub(crate) struct Forward<F> {
    /// `alpha[j][s]`: log mass of prefixes of length `j` whose last slot is `s`.
    pub alpha: Vec<[F; 3]>,
    pub log_z: F,
}

impl<F: Real> HmmModel<F> {
    pub(crate) fn lattice(&self, chars: &[char]) -> WordLattice<F> {
        let mut edges = vec![Vec::new(); chars.len()];
        let mut buf = String::new();
        for (start, out) in edges.iter_mut().enumerate() {
            buf.clear();
            for end in start + 1..=chars.len().min(start + self.max_chars) {
                buf.push(chars[end - 1]);
                if let Some(arcs) = self.arcs.get(buf.as_str()) {
                    out.extend(arcs.iter().map(|&a| (end, a)));
                }
            }
        }
        edges
    }

    pub(crate) fn forward(&self, lattice: &WordLattice<F>) -> Forward<F> {
        let n = lattice.len();
        let ls = self.params.grammar.log_start();
        let lt = self.params.grammar.log_transitions();
        let ninf = F::neg_infinity();
        let mut alpha = vec![[ninf; 3]; n + 1];
        for start in 0..n {
            for &(end, arc) in &lattice[start] {
                let s = arc.slot.index();
                let incoming = if start == 0 {
                    ls[s]
                } else {
                    log_sum_exp((0..3).map(|p| alpha[start][p] + lt[p][s]))
                };
                alpha[end][s] = log_add(alpha[end][s], incoming + arc.log_p);
            }
        }
        let log_z = if n == 0 {
            ninf
        } else {
            log_sum_exp((0..3).map(|s| alpha[n][s] + lt[s][END]))
        };
        Forward { alpha, log_z }
    }

    /// `beta[i][s]`: log mass of completing the word from position `i` after slot `s`.
    pub(crate) fn backward(&self, lattice: &WordLattice<F>) -> Vec<[F; 3]> {
        let n = lattice.len();
        let lt = self.params.grammar.log_transitions();
        let mut beta = vec![[F::neg_infinity(); 3]; n + 1];
        if n == 0 {
            return beta;
        }
        beta[n] = [lt[0][END], lt[1][END], lt[2][END]];
        for start in (1..n).rev() {
            for &(end, arc) in &lattice[start] {
                let s = arc.slot.index();
                let tail = arc.log_p + beta[end][s];
                for p in 0..3 {
                    beta[start][p] = log_add(beta[start][p], lt[p][s] + tail);
                }
            }
        }
        beta
    }

    /// Log of the summed probability of every derivation of `word`; `-inf`
    /// if there is none.
    pub fn word_log_likelihood(&self, word: &str) -> F {
        let chars: Vec<char> = word.chars().collect();
        self.forward(&self.lattice(&chars)).log_z
    }

    pub fn is_derivable(&self, word: &str) -> bool {
        self.word_log_likelihood(word) > F::neg_infinity()
    }

    /// Highest-probability derivation, or `None` if the word has none.
    pub fn viterbi(&self, word: &str) -> Option<Derivation<F>> {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let lattice = self.lattice(&chars);
        let ls = self.params.grammar.log_start();
        let lt = self.params.grammar.log_transitions();
        let ninf = F::neg_infinity();
        // best[j][s] = (score, start, previous slot, arc)
        let mut best: Vec<[Option<(F, usize, usize, Arc<F>)>; 3]> = vec![[None; 3]; n + 1];
        for start in 0..n {
            for &(end, arc) in &lattice[start] {
                let s = arc.slot.index();
                let (incoming, prev) = if start == 0 {
                    (ls[s], usize::MAX)
                } else {
                    let mut top = (ninf, usize::MAX);
                    for p in 0..3 {
                        if let Some((score, ..)) = best[start][p] {
                            let cand = score + lt[p][s];
                            if cand > top.0 {
                                top = (cand, p);
                            }
                        }
                    }
                    top
                };
                let score = incoming + arc.log_p;
                if score == ninf {
                    continue;
                }
                if best[end][s].is_none_or(|(cur, ..)| score > cur) {
                    best[end][s] = Some((score, start, prev, arc));
                }
            }
        }
        let mut top: Option<(F, usize)> = None;
        for s in 0..3 {
            if let Some((score, ..)) = best.get(n)?[s] {
                let total = score + lt[s][END];
                if total > ninf && top.is_none_or(|(t, _)| total > t) {
                    top = Some((total, s));
                }
            }
        }
        let (log_prob, mut slot) = top?;
        let mut steps = Vec::new();
        let mut pos = n;
        while pos > 0 {
            let (_, start, prev, arc) = best[pos][slot].expect("back pointer on the best path");
            let (_, morpheme) = &self.lex_keys[arc.lex];
            let (_, morph) = &self.emit_keys[arc.emit];
            steps.push(DerivationStep {
                slot: arc.slot,
                morpheme: morpheme.clone(),
                morph: morph.clone(),
            });
            pos = start;
            slot = prev;
        }
        steps.reverse();
        Some(Derivation { steps, log_prob })
    }

    /// Canonical morphemes of the Viterbi derivation. An underivable word
    /// comes back whole with `fallback` set.
    pub fn viterbi_segment(&self, word: &str) -> Result<Decoded> {
        match self.viterbi(word) {
            Some(d) => Ok(Decoded {
                segmentation: Segmentation::from_strs(&d.morphemes())?,
                fallback: false,
            }),
            None => {
                warn!("no derivation for {word:?}; returning it as a single root");
                Ok(Decoded {
                    segmentation: Segmentation::whole(word)?,
                    fallback: true,
                })
            }
        }
    }
}
