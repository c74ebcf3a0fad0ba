//! Slot HMM for canonical segmentation.
//!
//! A word is generated as `PREFIX* ROOT+ SUFFIX*`. Each slot draws a
//! canonical morpheme from its lexicon and the emitter turns the morpheme
//! into the surface morph written in the word. Training is EM over the
//! lattice of all derivations; decoding returns the canonical morphemes of
//! the Viterbi derivation.

mod init;
mod lattice;
mod train;

pub use init::{affix_candidates, hmm_from_candidates, hmm_init_supervised, hmm_init_unsupervised, HmmConfig};
pub use lattice::{Decoded, Derivation, DerivationStep};
pub use train::{em_train, EmTrace, ExpectedCounts};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::Segmentation;
use crate::scalar::Real;
use crate::segmenter::Segmenter;

/// Parameters below this probability are pruned after every M-step.
pub const PROB_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Slot {
    Prefix,
    Root,
    Suffix,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Prefix, Slot::Root, Slot::Suffix];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Column of the END state in [`SlotGrammar::transitions`].
pub const END: usize = 3;

const START_ALLOWED: [bool; 3] = [true, true, false];
const TRANSITION_ALLOWED: [[bool; 4]; 3] = [
    [true, true, false, false],
    [false, true, true, true],
    [false, false, true, true],
];

/// Which optional parts of the grammar carry probability mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActiveStates {
    pub prefix: bool,
    pub suffix: bool,
    pub compound: bool,
}

impl ActiveStates {
    fn start(self, to: usize) -> bool {
        START_ALLOWED[to] && (to != Slot::Prefix.index() || self.prefix)
    }

    fn transition(self, from: usize, to: usize) -> bool {
        TRANSITION_ALLOWED[from][to]
            && (to != Slot::Prefix.index() || self.prefix)
            && (to != Slot::Suffix.index() || self.suffix)
            && !(from == Slot::Root.index() && to == Slot::Root.index() && !self.compound)
    }
}

/// Start and transition probabilities between slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SlotGrammar<F: Real = f64> {
    /// Start distribution indexed by [`Slot::index`]; SUFFIX is always 0.
    pub start: [F; 3],
    /// `transitions[from][to]`, with `to == END` for the end state.
    pub transitions: [[F; 4]; 3],
}

impl<F: Real> SlotGrammar<F> {
    /// Normalizes smoothed counts. Only active transitions receive the
    /// smoothing mass; a row with no mass at all becomes uniform over its
    /// allowed transitions.
    pub fn from_counts(start: [F; 3], transitions: [[F; 4]; 3], active: ActiveStates, smoothing: F) -> Self {
        let smooth = |allowed: bool, active: bool, c: F| {
            if !allowed {
                F::zero()
            } else if active {
                c + smoothing
            } else {
                c
            }
        };
        let start: Vec<F> = (0..3)
            .map(|to| smooth(START_ALLOWED[to], active.start(to), start[to]))
            .collect();
        let mut grammar = SlotGrammar {
            start: normalize_row(&start, &START_ALLOWED).try_into().expect("3 entries"),
            transitions: [[F::zero(); 4]; 3],
        };
        for from in 0..3 {
            let row: Vec<F> = (0..4)
                .map(|to| smooth(TRANSITION_ALLOWED[from][to], active.transition(from, to), transitions[from][to]))
                .collect();
            grammar.transitions[from] = normalize_row(&row, &TRANSITION_ALLOWED[from])
                .try_into()
                .expect("4 entries");
        }
        grammar
    }

    pub fn uniform(active: ActiveStates) -> Self {
        Self::from_counts([F::zero(); 3], [[F::zero(); 4]; 3], active, F::one())
    }

    pub fn validate(&self) -> Result<()> {
        let tol = F::lit(1e-6);
        let check = |row: &[F], allowed: &[bool], what: &str| -> Result<()> {
            let mut total = F::zero();
            for (&p, &ok) in row.iter().zip(allowed) {
                if !(p >= F::zero()) || (!ok && p != F::zero()) {
                    return Err(Error::Model(format!("invalid {what} probability {p}")));
                }
                total = total + p;
            }
            if (total - F::one()).abs() > tol {
                return Err(Error::Model(format!("{what} probabilities sum to {total}")));
            }
            Ok(())
        };
        check(&self.start, &START_ALLOWED, "start")?;
        for (from, row) in self.transitions.iter().enumerate() {
            check(row, &TRANSITION_ALLOWED[from], &format!("{:?} transition", Slot::ALL[from]))?;
        }
        Ok(())
    }

    fn log_start(&self) -> [F; 3] {
        self.start.map(|p| p.ln())
    }

    fn log_transitions(&self) -> [[F; 4]; 3] {
        self.transitions.map(|row| row.map(|p| p.ln()))
    }
}

fn normalize_row<F: Real>(row: &[F], allowed: &[bool]) -> Vec<F> {
    let total: F = row.iter().copied().sum();
    if total > F::zero() {
        return row.iter().map(|&c| c / total).collect();
    }
    let n = allowed.iter().filter(|&&a| a).count();
    allowed
        .iter()
        .map(|&a| if a { F::one() / F::from_count(n as u64) } else { F::zero() })
        .collect()
}

/// Morpheme emission probabilities of each slot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SlotLexicon<F: Real = f64> {
    pub prefix: BTreeMap<String, F>,
    pub root: BTreeMap<String, F>,
    pub suffix: BTreeMap<String, F>,
}

impl<F: Real> SlotLexicon<F> {
    pub fn slot(&self, slot: Slot) -> &BTreeMap<String, F> {
        match slot {
            Slot::Prefix => &self.prefix,
            Slot::Root => &self.root,
            Slot::Suffix => &self.suffix,
        }
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut BTreeMap<String, F> {
        match slot {
            Slot::Prefix => &mut self.prefix,
            Slot::Root => &mut self.root,
            Slot::Suffix => &mut self.suffix,
        }
    }

    /// Total number of entries over all slots.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.root.len() + self.suffix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.root.is_empty() {
            return Err(Error::Model("empty ROOT lexicon".into()));
        }
        for slot in Slot::ALL {
            let map = self.slot(slot);
            if map.is_empty() {
                continue;
            }
            if map.keys().any(String::is_empty) {
                return Err(Error::Model(format!("empty morpheme in {slot:?} lexicon")));
            }
            check_distribution(map.values().copied(), &format!("{slot:?} lexicon"))?;
        }
        Ok(())
    }
}

/// Surface realizations of canonical morphemes. A morpheme without an
/// entry is always written as itself.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent, bound = "")]
pub struct MorphEmitter<F: Real = f64> {
    pub table: BTreeMap<String, BTreeMap<String, F>>,
}

impl<F: Real> MorphEmitter<F> {
    /// Morph distribution of `morpheme`, identity included.
    pub fn morphs<'a>(&'a self, morpheme: &'a str) -> Vec<(&'a str, F)> {
        match self.table.get(morpheme) {
            Some(dist) => dist.iter().map(|(m, &p)| (m.as_str(), p)).collect(),
            None => vec![(morpheme, F::one())],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (morpheme, dist) in &self.table {
            if !dist.contains_key(morpheme) {
                return Err(Error::Model(format!("morpheme {morpheme:?} lacks its identity morph")));
            }
            if dist.keys().any(String::is_empty) {
                return Err(Error::Model(format!("empty morph for {morpheme:?}")));
            }
            check_distribution(dist.values().copied(), &format!("morphs of {morpheme:?}"))?;
        }
        Ok(())
    }
}

fn check_distribution<F: Real>(probs: impl Iterator<Item = F>, what: &str) -> Result<()> {
    let mut total = F::zero();
    for p in probs {
        if !(p > F::zero()) || p > F::one() {
            return Err(Error::Model(format!("invalid probability {p} in {what}")));
        }
        total = total + p;
    }
    if (total - F::one()).abs() > F::lit(1e-6) {
        return Err(Error::Model(format!("{what} sums to {total}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HmmParams<F: Real = f64> {
    pub grammar: SlotGrammar<F>,
    pub lexicon: SlotLexicon<F>,
    pub emitter: MorphEmitter<F>,
}

/// One lattice arc: a slot emitting a morpheme through one of its morphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Arc<F> {
    slot: Slot,
    lex: usize,
    emit: usize,
    log_p: F,
}

/// Validated parameters plus an index from surface morphs to arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", into = "HmmParams<F>", try_from = "HmmParams<F>")]
pub struct HmmModel<F: Real = f64> {
    params: HmmParams<F>,
    arcs: HashMap<String, Vec<Arc<F>>>,
    max_chars: usize,
    lex_keys: Vec<(Slot, String)>,
    emit_keys: Vec<(String, String)>,
}

impl<F: Real> HmmModel<F> {
    pub fn new(grammar: SlotGrammar<F>, lexicon: SlotLexicon<F>, emitter: MorphEmitter<F>) -> Result<Self> {
        Self::try_from(HmmParams {
            grammar,
            lexicon,
            emitter,
        })
    }

    pub fn grammar(&self) -> &SlotGrammar<F> {
        &self.params.grammar
    }

    pub fn lexicon(&self) -> &SlotLexicon<F> {
        &self.params.lexicon
    }

    pub fn emitter(&self) -> &MorphEmitter<F> {
        &self.params.emitter
    }

    pub fn params(&self) -> &HmmParams<F> {
        &self.params
    }

    pub fn into_params(self) -> HmmParams<F> {
        self.params
    }
}

impl<F: Real> TryFrom<HmmParams<F>> for HmmModel<F> {
    type Error = Error;

    fn try_from(params: HmmParams<F>) -> Result<Self> {
        params.grammar.validate()?;
        params.lexicon.validate()?;
        params.emitter.validate()?;
        let mut arcs: HashMap<String, Vec<Arc<F>>> = HashMap::new();
        let mut lex_keys = Vec::new();
        let mut emit_keys = Vec::new();
        let mut emit_ids: HashMap<(String, String), usize> = HashMap::new();
        for slot in Slot::ALL {
            for (morpheme, &p) in params.lexicon.slot(slot) {
                let lex = lex_keys.len();
                lex_keys.push((slot, morpheme.clone()));
                for (morph, q) in params.emitter.morphs(morpheme) {
                    let key = (morpheme.clone(), morph.to_string());
                    let emit = *emit_ids.entry(key.clone()).or_insert_with(|| {
                        emit_keys.push(key);
                        emit_keys.len() - 1
                    });
                    arcs.entry(morph.to_string()).or_default().push(Arc {
                        slot,
                        lex,
                        emit,
                        log_p: p.ln() + q.ln(),
                    });
                }
            }
        }
        let max_chars = arcs.keys().map(|m| m.chars().count()).max().unwrap_or(0);
        Ok(HmmModel {
            params,
            arcs,
            max_chars,
            lex_keys,
            emit_keys,
        })
    }
}

impl<F: Real> From<HmmModel<F>> for HmmParams<F> {
    fn from(model: HmmModel<F>) -> Self {
        model.params
    }
}

impl<F: Real> Segmenter for HmmModel<F> {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        Ok(self.viterbi_segment(word)?.segmentation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> HmmModel<f64> {
        let active = ActiveStates {
            prefix: true,
            suffix: true,
            compound: true,
        };
        let lexicon = SlotLexicon {
            prefix: [("un".to_string(), 1.0)].into(),
            root: [("do".to_string(), 0.5), ("undo".to_string(), 0.5)].into(),
            suffix: [("s".to_string(), 0.5), ("es".to_string(), 0.5)].into(),
        };
        let emitter = MorphEmitter {
            table: [(
                "es".to_string(),
                [("es".to_string(), 0.75), ("s".to_string(), 0.25)].into(),
            )]
            .into(),
        };
        HmmModel::new(SlotGrammar::uniform(active), lexicon, emitter).unwrap()
    }

    #[test]
    fn uniform_grammar_respects_active_states() {
        let g: SlotGrammar = SlotGrammar::uniform(ActiveStates::default());
        assert_eq!(g.start, [0.0, 1.0, 0.0]);
        assert_eq!(g.transitions[Slot::Root.index()], [0.0, 0.0, 0.0, 1.0]);
        g.validate().unwrap();
        let g: SlotGrammar = SlotGrammar::uniform(ActiveStates {
            prefix: true,
            suffix: true,
            compound: true,
        });
        assert_eq!(g.start, [0.5, 0.5, 0.0]);
        assert!((g.transitions[1][1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = toy().into_params();
        p.grammar.transitions[Slot::Suffix.index()][Slot::Root.index()] = 0.1;
        assert!(HmmModel::try_from(p).is_err());

        let mut p = toy().into_params();
        p.lexicon.root.clear();
        assert!(HmmModel::try_from(p).is_err());

        let mut p = toy().into_params();
        p.emitter.table.get_mut("es").unwrap().remove("es");
        assert!(HmmModel::try_from(p).is_err());
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let model = toy();
        let json = serde_json::to_string(&model).unwrap();
        let back: HmmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }
}
