use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ActiveStates, HmmModel, MorphEmitter, Slot, SlotGrammar, SlotLexicon, END};
use crate::error::{Error, Result};
use crate::eval::levenshtein;
use crate::labeler::align_canonical;
use crate::morph::{CategoryMask, Segmentation};
use crate::scalar::Real;
use crate::segmenter::WordCounts;
use crate::tsv::WordEntry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmmConfig {
    /// Longest affix candidate, in characters, for unsupervised seeding.
    pub max_affix_len: usize,
    /// Candidates kept per side for unsupervised seeding.
    pub max_candidates: usize,
    /// Allow ROOT→ROOT even when no compound was observed.
    pub compounds: bool,
    /// Add-k smoothing of supervised counts.
    pub smoothing: f64,
    /// Largest edit distance between a morpheme and a harvested morph.
    pub max_edit: usize,
    pub em_iters: usize,
    pub tol: f64,
}

impl Default for HmmConfig {
    fn default() -> Self {
        HmmConfig {
            max_affix_len: 4,
            max_candidates: 50,
            compounds: false,
            smoothing: 0.1,
            max_edit: 2,
            em_iters: 0,
            tol: 1e-4,
        }
    }
}

/// Assigns a slot to every morpheme of a gold segmentation.
///
/// Words whose category has the compound bit but no affix bit are all
/// roots; other compounds get two roots and everything else one. The root
/// block is the contiguous run with the most free-standing morphemes, then
/// the lowest corpus frequency, then the most characters, then the
/// leftmost position.
pub(crate) fn assign_slots(
    seg: &Segmentation,
    category: Option<CategoryMask>,
    standalone: &HashSet<String>,
    frequency: &HashMap<String, usize>,
) -> Vec<Slot> {
    let morphs: Vec<&str> = seg.iter().collect();
    let k = morphs.len();
    let roots = match category {
        Some(c) if c.compound && !c.inflection && !c.derivation => k,
        Some(c) if c.compound => k.min(2),
        _ => 1,
    };
    let key = |start: usize| {
        let block = &morphs[start..start + roots];
        let free = block.iter().filter(|m| standalone.contains(**m)).count();
        let freq: usize = block.iter().map(|m| frequency.get(*m).copied().unwrap_or(0)).sum();
        let len: usize = block.iter().map(|m| m.chars().count()).sum();
        (free, std::cmp::Reverse(freq), len, std::cmp::Reverse(start))
    };
    let start = (0..=k - roots).max_by_key(|&s| key(s)).expect("nonempty segmentation");
    (0..k)
        .map(|i| {
            if i < start {
                Slot::Prefix
            } else if i < start + roots {
                Slot::Root
            } else {
                Slot::Suffix
            }
        })
        .collect()
}

fn normalized<F: Real>(counts: BTreeMap<String, f64>, smoothing: f64) -> BTreeMap<String, F> {
    let total: f64 = counts.values().map(|c| c + smoothing).sum();
    counts
        .into_iter()
        .map(|(m, c)| (m, F::lit((c + smoothing) / total)))
        .collect()
}

/// Initializes every distribution from smoothed counts over gold
/// segmentations. Morphs come from aligning each word to its morphemes;
/// spans within `max_edit` edits of their morpheme become emitter entries.
pub fn hmm_init_supervised<F: Real>(train: &[WordEntry], config: &HmmConfig) -> Result<HmmModel<F>> {
    if train.is_empty() {
        return Err(Error::Precondition("empty training set".into()));
    }
    let mut golds = Vec::with_capacity(train.len());
    for entry in train {
        let gold = entry.segmentation.as_ref().ok_or_else(|| {
            Error::Precondition(format!("training entry {:?} has no segmentation", entry.word))
        })?;
        golds.push((entry, gold));
    }
    let mut standalone: HashSet<String> = train.iter().map(|e| e.word.clone()).collect();
    let mut frequency: HashMap<String, usize> = HashMap::new();
    for (_, gold) in &golds {
        if gold.len() == 1 {
            standalone.insert(gold.iter().next().expect("nonempty").to_string());
        }
        for m in gold.iter() {
            *frequency.entry(m.to_string()).or_default() += 1;
        }
    }

    let mut start = [0.0; 3];
    let mut transitions = [[0.0; 4]; 3];
    let mut lex: [BTreeMap<String, f64>; 3] = Default::default();
    let mut morphs: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut active = ActiveStates {
        compound: config.compounds,
        ..ActiveStates::default()
    };
    for (entry, gold) in &golds {
        let slots = assign_slots(gold, entry.category, &standalone, &frequency);
        start[slots[0].index()] += 1.0;
        for pair in slots.windows(2) {
            transitions[pair[0].index()][pair[1].index()] += 1.0;
        }
        transitions[slots[slots.len() - 1].index()][END] += 1.0;
        active.prefix |= slots.contains(&Slot::Prefix);
        active.suffix |= slots.contains(&Slot::Suffix);
        active.compound |= slots.windows(2).any(|p| p == [Slot::Root, Slot::Root]);
        for (m, slot) in gold.iter().zip(&slots) {
            *lex[slot.index()].entry(m.to_string()).or_default() += 1.0;
        }
        let aligned = align_canonical(&entry.word, gold);
        for (m, surface) in gold.iter().zip(aligned.span_texts(&entry.word)) {
            if surface.is_empty() || levenshtein(m, &surface) > config.max_edit {
                continue;
            }
            *morphs
                .entry(m.to_string())
                .or_default()
                .entry(surface)
                .or_default() += 1.0;
        }
    }

    let grammar = SlotGrammar::from_counts(
        start.map(F::lit),
        transitions.map(|row| row.map(F::lit)),
        active,
        F::lit(config.smoothing),
    );
    let [prefix, root, suffix] = lex;
    let lexicon = SlotLexicon {
        prefix: normalized(prefix, config.smoothing),
        root: normalized(root, config.smoothing),
        suffix: normalized(suffix, config.smoothing),
    };
    let mut emitter = MorphEmitter::default();
    for (morpheme, mut dist) in morphs {
        if dist.keys().all(|m| *m == morpheme) {
            continue;
        }
        dist.entry(morpheme.clone()).or_default();
        emitter.table.insert(morpheme, normalized(dist, config.smoothing));
    }
    HmmModel::new(grammar, lexicon, emitter)
}

/// Word-edge substrings shared by at least two word types, ranked by the
/// number of types they occur in, then by length, then lexicographically.
/// Returns `(prefixes, suffixes)`.
pub fn affix_candidates(words: &WordCounts, max_len: usize, max_candidates: usize) -> (Vec<String>, Vec<String>) {
    let mut prefixes: BTreeMap<String, usize> = BTreeMap::new();
    let mut suffixes: BTreeMap<String, usize> = BTreeMap::new();
    for word in words.keys() {
        let chars: Vec<char> = word.chars().collect();
        for len in 1..=max_len.min(chars.len().saturating_sub(1)) {
            *prefixes.entry(chars[..len].iter().collect()).or_default() += 1;
            *suffixes.entry(chars[chars.len() - len..].iter().collect()).or_default() += 1;
        }
    }
    let rank = |counts: BTreeMap<String, usize>| {
        let mut ranked: Vec<(String, usize)> = counts.into_iter().filter(|&(_, c)| c >= 2).collect();
        ranked.sort_by(|(a, ca), (b, cb)| {
            cb.cmp(ca)
                .then_with(|| b.chars().count().cmp(&a.chars().count()))
                .then_with(|| a.cmp(b))
        });
        ranked.into_iter().take(max_candidates).map(|(s, _)| s).collect()
    };
    (rank(prefixes), rank(suffixes))
}

/// Uniform model over explicit affix candidates. Roots are the words
/// themselves plus every residue left by repeatedly stripping a candidate
/// prefix or suffix.
pub fn hmm_from_candidates<F: Real>(
    words: &WordCounts,
    prefixes: &[String],
    suffixes: &[String],
    compounds: bool,
) -> Result<HmmModel<F>> {
    let prefix_chars: Vec<Vec<char>> = prefixes.iter().map(|p| p.chars().collect()).collect();
    let suffix_chars: Vec<Vec<char>> = suffixes.iter().map(|s| s.chars().collect()).collect();
    let mut roots = BTreeSet::new();
    for word in words.keys() {
        let chars: Vec<char> = word.chars().collect();
        let mut seen = HashSet::new();
        let mut stack = vec![(0, chars.len())];
        while let Some((i, j)) = stack.pop() {
            if i >= j || !seen.insert((i, j)) {
                continue;
            }
            roots.insert(chars[i..j].iter().collect::<String>());
            for p in &prefix_chars {
                if i + p.len() < j && chars[i..].starts_with(p) {
                    stack.push((i + p.len(), j));
                }
            }
            for s in &suffix_chars {
                if i + s.len() < j && chars[..j].ends_with(s) {
                    stack.push((i, j - s.len()));
                }
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::Precondition("no ROOT candidates".into()));
    }
    let uniform = |set: BTreeSet<String>| -> BTreeMap<String, F> {
        let p = F::one() / F::from_count(set.len() as u64);
        set.into_iter().map(|m| (m, p)).collect()
    };
    let prefix: BTreeSet<String> = prefixes.iter().filter(|p| !p.is_empty()).cloned().collect();
    let suffix: BTreeSet<String> = suffixes.iter().filter(|s| !s.is_empty()).cloned().collect();
    let active = ActiveStates {
        prefix: !prefix.is_empty(),
        suffix: !suffix.is_empty(),
        compound: compounds,
    };
    let lexicon = SlotLexicon {
        prefix: uniform(prefix),
        root: uniform(roots),
        suffix: uniform(suffix),
    };
    HmmModel::new(SlotGrammar::uniform(active), lexicon, MorphEmitter::default())
}

/// Seeds affix candidates from word edges and builds a uniform model.
pub fn hmm_init_unsupervised<F: Real>(words: &WordCounts, config: &HmmConfig) -> Result<HmmModel<F>> {
    if words.is_empty() {
        return Err(Error::Precondition("empty training corpus".into()));
    }
    let (prefixes, suffixes) = affix_candidates(words, config.max_affix_len, config.max_candidates);
    hmm_from_candidates(words, &prefixes, &suffixes, config.compounds)
}
