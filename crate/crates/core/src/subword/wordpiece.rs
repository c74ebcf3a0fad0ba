//! WordPiece: greedy longest-match-first encoding with continuation pieces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::merge::PairStats;
use crate::error::{Error, Result};
use crate::morph::Segmentation;
use crate::segmenter::{surface, Segmenter, WordCounts};

/// Prefix marking continuation pieces in serialized vocabularies.
pub const CONTINUATION: &str = "##";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct WordPieceVocab {
    /// Pieces allowed at the start of a word.
    pub initial: BTreeSet<String>,
    /// Pieces allowed after the first piece (stored without the `##` marker).
    pub continuation: BTreeSet<String>,
}

impl WordPieceVocab {
    /// Builds a vocabulary from marked pieces: `##x` is a continuation piece.
    pub fn from_marked<S: AsRef<str>>(pieces: &[S]) -> Self {
        let mut vocab = WordPieceVocab::default();
        for p in pieces {
            let p = p.as_ref();
            match p.strip_prefix(CONTINUATION) {
                Some(rest) if !rest.is_empty() => vocab.continuation.insert(rest.to_string()),
                _ => vocab.initial.insert(p.to_string()),
            };
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.initial.len() + self.continuation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn max_chars(&self) -> usize {
        self.initial
            .iter()
            .chain(&self.continuation)
            .map(|p| p.chars().count())
            .max()
            .unwrap_or(0)
    }
}

/// Greedy longest match, left to right. Continuation pieces only match
/// after the first position; output pieces carry no marker.
pub fn wordpiece_encode(word: &str, vocab: &WordPieceVocab) -> Result<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    let max_len = vocab.max_chars();
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let table = if start == 0 { &vocab.initial } else { &vocab.continuation };
        let longest = (start + 1..=chars.len().min(start + max_len))
            .rev()
            .find_map(|end| {
                let piece: String = chars[start..end].iter().collect();
                table.contains(&piece).then_some((end, piece))
            });
        match longest {
            Some((end, piece)) => {
                pieces.push(piece);
                start = end;
            }
            None => {
                return Err(Error::UnknownToken {
                    word: word.to_string(),
                    piece: chars[start..].iter().collect(),
                })
            }
        }
    }
    Ok(pieces)
}

/// Experimental trainer: repeatedly merges the pair maximizing
/// `freq(pair) / (freq(left) * freq(right))` until `vocab_size` pieces exist.
pub fn wordpiece_train(words: &WordCounts, vocab_size: usize) -> WordPieceVocab {
    let mark = |c: char, i: usize| {
        if i == 0 {
            c.to_string()
        } else {
            format!("{CONTINUATION}{c}")
        }
    };
    let mut stats = PairStats::new(words, mark);
    let mut vocab = WordPieceVocab::from_marked(&stats.symbols);
    while vocab.len() < vocab_size {
        let score_key = |&(l, r): &(u32, u32), c: u64| {
            let fl = stats.symbol_counts.get(&l).copied().unwrap_or(1).max(1) as u128;
            let fr = stats.symbol_counts.get(&r).copied().unwrap_or(1).max(1) as u128;
            (c as u128, fl * fr)
        };
        let mut best: Option<((u32, u32), (u128, u128))> = None;
        for (pair, &count) in &stats.pair_counts {
            if count == 0 {
                continue;
            }
            let key = score_key(pair, count);
            let better = match &best {
                None => true,
                Some((bp, bk)) => {
                    // Compare count/denominator ratios exactly.
                    let lhs = key.0 * bk.1;
                    let rhs = bk.0 * key.1;
                    lhs > rhs
                        || (lhs == rhs
                            && (&stats.symbols[pair.0 as usize], &stats.symbols[pair.1 as usize])
                                < (&stats.symbols[bp.0 as usize], &stats.symbols[bp.1 as usize]))
                }
            };
            if better {
                best = Some((*pair, key));
            }
        }
        let Some((pair, _)) = best else { break };
        let left = stats.symbols[pair.0 as usize].clone();
        let right = stats.symbols[pair.1 as usize].clone();
        let merged = format!("{left}{}", right.strip_prefix(CONTINUATION).unwrap_or(&right));
        let id = stats.intern(&merged);
        stats.merge(pair, id);
        match merged.strip_prefix(CONTINUATION) {
            Some(rest) => vocab.continuation.insert(rest.to_string()),
            None => vocab.initial.insert(merged),
        };
    }
    vocab
}

impl Segmenter for WordPieceVocab {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        surface(wordpiece_encode(word, self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars_vocab(alphabet: &str) -> Vec<String> {
        alphabet
            .chars()
            .flat_map(|c| [c.to_string(), format!("##{c}")])
            .collect()
    }

    #[test]
    fn greedy_longest_match() {
        let mut pieces = chars_vocab("invaluble");
        pieces.extend(["in", "##val", "##uable", "inv"].map(String::from));
        let vocab = WordPieceVocab::from_marked(&pieces);
        // "inv" is longer than "in" but leaves "aluable", which still encodes.
        assert_eq!(wordpiece_encode("invaluable", &vocab).unwrap(), ["inv", "a", "l", "uable"]);

        let mut pieces = chars_vocab("invaluble");
        pieces.extend(["in", "##val", "##uable"].map(String::from));
        let vocab = WordPieceVocab::from_marked(&pieces);
        assert_eq!(wordpiece_encode("invaluable", &vocab).unwrap(), ["in", "val", "uable"]);
    }

    #[test]
    fn whole_word_and_character_splits() {
        let mut pieces = chars_vocab("abc");
        pieces.push("abc".into());
        let vocab = WordPieceVocab::from_marked(&pieces);
        assert_eq!(wordpiece_encode("abc", &vocab).unwrap(), ["abc"]);
        let chars = WordPieceVocab::from_marked(&chars_vocab("abc"));
        assert_eq!(wordpiece_encode("cab", &chars).unwrap(), ["c", "a", "b"]);
    }

    #[test]
    fn continuation_only_non_initially() {
        let vocab = WordPieceVocab::from_marked(&["a", "##b", "##a"]);
        assert!(wordpiece_encode("ba", &vocab).is_err());
        assert_eq!(wordpiece_encode("aba", &vocab).unwrap(), ["a", "b", "a"]);
    }

    #[test]
    fn unknown_character_is_an_error() {
        let vocab = WordPieceVocab::from_marked(&chars_vocab("ab"));
        assert!(matches!(wordpiece_encode("abz", &vocab), Err(Error::UnknownToken { .. })));
    }

    #[test]
    fn training_grows_vocab_and_covers_corpus() {
        let words: WordCounts = [("hug", 10), ("pug", 5), ("pun", 12), ("bun", 4), ("hugs", 5)]
            .into_iter()
            .map(|(w, c)| (w.to_string(), c))
            .collect();
        let base = wordpiece_train(&words, 0);
        let vocab = wordpiece_train(&words, base.len() + 5);
        assert_eq!(vocab.len(), base.len() + 5);
        for w in words.keys() {
            assert_eq!(wordpiece_encode(w, &vocab).unwrap().concat(), *w);
        }
    }
}
