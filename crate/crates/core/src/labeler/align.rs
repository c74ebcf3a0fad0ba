use serde::{Deserialize, Serialize};

use crate::eval::levenshtein_chars;
use crate::morph::Segmentation;

/// Character spans of a word aligned to canonical morphemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedEntry {
    /// `(start, end)` character offsets, one per morpheme, covering the word in order.
    pub spans: Vec<(usize, usize)>,
    /// Edit distance between each span and its morpheme.
    pub costs: Vec<usize>,
}

impl AlignedEntry {
    pub fn total_cost(&self) -> usize {
        self.costs.iter().sum()
    }

    /// Surface text of every span.
    pub fn span_texts(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.chars().collect();
        self.spans.iter().map(|&(s, e)| chars[s..e].iter().collect()).collect()
    }
}

/// Minimum-cost monotone alignment of `word` to the morphemes of `gold`.
///
/// Each morpheme takes a contiguous span and pays the edit distance between
/// span and morpheme. Spans are nonempty whenever the word has at least as
/// many characters as there are morphemes. Among equal-cost alignments the
/// earlier morphemes take the longest spans, so stem alternations stay on
/// the stem (`funniest` gives `funn|i|est`).
pub fn align_canonical(word: &str, gold: &Segmentation) -> AlignedEntry {
    let chars: Vec<char> = word.chars().collect();
    let morphs: Vec<Vec<char>> = gold.iter().map(|m| m.chars().collect()).collect();
    let n = chars.len();
    let k = morphs.len();
    let min_span = usize::from(n >= k);
    const INF: usize = usize::MAX / 2;
    // best[m][i]: cheapest alignment of morphemes m.. to chars[i..], with the chosen end.
    let mut best = vec![vec![(INF, 0usize); n + 1]; k + 1];
    best[k][n] = (0, n);
    for m in (0..k).rev() {
        for i in 0..=n {
            let mut current = (INF, 0);
            for j in (i + min_span)..=n {
                let tail = best[m + 1][j].0;
                if tail >= INF {
                    continue;
                }
                let cost = levenshtein_chars(&chars[i..j], &morphs[m]) + tail;
                if cost <= current.0 {
                    current = (cost, j);
                }
            }
            best[m][i] = current;
        }
    }
    let mut spans = Vec::with_capacity(k);
    let mut costs = Vec::with_capacity(k);
    let mut pos = 0;
    for (m, morph) in morphs.iter().enumerate() {
        let end = best[m][pos].1;
        spans.push((pos, end));
        costs.push(levenshtein_chars(&chars[pos..end], morph));
        pos = end;
    }
    AlignedEntry { spans, costs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn align(word: &str, parts: &[&str]) -> (Vec<String>, Vec<usize>) {
        let a = align_canonical(word, &Segmentation::from_strs(parts).unwrap());
        (a.span_texts(word), a.costs)
    }

    #[test]
    fn examples() {
        assert_eq!(align("intensive", &["intense", "ive"]), (vec!["intens".into(), "ive".into()], vec![1, 0]));
        assert_eq!(align("hotpot", &["hot", "pot"]), (vec!["hot".into(), "pot".into()], vec![0, 0]));
        assert_eq!(
            align("funniest", &["fun", "y", "est"]),
            (vec!["funn".into(), "i".into(), "est".into()], vec![1, 1, 0])
        );
    }

    #[test]
    fn short_words_allow_empty_spans() {
        let a = align_canonical("ab", &Segmentation::from_strs(&["a", "b", "c"]).unwrap());
        assert_eq!(a.spans.last().unwrap().1, 2);
        assert_eq!(a.total_cost(), 1);
    }
}
