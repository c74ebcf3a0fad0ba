#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeSet;

use morphseg::morph::CategoryMask;
use morphseg::{Segmentation, WordEntry};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSONANTS: &[char] = &['p', 't', 'k', 'm', 'n', 's', 'l', 'r', 'd', 'g', 'b', 'v'];
const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

/// A concatenative toy language with vowel alternations at some
/// morpheme boundaries.
pub struct SyntheticLanguage {
    pub entries: Vec<WordEntry>,
    pub boundaries: usize,
    pub edited_boundaries: usize,
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, taken: &mut BTreeSet<String>, make: impl Fn(&mut ChaCha8Rng) -> String) -> Vec<String> {
    let mut out = Vec::new();
    while out.len() < n {
        let m = make(rng);
        if taken.insert(m.clone()) {
            out.push(m);
        }
    }
    out
}

fn syllable(rng: &mut ChaCha8Rng) -> String {
    format!("{}{}", CONSONANTS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap())
}

/// Replaces the final vowel by the next one in `VOWELS`.
fn alternate(m: &str) -> String {
    let mut chars: Vec<char> = m.chars().collect();
    let last = chars.len() - 1;
    let i = VOWELS.iter().position(|&v| v == chars[last]).expect("morpheme ends in a vowel");
    chars[last] = VOWELS[(i + 1) % VOWELS.len()];
    chars.into_iter().collect()
}

/// 50 roots, 10 suffixes and 5 prefixes; every word is `prefix? root
/// suffix?`. A fifth of the roots and prefixes (those ending in a vowel)
/// change their final vowel before a following morpheme.
pub fn synthetic_language(seed: u64) -> SyntheticLanguage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = BTreeSet::new();
    let roots = distinct(&mut rng, 50, &mut taken, |r| {
        let n = r.gen_range(2..=3);
        (0..n).map(|_| syllable(r)).collect()
    });
    let suffixes = distinct(&mut rng, 10, &mut taken, |r| {
        let mut s = format!("{}{}", VOWELS.choose(r).unwrap(), CONSONANTS.choose(r).unwrap());
        if r.gen_bool(0.3) {
            s.push(*VOWELS.choose(r).unwrap());
        }
        s
    });
    let prefixes = distinct(&mut rng, 5, &mut taken, syllable);
    let weak_roots: BTreeSet<&String> = roots.choose_multiple(&mut rng, 10).collect();
    let weak_prefixes: BTreeSet<&String> = prefixes.choose_multiple(&mut rng, 1).collect();

    let mut entries = Vec::new();
    let (mut boundaries, mut edited) = (0, 0);
    let none = String::new();
    for prefix in std::iter::once(&none).chain(&prefixes) {
        for root in &roots {
            for suffix in std::iter::once(&none).chain(&suffixes) {
                let mut word = String::new();
                let mut canon: Vec<&str> = Vec::new();
                if !prefix.is_empty() {
                    boundaries += 1;
                    if weak_prefixes.contains(prefix) {
                        edited += 1;
                        word.push_str(&alternate(prefix));
                    } else {
                        word.push_str(prefix);
                    }
                    canon.push(prefix);
                }
                if !suffix.is_empty() && weak_roots.contains(root) {
                    edited += 1;
                    word.push_str(&alternate(root));
                } else {
                    word.push_str(root);
                }
                canon.push(root);
                if !suffix.is_empty() {
                    boundaries += 1;
                    word.push_str(suffix);
                    canon.push(suffix);
                }
                let category = CategoryMask::new(!suffix.is_empty(), !prefix.is_empty(), false);
                entries.push(
                    WordEntry::new(&word)
                        .unwrap()
                        .with_segmentation(Segmentation::from_strs(&canon).unwrap())
                        .with_category(category),
                );
            }
        }
    }
    SyntheticLanguage {
        entries,
        boundaries,
        edited_boundaries: edited,
    }
}
