//! Dataset preparation: stratified splits, leakage exclusion, category
//! resampling, cross-lingual augmentation and corpus statistics.
//!
//! Splits are balanced over the eight word-formation categories. (Some
//! descriptions of the original data mention nine; only eight codes exist.)

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::morph::{nfc, CategoryMask};
use crate::tsv::{Dataset, WordEntry};

pub type Fraction = Ratio<u64>;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 20220714;

/// Categories borrowed from donor languages by default: everything without inflection.
pub const NON_INFLECTION: [CategoryMask; 4] = [
    CategoryMask::new(false, false, false),
    CategoryMask::new(false, false, true),
    CategoryMask::new(false, true, false),
    CategoryMask::new(false, true, true),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Fraction,
    pub dev: Fraction,
    pub test: Fraction,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: Fraction::new(8, 10),
            dev: Fraction::new(1, 10),
            test: Fraction::new(1, 10),
            seed: DEFAULT_SEED,
        }
    }
}

impl SplitSpec {
    pub fn new(train: Fraction, dev: Fraction, test: Fraction, seed: u64) -> Result<Self> {
        let spec = SplitSpec { train, dev, test, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.train, self.dev, self.test].iter().any(Zero::is_zero) {
            return Err(Error::Config("split fractions must be positive".into()));
        }
        if self.train + self.dev + self.test != Fraction::one() {
            return Err(Error::Config(format!(
                "split fractions must sum to 1, got {}",
                self.train + self.dev + self.test
            )));
        }
        Ok(())
    }
}

/// Parses `0.8`, `80%` or `4/5` into an exact fraction.
pub fn parse_fraction(text: &str) -> Result<Fraction> {
    let text = text.trim();
    let bad = || Error::Config(format!("not a fraction: {text:?}"));
    if let Some(pct) = text.strip_suffix('%') {
        return Ok(parse_fraction(pct)? / 100);
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(num, den));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if (int.is_empty() && frac.is_empty()) || frac.len() > 18 {
        return Err(bad());
    }
    let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let scale = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Fraction::from_integer(int) + Fraction::new(frac, scale))
}

fn category_of(entry: &WordEntry) -> Result<CategoryMask> {
    entry
        .category
        .ok_or_else(|| Error::Precondition(format!("entry {:?} has no category", entry.word)))
}

/// Original indices grouped by category, in index order.
fn strata(entries: &[WordEntry]) -> Result<BTreeMap<CategoryMask, Vec<usize>>> {
    let mut groups: BTreeMap<CategoryMask, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        groups.entry(category_of(e)?).or_default().push(i);
    }
    Ok(groups)
}

/// Per-category generator: one ChaCha stream per category code.
fn stratum_rng(seed: u64, category: CategoryMask) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code = u64::from_str_radix(&category.code(), 2).expect("binary code");
    rng.set_stream(code + 1);
    rng
}

/// Sizes of (train, dev, test) for a stratum of `n` entries. Each size is the
/// floor of its exact target; the remainder goes to train first, then dev.
pub fn split_sizes(n: usize, spec: &SplitSpec) -> [usize; 3] {
    let n = n as u64;
    let mut sizes = [spec.train, spec.dev, spec.test].map(|f| (f * n).floor().to_integer());
    let mut remainder = n - sizes.iter().sum::<u64>();
    for size in sizes.iter_mut() {
        if remainder == 0 {
            break;
        }
        *size += 1;
        remainder -= 1;
    }
    sizes.map(|s| s as usize)
}

/// Splits a word-level dataset into (train, dev, test), stratified by category.
/// Within each output, entries are ordered by (category code, original index).
pub fn stratified_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let entries = data.word_entries()?;
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (category, mut indices) in strata(entries)? {
        let [n_train, n_dev, _] = split_sizes(indices.len(), spec);
        let mut rng = stratum_rng(spec.seed, category);
        // Fisher-Yates, spelled out so the order is stable across rand versions.
        for i in (1..indices.len()).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        let (train, rest) = indices.split_at(n_train);
        let (dev, test) = rest.split_at(n_dev);
        for (part, chunk) in parts.iter_mut().zip([train, dev, test]) {
            let mut chunk = chunk.to_vec();
            chunk.sort_unstable();
            part.extend(chunk);
        }
    }
    let build = |idx: &Vec<usize>| {
        Dataset::words(
            data.language.clone(),
            idx.iter().map(|&i| entries[i].clone()).collect(),
        )
    };
    Ok((build(&parts[0]), build(&parts[1]), build(&parts[2])))
}

/// Removes every word that occurs as a token of a protected sentence.
/// Returns the filtered dataset and the number of entries removed.
pub fn exclude_overlap(train_dev: &Dataset, protected: &Dataset) -> Result<(Dataset, usize)> {
    let entries = train_dev.word_entries()?;
    let tokens: HashSet<String> = protected
        .sentence_entries()?
        .iter()
        .flat_map(|s| s.sentence.split_whitespace().map(nfc))
        .collect();
    let kept: Vec<WordEntry> = entries
        .iter()
        .filter(|e| !tokens.contains(&e.word))
        .cloned()
        .collect();
    let removed = entries.len() - kept.len();
    Ok((Dataset::words(train_dev.language.clone(), kept), removed))
}

/// Over- or undersamples each category named in `targets` to its target
/// count. Undersampling draws without replacement; oversampling keeps every
/// original and adds uniform draws with replacement. Categories absent from
/// `targets` pass through unchanged.
pub fn resample_by_category(
    data: &Dataset,
    targets: &BTreeMap<CategoryMask, usize>,
    seed: u64,
) -> Result<Dataset> {
    let entries = data.word_entries()?;
    let groups = strata(entries)?;
    for (category, &target) in targets {
        if target > 0 && !groups.contains_key(category) {
            return Err(Error::Precondition(format!(
                "cannot resample category {category} to {target}: no entries"
            )));
        }
    }
    let mut out = Vec::new();
    for (category, indices) in &groups {
        let Some(&target) = targets.get(category) else {
            out.extend(indices.iter().map(|&i| entries[i].clone()));
            continue;
        };
        let mut rng = stratum_rng(seed, *category);
        let mut chosen: Vec<usize> = if target <= indices.len() {
            sample(&mut rng, indices.len(), target)
                .into_iter()
                .map(|k| indices[k])
                .collect()
        } else {
            let mut all = indices.clone();
            all.extend((indices.len()..target).map(|_| indices[rng.gen_range(0..indices.len())]));
            all
        };
        chosen.sort_unstable();
        out.extend(chosen.into_iter().map(|i| entries[i].clone()));
    }
    Ok(Dataset::words(data.language.clone(), out))
}

/// Appends donor entries whose category is in `categories`, tagging each
/// with the donor's language.
pub fn crosslingual_augment(
    target: &Dataset,
    donors: &[Dataset],
    categories: &BTreeSet<CategoryMask>,
) -> Result<Dataset> {
    let mut out = target.word_entries()?.to_vec();
    for donor in donors {
        for entry in donor.word_entries()? {
            if categories.contains(&category_of(entry)?) {
                let mut borrowed = entry.clone();
                borrowed
                    .source_language
                    .get_or_insert_with(|| donor.language.clone());
                out.push(borrowed);
            }
        }
    }
    Ok(Dataset::words(target.language.clone(), out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryHistogram {
    pub counts: BTreeMap<CategoryMask, u64>,
    pub total: u64,
}

impl CategoryHistogram {
    pub fn get(&self, category: CategoryMask) -> u64 {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    /// `code<TAB>count` rows for all eight codes, then a `total` row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (cat, count) in &self.counts {
            let _ = writeln!(out, "{cat}\t{count}");
        }
        let _ = writeln!(out, "total\t{}", self.total);
        out
    }
}

/// Entry counts per category code (all eight codes listed) plus the total.
pub fn corpus_stats(data: &Dataset) -> Result<CategoryHistogram> {
    let mut counts: BTreeMap<CategoryMask, u64> =
        CategoryMask::all().into_iter().map(|c| (c, 0)).collect();
    let entries = data.word_entries()?;
    for e in entries {
        *counts.get_mut(&category_of(e)?).expect("all codes present") += 1;
    }
    Ok(CategoryHistogram {
        counts,
        total: entries.len() as u64,
    })
}
