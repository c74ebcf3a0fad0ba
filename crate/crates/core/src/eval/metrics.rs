//! Precision, recall, F1 and average Levenshtein distance.
//!
//! Counts are pooled over all instances (micro aggregation) and ratios are
//! kept exact; rounding happens only when a report is rendered.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, AddAssign};

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use super::levenshtein::levenshtein;
use crate::error::{Error, Result};
use crate::morph::{CategoryMask, Segmentation};
use crate::scalar::Real;
use crate::tsv::{Dataset, WordEntry};

pub type Rational = Ratio<u64>;

/// How predicted morphemes are matched against gold morphemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchPolicy {
    /// Order-insensitive multiset intersection of morpheme strings.
    #[default]
    Multiset,
    /// Morphemes count only when equal at the same index.
    Positional,
}

impl std::str::FromStr for MatchPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiset" => Ok(MatchPolicy::Multiset),
            "positional" => Ok(MatchPolicy::Positional),
            other => Err(Error::Config(format!("unknown matching policy {other:?}"))),
        }
    }
}

/// Per-instance counts. Also used as the running sum during aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairScore {
    pub correct: u64,
    pub n_pred: u64,
    pub n_gold: u64,
    pub edit_distance: u64,
}

impl PairScore {
    pub fn precision(&self) -> Rational {
        ratio(self.correct, self.n_pred)
    }

    pub fn recall(&self) -> Rational {
        ratio(self.correct, self.n_gold)
    }

    pub fn f1(&self) -> Rational {
        harmonic_mean(self.precision(), self.recall())
    }
}

impl Add for PairScore {
    type Output = PairScore;

    fn add(self, rhs: PairScore) -> PairScore {
        PairScore {
            correct: self.correct + rhs.correct,
            n_pred: self.n_pred + rhs.n_pred,
            n_gold: self.n_gold + rhs.n_gold,
            edit_distance: self.edit_distance + rhs.edit_distance,
        }
    }
}

impl AddAssign for PairScore {
    fn add_assign(&mut self, rhs: PairScore) {
        *self = *self + rhs;
    }
}

fn ratio(num: u64, den: u64) -> Rational {
    if den == 0 {
        Rational::zero()
    } else {
        Rational::new(num, den)
    }
}

fn harmonic_mean(p: Rational, r: Rational) -> Rational {
    if (p + r).is_zero() {
        Rational::zero()
    } else {
        p * r * 2 / (p + r)
    }
}

/// Number of gold morphemes matched by predicted ones.
pub fn morpheme_overlap(gold: &Segmentation, pred: &Segmentation, policy: MatchPolicy) -> PairScore {
    let correct = match policy {
        MatchPolicy::Multiset => {
            let mut remaining: HashMap<&str, u64> = HashMap::new();
            for m in gold.iter() {
                *remaining.entry(m).or_default() += 1;
            }
            let mut hits = 0;
            for m in pred.iter() {
                if let Some(n) = remaining.get_mut(m) {
                    if *n > 0 {
                        *n -= 1;
                        hits += 1;
                    }
                }
            }
            hits
        }
        MatchPolicy::Positional => gold.iter().zip(pred.iter()).filter(|(g, p)| g == p).count() as u64,
    };
    PairScore {
        correct,
        n_pred: pred.len() as u64,
        n_gold: gold.len() as u64,
        edit_distance: 0,
    }
}

/// Full per-instance score: overlap counts plus edit distance between the
/// formatted segmentation strings.
pub fn score_pair(gold: &Segmentation, pred: &Segmentation, policy: MatchPolicy) -> PairScore {
    PairScore {
        edit_distance: levenshtein(&gold.to_string(), &pred.to_string()) as u64,
        ..morpheme_overlap(gold, pred, policy)
    }
}

/// Aggregated metrics over a set of instances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricsReport {
    pub totals: PairScore,
    pub n_instances: u64,
    pub per_category: BTreeMap<CategoryMask, MetricsReport>,
}

impl MetricsReport {
    pub fn from_scores(scores: impl IntoIterator<Item = PairScore>) -> Self {
        let mut report = MetricsReport::default();
        for s in scores {
            report.push(s);
        }
        report
    }

    pub fn push(&mut self, score: PairScore) {
        self.totals += score;
        self.n_instances += 1;
    }

    pub fn precision(&self) -> Rational {
        self.totals.precision()
    }

    pub fn recall(&self) -> Rational {
        self.totals.recall()
    }

    pub fn f1(&self) -> Rational {
        self.totals.f1()
    }

    pub fn avg_levenshtein(&self) -> Rational {
        ratio(self.totals.edit_distance, self.n_instances)
    }

    /// F1 in the requested scalar type, as a fraction in `[0, 1]`.
    pub fn f1_as<F: Real>(&self) -> F {
        to_real(self.f1())
    }

    /// Rendered values: percentages (and average distance) to 2 decimals.
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            precision: percent(self.precision()),
            recall: percent(self.recall()),
            f1: percent(self.f1()),
            avg_levenshtein: round2(self.avg_levenshtein()),
            n: self.n_instances,
            per_category: self
                .per_category
                .iter()
                .map(|(c, r)| (*c, r.summary()))
                .collect(),
        }
    }

    /// One header row plus one row per report: overall first, then categories.
    pub fn to_tsv(&self, by_category: bool) -> String {
        let mut out = String::from("category\tprecision\trecall\tf1\tavg_levenshtein\tn\n");
        let row = |name: &str, r: &MetricsReport| {
            let s = r.summary();
            format!(
                "{name}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{}\n",
                s.precision, s.recall, s.f1, s.avg_levenshtein, s.n
            )
        };
        out.push_str(&row("all", self));
        if by_category {
            for (cat, r) in &self.per_category {
                out.push_str(&row(&cat.code(), r));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    #[serde(serialize_with = "two_decimals")]
    pub precision: f64,
    #[serde(serialize_with = "two_decimals")]
    pub recall: f64,
    #[serde(serialize_with = "two_decimals")]
    pub f1: f64,
    #[serde(serialize_with = "two_decimals")]
    pub avg_levenshtein: f64,
    pub n: u64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_category: BTreeMap<CategoryMask, ReportSummary>,
}

fn two_decimals<S: Serializer>(value: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    // Values are already rounded; reparsing the 2-decimal rendering keeps JSON tidy.
    let text = format!("{value:.2}");
    serializer.serialize_f64(text.parse().expect("formatted float"))
}

pub(crate) fn to_real<F: Real>(r: Rational) -> F {
    F::from_count(*r.numer()) / F::from_count(*r.denom())
}

/// Rounds to 2 decimals, ties to even.
pub fn round2(value: Rational) -> f64 {
    let scaled = value * 100;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let half = Rational::new(1, 2);
    let mut units = floor.to_integer();
    if frac > half || (frac == half && units % 2 == 1) {
        units += 1;
    }
    units as f64 / 100.0
}

/// A `[0, 1]` ratio as a percentage rounded to 2 decimals.
pub fn percent(value: Rational) -> f64 {
    round2(value * 100)
}

/// Rounds an already-floating percentage to 2 decimals, ties to even.
pub fn round2_f64(value: f64) -> f64 {
    let scaled = value * 100.0;
    let floor = scaled.floor();
    let diff = scaled - floor;
    let units = if diff > 0.5 || (diff == 0.5 && floor % 2.0 != 0.0) {
        floor + 1.0
    } else {
        floor
    };
    units / 100.0
}

/// Scores aligned gold entries and predictions. Gold entries must carry a
/// segmentation; per-category sub-reports cover entries with a category.
pub fn aggregate(gold: &[WordEntry], pred: &[Segmentation], policy: MatchPolicy) -> Result<MetricsReport> {
    if gold.len() != pred.len() {
        return Err(Error::alignment(format!(
            "{} gold entries but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let mut report = MetricsReport::default();
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        let gold_seg = g.segmentation.as_ref().ok_or_else(|| {
            Error::alignment(format!("gold entry {} ({:?}) has no segmentation", i + 1, g.word))
        })?;
        let score = score_pair(gold_seg, p, policy);
        report.push(score);
        if let Some(cat) = g.category {
            report.per_category.entry(cat).or_default().push(score);
        }
    }
    Ok(report)
}

/// Scores a prediction dataset against gold, checking that words line up.
pub fn evaluate_words(gold: &Dataset, pred: &Dataset, policy: MatchPolicy) -> Result<MetricsReport> {
    let gold = gold.word_entries()?;
    let pred = pred.word_entries()?;
    if gold.len() != pred.len() {
        return Err(Error::alignment(format!(
            "{} gold entries but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let mut segs = Vec::with_capacity(pred.len());
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.word != p.word {
            return Err(Error::alignment(format!(
                "gold word {:?} but predicted word {:?}",
                g.word, p.word
            ))
            .at_line(i + 1));
        }
        let seg = p.segmentation.clone().ok_or_else(|| {
            Error::alignment(format!("prediction for {:?} has no segmentation", p.word)).at_line(i + 1)
        })?;
        segs.push(seg);
    }
    aggregate(gold, &segs, policy)
}

/// Scores sentence-level predictions token by token (no category breakdown).
pub fn evaluate_sentences(gold: &Dataset, pred: &Dataset, policy: MatchPolicy) -> Result<MetricsReport> {
    let gold = gold.sentence_entries()?;
    let pred = pred.sentence_entries()?;
    if gold.len() != pred.len() {
        return Err(Error::alignment(format!(
            "{} gold sentences but {} predicted sentences",
            gold.len(),
            pred.len()
        )));
    }
    let mut report = MetricsReport::default();
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        let missing = || Error::alignment(format!("sentence {} has no segmented field", i + 1)).at_line(i + 1);
        let gs = g.segmented.as_ref().ok_or_else(missing)?;
        let ps = p.segmented.as_ref().ok_or_else(missing)?;
        if gs.len() != ps.len() {
            return Err(Error::alignment(format!(
                "sentence {} has {} gold tokens but {} predicted tokens",
                i + 1,
                gs.len(),
                ps.len()
            ))
            .at_line(i + 1));
        }
        for (gt, pt) in gs.iter().zip(ps) {
            report.push(score_pair(gt, pt, policy));
        }
    }
    Ok(report)
}

/// Unweighted mean of per-language F1 percentages.
pub fn macro_average<F: Real>(per_language: &BTreeMap<String, F>) -> Result<F> {
    if per_language.is_empty() {
        return Err(Error::Precondition("macro average of no languages".into()));
    }
    let sum: F = per_language.values().copied().sum();
    Ok(sum / F::from_count(per_language.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(parts: &[&str]) -> Segmentation {
        Segmentation::from_strs(parts).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let gold = seg(&["sheep", "y", "ness"]);
        let s = morpheme_overlap(&gold, &gold, MatchPolicy::Multiset);
        assert_eq!((s.correct, s.n_pred, s.n_gold), (3, 3, 3));

        let s = morpheme_overlap(&gold, &seg(&["sheep", "iness"]), MatchPolicy::Multiset);
        assert_eq!((s.correct, s.n_pred, s.n_gold), (1, 2, 3));
        assert_eq!(s.precision(), Rational::new(1, 2));
        assert_eq!(s.recall(), Rational::new(1, 3));
        assert_eq!(s.f1(), Rational::new(2, 5));

        let s = morpheme_overlap(&seg(&["fun", "y", "est"]), &seg(&["funn", "i", "est"]), MatchPolicy::Multiset);
        assert_eq!((s.correct, s.n_pred, s.n_gold), (1, 3, 3));
        assert_eq!(s.f1(), Rational::new(1, 3));
    }

    #[test]
    fn duplicates_count_with_multiplicity() {
        let s = morpheme_overlap(&seg(&["a", "a", "b"]), &seg(&["a", "b", "b"]), MatchPolicy::Multiset);
        assert_eq!(s.correct, 2);
        let s = morpheme_overlap(&seg(&["b", "a"]), &seg(&["a", "b"]), MatchPolicy::Positional);
        assert_eq!(s.correct, 0);
    }

    #[test]
    fn aggregation_examples() {
        let gold = vec![
            WordEntry::new("sheepyness").unwrap().with_segmentation(seg(&["sheep", "y", "ness"])),
            WordEntry::new("sheepyness").unwrap().with_segmentation(seg(&["sheep", "y", "ness"])),
        ];
        let pred = vec![seg(&["sheep", "iness"]), seg(&["sheep", "y", "ness"])];
        let r = aggregate(&gold, &pred, MatchPolicy::Multiset).unwrap();
        assert_eq!(r.precision(), Rational::new(4, 5));
        assert_eq!(r.recall(), Rational::new(2, 3));
        let s = r.summary();
        assert_eq!((s.precision, s.recall, s.f1), (80.0, 66.67, 72.73));

        let single = aggregate(&gold[..1], &pred[..1], MatchPolicy::Multiset).unwrap();
        assert_eq!(single.f1(), Rational::new(2, 5));

        assert!(aggregate(&gold, &pred[..1], MatchPolicy::Multiset).is_err());
    }

    #[test]
    fn perfect_corpus() {
        let gold = vec![WordEntry::new("hotpot").unwrap().with_segmentation(seg(&["hot", "pot"]))];
        let r = aggregate(&gold, &[seg(&["hot", "pot"])], MatchPolicy::Multiset).unwrap();
        let s = r.summary();
        assert_eq!((s.precision, s.recall, s.f1, s.avg_levenshtein), (100.0, 100.0, 100.0, 0.0));
    }

    #[test]
    fn macro_examples() {
        let row: BTreeMap<String, f64> = [
            ("ces", 93.84),
            ("eng", 93.63),
            ("fra", 95.73),
            ("ita", 97.43),
            ("lat", 99.38),
            ("rus", 99.35),
            ("mon", 98.51),
            ("hun", 98.72),
            ("spa", 99.04),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(round2_f64(macro_average(&row).unwrap()), 97.29);
        let one = BTreeMap::from([("x".to_string(), 50.0)]);
        assert_eq!(macro_average(&one).unwrap(), 50.0);
        let two = BTreeMap::from([("x".to_string(), 0.0f32), ("y".to_string(), 100.0)]);
        assert_eq!(macro_average(&two).unwrap(), 50.0);
        assert!(macro_average::<f64>(&BTreeMap::new()).is_err());
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round2(Rational::new(125, 10000)), 0.01);
        assert_eq!(round2(Rational::new(15, 1000)), 0.02);
        assert_eq!(round2(Rational::new(25, 1000)), 0.02);
        assert_eq!(percent(Rational::new(2, 3)), 66.67);
        assert_eq!(round2_f64(0.125), 0.12);
    }
}
