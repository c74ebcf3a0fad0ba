//! Report shapes for the per-length and per-category analyses.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::metrics::{percent, score_pair, MatchPolicy, MetricsReport, Rational};
use crate::error::{Error, Result};
use crate::morph::{CategoryMask, Segmentation};
use crate::tsv::WordEntry;

/// Half-open word-length range `[lo, hi)` in characters; `hi == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthBucket {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl LengthBucket {
    pub fn contains(&self, len: usize) -> bool {
        len >= self.lo && self.hi.is_none_or(|hi| len < hi)
    }

    /// Parses a comma-separated list such as `1-5,5-10,10-`.
    pub fn parse_list(text: &str) -> Result<Vec<LengthBucket>> {
        text.split(',').map(str::parse).collect()
    }
}

impl FromStr for LengthBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad length bucket {s:?}, expected LO-HI or LO-"));
        let (lo, hi) = s.trim().split_once('-').ok_or_else(bad)?;
        let lo: usize = lo.parse().map_err(|_| bad())?;
        let hi = if hi.is_empty() {
            None
        } else {
            let hi: usize = hi.parse().map_err(|_| bad())?;
            if hi <= lo {
                return Err(bad());
            }
            Some(hi)
        };
        Ok(LengthBucket { lo, hi })
    }
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{},{})", self.lo, hi),
            None => write!(f, "[{},inf)", self.lo),
        }
    }
}

/// Category x length-bucket table of micro-aggregated reports.
/// `None` cells had no words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthTable {
    pub buckets: Vec<LengthBucket>,
    pub rows: BTreeMap<CategoryMask, Vec<Option<MetricsReport>>>,
}

impl LengthTable {
    pub fn cell(&self, category: CategoryMask, bucket: usize) -> Option<&MetricsReport> {
        self.rows.get(&category)?.get(bucket)?.as_ref()
    }

    /// F1 percentages; empty cells are written as `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("category");
        for b in &self.buckets {
            out.push('\t');
            out.push_str(&b.to_string());
        }
        out.push('\n');
        for (cat, cells) in &self.rows {
            out.push_str(&cat.code());
            for cell in cells {
                match cell {
                    Some(r) => out.push_str(&format!("\t{:.2}", percent(r.f1()))),
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Groups aligned (gold, prediction) pairs by gold category and word length.
pub fn analyze_by_length(
    gold: &[WordEntry],
    pred: &[Segmentation],
    buckets: &[LengthBucket],
    policy: MatchPolicy,
) -> Result<LengthTable> {
    if gold.len() != pred.len() {
        return Err(Error::alignment(format!(
            "{} gold entries but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let mut rows: BTreeMap<CategoryMask, Vec<Option<MetricsReport>>> = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        let category = g
            .category
            .ok_or_else(|| Error::Precondition(format!("gold entry {:?} has no category", g.word)))?;
        let gold_seg = g
            .segmentation
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("gold entry {:?} has no segmentation", g.word)))?;
        let row = rows.entry(category).or_insert_with(|| vec![None; buckets.len()]);
        let len = g.word.chars().count();
        if let Some(k) = buckets.iter().position(|b| b.contains(len)) {
            row[k]
                .get_or_insert_with(MetricsReport::default)
                .push(score_pair(gold_seg, p, policy));
        }
    }
    Ok(LengthTable {
        buckets: buckets.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestSystem {
    pub category: CategoryMask,
    pub system: String,
    pub f1: Rational,
    /// Another system reached exactly the same F1.
    pub tie: bool,
}

/// Highest-F1 system per category; ties go to the lexicographically smaller name.
pub fn best_per_category(reports: &BTreeMap<String, MetricsReport>) -> Vec<BestSystem> {
    let mut best: BTreeMap<CategoryMask, BestSystem> = BTreeMap::new();
    for (system, report) in reports {
        for (category, sub) in &report.per_category {
            let f1 = sub.f1();
            match best.get_mut(category) {
                None => {
                    best.insert(
                        *category,
                        BestSystem {
                            category: *category,
                            system: system.clone(),
                            f1,
                            tie: false,
                        },
                    );
                }
                Some(current) if f1 > current.f1 => {
                    *current = BestSystem {
                        category: *category,
                        system: system.clone(),
                        f1,
                        tie: false,
                    };
                }
                Some(current) if f1 == current.f1 => current.tie = true,
                Some(_) => {}
            }
        }
    }
    best.into_values().collect()
}

pub fn best_to_tsv(rows: &[BestSystem]) -> String {
    let mut out = String::from("category\tsystem\tf1\ttie\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{:.2}\t{}\n",
            r.category,
            r.system,
            percent(r.f1),
            if r.tie { "yes" } else { "no" }
        ));
    }
    out
}
