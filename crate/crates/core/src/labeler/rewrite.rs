use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Observed surface segment -> canonical morpheme counts, split by whether
/// the segment ended the word.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RewriteTable {
    pub non_final: BTreeMap<String, BTreeMap<String, u64>>,
    #[serde(rename = "final")]
    pub final_: BTreeMap<String, BTreeMap<String, u64>>,
}

impl RewriteTable {
    pub fn add(&mut self, segment: &str, canonical: &str, is_final: bool) {
        let table = if is_final { &mut self.final_ } else { &mut self.non_final };
        *table
            .entry(segment.to_string())
            .or_default()
            .entry(canonical.to_string())
            .or_default() += 1;
    }

    pub fn counts(&self, segment: &str, is_final: bool) -> Option<&BTreeMap<String, u64>> {
        let table = if is_final { &self.final_ } else { &self.non_final };
        table.get(segment)
    }

    /// Most frequent canonical form for `segment` in this position (ties:
    /// lexicographically smallest). Falls back to counts from the other
    /// position, then to the segment itself.
    pub fn rewrite(&self, segment: &str, is_final: bool) -> String {
        let pick = |counts: &BTreeMap<String, u64>| {
            counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(c, _)| c.clone())
        };
        self.counts(segment, is_final)
            .and_then(pick)
            .or_else(|| self.counts(segment, !is_final).and_then(pick))
            .unwrap_or_else(|| segment.to_string())
    }

    pub fn is_empty(&self) -> bool {
        self.non_final.is_empty() && self.final_.is_empty()
    }
}
