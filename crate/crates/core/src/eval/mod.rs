//! Shared-task metrics and analyses.

mod analysis;
mod levenshtein;
mod metrics;

pub use analysis::{analyze_by_length, best_per_category, best_to_tsv, BestSystem, LengthBucket, LengthTable};
pub use levenshtein::{levenshtein, levenshtein_chars};
pub use metrics::{
    aggregate, evaluate_sentences, evaluate_words, macro_average, morpheme_overlap, percent, round2,
    round2_f64, score_pair, MatchPolicy, MetricsReport, PairScore, Rational, ReportSummary,
};
