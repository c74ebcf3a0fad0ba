//! Canonical morpheme segmentation: data formats, dataset preparation,
//! evaluation, unsupervised subword baselines, a slot HMM, a supervised
//! boundary labeler, sentence-level segmentation and Wiktionary compound
//! extraction.
//!
//! Probabilistic models are generic over a [`scalar::Real`] type; the
//! aliases below fix it to `f64`.

pub mod datasets;
pub mod error;
pub mod eval;
pub mod hmm;
pub mod labeler;
pub mod model_file;
pub mod morph;
pub mod scalar;
pub mod segmenter;
pub mod sentence;
pub mod subword;
pub mod tsv;
pub mod wikt;

pub use error::{Error, Result};
pub use eval::{MatchPolicy, MetricsReport};
pub use model_file::SavedModel;
pub use morph::{CategoryMask, Morpheme, Segmentation};
pub use segmenter::{Segmenter, WordCounts};
pub use subword::{MergeTable, WordPieceVocab};
pub use tsv::{Dataset, SentenceEntry, WordEntry};

pub type UnigramVocab = subword::UnigramVocab<f64>;
pub type MorfessorModel = subword::MorfessorModel<f64>;
pub type BoundaryLabeler = labeler::BoundaryLabeler<f64>;
pub type LinearTagger = labeler::LinearTagger<f64>;
pub type HmmModel = hmm::HmmModel<f64>;
pub type SlotGrammar = hmm::SlotGrammar<f64>;
pub type SlotLexicon = hmm::SlotLexicon<f64>;
pub type MorphEmitter = hmm::MorphEmitter<f64>;
