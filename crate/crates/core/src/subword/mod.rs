//! Unsupervised subword baselines producing surface segmentations.

pub mod bpe;
mod merge;
pub mod morfessor;
pub mod ulm;
pub mod wordpiece;

pub use bpe::{bpe_encode, bpe_train, MergeTable};
pub use morfessor::{morfessor_encode, morfessor_train, MorfessorConfig, MorfessorModel, MorfessorTrace};
pub use ulm::{ulm_encode, ulm_train, UlmConfig, UlmTrace, UnigramVocab};
pub use wordpiece::{wordpiece_encode, wordpiece_train, WordPieceVocab};
