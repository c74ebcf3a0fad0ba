//! Versioned JSON model files.
//!
//! Every file is an object `{"format": "morphseg-model", "version": 1,
//! "kind": ..., "model": ...}`. Files store `f64` parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmenter::Segmenter;
use crate::sentence::ContextModel;
use crate::{BoundaryLabeler, HmmModel, MergeTable, MorfessorModel, UnigramVocab, WordPieceVocab};

pub const FORMAT_NAME: &str = "morphseg-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum SavedModel {
    Bpe(MergeTable),
    Wordpiece(WordPieceVocab),
    Ulm(UnigramVocab),
    Morfessor(MorfessorModel),
    Labeler(BoundaryLabeler),
    Hmm(HmmModel),
    /// Neighbor statistics for sentence-level segmentation.
    Context(ContextModel),
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Bpe(_) => "bpe",
            SavedModel::Wordpiece(_) => "wordpiece",
            SavedModel::Ulm(_) => "ulm",
            SavedModel::Morfessor(_) => "morfessor",
            SavedModel::Labeler(_) => "labeler",
            SavedModel::Hmm(_) => "hmm",
            SavedModel::Context(_) => "context",
        }
    }

    /// The model as a word-level segmenter; `None` for a context model.
    pub fn word_segmenter(&self) -> Option<&(dyn Segmenter + Sync)> {
        match self {
            SavedModel::Bpe(m) => Some(m),
            SavedModel::Wordpiece(m) => Some(m),
            SavedModel::Ulm(m) => Some(m),
            SavedModel::Morfessor(m) => Some(m),
            SavedModel::Labeler(m) => Some(m),
            SavedModel::Hmm(m) => Some(m),
            SavedModel::Context(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize)]
struct FileOut<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    model: &'a SavedModel,
}

#[derive(Deserialize)]
struct FileIn {
    #[serde(flatten)]
    model: SavedModel,
}

pub fn write_model(writer: impl Write, model: &SavedModel) -> Result<()> {
    let mut writer = BufWriter::new(writer);
    serde_json::to_writer(
        &mut writer,
        &FileOut {
            format: FORMAT_NAME,
            version: FORMAT_VERSION,
            model,
        },
    )?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Parses a model file, checking the format name and version first.
pub fn read_model(mut reader: impl Read) -> Result<SavedModel> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let header: Header = serde_json::from_value(value.clone())
        .map_err(|e| Error::Model(format!("missing format header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(Error::Model(format!("not a model file (format {:?})", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported version {} (expected {FORMAT_VERSION})",
            header.version
        )));
    }
    let file: FileIn = serde_json::from_value(value).map_err(|e| Error::Model(e.to_string()))?;
    Ok(file.model)
}

pub fn save_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    write_model(File::create(path)?, model)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    read_model(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::count_words;
    use crate::subword::bpe_train;

    fn round_trip(model: &SavedModel) -> SavedModel {
        let mut buf = Vec::new();
        write_model(&mut buf, model).unwrap();
        read_model(buf.as_slice()).unwrap()
    }

    #[test]
    fn round_trips_with_header() {
        let merges = bpe_train(&count_words(["lower", "lowest", "low"]), 5);
        let model = SavedModel::Bpe(merges);
        let mut buf = Vec::new();
        write_model(&mut buf, &model).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(r#"{"format":"morphseg-model","version":1,"kind":"bpe","model":"#));
        assert_eq!(round_trip(&model), model);
    }

    #[test]
    fn every_kind_round_trips() {
        let model = SavedModel::Wordpiece(WordPieceVocab::from_marked(&["a", "##b"]));
        assert_eq!(round_trip(&model), model);
        assert!(model.word_segmenter().is_some());
        let model = SavedModel::Context(ContextModel::default());
        let back = round_trip(&model);
        assert_eq!(back.kind(), "context");
        assert!(back.word_segmenter().is_none());
    }

    #[test]
    fn rejects_wrong_version_and_format() {
        let bad = r#"{"format":"morphseg-model","version":99,"kind":"bpe","model":{}}"#;
        assert!(matches!(read_model(bad.as_bytes()), Err(Error::Model(m)) if m.contains("version")));
        let bad = r#"{"format":"other","version":1}"#;
        assert!(read_model(bad.as_bytes()).is_err());
        assert!(read_model("[]".as_bytes()).is_err());
    }
}
