use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Cursor, Write};
use std::path::Path;

use anyhow::Context;
use morphseg::tsv::{read_sentence_tsv, read_word_tsv, WordColumns};
use morphseg::{Dataset, SavedModel};

use crate::error::{usage, CliError};

/// `-` is stdin.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::Read::read_to_string(&mut io::stdin().lock(), &mut text)?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    }
    Ok(text)
}

/// `-` is stdout.
pub fn create(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(Box::new(BufWriter::new(file)))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Language code from a file name: everything before the first dot.
pub fn language_of(path: &Path) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.split('.').next())
        .filter(|s| !s.is_empty() && *s != "-")
        .unwrap_or("und")
        .to_string()
}

/// A sentence-level file has whitespace inside its first column.
pub fn looks_like_sentences(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split('\t').next().unwrap_or("").split_whitespace().count() > 1)
        .unwrap_or(false)
}

fn parse_words(path: &Path, text: &str) -> Result<(Dataset, WordColumns), CliError> {
    let (entries, columns) =
        read_word_tsv(Cursor::new(text), None).with_context(|| format!("in {}", path.display()))?;
    Ok((Dataset::words(language_of(path), entries), columns))
}

fn parse_sentences(path: &Path, text: &str) -> Result<Dataset, CliError> {
    let entries = read_sentence_tsv(Cursor::new(text)).with_context(|| format!("in {}", path.display()))?;
    Ok(Dataset::sentences(language_of(path), entries))
}

pub fn read_words(path: &Path) -> Result<(Dataset, WordColumns), CliError> {
    let text = read_text(path)?;
    if looks_like_sentences(&text) {
        return Err(usage(format!("{} is sentence-level; expected a word-level file", path.display())));
    }
    parse_words(path, &text)
}

pub fn read_sentences(path: &Path) -> Result<Dataset, CliError> {
    let text = read_text(path)?;
    parse_sentences(path, &text)
}

/// Word- or sentence-level, decided from the first line.
pub fn read_any(path: &Path) -> Result<Dataset, CliError> {
    let text = read_text(path)?;
    if looks_like_sentences(&text) {
        parse_sentences(path, &text)
    } else {
        Ok(parse_words(path, &text)?.0)
    }
}

/// First column of every non-empty line.
pub fn read_word_list(path: &Path) -> Result<Vec<String>, CliError> {
    let reader: Box<dyn BufRead> = if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        Box::new(BufReader::new(
            File::open(path).with_context(|| format!("cannot read {}", path.display()))?,
        ))
    };
    let mut words = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let word = line.split('\t').next().unwrap_or("").trim();
        if !word.is_empty() {
            words.push(word.to_string());
        }
    }
    Ok(words)
}

pub fn load_model(path: &Path) -> Result<SavedModel, CliError> {
    let text = read_text(path)?;
    Ok(morphseg::model_file::read_model(text.as_bytes()).with_context(|| format!("in {}", path.display()))?)
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<(), CliError> {
    let out = create(path)?;
    morphseg::model_file::write_model(out, model).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn language_and_level_detection() {
        assert_eq!(language_of(Path::new("data/mon.word.train.tsv")), "mon");
        assert_eq!(language_of(Path::new("-")), "und");
        assert!(looks_like_sentences("a b\ta @@x b\n"));
        assert!(!looks_like_sentences("walked\twalk @@ed\t100\n"));
        assert!(!looks_like_sentences(""));
    }
}
