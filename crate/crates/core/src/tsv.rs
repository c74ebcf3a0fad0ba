//! Word- and sentence-level entries, datasets, and the TSV formats.
//!
//! Word-level lines are `word[\tsegmentation[\tcategory]]`; sentence-level
//! lines are `sentence[\tsegmented sentence]`. Files are UTF-8 with Unix
//! newlines, no header and no quoting. Everything is NFC-normalized on parse.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::morph::{nfc, parse_category, parse_segmentation, CategoryMask, Segmentation, MARKER};

/// Column layout of a word-level file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordColumns {
    /// Test input: the word only.
    One = 1,
    /// Word and segmentation (also the prediction format).
    Two = 2,
    /// Word, segmentation and category code.
    Three = 3,
}

impl WordColumns {
    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            1 => Ok(WordColumns::One),
            2 => Ok(WordColumns::Two),
            3 => Ok(WordColumns::Three),
            _ => Err(Error::format(
                format!("word-level lines have 1 to 3 columns, found {n}"),
                n.to_string(),
            )),
        }
    }

    pub fn count(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    pub word: String,
    pub segmentation: Option<Segmentation>,
    pub category: Option<CategoryMask>,
    /// Language an augmented entry was borrowed from. Never serialized.
    pub source_language: Option<String>,
}

impl WordEntry {
    pub fn new(word: &str) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::format("empty word", word));
        }
        if word.contains('\t') || word.contains('\n') {
            return Err(Error::format("tab or newline inside word", word));
        }
        Ok(WordEntry {
            word: nfc(word),
            segmentation: None,
            category: None,
            source_language: None,
        })
    }

    pub fn with_segmentation(mut self, seg: Segmentation) -> Self {
        self.segmentation = Some(seg);
        self
    }

    pub fn with_category(mut self, category: CategoryMask) -> Self {
        self.category = Some(category);
        self
    }

    /// Widest column layout this entry can be written with.
    pub fn columns(&self) -> WordColumns {
        match (&self.segmentation, &self.category) {
            (None, _) => WordColumns::One,
            (Some(_), None) => WordColumns::Two,
            (Some(_), Some(_)) => WordColumns::Three,
        }
    }
}

/// Parses one word-level line (without its trailing newline).
pub fn parse_word_line(line: &str, columns: WordColumns) -> Result<WordEntry> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != columns.count() {
        return Err(Error::format(
            format!("expected {} tab-separated columns, found {}", columns.count(), fields.len()),
            line,
        ));
    }
    let mut entry = WordEntry::new(fields[0])?;
    if let Some(seg) = fields.get(1) {
        entry.segmentation = Some(parse_segmentation(seg)?);
    }
    if let Some(code) = fields.get(2) {
        entry.category = Some(parse_category(code)?);
    }
    Ok(entry)
}

/// Writes `entry` with the given layout; missing fields are an error.
pub fn format_word_line(entry: &WordEntry, columns: WordColumns) -> Result<String> {
    let mut out = entry.word.clone();
    if columns >= WordColumns::Two {
        let seg = entry
            .segmentation
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("{:?} has no segmentation", entry.word)))?;
        out.push('\t');
        out.push_str(&seg.to_string());
    }
    if columns == WordColumns::Three {
        let cat = entry
            .category
            .ok_or_else(|| Error::Precondition(format!("{:?} has no category", entry.word)))?;
        out.push('\t');
        out.push_str(&cat.code());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceEntry {
    pub sentence: String,
    /// One segmentation per whitespace token of `sentence`.
    pub segmented: Option<Vec<Segmentation>>,
}

impl SentenceEntry {
    pub fn new(sentence: &str, segmented: Option<Vec<Segmentation>>) -> Result<Self> {
        if sentence.contains('\t') || sentence.contains('\n') {
            return Err(Error::format("tab or newline inside sentence", sentence));
        }
        let sentence = nfc(sentence);
        if let Some(segs) = &segmented {
            let n_tokens = sentence.split_whitespace().count();
            if n_tokens != segs.len() {
                return Err(Error::alignment(format!(
                    "sentence has {n_tokens} tokens but segmented field has {}",
                    segs.len()
                )));
            }
        }
        Ok(SentenceEntry { sentence, segmented })
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.sentence.split_whitespace().collect()
    }
}

/// Splits a segmented sentence into per-token segmentations; `@@`-marked
/// pieces attach to the preceding token.
pub fn parse_segmented_sentence(field: &str) -> Result<Vec<Segmentation>> {
    let mut groups: Vec<Vec<&str>> = Vec::new();
    for piece in field.split_whitespace() {
        if piece.starts_with(MARKER) {
            match groups.last_mut() {
                Some(group) => group.push(piece),
                None => return Err(Error::format_at("marker on first morpheme", field, 0)),
            }
        } else {
            groups.push(vec![piece]);
        }
    }
    groups
        .into_iter()
        .map(|g| parse_segmentation(&g.join(" ")))
        .collect()
}

pub fn format_segmented_sentence(segs: &[Segmentation]) -> String {
    segs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses a two-column sentence-level line.
pub fn parse_sentence_line(line: &str) -> Result<SentenceEntry> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 2 {
        return Err(Error::format(
            format!("expected 2 tab-separated columns, found {}", fields.len()),
            line,
        ));
    }
    SentenceEntry::new(fields[0], Some(parse_segmented_sentence(fields[1])?))
}

/// Parses a sentence-level line with one (test input) or two columns.
pub fn parse_sentence_line_any(line: &str) -> Result<SentenceEntry> {
    if line.contains('\t') {
        parse_sentence_line(line)
    } else {
        SentenceEntry::new(line, None)
    }
}

pub fn format_sentence_line(entry: &SentenceEntry) -> String {
    match &entry.segmented {
        Some(segs) => format!("{}\t{}", entry.sentence, format_segmented_sentence(segs)),
        None => entry.sentence.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Word,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entries {
    Words(Vec<WordEntry>),
    Sentences(Vec<SentenceEntry>),
}

/// A language-tagged collection of entries of a single kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    /// ISO 639-3 code, e.g. `eng`.
    pub language: String,
    pub entries: Entries,
}

impl Dataset {
    pub fn words(language: impl Into<String>, entries: Vec<WordEntry>) -> Self {
        Dataset {
            language: language.into(),
            entries: Entries::Words(entries),
        }
    }

    pub fn sentences(language: impl Into<String>, entries: Vec<SentenceEntry>) -> Self {
        Dataset {
            language: language.into(),
            entries: Entries::Sentences(entries),
        }
    }

    pub fn kind(&self) -> DatasetKind {
        match self.entries {
            Entries::Words(_) => DatasetKind::Word,
            Entries::Sentences(_) => DatasetKind::Sentence,
        }
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            Entries::Words(w) => w.len(),
            Entries::Sentences(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn word_entries(&self) -> Result<&[WordEntry]> {
        match &self.entries {
            Entries::Words(w) => Ok(w),
            Entries::Sentences(_) => Err(Error::Precondition(
                "expected a word-level dataset".to_string(),
            )),
        }
    }

    pub fn sentence_entries(&self) -> Result<&[SentenceEntry]> {
        match &self.entries {
            Entries::Sentences(s) => Ok(s),
            Entries::Words(_) => Err(Error::Precondition(
                "expected a sentence-level dataset".to_string(),
            )),
        }
    }

    pub fn into_word_entries(self) -> Result<Vec<WordEntry>> {
        match self.entries {
            Entries::Words(w) => Ok(w),
            Entries::Sentences(_) => Err(Error::Precondition(
                "expected a word-level dataset".to_string(),
            )),
        }
    }

    /// Narrowest column layout shared by every word entry.
    pub fn word_columns(&self) -> Result<WordColumns> {
        Ok(self
            .word_entries()?
            .iter()
            .map(WordEntry::columns)
            .min()
            .unwrap_or(WordColumns::Three))
    }
}

fn lines(reader: impl BufRead) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Reads a word-level file. With `columns == None` the layout is taken from
/// the first line and every other line must match it.
pub fn read_word_tsv(
    reader: impl BufRead,
    columns: Option<WordColumns>,
) -> Result<(Vec<WordEntry>, WordColumns)> {
    let mut layout = columns;
    let mut out = Vec::new();
    for (line_no, line) in lines(reader) {
        let line = line?;
        let cols = match layout {
            Some(c) => c,
            None => {
                let c = WordColumns::from_count(line.split('\t').count())
                    .map_err(|e| e.at_line(line_no))?;
                layout = Some(c);
                c
            }
        };
        out.push(parse_word_line(&line, cols).map_err(|e| e.at_line(line_no))?);
    }
    Ok((out, layout.unwrap_or(WordColumns::One)))
}

pub fn write_word_tsv(mut writer: impl Write, entries: &[WordEntry], columns: WordColumns) -> Result<()> {
    for entry in entries {
        writeln!(writer, "{}", format_word_line(entry, columns)?)?;
    }
    Ok(())
}

/// Reads a sentence-level file of one or two columns.
pub fn read_sentence_tsv(reader: impl BufRead) -> Result<Vec<SentenceEntry>> {
    let mut out = Vec::new();
    for (line_no, line) in lines(reader) {
        let line = line?;
        out.push(parse_sentence_line_any(&line).map_err(|e| e.at_line(line_no))?);
    }
    Ok(out)
}

pub fn write_sentence_tsv(mut writer: impl Write, entries: &[SentenceEntry]) -> Result<()> {
    for entry in entries {
        writeln!(writer, "{}", format_sentence_line(entry))?;
    }
    Ok(())
}
