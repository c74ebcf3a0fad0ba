//! Morphemes, segmentations and word-formation category masks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Marker prefixed to every non-initial morpheme in the segmentation column.
pub const MARKER: &str = "@@";
/// Separator between morphemes: a space followed by [`MARKER`].
pub const SEPARATOR: &str = " @@";

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// One canonical morpheme (or surface morph).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morpheme(String);

impl Morpheme {
    /// Validates and NFC-normalizes `text`.
    pub fn new(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::format("empty morpheme", text));
        }
        if let Some(pos) = text.find(char::is_whitespace) {
            return Err(Error::format_at("whitespace inside morpheme", text, pos));
        }
        if let Some(pos) = text.find(MARKER) {
            return Err(Error::format_at("marker inside morpheme", text, pos));
        }
        Ok(Morpheme(nfc(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl fmt::Display for Morpheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Morpheme {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// An ordered, nonempty sequence of morphemes for one word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segmentation(Vec<Morpheme>);

impl Segmentation {
    pub fn new(morphemes: Vec<Morpheme>) -> Result<Self> {
        if morphemes.is_empty() {
            return Err(Error::format("segmentation needs at least one morpheme", ""));
        }
        Ok(Segmentation(morphemes))
    }

    /// Builds a segmentation from raw strings, validating each one.
    pub fn from_strs<S: AsRef<str>>(parts: &[S]) -> Result<Self> {
        let morphemes = parts
            .iter()
            .map(|p| Morpheme::new(p.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(morphemes)
    }

    /// Single-morpheme segmentation of a whole word.
    pub fn whole(word: &str) -> Result<Self> {
        Ok(Segmentation(vec![Morpheme::new(word)?]))
    }

    pub fn morphemes(&self) -> &[Morpheme] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(Morpheme::as_str)
    }

    /// Concatenation of all morphemes; equals the word for surface segmentations.
    pub fn concat(&self) -> String {
        self.iter().collect()
    }

    /// Parses the `"sheep @@y @@ness"` form.
    pub fn parse(field: &str) -> Result<Self> {
        parse_segmentation(field)
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(SEPARATOR)?;
            }
            f.write_str(m.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for Segmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_segmentation(s)
    }
}

impl Serialize for Segmentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Segmentation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_segmentation(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a segmentation field. Every non-initial morpheme carries the
/// `@@` marker and is preceded by a single space.
pub fn parse_segmentation(field: &str) -> Result<Segmentation> {
    if field.is_empty() {
        return Err(Error::format_at("empty segmentation field", field, 0));
    }
    let mut morphemes = Vec::new();
    let mut offset = 0;
    for (i, token) in field.split(' ').enumerate() {
        let body = if i == 0 {
            if token.starts_with(MARKER) {
                return Err(Error::format_at("marker on first morpheme", field, offset));
            }
            token
        } else {
            match token.strip_prefix(MARKER) {
                Some(rest) => rest,
                None => {
                    return Err(Error::format_at(
                        "non-initial morpheme without marker",
                        field,
                        offset,
                    ))
                }
            }
        };
        if body.is_empty() {
            let message = if i > 0 && offset + token.len() == field.len() {
                "dangling marker at end of field"
            } else {
                "empty morpheme"
            };
            return Err(Error::format_at(message, field, offset));
        }
        let morpheme = Morpheme::new(body).map_err(|e| match e {
            Error::Format { message, offset: inner, .. } => Error::Format {
                message,
                value: field.to_string(),
                offset: Some(offset + token.len() - body.len() + inner.unwrap_or(0)),
                line: None,
            },
            other => other,
        })?;
        morphemes.push(morpheme);
        offset += token.len() + 1;
    }
    Segmentation::new(morphemes)
}

/// Inverse of [`parse_segmentation`].
pub fn format_segmentation(seg: &Segmentation) -> String {
    seg.to_string()
}

/// Word-formation processes present in a word: inflection, derivation, compounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CategoryMask {
    pub inflection: bool,
    pub derivation: bool,
    pub compound: bool,
}

impl CategoryMask {
    pub const ROOT: CategoryMask = CategoryMask::new(false, false, false);

    pub const fn new(inflection: bool, derivation: bool, compound: bool) -> Self {
        CategoryMask {
            inflection,
            derivation,
            compound,
        }
    }

    /// All eight masks in code order `000` .. `111`.
    pub fn all() -> [CategoryMask; 8] {
        let mut out = [CategoryMask::ROOT; 8];
        for (bits, slot) in out.iter_mut().enumerate() {
            *slot = CategoryMask::new(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
        }
        out
    }

    pub fn parse(code: &str) -> Result<Self> {
        parse_category(code)
    }

    pub fn code(&self) -> String {
        let bit = |b: bool| if b { '1' } else { '0' };
        [bit(self.inflection), bit(self.derivation), bit(self.compound)]
            .iter()
            .collect()
    }
}

impl fmt::Display for CategoryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for CategoryMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_category(s)
    }
}

impl Serialize for CategoryMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for CategoryMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_category(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a 3-character code; bits are inflection, derivation, compound.
pub fn parse_category(code: &str) -> Result<CategoryMask> {
    let bits: Vec<char> = code.chars().collect();
    if bits.len() != 3 {
        return Err(Error::format("category code must have 3 characters", code));
    }
    let mut flags = [false; 3];
    for (i, c) in bits.iter().enumerate() {
        flags[i] = match c {
            '0' => false,
            '1' => true,
            _ => return Err(Error::format_at("category code must be binary", code, i)),
        };
    }
    Ok(CategoryMask::new(flags[0], flags[1], flags[2]))
}
