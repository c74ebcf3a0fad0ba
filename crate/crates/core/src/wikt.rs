//! Compound extraction from Wiktionary etymology templates, and the
//! root-word filter.
//!
//! Input is a pre-extracted stream of `(title, wikitext)` pairs; dump
//! handling is left to a line filter upstream.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{nfc, CategoryMask, Segmentation};
use crate::tsv::{Dataset, WordEntry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtymTemplate {
    pub name: String,
    pub language: String,
    pub parts: Vec<String>,
    pub named: BTreeMap<String, String>,
}

/// A recoverable problem found while parsing, at a byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedTemplates {
    pub templates: Vec<EtymTemplate>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Byte offset just past the `}}` closing the template opened at `start`.
fn match_braces(text: &str, start: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut i = start;
    while i + 1 < bytes.len() {
        match &bytes[i..i + 2] {
            b"{{" => {
                depth += 1;
                i += 2;
            }
            b"}}" => {
                depth -= 1;
                i += 2;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => i += 1,
        }
    }
    None
}

/// Splits on `|` outside nested templates and links; returns
/// `(offset, field)` pairs.
fn split_fields(inner: &str) -> Vec<(usize, &str)> {
    let bytes = inner.as_bytes();
    let (mut braces, mut links) = (0usize, 0usize);
    let mut fields = Vec::new();
    let mut field_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let pair = bytes.get(i..i + 2);
        match pair {
            Some(b"{{") => {
                braces += 1;
                i += 2;
                continue;
            }
            Some(b"}}") => {
                braces = braces.saturating_sub(1);
                i += 2;
                continue;
            }
            Some(b"[[") => {
                links += 1;
                i += 2;
                continue;
            }
            Some(b"]]") => {
                links = links.saturating_sub(1);
                i += 2;
                continue;
            }
            _ => {}
        }
        if bytes[i] == b'|' && braces == 0 && links == 0 {
            fields.push((field_start, &inner[field_start..i]));
            field_start = i + 1;
        }
        i += 1;
    }
    fields.push((field_start, &inner[field_start..]));
    fields
}

/// Language codes such as `en`, `grc`, `ine-pro` or `la-vul`.
pub fn is_language_code(s: &str) -> bool {
    let mut segments = s.split('-');
    let first = segments.next().unwrap_or("");
    (2..=3).contains(&first.len())
        && first.bytes().all(|b| b.is_ascii_lowercase())
        && segments.all(|seg| (1..=8).contains(&seg.len()) && seg.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}

fn named_key(field: &str) -> Option<(&str, &str)> {
    let (key, value) = field.split_once('=')?;
    let key = key.trim();
    let plain = !key.is_empty() && key.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-');
    plain.then_some((key, value))
}

/// Removes links (keeping their display text), HTML tags and quote markup.
fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find("[[") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("]]") {
            Some(close) => {
                let link = &after[..close];
                out.push_str(link.rsplit('|').next().unwrap_or(link));
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(after);
                rest = "";
            }
        }
    }
    out.push_str(rest);

    let mut plain = String::with_capacity(out.len());
    let mut in_tag = false;
    for c in out.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => plain.push(c),
            _ => {}
        }
    }
    plain.replace("'''", "").replace("''", "").trim().to_string()
}

/// Replaces each template inside a part by its first positional value.
/// Templates nested deeper than that are dropped with a diagnostic.
fn resolve_part(part: &str, offset: usize, diagnostics: &mut Vec<Diagnostic>) -> String {
    let mut out = String::new();
    let mut i = 0;
    while let Some(rel) = part[i..].find("{{") {
        let start = i + rel;
        out.push_str(&part[i..start]);
        let Some(end) = match_braces(part, start) else {
            diagnostics.push(Diagnostic {
                offset: offset + start,
                message: "unbalanced braces inside template argument".into(),
            });
            return strip_markup(&out);
        };
        let fields = split_fields(&part[start + 2..end - 2]);
        let skip = if fields.get(1).is_some_and(|(_, f)| is_language_code(f.trim())) { 2 } else { 1 };
        let value = fields
            .iter()
            .skip(skip)
            .map(|&(_, f)| f)
            .find(|f| named_key(f).is_none())
            .unwrap_or("");
        if value.contains("{{") {
            diagnostics.push(Diagnostic {
                offset: offset + start,
                message: "template nested more than one level deep".into(),
            });
            let mut shallow = String::new();
            let mut j = 0;
            while let Some(r) = value[j..].find("{{") {
                shallow.push_str(&value[j..j + r]);
                j = match match_braces(value, j + r) {
                    Some(e) => e,
                    None => value.len(),
                };
            }
            shallow.push_str(&value[j..]);
            out.push_str(&shallow);
        } else {
            out.push_str(value);
        }
        i = end;
    }
    out.push_str(&part[i..]);
    strip_markup(&out)
}

/// Extracts every top-level `{{...}}` with a name and a language code.
/// Never fails: problems become diagnostics, and an unclosed template
/// ends parsing of the rest of the text.
pub fn parse_template(text: &str) -> ParsedTemplates {
    let mut parsed = ParsedTemplates::default();
    let mut i = 0;
    while let Some(rel) = text[i..].find("{{") {
        let start = i + rel;
        let Some(end) = match_braces(text, start) else {
            parsed.diagnostics.push(Diagnostic {
                offset: start,
                message: "unbalanced braces; rest of text skipped".into(),
            });
            break;
        };
        i = end;
        let inner_offset = start + 2;
        let fields = split_fields(&text[inner_offset..end - 2]);
        let name = fields[0].1.trim();
        if name.is_empty() {
            parsed.diagnostics.push(Diagnostic {
                offset: start,
                message: "template without a name".into(),
            });
            continue;
        }
        let Some(&(_, lang)) = fields.get(1) else { continue };
        let language = lang.trim();
        if !is_language_code(language) {
            continue;
        }
        let mut parts = Vec::new();
        let mut named = BTreeMap::new();
        for &(off, field) in &fields[2..] {
            if let Some((key, value)) = named_key(field) {
                named.insert(key.to_string(), strip_markup(value));
                continue;
            }
            let part = resolve_part(field, inner_offset + off, &mut parsed.diagnostics);
            if !part.is_empty() {
                parts.push(part);
            }
        }
        if parts.is_empty() {
            continue;
        }
        parsed.templates.push(EtymTemplate {
            name: name.to_string(),
            language: language.to_string(),
            parts,
            named,
        });
    }
    parsed
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    /// Compounds whose parts concatenate to the title.
    pub dataset: Dataset,
    /// Compounds that do not concatenate (interfixes, spelling changes).
    pub review: Vec<WordEntry>,
    /// `(title, diagnostic)` pairs.
    pub diagnostics: Vec<(String, Diagnostic)>,
}

fn is_free(part: &str) -> bool {
    !part.starts_with('-') && !part.ends_with('-')
}

fn compound_parts(template: &EtymTemplate) -> Option<&[String]> {
    let accepted = match template.name.as_str() {
        "compound" | "com" => true,
        "affix" | "af" => template.parts.iter().all(|p| is_free(p)),
        _ => false,
    };
    (accepted && template.parts.len() >= 2).then_some(&template.parts)
}

enum PageResult {
    Entry(WordEntry, bool),
    Nothing,
}

/// Compounds from `compound` templates and from `affix` templates whose
/// parts are all free morphemes, for pages in `language`. Output is sorted
/// by title.
pub fn extract_compounds(pages: &[(String, String)], language: &str) -> Extraction {
    let results: Vec<(PageResult, Vec<(String, Diagnostic)>)> = pages
        .par_iter()
        .map(|(title, text)| {
            let parsed = parse_template(text);
            let mut diagnostics: Vec<(String, Diagnostic)> =
                parsed.diagnostics.into_iter().map(|d| (title.clone(), d)).collect();
            let Some(parts) = parsed
                .templates
                .iter()
                .filter(|t| t.language == language)
                .find_map(compound_parts)
            else {
                return (PageResult::Nothing, diagnostics);
            };
            let built = WordEntry::new(title).and_then(|e| Ok(e.with_segmentation(Segmentation::from_strs(parts)?)));
            match built {
                Ok(entry) => {
                    let entry = entry.with_category(CategoryMask::new(false, false, true));
                    let concatenative = entry.segmentation.as_ref().map(Segmentation::concat) == Some(entry.word.clone());
                    (PageResult::Entry(entry, concatenative), diagnostics)
                }
                Err(e) => {
                    debug!("skipping page {title:?}: {e}");
                    diagnostics.push((
                        title.clone(),
                        Diagnostic {
                            offset: 0,
                            message: format!("page skipped: {e}"),
                        },
                    ));
                    (PageResult::Nothing, diagnostics)
                }
            }
        })
        .collect();

    let mut entries = Vec::new();
    let mut review = Vec::new();
    let mut diagnostics = Vec::new();
    for (result, diags) in results {
        diagnostics.extend(diags);
        if let PageResult::Entry(entry, concatenative) = result {
            if concatenative {
                entries.push(entry);
            } else {
                review.push(entry);
            }
        }
    }
    let key = |e: &WordEntry| (e.word.clone(), e.segmentation.clone());
    entries.sort_by_key(key);
    review.sort_by_key(key);
    diagnostics.sort_by(|a, b| (&a.0, a.1.offset).cmp(&(&b.0, b.1.offset)));
    Extraction {
        dataset: Dataset::words(language, entries),
        review,
        diagnostics,
    }
}

/// Reads `title<TAB>wikitext` lines; blank lines are skipped.
pub fn read_pages(reader: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut pages = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (title, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::format("expected title<TAB>wikitext", &line).at_line(i + 1))?;
        pages.push((title.to_string(), text.to_string()));
    }
    Ok(pages)
}

/// Inherited words that are not derived or compound, compared after NFC.
pub fn root_filter<'a>(
    inherited: impl IntoIterator<Item = &'a str>,
    derived_or_compound: impl IntoIterator<Item = &'a str>,
) -> BTreeSet<String> {
    let removed: BTreeSet<String> = derived_or_compound.into_iter().map(nfc).collect();
    inherited
        .into_iter()
        .map(nfc)
        .filter(|w| !removed.contains(w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(text: &str) -> Vec<Vec<String>> {
        parse_template(text).templates.into_iter().map(|t| t.parts).collect()
    }

    #[test]
    fn parses_compound_template() {
        let parsed = parse_template("{{compound|en|news|paper}}");
        assert_eq!(
            parsed.templates,
            [EtymTemplate {
                name: "compound".into(),
                language: "en".into(),
                parts: vec!["news".into(), "paper".into()],
                named: BTreeMap::new(),
            }]
        );
        assert_eq!(parse_template("Equivalent to {{compound|en|news|paper}}."), parsed);
        assert_eq!(parse_template("no templates here"), ParsedTemplates::default());
    }

    #[test]
    fn named_args_links_and_nesting() {
        let parsed = parse_template("{{af|en|[[basket]]|{{l|en|ball}}|pos=noun|t1=''a basket''}}");
        let t = &parsed.templates[0];
        assert_eq!(t.parts, ["basket", "ball"]);
        assert_eq!(t.named["pos"], "noun");
        assert_eq!(t.named["t1"], "a basket");
        assert_eq!(parts("{{compound|de|[[Haus|Haus]]|[[Tür]]}}"), [["Haus", "Tür"]]);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn deep_nesting_is_flagged() {
        let parsed = parse_template("{{compound|en|{{l|en|{{x|y}}news}}|paper}}");
        assert_eq!(parsed.templates[0].parts, ["news", "paper"]);
        assert_eq!(parsed.diagnostics.len(), 1);
    }

    #[test]
    fn unbalanced_braces_are_recoverable() {
        let parsed = parse_template("{{compound|en|a|b}} then {{broken|en|x");
        assert_eq!(parsed.templates.len(), 1);
        assert_eq!(parsed.diagnostics[0].offset, 25);
    }

    #[test]
    fn templates_without_language_are_ignored() {
        assert!(parse_template("{{PAGENAME}} {{-}} {{wikipedia|lang=en}}").templates.is_empty());
        assert!(is_language_code("ine-pro") && is_language_code("grc") && !is_language_code("EN"));
    }

    #[test]
    fn extracts_compounds_only() {
        let pages = vec![
            ("newspaper".to_string(), "From {{compound|en|news|paper}}.".to_string()),
            ("basketball".to_string(), "{{affix|en|basket|ball}}".to_string()),
            ("kindness".to_string(), "{{affix|en|kind|-ness}}".to_string()),
            ("Arbeitszimmer".to_string(), "{{compound|de|Arbeit|Zimmer}}".to_string()),
            ("empty".to_string(), "nothing".to_string()),
            ("sportsman".to_string(), "{{compound|en|sport|man}}".to_string()),
        ];
        let ex = extract_compounds(&pages, "en");
        let words: Vec<&str> = ex.dataset.word_entries().unwrap().iter().map(|e| e.word.as_str()).collect();
        assert_eq!(words, ["basketball", "newspaper"]);
        assert_eq!(ex.review.len(), 1);
        assert_eq!(ex.review[0].word, "sportsman");
        let cat = ex.dataset.word_entries().unwrap()[0].category.unwrap();
        assert_eq!(cat.code(), "001");
    }

    #[test]
    fn root_filter_removes_overlap() {
        let out = root_filter(["a", "b", "c"], ["b", "z"]);
        assert_eq!(out.into_iter().collect::<Vec<_>>(), ["a", "c"]);
        assert!(root_filter(["a"], ["a", "b"]).is_empty());
        // Composed and decomposed forms match.
        assert!(root_filter(["caf\u{e9}"], ["cafe\u{301}"]).is_empty());
    }

    #[test]
    fn reads_page_stream() {
        let pages = read_pages("a\t{{x}}\n\nb\tc\td\n".as_bytes()).unwrap();
        assert_eq!(pages[1], ("b".to_string(), "c\td".to_string()));
        assert!(read_pages("notab\n".as_bytes()).is_err());
    }
}
