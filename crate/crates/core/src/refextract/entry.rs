use once_cell::sync::Lazy;
use regex::Regex;
use thiserror::Error;

use super::kb::{normalize_key, JournalKb};
use super::section::leading_marker;
use crate::records::{MAX_YEAR, MIN_YEAR};

/// One bibliography entry with whatever structure could be recovered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CitationEntry {
    /// The entry exactly as it was handed to the parser.
    pub raw: String,
    pub marker: Option<String>,
    /// Canonical journal title from the knowledge base.
    pub journal: Option<String>,
    pub volume: Option<String>,
    pub page: Option<String>,
    pub year: Option<i32>,
    pub report_numbers: Vec<String>,
    pub url: Option<String>,
    /// Stored record this entry points at, once resolved.
    pub resolved_record_id: Option<String>,
}

impl CitationEntry {
    pub fn from_raw(raw: impl Into<String>) -> Self {
        CitationEntry {
            raw: raw.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("URL template needs {{{0}}} but the entry has none")]
    TemplateFieldMissing(String),
}

static URL: Lazy<Regex> = Lazy::new(|| Regex::new(r"https?://\S+").unwrap());
static OLD_ARXIV: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?:arXiv:)?\b([a-z]+(?:-[a-z]+)*(?:\.[A-Z]{2})?/\d{7})(?:v\d+)?\b").unwrap()
});
static NEW_ARXIV: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?:arXiv:)?\b(\d{4}\.\d{4,5})(?:v\d+)?\b").unwrap());
static INSTITUTIONAL: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"\b[A-Z]{2,}(?:-[A-Z0-9]+)+\b").unwrap());
static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\(?(\d{4})\)?[,.;:]*$").unwrap());
static PAGE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^(?:pp?\.)?(\d+)(?:(?:-|--|–)\d+)?[,.;:]*$").unwrap());

/// Blanks out `range` in `work`, keeping byte offsets stable.
fn blank(work: &mut String, start: usize, end: usize) {
    work.replace_range(start..end, &" ".repeat(end - start));
}

fn words_with_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn trim_token(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Recovers structured fields from a raw citation.
///
/// Fields are taken in order of reliability: explicit URLs, report
/// numbers (old and new arXiv forms, institutional codes), the last
/// plausible year, then the earliest journal alias in what remains (the
/// longest alias at that position), the volume after it and the first
/// page number after the volume. A URL is built from the knowledge base
/// template when journal, volume and page are all known.
pub fn parse_entry(raw: &str, kb: &JournalKb) -> CitationEntry {
    let mut entry = CitationEntry::from_raw(raw);
    let mut work = raw.to_string();

    if let Some((style, n, rest)) = leading_marker(raw) {
        entry.marker = Some(match style {
            super::section::MarkerStyle::Bracket => format!("[{n}]"),
            super::section::MarkerStyle::Dotted => format!("{n}."),
            super::section::MarkerStyle::Paren => format!("({n})"),
        });
        let cut = raw.len() - rest.len();
        blank(&mut work, 0, cut);
    }

    let urls: Vec<(usize, usize)> = URL.find_iter(&work).map(|m| (m.start(), m.end())).collect();
    for (i, &(s, e)) in urls.iter().enumerate() {
        if i == 0 {
            let url = work[s..e].trim_end_matches(['.', ',', ';', ')', ']']);
            entry.url = Some(url.to_string());
        }
        blank(&mut work, s, e);
    }

    for re in [&*OLD_ARXIV, &*NEW_ARXIV] {
        let found: Vec<(usize, usize, String)> = re
            .captures_iter(&work)
            .map(|c| {
                let m = c.get(0).unwrap();
                (m.start(), m.end(), c[1].to_string())
            })
            .collect();
        for (s, e, id) in found {
            if !entry.report_numbers.contains(&id) {
                entry.report_numbers.push(id);
            }
            blank(&mut work, s, e);
        }
    }
    let codes: Vec<(usize, usize)> = INSTITUTIONAL
        .find_iter(&work)
        .map(|m| (m.start(), m.end()))
        .collect();
    for (s, e) in codes {
        let code = work[s..e].to_string();
        if !entry.report_numbers.contains(&code) {
            entry.report_numbers.push(code);
        }
        blank(&mut work, s, e);
    }

    // Year: the last standalone plausible 4-digit number. Volumes can
    // have four digits too, so later wins.
    let year_hit = words_with_spans(&work).into_iter().rev().find_map(|(s, e)| {
        let caps = YEAR.captures(&work[s..e])?;
        let y: i32 = caps[1].parse().ok()?;
        (MIN_YEAR..=MAX_YEAR).contains(&y).then_some((s, e, y))
    });
    if let Some((s, e, y)) = year_hit {
        entry.year = Some(y);
        blank(&mut work, s, e);
    }

    let words = words_with_spans(&work);
    if let Some((journal, after)) = find_journal(&work, &words, kb) {
        entry.journal = Some(journal.to_string());
        let mut rest = words[after..].iter().map(|&(s, e)| &work[s..e]);
        if let Some(volume) = rest.by_ref().map(trim_token).find(|t| !t.is_empty()) {
            entry.volume = Some(volume.to_string());
            entry.page = rest.find_map(|t| PAGE.captures(t).map(|c| c[1].to_string()));
        }
    }

    if entry.url.is_none() && entry.journal.is_some() && entry.volume.is_some() && entry.page.is_some() {
        entry.url = build_url(&entry, kb).ok().flatten();
    }
    entry
}

/// Earliest word position where a journal alias starts, taking the
/// longest alias there. Positions followed by a volume-like token (one
/// containing a digit) are preferred; author initials such as "A. A."
/// otherwise shadow real journal names.
fn find_journal<'kb>(
    work: &str,
    words: &[(usize, usize)],
    kb: &'kb JournalKb,
) -> Option<(&'kb str, usize)> {
    let max_words = kb.max_alias_words();
    let mut fallback = None;
    for start in 0..words.len() {
        let longest = (1..=max_words.min(words.len() - start)).rev().find_map(|len| {
            let span = &work[words[start].0..words[start + len - 1].1];
            let span = span
                .trim_start_matches(['(', '"', '\''])
                .trim_end_matches([',', ';', ':', '"', '\'']);
            if normalize_key(span).is_empty() {
                return None;
            }
            kb.lookup(span).map(|e| (e.canonical_title.as_str(), start + len))
        });
        let Some((title, after)) = longest else { continue };
        let volume_like = words
            .get(after)
            .is_some_and(|&(s, e)| work[s..e].chars().any(|c| c.is_ascii_digit()));
        if volume_like {
            return Some((title, after));
        }
        fallback.get_or_insert((title, after));
    }
    fallback
}

/// URL of the cited work.
///
/// An explicit URL is returned unchanged. Otherwise the knowledge-base
/// template for the entry's journal is filled in from its fields; `None`
/// when there is no journal, volume, page or template.
pub fn build_url(entry: &CitationEntry, kb: &JournalKb) -> Result<Option<String>, UrlError> {
    if let Some(url) = &entry.url {
        return Ok(Some(url.clone()));
    }
    let (Some(journal), Some(_), Some(_)) = (&entry.journal, &entry.volume, &entry.page) else {
        return Ok(None);
    };
    let Some(template) = kb.entry(journal).and_then(|e| e.url_template.as_deref()) else {
        return Ok(None);
    };

    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}') else {
            out.push_str(&rest[open..]);
            rest = "";
            break;
        };
        let name = &rest[open + 1..open + close];
        let value = match name {
            "volume" => entry.volume.clone(),
            "page" => entry.page.clone(),
            "year" => entry.year.map(|y| y.to_string()),
            _ => None,
        };
        out.push_str(&value.ok_or_else(|| UrlError::TemplateFieldMissing(name.to_string()))?);
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    Ok(Some(out))
}
