use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;
use thiserror::Error;

/// Default heading patterns: a whole line reading `References`,
/// `Bibliography` or `Reference list`, optionally numbered.
pub const DEFAULT_HEADING_PATTERNS: &[&str] = &[
    r"(?i)^\s*(?:(?:\d+(?:\.\d+)*|[ivxlc]+)\.?\s+)?(?:references|bibliography|reference\s+list)\s*:?\s*$",
];

/// Minimum run of numbered lines accepted when no heading is found.
pub const DEFAULT_FALLBACK_MIN_LINES: usize = 3;

static BRACKET_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\[(\d{1,4})\]\s*").unwrap());
static DOTTED_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*(\d{1,4})\.(?:\s+|$)").unwrap());
static PAREN_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\((\d{1,4})\)\s*").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("no citation entries found in the reference section")]
    EmptySection,
    #[error("invalid heading pattern {pattern:?}: {message}")]
    BadPattern { pattern: String, message: String },
}

/// Citation marker styles recognised at line starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerStyle {
    /// `[12]`
    Bracket,
    /// `12.`
    Dotted,
    /// `(12)`
    Paren,
}

impl MarkerStyle {
    const ALL: [MarkerStyle; 3] = [MarkerStyle::Bracket, MarkerStyle::Dotted, MarkerStyle::Paren];

    fn regex(self) -> &'static Regex {
        match self {
            MarkerStyle::Bracket => &BRACKET_MARKER,
            MarkerStyle::Dotted => &DOTTED_MARKER,
            MarkerStyle::Paren => &PAREN_MARKER,
        }
    }

    /// Marker number and the text after the marker.
    pub fn strip(self, line: &str) -> Option<(u32, &str)> {
        let caps = self.regex().captures(line)?;
        let number = caps[1].parse().ok()?;
        Some((number, &line[caps.get(0).unwrap().end()..]))
    }

    fn render(self, n: u32) -> String {
        match self {
            MarkerStyle::Bracket => format!("[{n}]"),
            MarkerStyle::Dotted => format!("{n}."),
            MarkerStyle::Paren => format!("({n})"),
        }
    }
}

/// Marker found at the start of `text` in any style.
pub fn leading_marker(text: &str) -> Option<(MarkerStyle, u32, &str)> {
    MarkerStyle::ALL
        .iter()
        .find_map(|s| s.strip(text).map(|(n, rest)| (*s, n, rest)))
}

/// One citation entry cut out of a reference section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedEntry {
    /// The marker as written in canonical form, e.g. `[3]`.
    pub marker: Option<String>,
    pub number: Option<u32>,
    /// Entry text without its marker; wrapped lines joined by one space.
    pub text: String,
}

/// Finds and splits reference sections.
#[derive(Debug, Clone)]
pub struct SectionLocator {
    headings: Vec<Regex>,
    fallback_min_lines: usize,
}

impl Default for SectionLocator {
    fn default() -> Self {
        SectionLocator::new(DEFAULT_HEADING_PATTERNS, DEFAULT_FALLBACK_MIN_LINES)
            .expect("default patterns compile")
    }
}

fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        (start, raw.trim_end_matches(['\n', '\r']))
    })
}

impl SectionLocator {
    pub fn new<S: AsRef<str>>(patterns: &[S], fallback_min_lines: usize) -> Result<Self, SectionError> {
        let headings = patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref()).map_err(|e| SectionError::BadPattern {
                    pattern: p.as_ref().to_string(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(SectionLocator {
            headings,
            fallback_min_lines: fallback_min_lines.max(1),
        })
    }

    fn is_heading(&self, line: &str) -> bool {
        self.headings.iter().any(|re| re.is_match(line))
    }

    /// Byte span of the reference section: from the last heading line to
    /// the end of the text, or, without a heading, from the start of the
    /// last run of numbered lines long enough to count.
    pub fn locate(&self, text: &str) -> Option<Range<usize>> {
        let lines: Vec<(usize, &str)> = lines_with_offsets(text).collect();
        if let Some(&(start, _)) = lines.iter().rev().find(|(_, l)| self.is_heading(l)) {
            return Some(start..text.len());
        }

        let numbered = |l: &str| BRACKET_MARKER.is_match(l) || DOTTED_MARKER.is_match(l);
        let mut best: Option<usize> = None;
        let mut run_start = None;
        let mut run_len = 0;
        for &(offset, line) in lines.iter().chain(std::iter::once(&(text.len(), ""))) {
            if !line.is_empty() && numbered(line) {
                if run_len == 0 {
                    run_start = Some(offset);
                }
                run_len += 1;
            } else {
                if run_len >= self.fallback_min_lines {
                    best = run_start;
                }
                run_len = 0;
            }
        }
        best.map(|start| start..text.len())
    }

    /// Splits a reference section into entries.
    ///
    /// The marker style used by most line starts governs. Entries must
    /// carry increasing numbers: a repeated number is read as wrapped text
    /// and a smaller one ends the section. Without markers, entries are
    /// separated by blank lines. A leading heading line is dropped.
    pub fn segment(&self, section: &str) -> Result<Vec<SegmentedEntry>, SectionError> {
        let mut lines: Vec<&str> = section.lines().collect();
        if let Some(first) = lines.iter().position(|l| !l.trim().is_empty()) {
            if self.is_heading(lines[first]) {
                lines.drain(..=first);
            }
        }

        let votes = |style: MarkerStyle| lines.iter().filter(|l| style.strip(l).is_some()).count();
        let (style, count) = MarkerStyle::ALL
            .iter()
            .map(|s| (*s, votes(*s)))
            .fold((MarkerStyle::Bracket, 0), |best, cur| if cur.1 > best.1 { cur } else { best });

        let entries = if count == 0 {
            split_blocks(&lines)
        } else {
            split_marked(&lines, style)
        };
        if entries.is_empty() {
            return Err(SectionError::EmptySection);
        }
        Ok(entries)
    }
}

fn append(buf: &mut String, piece: &str) {
    let piece = piece.trim();
    if piece.is_empty() {
        return;
    }
    if !buf.is_empty() {
        buf.push(' ');
    }
    buf.push_str(piece);
}

fn split_marked(lines: &[&str], style: MarkerStyle) -> Vec<SegmentedEntry> {
    let mut out = Vec::new();
    let mut current: Option<SegmentedEntry> = None;
    let mut last: Option<u32> = None;
    for line in lines {
        match style.strip(line) {
            Some((n, rest)) if last.is_none_or(|prev| n > prev) => {
                out.extend(current.take());
                let mut text = String::new();
                append(&mut text, rest);
                current = Some(SegmentedEntry {
                    marker: Some(style.render(n)),
                    number: Some(n),
                    text,
                });
                last = Some(n);
            }
            Some((n, _)) if last.is_some_and(|prev| n < prev) => break,
            _ => {
                if let Some(entry) = current.as_mut() {
                    append(&mut entry.text, line);
                }
            }
        }
    }
    out.extend(current);
    out.retain(|e| !e.text.is_empty());
    out
}

fn split_blocks(lines: &[&str]) -> Vec<SegmentedEntry> {
    let mut out = Vec::new();
    let mut text = String::new();
    for line in lines.iter().chain(std::iter::once(&"")) {
        if line.trim().is_empty() {
            if !text.is_empty() {
                out.push(SegmentedEntry {
                    marker: None,
                    number: None,
                    text: std::mem::take(&mut text),
                });
            }
        } else {
            append(&mut text, line);
        }
    }
    out
}

/// [`SectionLocator::locate`] with the default patterns.
pub fn locate_reference_section(fulltext: &str) -> Option<Range<usize>> {
    SectionLocator::default().locate(fulltext)
}

/// [`SectionLocator::segment`] with the default patterns.
pub fn segment_entries(section: &str) -> Result<Vec<SegmentedEntry>, SectionError> {
    SectionLocator::default().segment(section)
}
