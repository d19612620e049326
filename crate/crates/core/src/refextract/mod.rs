//! Reference extraction: find the bibliography in a full text, split it
//! into entries and normalise each entry against a journal knowledge base.

mod entry;
mod kb;
mod section;
pub mod sidecar;

pub use entry::{build_url, parse_entry, CitationEntry, UrlError};
pub use kb::{normalize_journal, normalize_key, JournalEntry, JournalKb, KbError};
pub use section::{
    leading_marker, locate_reference_section, segment_entries, MarkerStyle, SectionError,
    SectionLocator, SegmentedEntry, DEFAULT_FALLBACK_MIN_LINES, DEFAULT_HEADING_PATTERNS,
};

/// Runs all three steps over one full text. A text without a reference
/// section, or with an empty one, yields no entries.
pub fn extract_references(
    fulltext: &str,
    locator: &SectionLocator,
    kb: &JournalKb,
) -> Vec<CitationEntry> {
    let Some(span) = locator.locate(fulltext) else {
        return Vec::new();
    };
    let Ok(segments) = locator.segment(&fulltext[span]) else {
        return Vec::new();
    };
    segments
        .into_iter()
        .map(|seg| match &seg.marker {
            // raw keeps the marker as written in canonical form
            Some(marker) => parse_entry(&format!("{marker} {}", seg.text), kb),
            None => parse_entry(&seg.text, kb),
        })
        .collect()
}
