//! The record file format.
//!
//! UTF-8 text, one `key: value` field per line, records separated by a line
//! holding only `%%`. `author`, `report_number`, `keyword` and
//! `reference_raw` may repeat. A `keyword` value carries tab-separated
//! `term_id`, label, occurrence and, for composites, `a,b` component counts.

use thiserror::Error;

use super::{BibRecord, ValidationError};
use crate::refextract::CitationEntry;
use crate::taxonomy::KeywordAssignment;

pub const RECORD_SEPARATOR: &str = "%%";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("missing mandatory field `{0}`")]
    MissingField(&'static str),
    #[error("line {0}: expected `key: value`")]
    MalformedLine(usize),
    #[error("line {line}: bad value for `{key}`: {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// A parsed record plus the keys that were ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordParse {
    pub record: BibRecord,
    pub unknown_keys: Vec<String>,
}

impl RecordParse {
    pub fn warning_count(&self) -> usize {
        self.unknown_keys.len()
    }
}

/// Parses one record block.
pub fn parse_record(raw: &str) -> Result<RecordParse, RecordError> {
    parse_block(raw, 1)
}

/// Parses a file holding any number of `%%`-separated record blocks.
/// Blocks consisting only of blank lines are skipped.
pub fn parse_records(text: &str) -> Result<Vec<RecordParse>, RecordError> {
    let mut out = Vec::new();
    let mut block = String::new();
    let mut block_start = 1;
    for (idx, line) in text.lines().enumerate() {
        if line.trim_end() == RECORD_SEPARATOR {
            if !block.trim().is_empty() {
                out.push(parse_block(&block, block_start)?);
            }
            block.clear();
            block_start = idx + 2;
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    if !block.trim().is_empty() {
        out.push(parse_block(&block, block_start)?);
    }
    Ok(out)
}

fn parse_block(raw: &str, first_line: usize) -> Result<RecordParse, RecordError> {
    let mut record = BibRecord::default();
    let mut has_id = false;
    let mut has_title = false;
    let mut unknown_keys = Vec::new();

    for (idx, line) in raw.lines().enumerate() {
        let line_no = first_line + idx;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or(RecordError::MalformedLine(line_no))?;
        let key = key.trim();
        let value = value.trim();
        let invalid = |reason: String| RecordError::InvalidValue {
            line: line_no,
            key: key.to_string(),
            reason,
        };
        match key {
            "id" => {
                record.record_id = value.to_string();
                has_id = true;
            }
            "title" => {
                record.title = value.to_string();
                has_title = true;
            }
            "author" => record.authors.push(value.to_string()),
            "year" => {
                record.year = Some(value.parse().map_err(|e| invalid(format!("{e}")))?);
            }
            "journal" => record.journal = Some(value.to_string()),
            "volume" => record.volume = Some(value.to_string()),
            "page" => record.page = Some(value.to_string()),
            "report_number" => record.report_numbers.push(value.to_string()),
            "fulltext" => record.fulltext_path = Some(value.to_string()),
            "ingest_time" => {
                record.ingest_time = Some(value.parse().map_err(|e| invalid(format!("{e}")))?);
            }
            "keyword" => record.keywords.push(parse_keyword(value).map_err(invalid)?),
            "reference_raw" => {
                if value.is_empty() {
                    return Err(invalid("empty reference".into()));
                }
                record.references.push(CitationEntry::from_raw(value));
            }
            other => unknown_keys.push(other.to_string()),
        }
    }

    if !has_id || record.record_id.is_empty() {
        return Err(RecordError::MissingField("id"));
    }
    if !has_title || record.title.is_empty() {
        return Err(RecordError::MissingField("title"));
    }
    record.validate()?;
    Ok(RecordParse {
        record,
        unknown_keys,
    })
}

fn parse_keyword(value: &str) -> Result<KeywordAssignment, String> {
    let parts: Vec<&str> = value.split('\t').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!("expected 3 or 4 tab-separated parts, got {}", parts.len()));
    }
    let occurrence = parts[2]
        .parse()
        .map_err(|e| format!("occurrence: {e}"))?;
    let component_counts = match parts.get(3) {
        None => None,
        Some(pair) => {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| "component counts must be `a,b`".to_string())?;
            let a = a.trim().parse().map_err(|e| format!("component count: {e}"))?;
            let b = b.trim().parse().map_err(|e| format!("component count: {e}"))?;
            Some((a, b))
        }
    };
    Ok(KeywordAssignment {
        term_id: parts[0].to_string(),
        display_label: parts[1].to_string(),
        occurrence,
        component_counts,
    })
}

/// Renders a record as one block, without the trailing separator.
///
/// Only the raw text of references is written here; parsed citation
/// fields live in the store's `.refs.tsv` sidecar.
pub fn serialize_record(record: &BibRecord) -> String {
    let mut out = String::new();
    let mut field = |key: &str, value: &str| {
        out.push_str(key);
        out.push_str(": ");
        out.push_str(value);
        out.push('\n');
    };
    field("id", &record.record_id);
    field("title", &record.title);
    for author in &record.authors {
        field("author", author);
    }
    if let Some(year) = record.year {
        field("year", &year.to_string());
    }
    if let Some(journal) = &record.journal {
        field("journal", journal);
    }
    if let Some(volume) = &record.volume {
        field("volume", volume);
    }
    if let Some(page) = &record.page {
        field("page", page);
    }
    for rn in &record.report_numbers {
        field("report_number", rn);
    }
    if let Some(path) = &record.fulltext_path {
        field("fulltext", path);
    }
    for kw in &record.keywords {
        let mut value = format!("{}\t{}\t{}", kw.term_id, kw.display_label, kw.occurrence);
        if let Some((a, b)) = kw.component_counts {
            value.push_str(&format!("\t{a},{b}"));
        }
        field("keyword", &value);
    }
    for reference in &record.references {
        field("reference_raw", &reference.raw);
    }
    if let Some(t) = record.ingest_time {
        field("ingest_time", &t.to_string());
    }
    out
}
