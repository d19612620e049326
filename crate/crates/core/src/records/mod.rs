//! Bibliographic records: the data model, the line-oriented record format,
//! the directory-backed store, field queries and BibTeX export.

mod bibtex;
mod format;
mod query;
mod store;

pub use bibtex::export_bibtex;
pub use format::{parse_record, parse_records, serialize_record, RecordError, RecordParse};
pub use query::{match_query, Clause, ClauseValue, FieldQuery, MatchOp, QueryError, QueryField};
pub use store::{unix_now, RecordStore, StoreError, UpsertOutcome};
pub(crate) use store::atomic_write;

use thiserror::Error;

use crate::refextract::CitationEntry;
use crate::taxonomy::KeywordAssignment;

pub const MIN_YEAR: i32 = 1800;
pub const MAX_YEAR: i32 = 2100;

/// One bibliographic item.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BibRecord {
    pub record_id: String,
    pub title: String,
    /// Author names in input order.
    pub authors: Vec<String>,
    pub year: Option<i32>,
    pub journal: Option<String>,
    pub volume: Option<String>,
    pub page: Option<String>,
    /// arXiv identifiers, institutional report codes and the like.
    pub report_numbers: Vec<String>,
    /// Path of the plain-text full text, relative to the store directory.
    pub fulltext_path: Option<String>,
    pub keywords: Vec<KeywordAssignment>,
    pub references: Vec<CitationEntry>,
    /// Seconds since the epoch. Always set once the record is in a store.
    pub ingest_time: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("record id is empty")]
    EmptyId,
    #[error("record id {0:?} is not usable as a file name")]
    UnsafeId(String),
    #[error("record {0}: title is empty")]
    EmptyTitle(String),
    #[error("record {id}: year {year} outside [{MIN_YEAR}, {MAX_YEAR}]")]
    YearOutOfRange { id: String, year: i32 },
}

impl BibRecord {
    pub fn new(record_id: impl Into<String>, title: impl Into<String>) -> Self {
        BibRecord {
            record_id: record_id.into(),
            title: title.into(),
            ..Default::default()
        }
    }

    /// Checks the record invariants that a store enforces on write.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let id = &self.record_id;
        if id.is_empty() {
            return Err(ValidationError::EmptyId);
        }
        let unsafe_char = |c: char| c == '/' || c == '\\' || c.is_whitespace() || c.is_control();
        if id.starts_with('.') || id.chars().any(unsafe_char) {
            return Err(ValidationError::UnsafeId(id.clone()));
        }
        if self.title.trim().is_empty() {
            return Err(ValidationError::EmptyTitle(id.clone()));
        }
        if let Some(year) = self.year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
                return Err(ValidationError::YearOutOfRange { id: id.clone(), year });
            }
        }
        Ok(())
    }

    /// True when both records carry the same content apart from the
    /// ingest timestamp.
    pub fn same_content(&self, other: &BibRecord) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.ingest_time = None;
        b.ingest_time = None;
        a == b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_bounds_are_inclusive() {
        let mut r = BibRecord::new("r1", "T");
        r.year = Some(1800);
        assert!(r.validate().is_ok());
        r.year = Some(2100);
        assert!(r.validate().is_ok());
        r.year = Some(1799);
        assert!(matches!(r.validate(), Err(ValidationError::YearOutOfRange { .. })));
    }

    #[test]
    fn ids_must_be_file_safe() {
        assert_eq!(BibRecord::new("", "T").validate(), Err(ValidationError::EmptyId));
        for bad in ["a/b", "..", ".hidden", "a b"] {
            assert!(matches!(
                BibRecord::new(bad, "T").validate(),
                Err(ValidationError::UnsafeId(_))
            ));
        }
    }
}
