//! Batch enrichment of bibliographic records.
//!
//! The crate is organised around the stages a repository runs when new
//! material arrives:
//!
//! - [`records`]: the record model, the on-disk record store, field queries
//!   and BibTeX export.
//! - [`taxonomy`]: controlled-vocabulary loading, phrase-matched keyword
//!   assignment (including composite key-chains) and keyword clustering.
//! - [`refextract`]: reference-section detection, entry segmentation and
//!   normalisation of citations against a journal knowledge base.
//! - [`citegraph`]: the record-to-record citation graph with citation
//!   counts, co-citation and a damped link rank.
//! - [`usage`]: access-log parsing, popularity reports and co-view
//!   recommendations.
//! - [`alerts`]: saved searches that fire on newly ingested records.
//!
//! [`cli`] wires these together behind the `biblioforge` binary.

pub mod alerts;
pub mod citegraph;
pub mod cli;
pub mod config;
pub mod records;
pub mod refextract;
pub mod taxonomy;
pub mod tsv;
pub mod usage;

pub use records::{BibRecord, FieldQuery, RecordStore};
pub use refextract::{CitationEntry, JournalKb};
pub use taxonomy::{KeywordAssignment, Taxonomy};
