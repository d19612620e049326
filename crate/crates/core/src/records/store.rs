use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use tempfile::NamedTempFile;
use thiserror::Error;

use super::format::{parse_record, serialize_record, RecordError};
use super::{BibRecord, ValidationError};
use crate::refextract::sidecar;

pub const RECORD_EXT: &str = "rec";
pub const REFS_SUFFIX: &str = ".refs.tsv";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage failure at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt record file {path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: RecordError,
    },
    #[error("corrupt reference sidecar {path}: {reason}")]
    CorruptSidecar { path: PathBuf, reason: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

fn storage(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Storage {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    Updated,
    Unchanged,
}

/// A directory holding one `<record_id>.rec` file per record, plus an
/// optional `<record_id>.refs.tsv` with parsed references.
///
/// Readers may run concurrently; there must be a single writer. Each file
/// is replaced by write-to-temp-then-rename.
#[derive(Debug, Clone)]
pub struct RecordStore {
    dir: PathBuf,
}

pub fn unix_now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

impl RecordStore {
    /// Opens the store at `dir`, creating the directory if needed.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(storage(&dir))?;
        Ok(RecordStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.{RECORD_EXT}"))
    }

    pub fn refs_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{REFS_SUFFIX}"))
    }

    /// Record ids in ascending order.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(storage(&self.dir))? {
            let entry = entry.map_err(storage(&self.dir))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some(RECORD_EXT) {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if !stem.starts_with('.') {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn len(&self) -> Result<usize, StoreError> {
        Ok(self.ids()?.len())
    }

    pub fn is_empty(&self) -> Result<bool, StoreError> {
        Ok(self.len()? == 0)
    }

    pub fn get(&self, id: &str) -> Result<Option<BibRecord>, StoreError> {
        let path = self.record_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(storage(&path)(e)),
        };
        let mut record = parse_record(&text)
            .map_err(|source| StoreError::Corrupt {
                path: path.clone(),
                source,
            })?
            .record;
        let refs = self.refs_path(id);
        match fs::read_to_string(&refs) {
            Ok(t) => {
                record.references = sidecar::read(&t).map_err(|reason| {
                    StoreError::CorruptSidecar {
                        path: refs.clone(),
                        reason,
                    }
                })?;
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(storage(&refs)(e)),
        }
        Ok(Some(record))
    }

    /// All records, ordered by id.
    pub fn load_all(&self) -> Result<Vec<BibRecord>, StoreError> {
        let mut out = Vec::new();
        for id in self.ids()? {
            if let Some(r) = self.get(&id)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Inserts or replaces a record, stamping it with the current time when
    /// it carries no ingest time.
    pub fn upsert(&self, record: BibRecord) -> Result<UpsertOutcome, StoreError> {
        self.upsert_at(record, unix_now())
    }

    /// Last writer wins on `record_id`. A record without an ingest time
    /// whose content equals the stored copy keeps the stored time, so
    /// re-ingesting unchanged input leaves the store byte-identical.
    pub fn upsert_at(&self, mut record: BibRecord, now: i64) -> Result<UpsertOutcome, StoreError> {
        record.validate()?;
        let existing = self.get(&record.record_id)?;
        if record.ingest_time.is_none() {
            record.ingest_time = match &existing {
                Some(old) if old.same_content(&record) => old.ingest_time,
                _ => Some(now),
            };
        }
        let outcome = match &existing {
            None => UpsertOutcome::Inserted,
            Some(old) if *old == record => return Ok(UpsertOutcome::Unchanged),
            Some(_) => UpsertOutcome::Updated,
        };
        self.write(&record)?;
        Ok(outcome)
    }

    /// Writes enrichment results (keywords, references) back without
    /// touching the ingest time, so enrichment never re-triggers alerts.
    pub fn save(&self, record: &BibRecord) -> Result<(), StoreError> {
        record.validate()?;
        let mut record = record.clone();
        if record.ingest_time.is_none() {
            let existing = self.get(&record.record_id)?;
            record.ingest_time = Some(existing.and_then(|r| r.ingest_time).unwrap_or_else(unix_now));
        }
        if self.get(&record.record_id)?.as_ref() == Some(&record) {
            return Ok(());
        }
        self.write(&record)
    }

    fn write(&self, record: &BibRecord) -> Result<(), StoreError> {
        let refs = self.refs_path(&record.record_id);
        if record.references.is_empty() {
            match fs::remove_file(&refs) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(storage(&refs)(e)),
            }
        } else {
            atomic_write(&self.dir, &refs, sidecar::write(&record.references).as_bytes())?;
        }
        let path = self.record_path(&record.record_id);
        atomic_write(&self.dir, &path, serialize_record(record).as_bytes())
    }
}

pub(crate) fn atomic_write(dir: &Path, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut tmp = NamedTempFile::new_in(dir).map_err(storage(dir))?;
    tmp.write_all(bytes).map_err(storage(path))?;
    tmp.as_file().sync_all().map_err(storage(path))?;
    tmp.persist(path).map_err(|e| storage(path)(e.error))?;
    Ok(())
}
