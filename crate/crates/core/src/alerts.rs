//! Saved searches that notify their owners about newly ingested records.
//!
//! A subscription fires for records whose ingest time falls after its
//! last run and up to the batch time. Subscriptions live one per file in
//! an alert directory:
//!
//! ```text
//! alert_id: a1
//! owner: okafor
//! clause: author:contains:lindqvist
//! created: 1136073600
//! last_run: 1136073600
//! ```
//!
//! Each batch writes `notifications/<batch_ts>/<alert_id>.tsv` with one
//! `record_id<TAB>title` line per matching record.

use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::records::atomic_write;
use crate::records::{match_query, BibRecord, FieldQuery, QueryError, StoreError};
use crate::tsv::escape;

pub const ALERT_EXT: &str = "alert";
const MANIFEST: &str = "manifest.tsv";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlertSubscription {
    pub alert_id: String,
    pub query: FieldQuery,
    pub owner: String,
    pub created: i64,
    pub last_run: i64,
}

/// Records one subscription matched in one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Notification {
    pub alert_id: String,
    pub record_ids: Vec<String>,
}

#[derive(Debug, Error)]
pub enum AlertError {
    #[error("storage failure at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt subscription {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn storage(path: &Path) -> impl FnOnce(io::Error) -> AlertError + '_ {
    move |source| AlertError::Storage {
        path: path.to_path_buf(),
        source,
    }
}

/// Matches records against subscriptions for one batch ending at `now`.
///
/// A record is reported to a subscription when
/// `last_run < ingest_time <= now` and the query matches. Every
/// subscription's `last_run` then moves to `now` (never backwards).
/// Notifications are ordered by alert id, record ids ascending;
/// subscriptions without matches produce none.
pub fn run_alert_batch(
    records: &[BibRecord],
    subscriptions: &mut [AlertSubscription],
    now: i64,
) -> Vec<Notification> {
    let mut out = Vec::new();
    for sub in subscriptions.iter_mut() {
        let mut ids: Vec<String> = records
            .iter()
            .filter(|r| {
                r.ingest_time
                    .is_some_and(|t| sub.last_run < t && t <= now)
            })
            .filter(|r| match_query(&sub.query, r))
            .map(|r| r.record_id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        if !ids.is_empty() {
            out.push(Notification {
                alert_id: sub.alert_id.clone(),
                record_ids: ids,
            });
        }
        sub.last_run = sub.last_run.max(now);
    }
    out.sort_by(|a, b| a.alert_id.cmp(&b.alert_id));
    out
}

pub fn serialize_subscription(sub: &AlertSubscription) -> String {
    let mut out = format!("alert_id: {}\nowner: {}\n", sub.alert_id, sub.owner);
    for clause in sub.query.clauses() {
        out.push_str(&format!("clause: {clause}\n"));
    }
    out.push_str(&format!("created: {}\nlast_run: {}\n", sub.created, sub.last_run));
    out
}

pub fn parse_subscription(text: &str) -> Result<AlertSubscription, String> {
    let mut alert_id = None;
    let mut owner = None;
    let mut clauses = Vec::new();
    let mut created = None;
    let mut last_run = None;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `key: value`", idx + 1))?;
        let value = value.trim();
        let int = |v: &str| v.parse::<i64>().map_err(|e| format!("line {}: {e}", idx + 1));
        match key.trim() {
            "alert_id" => alert_id = Some(value.to_string()),
            "owner" => owner = Some(value.to_string()),
            "clause" => clauses.push(value.parse().map_err(|e| format!("line {}: {e}", idx + 1))?),
            "created" => created = Some(int(value)?),
            "last_run" => last_run = Some(int(value)?),
            _ => {}
        }
    }
    let query = FieldQuery::new(clauses).map_err(|e| e.to_string())?;
    let created = created.ok_or("missing created")?;
    let sub = AlertSubscription {
        alert_id: alert_id.filter(|s| !s.is_empty()).ok_or("missing alert_id")?,
        owner: owner.unwrap_or_default(),
        query,
        created,
        last_run: last_run.unwrap_or(created),
    };
    if sub.last_run < sub.created {
        return Err("last_run precedes created".into());
    }
    Ok(sub)
}

/// Outcome of a persisted batch run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchOutcome {
    pub notifications: Vec<Notification>,
    /// Directory holding this batch's notification files, if any fired.
    pub batch_dir: Option<PathBuf>,
}

/// Directory of subscription files.
///
/// Registration and batch runs take an exclusive lock on the directory,
/// so only one batch runs at a time.
#[derive(Debug, Clone)]
pub struct AlertStore {
    dir: PathBuf,
}

impl AlertStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, AlertError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(storage(&dir))?;
        Ok(AlertStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> Result<File, AlertError> {
        let path = self.dir.join(LOCK_FILE);
        let file = File::create(&path).map_err(storage(&path))?;
        file.lock().map_err(storage(&path))?;
        Ok(file)
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.{ALERT_EXT}"))
    }

    pub fn get(&self, id: &str) -> Result<Option<AlertSubscription>, AlertError> {
        let path = self.path_of(id);
        match fs::read_to_string(&path) {
            Ok(text) => parse_subscription(&text)
                .map(Some)
                .map_err(|reason| AlertError::Corrupt { path, reason }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(storage(&path)(e)),
        }
    }

    /// All subscriptions, ordered by id.
    pub fn list(&self) -> Result<Vec<AlertSubscription>, AlertError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(storage(&self.dir))? {
            let path = entry.map_err(storage(&self.dir))?.path();
            if path.extension().and_then(|e| e.to_str()) == Some(ALERT_EXT) {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        let mut out = Vec::new();
        for id in ids {
            out.extend(self.get(&id)?);
        }
        Ok(out)
    }

    fn save(&self, sub: &AlertSubscription) -> Result<(), AlertError> {
        atomic_write(&self.dir, &self.path_of(&sub.alert_id), serialize_subscription(sub).as_bytes())?;
        Ok(())
    }

    /// Persists a new subscription with a fresh id; `created` and
    /// `last_run` are both `now`.
    pub fn register(&self, query: FieldQuery, owner: &str, now: i64) -> Result<AlertSubscription, AlertError> {
        let _guard = self.lock()?;
        let next = self
            .list()?
            .iter()
            .filter_map(|s| s.alert_id.strip_prefix('a')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        let sub = AlertSubscription {
            alert_id: format!("a{next}"),
            query,
            owner: owner.to_string(),
            created: now,
            last_run: now,
        };
        self.save(&sub)?;
        Ok(sub)
    }

    /// Runs one batch and persists its effects.
    ///
    /// Notification files are staged and renamed into place as one
    /// directory, together with a manifest naming every subscription the
    /// batch covered; subscription files are updated afterwards. A batch
    /// directory that exists without the matching `last_run` updates (a
    /// crash between the two steps) is rolled forward at the start of the
    /// next run, so a record is never notified twice.
    pub fn run_batch(
        &self,
        records: &[BibRecord],
        notifications_dir: &Path,
        now: i64,
    ) -> Result<BatchOutcome, AlertError> {
        let _guard = self.lock()?;
        fs::create_dir_all(notifications_dir).map_err(storage(notifications_dir))?;
        self.recover(notifications_dir)?;

        let mut subs = self.list()?;
        let notifications = run_alert_batch(records, &mut subs, now);

        let batch_dir = if notifications.is_empty() {
            None
        } else {
            Some(self.commit_notifications(records, &subs, &notifications, notifications_dir, now)?)
        };
        for sub in &subs {
            self.save(sub)?;
        }
        Ok(BatchOutcome {
            notifications,
            batch_dir,
        })
    }

    fn commit_notifications(
        &self,
        records: &[BibRecord],
        subs: &[AlertSubscription],
        notifications: &[Notification],
        notifications_dir: &Path,
        now: i64,
    ) -> Result<PathBuf, AlertError> {
        let staging = notifications_dir.join(format!(".staging-{now}"));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(storage(&staging))?;
        }
        fs::create_dir_all(&staging).map_err(storage(&staging))?;
        for n in notifications {
            let mut body = String::new();
            for id in &n.record_ids {
                let title = records
                    .iter()
                    .find(|r| &r.record_id == id)
                    .map(|r| r.title.as_str())
                    .unwrap_or("");
                body.push_str(&format!("{}\t{}\n", escape(id), escape(title)));
            }
            let path = staging.join(format!("{}.tsv", n.alert_id));
            fs::write(&path, body).map_err(storage(&path))?;
        }
        let mut manifest = format!("#batch\t{now}\n");
        for sub in subs {
            manifest.push_str(&sub.alert_id);
            manifest.push('\n');
        }
        let path = staging.join(MANIFEST);
        fs::write(&path, manifest).map_err(storage(&path))?;

        let mut target = notifications_dir.join(now.to_string());
        let mut n = 1;
        while target.exists() {
            target = notifications_dir.join(format!("{now}-{n}"));
            n += 1;
        }
        fs::rename(&staging, &target).map_err(storage(&target))?;
        Ok(target)
    }

    fn recover(&self, notifications_dir: &Path) -> Result<(), AlertError> {
        for entry in fs::read_dir(notifications_dir).map_err(storage(notifications_dir))? {
            let dir = entry.map_err(storage(notifications_dir))?.path();
            if dir.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.')) {
                // abandoned staging area: its batch never committed
                fs::remove_dir_all(&dir).map_err(storage(&dir))?;
                continue;
            }
            let Ok(manifest) = fs::read_to_string(dir.join(MANIFEST)) else {
                continue;
            };
            let mut lines = manifest.lines();
            let Some(batch_now) = lines
                .next()
                .and_then(|l| l.strip_prefix("#batch\t"))
                .and_then(|t| t.parse::<i64>().ok())
            else {
                continue;
            };
            for id in lines {
                if let Some(mut sub) = self.get(id)? {
                    if sub.last_run < batch_now {
                        log::warn!("rolling alert {id} forward to committed batch {batch_now}");
                        sub.last_run = batch_now;
                        self.save(&sub)?;
                    }
                }
            }
        }
        Ok(())
    }
}
