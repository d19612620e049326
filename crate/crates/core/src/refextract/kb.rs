use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read knowledge base: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("alias {alias:?} maps to both {first:?} and {second:?}")]
    DuplicateAlias {
        alias: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalEntry {
    pub canonical_title: String,
    pub aliases: Vec<String>,
    /// Publisher URL pattern with `{volume}`, `{page}` and `{year}`
    /// placeholders.
    pub url_template: Option<String>,
}

/// Journal title knowledge base: alternative forms to canonical titles.
#[derive(Debug, Clone, Default)]
pub struct JournalKb {
    entries: Vec<JournalEntry>,
    alias_index: HashMap<String, usize>,
    max_alias_words: usize,
}

/// Lookup key for a journal name: uppercase, with periods and ampersands
/// dropped and whitespace collapsed.
pub fn normalize_key(text: &str) -> String {
    text.to_uppercase()
        .replace(['.', '&'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

impl JournalKb {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, KbError> {
        JournalKb::parse(&fs::read_to_string(path)?)
    }

    /// Parses the three-column TSV form: canonical title, `;`-separated
    /// aliases, optional URL template. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, KbError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() > 3 {
                return Err(KbError::Syntax {
                    line: idx + 1,
                    message: format!("expected at most 3 columns, got {}", cols.len()),
                });
            }
            let canonical = cols[0].trim();
            if canonical.is_empty() {
                return Err(KbError::Syntax {
                    line: idx + 1,
                    message: "empty canonical title".into(),
                });
            }
            let aliases = cols
                .get(1)
                .map(|a| {
                    a.split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            let url_template = cols
                .get(2)
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(String::from);
            entries.push(JournalEntry {
                canonical_title: canonical.to_string(),
                aliases,
                url_template,
            });
        }
        JournalKb::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<JournalEntry>) -> Result<Self, KbError> {
        let mut alias_index: HashMap<String, usize> = HashMap::new();
        let mut max_alias_words = 0;
        for (idx, entry) in entries.iter().enumerate() {
            for form in std::iter::once(&entry.canonical_title).chain(&entry.aliases) {
                let key = normalize_key(form);
                if key.is_empty() {
                    continue;
                }
                max_alias_words = max_alias_words.max(key.split(' ').count());
                if let Some(&prev) = alias_index.get(&key) {
                    if entries[prev].canonical_title != entry.canonical_title {
                        return Err(KbError::DuplicateAlias {
                            alias: form.clone(),
                            first: entries[prev].canonical_title.clone(),
                            second: entry.canonical_title.clone(),
                        });
                    }
                    continue;
                }
                alias_index.insert(key, idx);
            }
        }
        Ok(JournalKb {
            entries,
            alias_index,
            max_alias_words,
        })
    }

    pub fn entries(&self) -> &[JournalEntry] {
        &self.entries
    }

    pub fn entry(&self, canonical_title: &str) -> Option<&JournalEntry> {
        self.lookup(canonical_title)
            .filter(|e| e.canonical_title == canonical_title)
    }

    pub(crate) fn lookup(&self, text: &str) -> Option<&JournalEntry> {
        self.alias_index
            .get(&normalize_key(text))
            .map(|&i| &self.entries[i])
    }

    /// Longest alias, in words, after normalisation.
    pub(crate) fn max_alias_words(&self) -> usize {
        self.max_alias_words
    }
}

/// Canonical title for an alternative journal form, if known.
pub fn normalize_journal<'kb>(alias_text: &str, kb: &'kb JournalKb) -> Option<&'kb str> {
    kb.lookup(alias_text).map(|e| e.canonical_title.as_str())
}
