//! Command configuration: a `key: value` file plus command-line overrides.
//!
//! ```text
//! # comments start with '#'
//! store_dir: store
//! taxonomy_path: fixtures/taxonomy.tsv
//! kb_path: fixtures/journals.tsv
//! log_path: usage.log
//! damping: 0.85
//! rank_tolerance: 1e-10
//! max_iters: 1000
//! composite_window: sentence
//! heading_pattern: (?i)^\s*literature\s*$
//! fallback_min_lines: 3
//! ```
//!
//! Relative paths resolve against the directory of the config file.
//! `heading_pattern` may repeat; when present it replaces the built-in
//! heading patterns.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::refextract::{SectionLocator, DEFAULT_FALLBACK_MIN_LINES, DEFAULT_HEADING_PATTERNS};

pub const ENV_CONFIG: &str = "BIBLIOFORGE_CONFIG";
pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected `key: value`")]
    Syntax { line: usize },
    #[error("config key {key}: {reason}")]
    InvalidValue { key: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub store_dir: Option<PathBuf>,
    pub taxonomy_path: Option<PathBuf>,
    pub kb_path: Option<PathBuf>,
    pub log_path: Option<PathBuf>,
    pub damping: f64,
    pub rank_tolerance: f64,
    pub max_iters: usize,
    /// Empty means the built-in patterns.
    pub heading_patterns: Vec<String>,
    pub fallback_min_lines: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            store_dir: None,
            taxonomy_path: None,
            kb_path: None,
            log_path: None,
            damping: DEFAULT_DAMPING,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            heading_patterns: Vec::new(),
            fallback_min_lines: DEFAULT_FALLBACK_MIN_LINES,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Config::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or(ConfigError::Syntax { line: idx + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "store_dir" => cfg.store_dir = Some(resolve(value)),
                "taxonomy_path" => cfg.taxonomy_path = Some(resolve(value)),
                "kb_path" => cfg.kb_path = Some(resolve(value)),
                "log_path" => cfg.log_path = Some(resolve(value)),
                "damping" => cfg.damping = value.parse().map_err(|_| invalid(key, "not a number"))?,
                "rank_tolerance" => {
                    cfg.rank_tolerance = value.parse().map_err(|_| invalid(key, "not a number"))?
                }
                "max_iters" => {
                    cfg.max_iters = value.parse().map_err(|_| invalid(key, "not a count"))?
                }
                "fallback_min_lines" => {
                    cfg.fallback_min_lines = value.parse().map_err(|_| invalid(key, "not a count"))?
                }
                "heading_pattern" => cfg.heading_patterns.push(value.to_string()),
                "composite_window" => {
                    if value != "sentence" {
                        return Err(invalid(key, "only `sentence` is supported"));
                    }
                }
                other => log::warn!("config line {}: unknown key {other}", idx + 1),
            }
        }
        Ok(cfg)
    }

    /// Checks numeric ranges and heading patterns.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(invalid("damping", "must lie in (0, 1)"));
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance.is_finite()) {
            return Err(invalid("rank_tolerance", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        if self.fallback_min_lines == 0 {
            return Err(invalid("fallback_min_lines", "must be positive"));
        }
        self.section_locator()
            .map(|_| ())
            .map_err(|e| invalid("heading_pattern", e.to_string()))
    }

    pub fn section_locator(&self) -> Result<SectionLocator, crate::refextract::SectionError> {
        if self.heading_patterns.is_empty() {
            SectionLocator::new(DEFAULT_HEADING_PATTERNS, self.fallback_min_lines)
        } else {
            SectionLocator::new(&self.heading_patterns, self.fallback_min_lines)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = Config::parse("store_dir: s\n# note\nkb_path: /abs/kb.tsv\n", Path::new("/etc/bf")).unwrap();
        assert_eq!(cfg.store_dir, Some(PathBuf::from("/etc/bf/s")));
        assert_eq!(cfg.kb_path, Some(PathBuf::from("/abs/kb.tsv")));
        assert_eq!(cfg.damping, 0.85);
        assert_eq!(cfg.rank_tolerance, 1e-10);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("composite_window: paragraph\n", Path::new("")).is_err());
        assert!(Config::parse("damping: x\n", Path::new("")).is_err());
        assert!(Config::parse("no separator\n", Path::new("")).is_err());
        let cfg = Config::parse("damping: 1.0\n", Path::new("")).unwrap();
        assert!(cfg.validate().is_err());
        let cfg = Config::parse("heading_pattern: (\n", Path::new("")).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn patterns_accumulate() {
        let cfg = Config::parse("heading_pattern: ^A$\nheading_pattern: ^B$\n", Path::new("")).unwrap();
        assert_eq!(cfg.heading_patterns, vec!["^A$", "^B$"]);
    }
}
