//! Drives the built binary through the whole fixture pipeline.

use std::path::{Path, PathBuf};
use std::process::Command;

use super::fixture;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn bin(config: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_biblioforge"))
        .args(args)
        .env("BIBLIOFORGE_CONFIG", config)
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn setup(dir: &Path) -> PathBuf {
    let config = dir.join("biblioforge.conf");
    std::fs::write(
        &config,
        format!(
            "store_dir: store\ntaxonomy_path: {}\nkb_path: {}\nlog_path: {}\ndamping: 0.85\nrank_tolerance: 1e-12\ncomposite_window: sentence\n",
            fixture("taxonomy20.txt").display(),
            fixture("journals.tsv").display(),
            fixture("usage_1000.log").display(),
        ),
    )
    .unwrap();
    config
}

pub const PIPELINE: &[&[&str]] = &[
    &["alerts", "register", "--owner", "okafor", "--clause", "author:contains:grumiller", "--now", "100"],
    &["alerts", "register", "--owner", "jo", "--clause", "any:contains:dilaton", "--clause", "year:range:2006..2006", "--now", "100"],
    &["ingest", "RECORDS", "--now", "200"],
    &["keywords", "--max", "5"],
    &["keywords", "--cluster-threshold", "0.3"],
    &["refextract"],
    &["citegraph"],
    &["citegraph", "--edges"],
    &["citegraph", "--cocite", "c01", "c02"],
    &["citegraph", "--rank"],
    &["usage", "top", "--action", "view", "-k", "5"],
    &["usage", "top", "--action", "download", "-k", "3", "--from", "1136073600", "--to", "1137000000"],
    &["usage", "recommend", "r1", "-k", "5"],
    &["alerts", "run", "--now", "300"],
    &["export", "bibtex", "c01", "c03"],
];

pub fn pipeline(dir: &Path) -> Vec<String> {
    let config = setup(dir);
    let records = fixture("citecorpus/records.rec");
    PIPELINE
        .iter()
        .map(|step| {
            let args: Vec<&str> = step
                .iter()
                .map(|a| if *a == "RECORDS" { records.to_str().unwrap() } else { a })
                .collect();
            let r = bin(&config, &args);
            assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
            r.stdout
        })
        .collect()
}

