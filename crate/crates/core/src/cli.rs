//! Command-line front end.
//!
//! Every report is tab-separated text written to stdout or to `--out`.
//! Exit status: 0 on success, 1 on bad usage or bad input, 2 on internal
//! failures such as unwritable storage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::alerts::AlertStore;
use crate::citegraph::{build_graph, citation_counts, cocitation, link_rank, GraphError};
use crate::config::{Config, ConfigError, ENV_CONFIG};
use crate::records::{
    export_bibtex, parse_records, unix_now, BibRecord, FieldQuery, RecordStore, StoreError,
    UpsertOutcome,
};
use crate::refextract::{extract_references, JournalKb};
use crate::taxonomy::{cluster_documents, extract_keywords, Taxonomy};
use crate::tsv::{escape, ranked_report};
use crate::usage::{co_view_recommend, parse_log, rows_tsv, top_k, Action, UsageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

const FULLTEXT_DIR: &str = "fulltext";
const ALERTS_DIR: &str = "alerts";
const NOTIFICATIONS_DIR: &str = "notifications";

#[derive(Debug, Parser)]
#[command(name = "biblioforge", version, about = "Batch enrichment and reports over a bibliographic record store")]
struct Cli {
    /// Config file; defaults to $BIBLIOFORGE_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Record store directory.
    #[arg(long, global = true, value_name = "DIR")]
    store: Option<PathBuf>,
    /// Keyword taxonomy.
    #[arg(long, global = true, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    /// Journal knowledge base.
    #[arg(long, global = true, value_name = "PATH")]
    kb: Option<PathBuf>,
    /// Usage log.
    #[arg(long, global = true, value_name = "PATH")]
    log: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Add or replace records from record files.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Ingest timestamp (seconds); defaults to the current time.
        #[arg(long)]
        now: Option<i64>,
    },
    /// Assign controlled keywords to every record with a full text.
    Keywords {
        /// Keywords kept per record.
        #[arg(long, default_value_t = 10)]
        max: usize,
        /// Report document clusters instead of keywords.
        #[arg(long, value_name = "T")]
        cluster_threshold: Option<f64>,
    },
    /// Extract and normalise references from every full text.
    Refextract,
    /// Citation counts, edges, co-citation or link rank.
    Citegraph(CitegraphArgs),
    /// Popularity and co-view reports from the usage log.
    #[command(subcommand)]
    Usage(UsageCommand),
    /// Saved searches over newly ingested records.
    #[command(subcommand)]
    Alerts(AlertsCommand),
    /// Export records in other formats.
    #[command(subcommand)]
    Export(ExportCommand),
}

#[derive(Debug, Args)]
struct CitegraphArgs {
    /// Link-rank scores instead of citation counts.
    #[arg(long, conflicts_with_all = ["edges", "cocite"])]
    rank: bool,
    /// Resolved citing/cited pairs.
    #[arg(long, conflicts_with = "cocite")]
    edges: bool,
    /// Number of records citing both A and B.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    cocite: Option<Vec<String>>,
    /// Overrides the configured damping.
    #[arg(long)]
    damping: Option<f64>,
    /// Overrides the configured convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Overrides the configured iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ActionArg {
    View,
    Download,
}

#[derive(Debug, Subcommand)]
enum UsageCommand {
    /// Most viewed or downloaded records.
    Top {
        #[arg(long, value_enum)]
        action: ActionArg,
        #[arg(short = 'k')]
        k: usize,
        /// Inclusive window start, seconds since the epoch.
        #[arg(long, value_name = "TS", requires = "to")]
        from: Option<i64>,
        #[arg(long, value_name = "TS", requires = "from")]
        to: Option<i64>,
    },
    /// Records co-viewed with a record.
    Recommend {
        record_id: String,
        #[arg(short = 'k')]
        k: usize,
    },
}

#[derive(Debug, Subcommand)]
enum AlertsCommand {
    /// Save a search; prints the new alert id.
    Register {
        #[arg(long)]
        owner: String,
        /// FIELD:OP:VALUE, repeatable; all clauses must match.
        #[arg(long = "clause", required = true, value_name = "F:OP:V")]
        clauses: Vec<String>,
        /// Registration time; defaults to the current time.
        #[arg(long)]
        now: Option<i64>,
    },
    /// Run one notification batch.
    Run {
        /// Batch time; defaults to one second before the current time so
        /// records ingested later in the same second fall in the next batch.
        #[arg(long)]
        now: Option<i64>,
    },
}

#[derive(Debug, Subcommand)]
enum ExportCommand {
    /// BibTeX for the given records, or all records when none are named.
    Bibtex { ids: Vec<String> },
}

/// A failed command and the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Storage { .. } => CliError::internal(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<crate::alerts::AlertError> for CliError {
    fn from(e: crate::alerts::AlertError) -> Self {
        use crate::alerts::AlertError as A;
        match e {
            A::Storage { .. } => CliError::internal(e.to_string()),
            A::Store(inner) => inner.into(),
            _ => CliError::input(e.to_string()),
        }
    }
}

/// Entry point used by the binary: real arguments, environment and stdio.
pub fn dispatch() -> i32 {
    let env_config = std::env::var_os(ENV_CONFIG);
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), env_config, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs one command. `env_config` stands in for `$BIBLIOFORGE_CONFIG`.
pub fn run<I, T>(args: I, env_config: Option<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render().ansi());
                    EXIT_INPUT
                }
            };
        }
    };
    match execute(cli, env_config, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

/// Resolved settings for one command.
struct Context {
    config: Config,
}

impl Context {
    fn store(&self) -> Result<RecordStore, CliError> {
        let dir = self
            .config
            .store_dir
            .as_ref()
            .ok_or_else(|| CliError::input("no record store: pass --store or set store_dir"))?;
        Ok(RecordStore::open(dir)?)
    }

    fn taxonomy(&self) -> Result<Taxonomy, CliError> {
        let path = self
            .config
            .taxonomy_path
            .as_ref()
            .ok_or_else(|| CliError::input("no taxonomy: pass --taxonomy or set taxonomy_path"))?;
        Taxonomy::load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    fn kb(&self) -> Result<JournalKb, CliError> {
        match &self.config.kb_path {
            Some(path) => JournalKb::load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
            None => {
                log::warn!("no journal knowledge base configured; journals will not be normalised");
                Ok(JournalKb::default())
            }
        }
    }
}

fn execute(cli: Cli, env_config: Option<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match cli.config.clone().or_else(|| env_config.map(PathBuf::from)) {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let cwd_relative = |p: PathBuf| Some(p);
    if let Some(p) = cli.store.clone() {
        config.store_dir = cwd_relative(p);
    }
    if let Some(p) = cli.taxonomy.clone() {
        config.taxonomy_path = cwd_relative(p);
    }
    if let Some(p) = cli.kb.clone() {
        config.kb_path = cwd_relative(p);
    }
    if let Some(p) = cli.log.clone() {
        config.log_path = cwd_relative(p);
    }
    if let Command::Citegraph(args) = &cli.command {
        if let Some(d) = args.damping {
            config.damping = d;
        }
        if let Some(t) = args.tolerance {
            config.rank_tolerance = t;
        }
        if let Some(m) = args.max_iters {
            config.max_iters = m;
        }
    }
    config.validate()?;
    let ctx = Context { config };

    let report = match cli.command {
        Command::Ingest { files, now } => ingest(&ctx, &files, now.unwrap_or_else(unix_now))?,
        Command::Keywords { max, cluster_threshold } => keywords(&ctx, max, cluster_threshold)?,
        Command::Refextract => refextract(&ctx)?,
        Command::Citegraph(args) => citegraph(&ctx, &args)?,
        Command::Usage(cmd) => usage(&ctx, cmd, err)?,
        Command::Alerts(cmd) => alerts(&ctx, cmd, err)?,
        Command::Export(ExportCommand::Bibtex { ids }) => export(&ctx, &ids)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, report)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(report.as_bytes())
            .map_err(|e| CliError::internal(format!("cannot write report: {e}"))),
    }
}

fn resolve_fulltext(store: &RecordStore, record: &BibRecord) -> Option<PathBuf> {
    record.fulltext_path.as_ref().map(|p| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            store.dir().join(p)
        }
    })
}

fn read_fulltext(store: &RecordStore, record: &BibRecord) -> Result<Option<String>, CliError> {
    let Some(path) = resolve_fulltext(store, record) else {
        return Ok(None);
    };
    fs::read_to_string(&path)
        .map(Some)
        .map_err(|e| CliError::input(format!("record {}: full text {}: {e}", record.record_id, path.display())))
}

fn ingest(ctx: &Context, files: &[PathBuf], now: i64) -> Result<String, CliError> {
    let store = ctx.store()?;
    // Parse everything first so bad input leaves the store untouched.
    let mut staged: Vec<(BibRecord, Option<PathBuf>)> = Vec::new();
    for file in files {
        let text = fs::read_to_string(file)
            .map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
        let parsed = parse_records(&text).map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
        let base = file.parent().unwrap_or(Path::new(""));
        for p in parsed {
            if p.warning_count() > 0 {
                log::warn!("{}: record {}: {} unknown keys", file.display(), p.record.record_id, p.warning_count());
            }
            let source = p.record.fulltext_path.as_ref().map(|f| base.join(f));
            if let Some(src) = &source {
                if !src.is_file() {
                    return Err(CliError::input(format!(
                        "record {}: full text {} not found",
                        p.record.record_id,
                        src.display()
                    )));
                }
            }
            staged.push((p.record, source));
        }
    }

    let mut report = String::new();
    for (mut record, source) in staged {
        if let Some(src) = source {
            let rel = format!("{FULLTEXT_DIR}/{}.txt", record.record_id);
            let dest = store.dir().join(&rel);
            let bytes = fs::read(&src).map_err(|e| CliError::input(format!("{}: {e}", src.display())))?;
            if fs::read(&dest).ok().as_deref() != Some(&bytes[..]) {
                fs::create_dir_all(store.dir().join(FULLTEXT_DIR))
                    .and_then(|_| fs::write(&dest, &bytes))
                    .map_err(|e| CliError::internal(format!("{}: {e}", dest.display())))?;
            }
            record.fulltext_path = Some(rel);
        }
        // Enrichments belong to the store; input records never carry them,
        // so re-ingesting unchanged input keeps them (and the ingest time).
        if record.keywords.is_empty() && record.references.is_empty() {
            if let Some(old) = store.get(&record.record_id)? {
                let mut bare = old.clone();
                bare.keywords.clear();
                bare.references.clear();
                if bare.same_content(&record) {
                    record.keywords = old.keywords;
                    record.references = old.references;
                }
            }
        }
        let id = record.record_id.clone();
        let outcome = store.upsert_at(record, now)?;
        let word = match outcome {
            UpsertOutcome::Inserted => "inserted",
            UpsertOutcome::Updated => "updated",
            UpsertOutcome::Unchanged => "unchanged",
        };
        report.push_str(&format!("{}\t{word}\n", escape(&id)));
    }
    Ok(report)
}

fn keywords(ctx: &Context, max: usize, cluster_threshold: Option<f64>) -> Result<String, CliError> {
    let store = ctx.store()?;
    let records = store.load_all()?;
    if records.is_empty() {
        return Ok(String::new());
    }
    let taxonomy = ctx.taxonomy()?;
    let results: Vec<Result<BibRecord, CliError>> = records
        .into_par_iter()
        .map(|mut record| {
            if let Some(text) = read_fulltext(&store, &record)? {
                record.keywords = extract_keywords(&text, &taxonomy, max);
            }
            Ok(record)
        })
        .collect();
    let mut report = String::new();
    let mut by_doc = BTreeMap::new();
    for record in results {
        let record = record?;
        store.save(&record)?;
        for kw in &record.keywords {
            report.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                escape(&record.record_id),
                escape(&kw.term_id),
                escape(&kw.display_label),
                kw.occurrence_text()
            ));
        }
        by_doc.insert(record.record_id, record.keywords);
    }
    let Some(threshold) = cluster_threshold else {
        return Ok(report);
    };
    let clusters = cluster_documents(&by_doc, &taxonomy, threshold).map_err(|e| CliError::input(e.to_string()))?;
    let mut report = String::new();
    for (i, members) in clusters.iter().enumerate() {
        let members: Vec<String> = members.iter().map(|m| escape(m)).collect();
        report.push_str(&format!("c{}\t{}\n", i + 1, members.join(",")));
    }
    Ok(report)
}

fn refextract(ctx: &Context) -> Result<String, CliError> {
    let store = ctx.store()?;
    let records = store.load_all()?;
    let kb = ctx.kb()?;
    let locator = ctx
        .config
        .section_locator()
        .map_err(|e| CliError::input(e.to_string()))?;
    let results: Vec<Result<BibRecord, CliError>> = records
        .into_par_iter()
        .map(|mut record| {
            if let Some(text) = read_fulltext(&store, &record)? {
                record.references = extract_references(&text, &locator, &kb);
            }
            Ok(record)
        })
        .collect();
    let mut report = String::new();
    for record in results {
        let record = record?;
        store.save(&record)?;
        for entry in &record.references {
            let opt = |v: &Option<String>| v.as_deref().map(escape).unwrap_or_default();
            report.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                escape(&record.record_id),
                opt(&entry.marker),
                opt(&entry.journal),
                opt(&entry.volume),
                opt(&entry.page),
                entry.year.map(|y| y.to_string()).unwrap_or_default(),
                escape(&entry.report_numbers.join(";")),
            ));
        }
    }
    Ok(report)
}

fn citegraph(ctx: &Context, args: &CitegraphArgs) -> Result<String, CliError> {
    let store = ctx.store()?;
    let mut records = store.load_all()?;
    let graph = build_graph(&mut records);
    for record in &records {
        store.save(record)?;
    }
    if let Some(pair) = &args.cocite {
        let n = cocitation(&graph, &pair[0], &pair[1]).map_err(|e| CliError::input(e.to_string()))?;
        return Ok(format!("{}\t{}\t{n}\n", escape(&pair[0]), escape(&pair[1])));
    }
    if args.edges {
        return Ok(graph.edge_list_tsv());
    }
    if args.rank {
        let cfg = &ctx.config;
        let rank = match link_rank(&graph, cfg.damping, cfg.rank_tolerance, cfg.max_iters) {
            Ok(rank) => rank,
            Err(GraphError::NonConvergence(rank)) => {
                log::warn!("link rank stopped after {} iterations without converging", rank.iterations);
                rank
            }
            Err(e) => return Err(CliError::input(e.to_string())),
        };
        let rows: Vec<(String, f64)> = rank.scores.into_iter().collect();
        let mut sorted = rows;
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut report = String::new();
        for (id, score) in sorted {
            report.push_str(&format!("{}\t{score:.12}\n", escape(&id)));
        }
        return Ok(report);
    }
    Ok(ranked_report(citation_counts(&graph)))
}

fn load_usage(ctx: &Context, err: &mut dyn Write) -> Result<Vec<crate::usage::UsageEvent>, CliError> {
    let path = ctx
        .config
        .log_path
        .as_ref()
        .ok_or_else(|| CliError::input("no usage log: pass --log or set log_path"))?;
    let file = fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let parsed = parse_log(BufReader::new(file)).map_err(|e| CliError::internal(e.to_string()))?;
    if parsed.skipped > 0 {
        let _ = writeln!(err, "warning: skipped {} malformed log lines", parsed.skipped);
    }
    Ok(parsed.events)
}

fn usage(ctx: &Context, cmd: UsageCommand, err: &mut dyn Write) -> Result<String, CliError> {
    let events = load_usage(ctx, err)?;
    let usage_err = |e: UsageError| match e {
        UsageError::Io(_) => CliError::internal(e.to_string()),
        _ => CliError::input(e.to_string()),
    };
    let rows = match cmd {
        UsageCommand::Top { action, k, from, to } => {
            let action = match action {
                ActionArg::View => Action::View,
                ActionArg::Download => Action::Download,
            };
            let window = from.zip(to);
            if let Some((lo, hi)) = window {
                if lo > hi {
                    return Err(CliError::input(format!("empty window {lo}..{hi}")));
                }
            }
            top_k(&events, action, k, window).map_err(usage_err)?
        }
        UsageCommand::Recommend { record_id, k } => {
            co_view_recommend(&events, &record_id, k).map_err(usage_err)?
        }
    };
    Ok(rows_tsv(&rows))
}

fn alerts(ctx: &Context, cmd: AlertsCommand, err: &mut dyn Write) -> Result<String, CliError> {
    let store = ctx.store()?;
    let alert_store = AlertStore::open(store.dir().join(ALERTS_DIR))?;
    match cmd {
        AlertsCommand::Register { owner, clauses, now } => {
            let query = FieldQuery::parse(&clauses).map_err(|e| CliError::input(e.to_string()))?;
            let sub = alert_store.register(query, &owner, now.unwrap_or_else(unix_now))?;
            Ok(format!("{}\n", sub.alert_id))
        }
        AlertsCommand::Run { now } => {
            let records = store.load_all()?;
            let now = now.unwrap_or_else(|| unix_now() - 1);
            let outcome = alert_store.run_batch(&records, &store.dir().join(NOTIFICATIONS_DIR), now)?;
            if let Some(dir) = &outcome.batch_dir {
                let _ = writeln!(err, "notifications written to {}", dir.display());
            }
            let titles: BTreeMap<&str, &str> =
                records.iter().map(|r| (r.record_id.as_str(), r.title.as_str())).collect();
            let mut report = String::new();
            for n in &outcome.notifications {
                for id in &n.record_ids {
                    report.push_str(&format!(
                        "{}\t{}\t{}\n",
                        escape(&n.alert_id),
                        escape(id),
                        escape(titles.get(id.as_str()).copied().unwrap_or(""))
                    ));
                }
            }
            Ok(report)
        }
    }
}

fn export(ctx: &Context, ids: &[String]) -> Result<String, CliError> {
    let store = ctx.store()?;
    let records = if ids.is_empty() {
        store.load_all()?
    } else {
        let mut out = Vec::new();
        for id in ids {
            out.push(
                store
                    .get(id)?
                    .ok_or_else(|| CliError::input(format!("unknown record {id:?}")))?,
            );
        }
        out
    };
    Ok(export_bibtex(&records))
}
