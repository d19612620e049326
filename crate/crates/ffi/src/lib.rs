//! C ABI over the biblioforge library.
//!
//! Every handle is opaque and owned by the caller until passed to its
//! `_free` function. Every fallible call returns a [`BfStatus`]; on
//! anything but `BF_STATUS_OK` the message is available from
//! [`bf_last_error`] on the same thread. Strings handed out through
//! `out` parameters are NUL-terminated UTF-8 and must be released with
//! [`bf_string_free`]. Reports are the same TSV rows the CLI prints.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use biblioforge::citegraph::{build_graph, citation_counts, cocitation, link_rank, CitationGraph, GraphError};
use biblioforge::refextract::{extract_references, normalize_journal, parse_entry, KbError, SectionLocator};
use biblioforge::records::StoreError;
use biblioforge::taxonomy::{extract_keywords, TaxonomyError};
use biblioforge::tsv::{escape, ranked_report};
use biblioforge::usage::{parse_log, top_k, Action, CoViewIndex, UsageError, UsageEvent};
use biblioforge::{CitationEntry, JournalKb, RecordStore, Taxonomy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    NotFound = 5,
    InvalidArgument = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfAction {
    View = 0,
    Download = 1,
}

pub struct BfTaxonomy(Taxonomy);

pub struct BfJournalKb(JournalKb);

pub struct BfRecordStore(RecordStore);

pub struct BfGraph(CitationGraph);

pub struct BfUsageLog {
    events: Vec<UsageEvent>,
    skipped: usize,
    index: CoViewIndex,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(BfStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail(status: BfStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `body`, turning errors and panics into a status code.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            BfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BfStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(fail(BfStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BfStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| fail(BfStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| fail(BfStatus::NullPointer, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(fail(BfStatus::NullPointer, "out is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).map_err(|_| fail(BfStatus::Internal, "report contains NUL"))?;
    if out.is_null() {
        return Err(fail(BfStatus::NullPointer, "out is null"));
    }
    out.write(c.into_raw());
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(fail(BfStatus::NullPointer, "out is null"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn positive(k: usize) -> FfiResult<usize> {
    if k == 0 {
        Err(fail(BfStatus::InvalidArgument, "k must be at least 1"))
    } else {
        Ok(k)
    }
}

impl From<TaxonomyError> for Failure {
    fn from(e: TaxonomyError) -> Self {
        let status = match e {
            TaxonomyError::Io(_) => BfStatus::Io,
            _ => BfStatus::Parse,
        };
        fail(status, e.to_string())
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        let status = match e {
            KbError::Io(_) => BfStatus::Io,
            _ => BfStatus::Parse,
        };
        fail(status, e.to_string())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::Storage { .. } => BfStatus::Io,
            _ => BfStatus::Parse,
        };
        fail(status, e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let status = match e {
            GraphError::UnknownNode(_) => BfStatus::NotFound,
            GraphError::NonConvergence(_) => BfStatus::Internal,
            _ => BfStatus::InvalidArgument,
        };
        fail(status, e.to_string())
    }
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        let status = match e {
            UsageError::UnknownRecord(_) => BfStatus::NotFound,
            UsageError::InvalidK => BfStatus::InvalidArgument,
            UsageError::Io(_) => BfStatus::Io,
        };
        fail(status, e.to_string())
    }
}

/// Library version, static; never free it.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- taxonomy

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_taxonomy_load(path: *const c_char, out: *mut *mut BfTaxonomy) -> BfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put_handle(out, BfTaxonomy(Taxonomy::load(path)?))
    })
}

/// # Safety
/// `tax` must come from `bf_taxonomy_load`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_taxonomy_free(tax: *mut BfTaxonomy) {
    free_handle(tax)
}

/// Number of terms, composites included.
///
/// # Safety
/// `tax` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_taxonomy_len(tax: *const BfTaxonomy, out: *mut usize) -> BfStatus {
    guard(|| put(out, handle(tax, "taxonomy")?.0.len()))
}

/// Keyword report, one `term_id\tlabel\toccurrence` row per keyword.
///
/// # Safety
/// `tax` must be a live handle, `text` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_keywords_tsv(
    tax: *const BfTaxonomy,
    text: *const c_char,
    max: usize,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let tax = handle(tax, "taxonomy")?;
        let text = str_arg(text, "text")?;
        let report: String = extract_keywords(text, &tax.0, max)
            .iter()
            .map(|k| format!("{}\t{}\t{}\n", escape(&k.term_id), escape(&k.display_label), k.occurrence_text()))
            .collect();
        put_string(out, report)
    })
}

// ---------------------------------------------------------- journal KB

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_kb_load(path: *const c_char, out: *mut *mut BfJournalKb) -> BfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put_handle(out, BfJournalKb(JournalKb::load(path)?))
    })
}

/// # Safety
/// `kb` must come from `bf_kb_load`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_kb_free(kb: *mut BfJournalKb) {
    free_handle(kb)
}

/// Canonical title for a journal alias; `BF_STATUS_NOT_FOUND` when the
/// alias is unknown.
///
/// # Safety
/// `kb` must be a live handle, `alias` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_kb_normalize(
    kb: *const BfJournalKb,
    alias: *const c_char,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let kb = handle(kb, "kb")?;
        let alias = str_arg(alias, "alias")?;
        let title = normalize_journal(alias, &kb.0)
            .ok_or_else(|| fail(BfStatus::NotFound, format!("unknown journal {alias:?}")))?;
        put_string(out, title.to_string())
    })
}

fn entry_row(e: &CitationEntry) -> String {
    let opt = |v: &Option<String>| v.as_deref().map(escape).unwrap_or_default();
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        opt(&e.marker),
        opt(&e.journal),
        opt(&e.volume),
        opt(&e.page),
        e.year.map(|y| y.to_string()).unwrap_or_default(),
        escape(&e.report_numbers.join(";")),
        opt(&e.url),
    )
}

/// One `marker\tjournal\tvolume\tpage\tyear\treports\turl` row.
///
/// # Safety
/// `kb` must be a live handle, `raw` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_parse_entry_tsv(
    kb: *const BfJournalKb,
    raw: *const c_char,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let kb = handle(kb, "kb")?;
        let raw = str_arg(raw, "raw")?;
        put_string(out, entry_row(&parse_entry(raw, &kb.0)))
    })
}

/// Locates, segments and parses the references of a full text; one
/// row per entry, shaped as in [`bf_parse_entry_tsv`].
///
/// # Safety
/// `kb` must be a live handle, `fulltext` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_extract_references_tsv(
    kb: *const BfJournalKb,
    fulltext: *const c_char,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let kb = handle(kb, "kb")?;
        let text = str_arg(fulltext, "fulltext")?;
        let entries = extract_references(text, &SectionLocator::default(), &kb.0);
        put_string(out, entries.iter().map(entry_row).collect())
    })
}

// --------------------------------------------------------------- store

/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_store_open(dir: *const c_char, out: *mut *mut BfRecordStore) -> BfStatus {
    guard(|| {
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        put_handle(out, BfRecordStore(RecordStore::open(dir)?))
    })
}

/// # Safety
/// `store` must come from `bf_store_open`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_store_free(store: *mut BfRecordStore) {
    free_handle(store)
}

/// # Safety
/// `store` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_store_len(store: *const BfRecordStore, out: *mut usize) -> BfStatus {
    guard(|| put(out, handle(store, "store")?.0.len()?))
}

// --------------------------------------------------------------- graph

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_new(out: *mut *mut BfGraph) -> BfStatus {
    guard(|| put_handle(out, BfGraph(CitationGraph::new())))
}

/// Citation graph of every record in the store, from stored references.
///
/// # Safety
/// `store` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_from_store(store: *const BfRecordStore, out: *mut *mut BfGraph) -> BfStatus {
    guard(|| {
        let mut records = handle(store, "store")?.0.load_all()?;
        put_handle(out, BfGraph(build_graph(&mut records)))
    })
}

/// # Safety
/// `graph` must come from this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_free(graph: *mut BfGraph) {
    free_handle(graph)
}

/// # Safety
/// `graph` must be a live handle and `id` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_add_node(graph: *mut BfGraph, id: *const c_char) -> BfStatus {
    guard(|| {
        let graph = handle_mut(graph, "graph")?;
        graph.0.add_node(str_arg(id, "id")?);
        Ok(())
    })
}

/// Adds both endpoints and the edge; self-citations and repeats are
/// ignored.
///
/// # Safety
/// `graph` must be a live handle; `citing` and `cited` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_add_edge(graph: *mut BfGraph, citing: *const c_char, cited: *const c_char) -> BfStatus {
    guard(|| {
        let graph = handle_mut(graph, "graph")?;
        let (a, b) = (str_arg(citing, "citing")?, str_arg(cited, "cited")?);
        graph.0.add_edge(a, b);
        Ok(())
    })
}

/// `record\tcount` rows, most cited first.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_counts_tsv(graph: *const BfGraph, out: *mut *mut c_char) -> BfStatus {
    guard(|| put_string(out, ranked_report(citation_counts(&handle(graph, "graph")?.0))))
}

/// # Safety
/// `graph` must be a live handle, `a` and `b` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_cocitation(
    graph: *const BfGraph,
    a: *const c_char,
    b: *const c_char,
    out: *mut usize,
) -> BfStatus {
    guard(|| {
        let graph = handle(graph, "graph")?;
        let n = cocitation(&graph.0, str_arg(a, "a")?, str_arg(b, "b")?)?;
        put(out, n)
    })
}

/// `record\tscore` rows, highest first. Non-convergence is reported as
/// `BF_STATUS_INTERNAL` and no report is written.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_graph_rank_tsv(
    graph: *const BfGraph,
    damping: f64,
    tolerance: f64,
    max_iters: usize,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let graph = handle(graph, "graph")?;
        let rank = link_rank(&graph.0, damping, tolerance, max_iters)?;
        let mut rows: Vec<(String, f64)> = rank.scores.into_iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let report = rows.iter().map(|(id, s)| format!("{}\t{s:.12}\n", escape(id))).collect();
        put_string(out, report)
    })
}

// --------------------------------------------------------------- usage

fn usage_log(text: &[u8]) -> FfiResult<BfUsageLog> {
    let parsed = parse_log(BufReader::new(text))?;
    let index = CoViewIndex::build(&parsed.events);
    Ok(BfUsageLog {
        events: parsed.events,
        skipped: parsed.skipped,
        index,
    })
}

/// Reads a usage log file. Malformed lines are skipped and counted.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_load(path: *const c_char, out: *mut *mut BfUsageLog) -> BfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let bytes = std::fs::read(path).map_err(|e| fail(BfStatus::Io, format!("{path}: {e}")))?;
        put_handle(out, usage_log(&bytes)?)
    })
}

/// Parses usage log text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_parse(text: *const c_char, out: *mut *mut BfUsageLog) -> BfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        put_handle(out, usage_log(text.as_bytes())?)
    })
}

/// # Safety
/// `log` must come from this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_free(log: *mut BfUsageLog) {
    free_handle(log)
}

/// Number of malformed lines skipped while reading.
///
/// # Safety
/// `log` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_skipped(log: *const BfUsageLog, out: *mut usize) -> BfStatus {
    guard(|| put(out, handle(log, "log")?.skipped))
}

/// `record\tcount` rows for one action. The window `[from, to]` is
/// inclusive and only applies when `windowed` is non-zero.
///
/// # Safety
/// `log` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_top_k_tsv(
    log: *const BfUsageLog,
    action: BfAction,
    k: usize,
    windowed: i32,
    from: i64,
    to: i64,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let log = handle(log, "log")?;
        let action = match action {
            BfAction::View => Action::View,
            BfAction::Download => Action::Download,
        };
        let window = (windowed != 0).then_some((from, to));
        let rows = top_k(&log.events, action, positive(k)?, window)?;
        put_string(out, ranked_report(rows))
    })
}

/// Co-viewed records as `record\tstrength` rows; `BF_STATUS_NOT_FOUND`
/// when the record never appears in the log.
///
/// # Safety
/// `log` must be a live handle, `record` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bf_usage_recommend_tsv(
    log: *const BfUsageLog,
    record: *const c_char,
    k: usize,
    out: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        let log = handle(log, "log")?;
        let rows = log.index.recommend(str_arg(record, "record")?, positive(k)?)?;
        put_string(out, ranked_report(rows))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take(p: *mut c_char) -> String {
        let s = CStr::from_ptr(p).to_str().unwrap().to_string();
        bf_string_free(p);
        s
    }

    unsafe fn last_error() -> String {
        CStr::from_ptr(bf_last_error()).to_str().unwrap().to_string()
    }

    #[test]
    fn null_arguments_are_reported_not_dereferenced() {
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(bf_taxonomy_load(ptr::null(), &mut out), BfStatus::NullPointer);
            assert!(last_error().contains("path"));
            assert_eq!(bf_keywords_tsv(ptr::null(), ptr::null(), 5, ptr::null_mut()), BfStatus::NullPointer);
            bf_taxonomy_free(ptr::null_mut());
            bf_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        let bad = [0xffu8, 0xfe, 0];
        let mut out = ptr::null_mut();
        let status = unsafe { bf_kb_load(bad.as_ptr().cast(), &mut out) };
        assert_eq!(status, BfStatus::InvalidUtf8);
    }

    #[test]
    fn success_clears_last_error() {
        unsafe {
            let mut g = ptr::null_mut();
            assert_eq!(bf_graph_add_node(ptr::null_mut(), c("x").as_ptr()), BfStatus::NullPointer);
            assert_eq!(bf_graph_new(&mut g), BfStatus::Ok);
            assert_eq!(last_error(), "");
            bf_graph_free(g);
        }
    }

    #[test]
    fn zero_k_is_invalid() {
        unsafe {
            let mut log = ptr::null_mut();
            assert_eq!(bf_usage_parse(c("1\tv\tr\tview\n").as_ptr(), &mut log), BfStatus::Ok);
            let mut out = ptr::null_mut();
            assert_eq!(bf_usage_top_k_tsv(log, BfAction::View, 0, 0, 0, 0, &mut out), BfStatus::InvalidArgument);
            assert_eq!(bf_usage_top_k_tsv(log, BfAction::View, 3, 0, 0, 0, &mut out), BfStatus::Ok);
            assert_eq!(take(out), "r\t1\n");
            bf_usage_free(log);
        }
    }
}
