//! Access-log analytics: popularity reports and co-view recommendations.
//!
//! Log lines are tab separated: `timestamp, visitor_id, record_id, action`
//! with action `view` or `download`. Visitor ids are opaque tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    View,
    Download,
}

impl FromStr for Action {
    type Err = LogLineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "view" => Ok(Action::View),
            "download" => Ok(Action::Download),
            other => Err(LogLineError::BadAction(other.to_string())),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::View => "view",
            Action::Download => "download",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UsageEvent {
    pub timestamp: i64,
    pub visitor_id: String,
    pub record_id: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogLineError {
    #[error("expected 4 tab-separated fields, got {0}")]
    FieldCount(usize),
    #[error("bad timestamp {0:?}")]
    BadTimestamp(String),
    #[error("empty {0}")]
    EmptyField(&'static str),
    #[error("bad action {0:?}")]
    BadAction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UsageError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("record {0:?} never appears in the log")]
    UnknownRecord(String),
    #[error("cannot read log: {0}")]
    Io(String),
}

/// Parses one log line. Trailing whitespace is ignored.
pub fn parse_log_line(line: &str) -> Result<UsageEvent, LogLineError> {
    let fields: Vec<&str> = line.trim_end().split('\t').collect();
    if fields.len() != 4 {
        return Err(LogLineError::FieldCount(fields.len()));
    }
    let timestamp: i64 = fields[0]
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| LogLineError::BadTimestamp(fields[0].to_string()))?;
    if fields[1].is_empty() {
        return Err(LogLineError::EmptyField("visitor_id"));
    }
    if fields[2].is_empty() {
        return Err(LogLineError::EmptyField("record_id"));
    }
    Ok(UsageEvent {
        timestamp,
        visitor_id: fields[1].to_string(),
        record_id: fields[2].to_string(),
        action: fields[3].parse()?,
    })
}

/// Events parsed from a log, plus the number of malformed lines skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub events: Vec<UsageEvent>,
    pub skipped: usize,
}

impl ParsedLog {
    /// Concatenates shards.
    pub fn merge(mut self, other: ParsedLog) -> ParsedLog {
        self.events.extend(other.events);
        self.skipped += other.skipped;
        self
    }
}

/// Parses a whole log. Malformed lines are logged and counted, never
/// fatal; blank lines are ignored.
pub fn parse_log<R: BufRead>(reader: R) -> Result<ParsedLog, UsageError> {
    let mut out = ParsedLog::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| UsageError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_log_line(&line) {
            Ok(ev) => out.events.push(ev),
            Err(e) => {
                log::debug!("log line {}: {e}", idx + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

fn rank_rows(counts: HashMap<&str, usize>, k: usize) -> Vec<(String, usize)> {
    let mut rows: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c > 0)
        .map(|(id, c)| (id.to_string(), c))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

/// Most viewed or most downloaded records.
///
/// Counts `action` events inside the inclusive `window`, ranked by count
/// descending then record id, at most `k` rows.
pub fn top_k(
    events: &[UsageEvent],
    action: Action,
    k: usize,
    window: Option<(i64, i64)>,
) -> Result<Vec<(String, usize)>, UsageError> {
    if k == 0 {
        return Err(UsageError::InvalidK);
    }
    let in_window = |t: i64| window.is_none_or(|(lo, hi)| lo <= t && t <= hi);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for ev in events {
        if ev.action == action && in_window(ev.timestamp) {
            *counts.entry(&ev.record_id).or_default() += 1;
        }
    }
    Ok(rank_rows(counts, k))
}

/// Who-viewed-what index for co-view recommendations.
#[derive(Debug, Clone, Default)]
pub struct CoViewIndex {
    viewers: HashMap<String, BTreeSet<String>>,
    viewed: HashMap<String, BTreeSet<String>>,
    known: HashSet<String>,
}

impl CoViewIndex {
    pub fn build(events: &[UsageEvent]) -> Self {
        let mut idx = CoViewIndex::default();
        for ev in events {
            idx.known.insert(ev.record_id.clone());
            if ev.action != Action::View {
                continue;
            }
            idx.viewers
                .entry(ev.record_id.clone())
                .or_default()
                .insert(ev.visitor_id.clone());
            idx.viewed
                .entry(ev.visitor_id.clone())
                .or_default()
                .insert(ev.record_id.clone());
        }
        idx
    }

    /// Records viewed by people who viewed `target`, with the number of
    /// such distinct visitors as strength.
    pub fn recommend(&self, target: &str, k: usize) -> Result<Vec<(String, usize)>, UsageError> {
        if k == 0 {
            return Err(UsageError::InvalidK);
        }
        if !self.known.contains(target) {
            return Err(UsageError::UnknownRecord(target.to_string()));
        }
        let mut strength: HashMap<&str, usize> = HashMap::new();
        for visitor in self.viewers.get(target).into_iter().flatten() {
            for other in &self.viewed[visitor] {
                if other != target {
                    *strength.entry(other).or_default() += 1;
                }
            }
        }
        Ok(rank_rows(strength, k))
    }

    /// Every record that appears in the log, in id order.
    pub fn records(&self) -> BTreeSet<&str> {
        self.known.iter().map(String::as_str).collect()
    }

    pub fn viewers_of(&self, record: &str) -> Option<&BTreeSet<String>> {
        self.viewers.get(record)
    }
}

/// "People who viewed this also viewed" for one record.
pub fn co_view_recommend(
    events: &[UsageEvent],
    target: &str,
    k: usize,
) -> Result<Vec<(String, usize)>, UsageError> {
    CoViewIndex::build(events).recommend(target, k)
}

/// `record_id<TAB>count` rows.
pub fn rows_tsv(rows: &[(String, usize)]) -> String {
    crate::tsv::ranked_report(rows.iter().map(|(id, c)| (id.as_str(), *c)))
}

/// Counts per record for one action; handy for merging shard totals.
pub fn action_counts(events: &[UsageEvent], action: Action) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for ev in events.iter().filter(|e| e.action == action) {
        *out.entry(ev.record_id.clone()).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(t: i64, v: &str, r: &str, a: Action) -> UsageEvent {
        UsageEvent {
            timestamp: t,
            visitor_id: v.into(),
            record_id: r.into(),
            action: a,
        }
    }

    #[test]
    fn parses_well_formed_line() {
        let e = parse_log_line("1136073600\tv42\tr1\tview  \n").unwrap();
        assert_eq!(e, ev(1136073600, "v42", "r1", Action::View));
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(
            parse_log_line("1136073600\tv42\tr1\tprint"),
            Err(LogLineError::BadAction("print".into()))
        );
        assert_eq!(parse_log_line("1\tv\tr"), Err(LogLineError::FieldCount(3)));
        assert!(matches!(parse_log_line("0\tv\tr\tview"), Err(LogLineError::BadTimestamp(_))));
        assert!(matches!(parse_log_line("x\tv\tr\tview"), Err(LogLineError::BadTimestamp(_))));
        assert_eq!(parse_log_line("5\t\tr\tview"), Err(LogLineError::EmptyField("visitor_id")));
    }

    #[test]
    fn batch_parse_counts_skips() {
        let log = "1\tv\tr1\tview\nbroken\n\n2\tv\tr2\tdownload\n3\tv\tr\tprint\n";
        let parsed = parse_log(log.as_bytes()).unwrap();
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.skipped, 2);
    }

    #[test]
    fn top_k_ranks_and_breaks_ties_by_id() {
        assert!(top_k(&[], Action::View, 3, None).unwrap().is_empty());
        let mut events = Vec::new();
        for i in 0..5 {
            events.push(ev(10 + i, "v", "r2", Action::View));
            events.push(ev(10 + i, "v", "r1", Action::View));
        }
        events.push(ev(50, "v", "r3", Action::Download));
        let rows = top_k(&events, Action::View, 10, None).unwrap();
        assert_eq!(rows, vec![("r1".to_string(), 5), ("r2".to_string(), 5)]);
        let windowed = top_k(&events, Action::View, 1, Some((10, 11))).unwrap();
        assert_eq!(windowed, vec![("r1".to_string(), 2)]);
        assert_eq!(top_k(&events, Action::View, 0, None), Err(UsageError::InvalidK));
    }

    #[test]
    fn minimal_co_view() {
        let events = vec![ev(1, "v1", "r1", Action::View), ev(2, "v1", "r2", Action::View)];
        assert_eq!(co_view_recommend(&events, "r1", 5).unwrap(), vec![("r2".to_string(), 1)]);
    }

    #[test]
    fn strength_counts_distinct_visitors() {
        let mut events: Vec<_> = (0..5).map(|i| ev(i + 1, "v1", "r1", Action::View)).collect();
        events.push(ev(9, "v1", "r2", Action::View));
        assert_eq!(co_view_recommend(&events, "r1", 5).unwrap(), vec![("r2".to_string(), 1)]);
    }

    #[test]
    fn downloads_do_not_co_view() {
        let events = vec![ev(1, "v1", "r1", Action::View), ev(2, "v1", "r2", Action::Download)];
        assert!(co_view_recommend(&events, "r1", 5).unwrap().is_empty());
        // r2 is known through its download, so asking about it is not an error
        assert!(co_view_recommend(&events, "r2", 5).unwrap().is_empty());
    }

    #[test]
    fn unknown_target_is_an_error() {
        let events = vec![ev(1, "v1", "r1", Action::View)];
        assert_eq!(
            co_view_recommend(&events, "missing-id", 5),
            Err(UsageError::UnknownRecord("missing-id".into()))
        );
    }

    fn arb_events() -> impl Strategy<Value = Vec<UsageEvent>> {
        proptest::collection::vec(
            (1i64..100, 0u8..6, 0u8..8, prop::bool::ANY).prop_map(|(t, v, r, view)| {
                ev(
                    t,
                    &format!("v{v}"),
                    &format!("r{r}"),
                    if view { Action::View } else { Action::Download },
                )
            }),
            0..80,
        )
    }

    proptest! {
        #[test]
        fn unbounded_top_k_sums_to_event_count(events in arb_events(), lo in 1i64..100, w in 0i64..100) {
            let window = Some((lo, lo + w));
            let rows = top_k(&events, Action::View, usize::MAX, window).unwrap();
            let expected = events
                .iter()
                .filter(|e| e.action == Action::View && e.timestamp >= lo && e.timestamp <= lo + w)
                .count();
            prop_assert_eq!(rows.iter().map(|r| r.1).sum::<usize>(), expected);
        }

        #[test]
        fn shrinking_window_never_raises_counts(events in arb_events(), lo in 1i64..50, w in 0i64..50, cut in 0i64..50) {
            let wide: HashMap<_, _> = top_k(&events, Action::View, usize::MAX, Some((lo, lo + w + cut))).unwrap().into_iter().collect();
            for (id, c) in top_k(&events, Action::View, usize::MAX, Some((lo, lo + w))).unwrap() {
                prop_assert!(c <= wide[&id]);
            }
        }

        #[test]
        fn reports_ignore_event_order(events in arb_events(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = events.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(
                top_k(&events, Action::Download, 5, None).unwrap(),
                top_k(&shuffled, Action::Download, 5, None).unwrap()
            );
            if let Some(first) = events.first() {
                prop_assert_eq!(
                    co_view_recommend(&events, &first.record_id, 5).unwrap(),
                    co_view_recommend(&shuffled, &first.record_id, 5).unwrap()
                );
            }
        }

        #[test]
        fn co_view_is_symmetric(events in arb_events()) {
            let idx = CoViewIndex::build(&events);
            let records: Vec<&str> = idx.records().into_iter().collect();
            let all: HashMap<&str, HashMap<String, usize>> = records
                .iter()
                .map(|r| (*r, idx.recommend(r, usize::MAX).unwrap().into_iter().collect()))
                .collect();
            for a in &records {
                for (b, s) in &all[a] {
                    prop_assert_eq!(Some(s), all[b.as_str()].get(*a));
                }
            }
        }
    }
}
