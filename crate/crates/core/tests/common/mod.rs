//! Fixtures and independent oracles shared by the integration tests and
//! the acceptance target. Oracles deliberately avoid the library's own
//! helpers beyond plain data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use biblioforge::alerts::AlertSubscription;
use biblioforge::records::match_query;
use biblioforge::taxonomy::KeywordAssignment;
use biblioforge::usage::{Action, UsageEvent};
use biblioforge::{BibRecord, Taxonomy};
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

pub mod pipeline;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

// ---------------------------------------------------------------- keywords

fn oracle_stem(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    if chars.last() == Some(&'s') && chars.len() > 3 {
        chars[..chars.len() - 1].iter().collect()
    } else {
        word.to_string()
    }
}

/// Sentences of stemmed lowercase words.
pub fn oracle_sentences(text: &str) -> Vec<Vec<String>> {
    let boundary = Regex::new(r"[.?!](?:\s|$)").unwrap();
    let word = Regex::new(r"[\p{Alphabetic}\p{N}]+(?:-[\p{Alphabetic}\p{N}]+)*").unwrap();
    boundary
        .split(text)
        .map(|s| {
            word.find_iter(s)
                .map(|m| oracle_stem(&m.as_str().to_lowercase()))
                .collect()
        })
        .collect()
}

/// Naive O(tokens x labels) keyword scan: at each position try every
/// label of every non-composite term and keep the longest match.
pub fn naive_keywords(text: &str, tax: &Taxonomy, max: usize) -> Vec<KeywordAssignment> {
    let word = Regex::new(r"[\p{Alphabetic}\p{N}]+(?:-[\p{Alphabetic}\p{N}]+)*").unwrap();
    let mut labels: Vec<(Vec<String>, String)> = Vec::new();
    for term in tax.terms().filter(|t| t.composite_of.is_none()) {
        for label in std::iter::once(&term.pref_label).chain(&term.alt_labels) {
            let phrase: Vec<String> = word
                .find_iter(label)
                .map(|m| oracle_stem(&m.as_str().to_lowercase()))
                .collect();
            labels.push((phrase, term.term_id.clone()));
        }
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_sentence: Vec<BTreeSet<String>> = Vec::new();
    for sentence in oracle_sentences(text) {
        let mut seen = BTreeSet::new();
        let mut i = 0;
        while i < sentence.len() {
            let mut best: Option<(usize, &str)> = None;
            for (phrase, id) in &labels {
                let n = phrase.len();
                if n > 0
                    && i + n <= sentence.len()
                    && sentence[i..i + n] == phrase[..]
                    && best.is_none_or(|(len, _)| n > len)
                {
                    best = Some((n, id));
                }
            }
            match best {
                Some((n, id)) => {
                    *counts.entry(id.to_string()).or_default() += 1;
                    seen.insert(id.to_string());
                    i += n;
                }
                None => i += 1,
            }
        }
        per_sentence.push(seen);
    }
    let mut out = Vec::new();
    for term in tax.terms() {
        match &term.composite_of {
            None => {
                let c = counts.get(&term.term_id).copied().unwrap_or(0);
                if c > 0 {
                    out.push(KeywordAssignment {
                        term_id: term.term_id.clone(),
                        display_label: term.pref_label.clone(),
                        occurrence: c,
                        component_counts: None,
                    });
                }
            }
            Some((a, b)) => {
                let both = per_sentence.iter().filter(|s| s.contains(a) && s.contains(b)).count();
                if both > 0 {
                    let ca = counts.get(a).copied().unwrap_or(0);
                    let cb = counts.get(b).copied().unwrap_or(0);
                    out.push(KeywordAssignment {
                        term_id: term.term_id.clone(),
                        display_label: term.pref_label.clone(),
                        occurrence: both,
                        component_counts: Some((ca, cb)),
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| {
        y.occurrence
            .cmp(&x.occurrence)
            .then(x.display_label.cmp(&y.display_label))
            .then(x.term_id.cmp(&y.term_id))
    });
    out.truncate(max);
    out
}

const DOC_WORDS: &[&str] = &[
    "gravitation", "gravity", "Gravity", "gravities", "quantum", "dilaton", "dilatons",
    "black", "hole", "holes", "Schwarzschild", "solution", "fermion", "fermions", "field",
    "fields", "theory", "scalar", "scalars", "quantization", "quantisation",
    "nonperturbative", "non-perturbative", "ghost", "ghosts", "Poisson", "bracket",
    "brackets", "Minkowski", "space", "bosonization", "Dirac", "equation", "magnetic",
    "moment", "moments", "two-dimensional", "2D", "physics", "the", "a", "of", "we",
    "study", "is", "and", "in", "model", "gas", "its", "this",
];

const DOC_PUNCT: &[&str] = &[" ", " ", " ", " ", " ", ", ", ". ", "? ", "! ", " - ", "; ", ".", " (", ") "];

/// Random document of at most `max_tokens` words built from taxonomy
/// words, plurals, fillers and punctuation.
pub fn random_keyword_doc<R: Rng>(rng: &mut R, max_tokens: usize) -> String {
    let n = rng.gen_range(0..=max_tokens);
    let mut doc = String::new();
    for _ in 0..n {
        doc.push_str(DOC_WORDS.choose(rng).unwrap());
        doc.push_str(DOC_PUNCT.choose(rng).unwrap());
    }
    doc
}

// -------------------------------------------------------------- link rank

/// Solves the damped rank equations exactly with Gaussian elimination
/// over the dense n x n transition matrix:
/// `(I - d M) x = (1 - d)/n`, where column i of M spreads node i's rank
/// over its out-links, or uniformly when it has none.
pub fn dense_rank(n: usize, edges: &[(usize, usize)], d: f64) -> Vec<f64> {
    let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            out[a].insert(b);
        }
    }
    let nf = n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        if out[i].is_empty() {
            for row in m.iter_mut() {
                row[i] = 1.0 / nf;
            }
        } else {
            for &j in &out[i] {
                m[j][i] = 1.0 / out[i].len() as f64;
            }
        }
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = if r == c { 1.0 } else { 0.0 } - d * m[r][c];
        }
        a[r][n] = (1.0 - d) / nf;
    }
    #[allow(clippy::needless_range_loop)]
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let x: Vec<f64> = (0..n).map(|r| a[r][n] / a[r][r]).collect();
    let total: f64 = x.iter().sum();
    x.into_iter().map(|v| v / total).collect()
}

// ------------------------------------------------------------------ usage

pub fn brute_top_k(events: &[UsageEvent], action: Action, k: usize, window: Option<(i64, i64)>) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in events {
        let inside = match window {
            Some((lo, hi)) => lo <= e.timestamp && e.timestamp <= hi,
            None => true,
        };
        if e.action == action && inside {
            *counts.entry(e.record_id.clone()).or_default() += 1;
        }
    }
    let mut rows: Vec<(String, usize)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

pub fn visitor_sets(events: &[UsageEvent]) -> BTreeMap<String, BTreeSet<String>> {
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for e in events.iter().filter(|e| e.action == Action::View) {
        sets.entry(e.record_id.clone()).or_default().insert(e.visitor_id.clone());
    }
    sets
}

/// Pairwise visitor-set intersection; `None` when the target never
/// appears in any event.
pub fn brute_coview(events: &[UsageEvent], sets: &BTreeMap<String, BTreeSet<String>>, target: &str, k: usize) -> Option<Vec<(String, usize)>> {
    if !events.iter().any(|e| e.record_id == target) {
        return None;
    }
    let empty = BTreeSet::new();
    let mine = sets.get(target).unwrap_or(&empty);
    let mut rows: Vec<(String, usize)> = sets
        .iter()
        .filter(|(id, _)| id.as_str() != target)
        .map(|(id, vs)| (id.clone(), vs.intersection(mine).count()))
        .filter(|(_, c)| *c > 0)
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.truncate(k);
    Some(rows)
}

/// Synthetic log with Zipf-like record popularity.
pub fn synthetic_events<R: Rng>(rng: &mut R, n: usize, records: usize, visitors: usize) -> Vec<UsageEvent> {
    let weights: Vec<f64> = (1..=records).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    (0..n)
        .map(|_| {
            let mut x = rng.gen::<f64>() * total;
            let mut r = 0;
            while r + 1 < records && x >= weights[r] {
                x -= weights[r];
                r += 1;
            }
            UsageEvent {
                timestamp: 1_136_073_600 + rng.gen_range(0..86_400 * 30),
                visitor_id: format!("v{}", rng.gen_range(0..visitors)),
                record_id: format!("r{r:04}"),
                action: if rng.gen_bool(0.7) { Action::View } else { Action::Download },
            }
        })
        .collect()
}

// ----------------------------------------------------------------- alerts

/// Every (alert, record) pair the subscription should ever report up to
/// `upto`, replayed in one pass from registration.
pub fn alert_oracle(records: &[BibRecord], subs: &[AlertSubscription], upto: i64) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for s in subs {
        for r in records {
            let Some(t) = r.ingest_time else { continue };
            if s.created < t && t <= upto && match_query(&s.query, r) {
                out.insert((s.alert_id.clone(), r.record_id.clone()));
            }
        }
    }
    out
}

const TRIAL_AUTHORS: &[&str] = &["Okafor", "Lindqvist", "Simko", "Grumiller", "Kummer"];
const TRIAL_WORDS: &[&str] = &["dilaton", "gravity", "access", "library", "black", "hole"];

fn trial_query<R: Rng>(rng: &mut R) -> biblioforge::FieldQuery {
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        clauses.push(match rng.gen_range(0..4) {
            0 => format!("author:contains:{}", TRIAL_AUTHORS.choose(rng).unwrap().to_lowercase()),
            1 => format!("title:contains:{}", TRIAL_WORDS.choose(rng).unwrap()),
            2 => {
                let lo = rng.gen_range(1990..2008);
                format!("year:range:{lo}..{}", lo + rng.gen_range(0..6))
            }
            _ => format!("any:contains:{}", TRIAL_WORDS.choose(rng).unwrap()),
        });
    }
    biblioforge::FieldQuery::parse(&clauses).unwrap()
}

/// Outcome of one randomized ingest/register/batch interleaving.
pub struct AlertTrial {
    pub duplicates: usize,
    pub missing: usize,
    pub spurious: usize,
    pub order_sensitive: bool,
}

impl AlertTrial {
    pub fn ok(&self) -> bool {
        self.duplicates == 0 && self.missing == 0 && self.spurious == 0 && !self.order_sensitive
    }
}

/// Random interleaving of ingests (at most 100 records), registrations
/// (at most 10) and batches (at most 10, the last one flushing), on a
/// strictly increasing clock. Compares the notification history with a
/// single replay from registration.
pub fn alert_trial<R: Rng>(rng: &mut R) -> AlertTrial {
    use biblioforge::alerts::run_alert_batch;

    let mut records: Vec<BibRecord> = Vec::new();
    let mut subs: Vec<AlertSubscription> = Vec::new();
    let mut registered: Vec<AlertSubscription> = Vec::new();
    let mut history: Vec<(String, String)> = Vec::new();
    let mut order_sensitive = false;
    let mut t = 1_000;
    let mut batches = 0;
    let max_records = rng.gen_range(1..=100);
    let max_subs = rng.gen_range(1..=10);
    let max_batches = rng.gen_range(1..=10);
    while batches < max_batches {
        t += rng.gen_range(1..5);
        let last = batches + 1 == max_batches;
        match if last { 2 } else { rng.gen_range(0..3) } {
            0 if records.len() < max_records => {
                for _ in 0..rng.gen_range(1..=10).min(max_records - records.len()) {
                    let id = format!("r{:03}", records.len());
                    let mut r = BibRecord::new(
                        id,
                        format!("{} {}", TRIAL_WORDS.choose(rng).unwrap(), TRIAL_WORDS.choose(rng).unwrap()),
                    );
                    r.authors = vec![TRIAL_AUTHORS.choose(rng).unwrap().to_string()];
                    r.year = Some(rng.gen_range(1990..2008));
                    r.ingest_time = Some(t);
                    records.push(r);
                }
            }
            1 if subs.len() < max_subs => {
                let sub = AlertSubscription {
                    alert_id: format!("a{}", subs.len() + 1),
                    query: trial_query(rng),
                    owner: "o".into(),
                    created: t,
                    last_run: t,
                };
                registered.push(sub.clone());
                subs.push(sub);
            }
            2 => {
                let mut shuffled = subs.clone();
                shuffled.shuffle(rng);
                let notes = run_alert_batch(&records, &mut subs, t);
                let shuffled_notes = run_alert_batch(&records, &mut shuffled, t);
                order_sensitive |= notes != shuffled_notes;
                for n in notes {
                    for r in n.record_ids {
                        history.push((n.alert_id.clone(), r));
                    }
                }
                batches += 1;
            }
            _ => {}
        }
    }
    let seen: BTreeSet<(String, String)> = history.iter().cloned().collect();
    let want = alert_oracle(&records, &registered, t);
    AlertTrial {
        duplicates: history.len() - seen.len(),
        missing: want.difference(&seen).count(),
        spurious: seen.difference(&want).count(),
        order_sensitive,
    }
}
