//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p biblioforge --test acceptance`; the target has
//! no libtest harness, so the lines always print.
//! Time limits cover the library calls only; oracles and fixture
//! generation run outside the clock.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufReader;
use std::time::{Duration, Instant};

use biblioforge::citegraph::{build_graph, citation_counts, cocitation, link_rank, CitationGraph};
use biblioforge::records::parse_records;
use biblioforge::refextract::{extract_references, normalize_journal, JournalKb, SectionLocator};
use biblioforge::taxonomy::extract_keywords;
use biblioforge::usage::{parse_log, top_k, Action, CoViewIndex, UsageEvent};
use biblioforge::{BibRecord, Taxonomy};
use common::pipeline::pipeline;
use common::{
    alert_trial, brute_coview, brute_top_k, dense_rank, fixture, naive_keywords, random_keyword_doc,
    read_fixture, synthetic_events, visitor_sets,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KB_BUDGET: Duration = Duration::from_millis(1);
const KEYWORD_BUDGET: Duration = Duration::from_secs(5);
const REFERENCE_BUDGET: Duration = Duration::from_secs(2);
const USAGE_BUDGET: Duration = Duration::from_secs(5);
const MIN_SEGMENTATION_RATE: f64 = 0.95;
const RANK_TOLERANCE: f64 = 1e-8;
const RANK_SUM_TOLERANCE: f64 = 1e-9;
const KEYWORD_DOCS: usize = 200;
const KEYWORD_MAX_TOKENS: usize = 500;
const RANDOM_GRAPHS: usize = 1000;
const RANDOM_GRAPH_NODES: usize = 50;
const RANK_GRAPHS: usize = 500;
const RANK_GRAPH_NODES: usize = 20;
const USAGE_EVENTS: usize = 100_000;
const USAGE_ORACLE_TARGETS: usize = 100;
const ALERT_TRIALS: usize = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

const KB_ROWS: &[(&str, &[&str])] = &[
    ("Astron. Astrophys.", &["A & A", "A A", "A A LETT", "A A LETTERS", "AAL"]),
    ("ACM Comput. Surv.", &["ACM COMPUTING SURVEYS"]),
    ("ACM SIGPLAN Not.", &["ACM SIGPLAN NOTICES", "ACM SN"]),
    ("IEEE J. Quantum Electron.", &["IJQE"]),
    ("J. High Energy Phys.", &["JHEP"]),
    ("New Sci.", &["NEW SCIENTIST"]),
    ("Phys. Rev., A", &["PHYSICAL REVIEW A", "PHYS REV A", "PRA"]),
];

fn journal_kb() -> Outcome {
    let kb = JournalKb::load(fixture("journals.tsv")).map_err(|e| e.to_string())?;
    let pairs: Vec<(&str, &str)> = KB_ROWS
        .iter()
        .flat_map(|(c, aliases)| aliases.iter().map(move |a| (*a, *c)))
        .collect();
    let start = Instant::now();
    let got: Vec<Option<&str>> = pairs.iter().map(|(a, _)| normalize_journal(a, &kb)).collect();
    let elapsed = start.elapsed();
    for ((alias, canonical), got) in pairs.iter().zip(&got) {
        check(*got == Some(*canonical), || format!("{alias} -> {got:?}"))?;
    }
    within(elapsed, KB_BUDGET)?;
    Ok(format!("{} aliases in {elapsed:?}", pairs.len()))
}

fn keyword_oracle() -> Outcome {
    let tax = Taxonomy::load(fixture("taxonomy20.txt")).map_err(|e| e.to_string())?;
    check(tax.len() == 20, || format!("fixture has {} terms", tax.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2006);
    let docs: Vec<String> = (0..KEYWORD_DOCS)
        .map(|_| random_keyword_doc(&mut rng, KEYWORD_MAX_TOKENS))
        .collect();
    let start = Instant::now();
    let got: Vec<_> = docs.iter().map(|d| extract_keywords(d, &tax, 20)).collect();
    let elapsed = start.elapsed();
    let mut composites = 0;
    for (i, (doc, got)) in docs.iter().zip(&got).enumerate() {
        check(*got == naive_keywords(doc, &tax, 20), || format!("doc {i} differs from oracle"))?;
        for k in got {
            if let Some((a, b)) = k.component_counts {
                composites += 1;
                check(k.occurrence <= a.min(b), || format!("doc {i}: {} breaks bound", k.occurrence_text()))?;
            }
        }
    }
    check(composites > 0, || "no composite rows exercised".into())?;
    within(elapsed, KEYWORD_BUDGET)?;
    Ok(format!("{KEYWORD_DOCS} docs, {composites} composite rows, {elapsed:?}"))
}

fn reference_pipeline() -> Outcome {
    let kb = JournalKb::load(fixture("journals.tsv")).map_err(|e| e.to_string())?;
    let locator = SectionLocator::default();
    let docs: Vec<String> = (0..20).map(|i| read_fixture(&format!("refcorpus/doc{i:02}.txt"))).collect();
    let start = Instant::now();
    let spans: Vec<_> = docs.iter().map(|d| locator.locate(d)).collect();
    let segments: Vec<_> = docs
        .iter()
        .zip(&spans)
        .map(|(d, s)| s.clone().map(|s| locator.segment(&d[s])))
        .collect();
    let parsed: Vec<_> = docs.iter().map(|d| extract_references(d, &locator, &kb)).collect();
    let elapsed = start.elapsed();

    let (mut spans_ok, mut exact, mut total, mut field_errors) = (0, 0, 0, 0);
    for (i, doc) in docs.iter().enumerate() {
        let golden = read_fixture(&format!("refcorpus/doc{i:02}.golden.tsv"));
        let mut lines = golden.lines();
        let span_start: usize = lines.next().and_then(|l| l.strip_prefix("#span_start\t")).and_then(|s| s.parse().ok()).ok_or("bad golden")?;
        let rows: Vec<Vec<&str>> = lines.filter(|l| !l.starts_with('#')).map(|l| l.split('\t').collect()).collect();
        total += rows.len();
        if spans[i] == Some(span_start..doc.len()) {
            spans_ok += 1;
        }
        let got: Vec<(String, String)> = match &segments[i] {
            Some(Ok(segs)) => segs.iter().map(|s| (s.marker.clone().unwrap_or_default(), s.text.clone())).collect(),
            _ => Vec::new(),
        };
        let got: BTreeSet<_> = got.into_iter().collect();
        exact += rows.iter().filter(|r| got.contains(&(r[0].to_string(), r[5].to_string()))).count();
        if parsed[i].len() != rows.len() {
            field_errors += rows.len();
            continue;
        }
        for (e, r) in parsed[i].iter().zip(&rows) {
            let fields = [
                e.journal.clone().unwrap_or_default(),
                e.volume.clone().unwrap_or_default(),
                e.page.clone().unwrap_or_default(),
                e.year.map(|y| y.to_string()).unwrap_or_default(),
            ];
            if fields.iter().map(String::as_str).ne(r[1..5].iter().copied()) {
                field_errors += 1;
            }
        }
    }
    let rate = exact as f64 / total as f64;
    check(spans_ok == 20, || format!("{spans_ok}/20 spans"))?;
    check(rate >= MIN_SEGMENTATION_RATE, || format!("segmentation {exact}/{total}"))?;
    check(field_errors == 0, || format!("{field_errors} entries with wrong fields"))?;
    within(elapsed, REFERENCE_BUDGET)?;
    Ok(format!("spans 20/20, entries {exact}/{total}, fields exact, {elapsed:?}"))
}

const FIXTURE_EDGES: &[(&str, &str)] = &[
    ("c02", "c01"), ("c03", "c01"), ("c03", "c02"), ("c04", "c01"), ("c04", "c02"),
    ("c05", "c03"), ("c06", "c01"), ("c06", "c02"), ("c07", "c05"), ("c08", "c03"),
    ("c09", "c08"),
];

fn citation_graph() -> Outcome {
    let kb = JournalKb::load(fixture("journals.tsv")).map_err(|e| e.to_string())?;
    let locator = SectionLocator::default();
    let mut records: Vec<BibRecord> = parse_records(&read_fixture("citecorpus/records.rec"))
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| {
            let mut r = p.record;
            let text = read_fixture(&format!("citecorpus/{}", r.fulltext_path.as_deref().unwrap_or("")));
            r.references = extract_references(&text, &locator, &kb);
            r
        })
        .collect();
    let g = build_graph(&mut records);
    let want: BTreeSet<(String, String)> = FIXTURE_EDGES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    check(g.edges() == &want, || format!("edges {:?}", g.edges()))?;
    check(g.unresolved() == 3, || format!("unresolved {}", g.unresolved()))?;
    let mut in_degree: BTreeMap<String, usize> = g.nodes().iter().map(|n| (n.clone(), 0)).collect();
    for (_, b) in &want {
        *in_degree.get_mut(b).ok_or("edge to unknown node")? += 1;
    }
    check(citation_counts(&g) == in_degree, || "counts differ from oracle".into())?;
    for a in g.nodes() {
        for b in g.nodes().iter().filter(|b| *b != a) {
            let oracle = want.iter().filter(|(c, x)| x == a && want.contains(&(c.clone(), b.clone()))).count();
            let got = cocitation(&g, a, b).map_err(|e| e.to_string())?;
            check(got == oracle, || format!("cocitation({a}, {b}) = {got}, oracle {oracle}"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for trial in 0..RANDOM_GRAPHS {
        let n = rng.gen_range(1..=RANDOM_GRAPH_NODES);
        let mut g = CitationGraph::new();
        for i in 0..n {
            g.add_node(format!("n{i}"));
        }
        for _ in 0..rng.gen_range(0..=3 * n) {
            g.add_edge(&format!("n{}", rng.gen_range(0..n)), &format!("n{}", rng.gen_range(0..n)));
        }
        let sum: usize = citation_counts(&g).values().sum();
        check(sum == g.edges().len(), || format!("graph {trial}: in-degree {sum} != {}", g.edges().len()))?;
    }
    Ok(format!("11 edges, 3 unresolved, {RANDOM_GRAPHS} random graphs conserve degree"))
}

fn link_rank_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(85);
    let mut worst: f64 = 0.0;
    for trial in 0..RANK_GRAPHS {
        let n = rng.gen_range(1..=RANK_GRAPH_NODES);
        let mut edges = Vec::new();
        let mut g = CitationGraph::new();
        for i in 0..n {
            g.add_node(format!("n{i:02}"));
        }
        for _ in 0..rng.gen_range(0..=2 * n) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                g.add_edge(&format!("n{a:02}"), &format!("n{b:02}"));
                edges.push((a, b));
            }
        }
        let rank = link_rank(&g, 0.85, 1e-12, 10_000).map_err(|e| format!("graph {trial}: {e}"))?;
        let oracle = dense_rank(n, &edges, 0.85);
        let sum: f64 = rank.scores.values().sum();
        check((sum - 1.0).abs() <= RANK_SUM_TOLERANCE, || format!("graph {trial}: sum {sum}"))?;
        for (i, want) in oracle.iter().enumerate() {
            let got = rank.scores[&format!("n{i:02}")];
            worst = worst.max((got - want).abs());
        }
        check(worst <= RANK_TOLERANCE, || format!("graph {trial}: deviation {worst:e}"))?;
    }
    let mut two = CitationGraph::new();
    two.add_edge("a", "b");
    two.add_edge("b", "a");
    let r = link_rank(&two, 0.85, 1e-12, 1000).map_err(|e| e.to_string())?;
    for id in ["a", "b"] {
        check((r.scores[id] - 0.5).abs() <= RANK_TOLERANCE, || format!("2-cycle {id} = {}", r.scores[id]))?;
    }
    Ok(format!("{RANK_GRAPHS} graphs, max deviation {worst:.1e}, 2-cycle 0.5/0.5"))
}

fn log_text(events: &[UsageEvent]) -> String {
    events
        .iter()
        .map(|e| {
            let action = if e.action == Action::View { "view" } else { "download" };
            format!("{}\t{}\t{}\t{action}\n", e.timestamp, e.visitor_id, e.record_id)
        })
        .collect()
}

fn usage_reports() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100_000);
    let events = synthetic_events(&mut rng, USAGE_EVENTS, 2_000, 5_000);
    let text = log_text(&events);
    let window = Some((1_136_073_600 + 86_400, 1_136_073_600 + 10 * 86_400));

    let start = Instant::now();
    let parsed = parse_log(BufReader::new(text.as_bytes())).map_err(|e| e.to_string())?;
    let views = top_k(&parsed.events, Action::View, 10, None).map_err(|e| e.to_string())?;
    let downloads = top_k(&parsed.events, Action::Download, 10, window).map_err(|e| e.to_string())?;
    let index = CoViewIndex::build(&parsed.events);
    let mut all: HashMap<String, HashMap<String, usize>> = HashMap::new();
    for id in index.records() {
        let rows = index.recommend(id, usize::MAX).map_err(|e| e.to_string())?;
        all.insert(id.to_string(), rows.into_iter().collect());
    }
    let elapsed = start.elapsed();

    check(parsed.events == events && parsed.skipped == 0, || "log did not round-trip".into())?;
    check(views == brute_top_k(&events, Action::View, 10, None), || "top views differ".into())?;
    check(downloads == brute_top_k(&events, Action::Download, 10, window), || "top downloads differ".into())?;
    let sets = visitor_sets(&events);
    let records: Vec<String> = index.records().into_iter().map(String::from).collect();
    let step = (records.len() / USAGE_ORACLE_TARGETS).max(1);
    for target in records.iter().step_by(step) {
        let got = index.recommend(target, 10).map_err(|e| e.to_string())?;
        check(Some(got) == brute_coview(&events, &sets, target, 10), || format!("co-view {target} differs"))?;
    }
    let mut pairs = 0;
    for (a, row) in &all {
        for (b, s) in row {
            pairs += 1;
            check(all[b].get(a) == Some(s), || format!("co-view({a}, {b}) asymmetric"))?;
        }
    }
    within(elapsed, USAGE_BUDGET)?;
    Ok(format!("{USAGE_EVENTS} events, {pairs} symmetric pairs, {elapsed:?}"))
}

fn alert_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    for trial in 0..ALERT_TRIALS {
        let t = alert_trial(&mut rng);
        check(t.ok(), || {
            format!("trial {trial}: {} duplicates, {} missing, {} spurious", t.duplicates, t.missing, t.spurious)
        })?;
    }
    Ok(format!("{ALERT_TRIALS}/{ALERT_TRIALS} trials"))
}

fn end_to_end() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    let bytes: usize = first.iter().map(String::len).sum();
    check(first == second, || "reports differ between runs".into())?;
    check(bytes > 0, || "pipeline produced no output".into())?;
    Ok(format!("{} reports, {bytes} bytes identical", first.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("journal KB fidelity", journal_kb),
        ("keyword oracle equivalence", keyword_oracle),
        ("reference pipeline", reference_pipeline),
        ("citation graph", citation_graph),
        ("link rank", link_rank_oracle),
        ("usage reports", usage_reports),
        ("alert semantics", alert_semantics),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
