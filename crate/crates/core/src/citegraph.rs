//! Record-to-record citation graph, citation counts, co-citation and a
//! damped link rank.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::records::BibRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown record {0:?}")]
    UnknownNode(String),
    #[error("co-citation needs two distinct records, got {0:?} twice")]
    SameNode(String),
    #[error("damping {0} outside (0, 1)")]
    InvalidDamping(f64),
    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error("link rank did not converge within {} iterations", .0.iterations)]
    NonConvergence(LinkRank),
}

/// Directed citation graph. Edges point from the citing record to the
/// cited one; there are no self-edges and no parallel edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    unresolved: usize,
}

impl CitationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<String>) {
        self.nodes.insert(id.into());
    }

    /// Adds `citing → cited`, creating both nodes. Self-citations are
    /// ignored. Returns whether a new edge was added.
    pub fn add_edge(&mut self, citing: &str, cited: &str) -> bool {
        self.nodes.insert(citing.to_string());
        self.nodes.insert(cited.to_string());
        if citing == cited {
            return false;
        }
        self.edges.insert((citing.to_string(), cited.to_string()))
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    /// Reference entries that matched no stored record.
    pub fn unresolved(&self) -> usize {
        self.unresolved
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    /// Records citing `id`.
    pub fn citers(&self, id: &str) -> BTreeSet<&str> {
        self.edges
            .iter()
            .filter(|(_, cited)| cited == id)
            .map(|(citing, _)| citing.as_str())
            .collect()
    }

    /// `citing<TAB>cited` lines in edge order.
    pub fn edge_list_tsv(&self) -> String {
        self.edges
            .iter()
            .map(|(a, b)| format!("{}\t{}\n", crate::tsv::escape(a), crate::tsv::escape(b)))
            .collect()
    }
}

/// Resolves every reference of every record against the records
/// themselves and builds the graph.
///
/// An entry resolves by exact report number first, then by exact
/// (journal, volume, page). The resolved id is written back onto the
/// entry; entries that match nothing are counted as unresolved.
pub fn build_graph(records: &mut [BibRecord]) -> CitationGraph {
    let mut by_report: HashMap<&str, &str> = HashMap::new();
    let mut by_triple: HashMap<(&str, &str, &str), &str> = HashMap::new();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].record_id.cmp(&records[b].record_id));
    for &i in &order {
        let r = &records[i];
        for rn in &r.report_numbers {
            by_report.entry(rn.as_str()).or_insert(&r.record_id);
        }
        if let (Some(j), Some(v), Some(p)) = (&r.journal, &r.volume, &r.page) {
            by_triple.entry((j.as_str(), v.as_str(), p.as_str())).or_insert(&r.record_id);
        }
    }

    let mut resolutions: Vec<Vec<Option<String>>> = Vec::with_capacity(records.len());
    for r in records.iter() {
        let row = r
            .references
            .iter()
            .map(|e| {
                e.report_numbers
                    .iter()
                    .find_map(|rn| by_report.get(rn.as_str()))
                    .or_else(|| match (&e.journal, &e.volume, &e.page) {
                        (Some(j), Some(v), Some(p)) => by_triple.get(&(j.as_str(), v.as_str(), p.as_str())),
                        _ => None,
                    })
                    .map(|id| id.to_string())
            })
            .collect();
        resolutions.push(row);
    }

    let mut graph = CitationGraph::new();
    for (record, row) in records.iter_mut().zip(resolutions) {
        graph.add_node(record.record_id.clone());
        for (entry, target) in record.references.iter_mut().zip(row) {
            match &target {
                Some(cited) => {
                    graph.add_edge(&record.record_id, cited);
                }
                None => graph.unresolved += 1,
            }
            entry.resolved_record_id = target;
        }
    }
    graph
}

/// In-degree of every node, including zeros.
pub fn citation_counts(graph: &CitationGraph) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = graph.nodes.iter().map(|n| (n.clone(), 0)).collect();
    for (_, cited) in &graph.edges {
        *counts.get_mut(cited).expect("edge endpoints are nodes") += 1;
    }
    counts
}

/// Number of distinct records citing both `a` and `b`.
pub fn cocitation(graph: &CitationGraph, a: &str, b: &str) -> Result<usize, GraphError> {
    for id in [a, b] {
        if !graph.contains(id) {
            return Err(GraphError::UnknownNode(id.to_string()));
        }
    }
    if a == b {
        return Err(GraphError::SameNode(a.to_string()));
    }
    Ok(graph.citers(a).intersection(&graph.citers(b)).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRank {
    pub scores: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped power iteration over the citation graph.
///
/// Rank flows from citing to cited records; records that cite nothing
/// spread their rank uniformly. Iteration stops when the L1 change drops
/// below `tolerance`. Nodes are visited in id order, so results are
/// bitwise reproducible. If `max_iters` is reached first the scores are
/// returned inside [`GraphError::NonConvergence`].
pub fn link_rank(
    graph: &CitationGraph,
    damping: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<LinkRank, GraphError> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(GraphError::InvalidDamping(damping));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(GraphError::InvalidTolerance(tolerance));
    }
    let ids: Vec<&String> = graph.nodes.iter().collect();
    let n = ids.len();
    if n == 0 {
        return Ok(LinkRank {
            scores: BTreeMap::new(),
            iterations: 0,
            converged: true,
        });
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (citing, cited) in &graph.edges {
        out_links[index[citing.as_str()]].push(index[cited.as_str()]);
    }

    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&i| out_links[i].is_empty()).map(|i| rank[i]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (i, links) in out_links.iter().enumerate() {
            if links.is_empty() {
                continue;
            }
            let share = damping * rank[i] / links.len() as f64;
            for &j in links {
                next[j] += share;
            }
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < tolerance {
            converged = true;
            break;
        }
    }

    let total: f64 = rank.iter().sum();
    let scores = ids
        .iter()
        .zip(&rank)
        .map(|(id, r)| ((*id).clone(), r / total))
        .collect();
    let result = LinkRank {
        scores,
        iterations,
        converged,
    };
    if converged {
        Ok(result)
    } else {
        Err(GraphError::NonConvergence(result))
    }
}
