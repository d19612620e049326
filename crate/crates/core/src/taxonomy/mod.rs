//! Controlled vocabularies and keyword assignment.
//!
//! The taxonomy file is line oriented: `term: <id>` opens a term, followed
//! by `pref:`, `alt:` (repeatable), `broader:` (repeatable) and
//! `composite: <id> + <id>` lines. A blank line closes the term. Other keys
//! are ignored and counted as warnings.

mod cluster;
mod extract;
mod tokenize;

pub use cluster::{cluster_documents, jaccard, ClusterError};
pub use extract::{extract_keywords, KeywordAssignment};
pub use tokenize::{stem, tokenize, Token};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyTerm {
    pub term_id: String,
    /// As written in the file, trimmed and single-spaced. Composites
    /// without a `pref:` line get "`<first>, <second>`".
    pub pref_label: String,
    pub alt_labels: Vec<String>,
    pub broader: Vec<String>,
    pub composite_of: Option<(String, String)>,
}

impl TaxonomyTerm {
    pub fn is_composite(&self) -> bool {
        self.composite_of.is_some()
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cyclic broader link: {}", .0.join(" -> "))]
    CyclicBroaderLink(Vec<String>),
    #[error("label {phrase:?} is used by both {} and {}", .term_ids.0, .term_ids.1)]
    DuplicateLabel {
        phrase: String,
        term_ids: (String, String),
    },
    #[error("reference to undefined term {0:?}")]
    DanglingReference(String),
    #[error("term {0:?} is defined twice")]
    DuplicateTerm(String),
    #[error("term {0:?} has no preferred label")]
    MissingPrefLabel(String),
    #[error("composite {0:?} must combine two distinct non-composite terms")]
    InvalidComposite(String),
}

/// Normalised form of a label: lowercase, single-spaced.
pub fn normalize_label(label: &str) -> String {
    label.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Token trie over stemmed label words; terminals carry a term index.
#[derive(Debug, Default, Clone)]
pub(crate) struct PhraseTrie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<String, usize>,
    term: Option<usize>,
}

impl PhraseTrie {
    fn new() -> Self {
        PhraseTrie {
            nodes: vec![TrieNode::default()],
        }
    }

    /// Inserts a phrase; returns the previous owner if the exact phrase was
    /// already present.
    fn insert(&mut self, words: &[String], term: usize) -> Option<usize> {
        let mut at = 0;
        for w in words {
            at = match self.nodes[at].children.get(w) {
                Some(&next) => next,
                None => {
                    self.nodes.push(TrieNode::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[at].children.insert(w.clone(), next);
                    next
                }
            };
        }
        match self.nodes[at].term {
            Some(prev) => Some(prev),
            None => {
                self.nodes[at].term = Some(term);
                None
            }
        }
    }

    /// Longest phrase starting at the head of `stems`, as (term, length).
    /// `None` entries are sentence ends and never match.
    pub(crate) fn longest_match(&self, stems: &[Option<&str>]) -> Option<(usize, usize)> {
        let mut at = 0;
        let mut best = None;
        for (i, stem) in stems.iter().enumerate() {
            let Some(word) = stem else { break };
            match self.nodes[at].children.get(*word) {
                Some(&next) => at = next,
                None => break,
            }
            if let Some(term) = self.nodes[at].term {
                best = Some((term, i + 1));
            }
        }
        best
    }
}

/// An immutable, validated controlled vocabulary.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    terms: BTreeMap<String, TaxonomyTerm>,
    /// Term ids in key order; indices into this are used by the matcher.
    order: Vec<String>,
    label_index: BTreeMap<String, String>,
    phrases: PhraseTrie,
    warnings: usize,
}

/// Stemmed word sequence of a label, as used for matching.
pub fn label_phrase(label: &str) -> Vec<String> {
    tokenize(label)
        .iter()
        .filter_map(Token::word)
        .map(|w| stem(w).to_string())
        .collect()
}

impl Taxonomy {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let text = fs::read_to_string(path)?;
        Taxonomy::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let (raw_terms, warnings) = parse_terms(text)?;
        Taxonomy::from_terms(raw_terms, warnings)
    }

    /// Builds a taxonomy from terms, checking references, composites,
    /// broader cycles and label collisions.
    pub fn from_terms(terms: Vec<TaxonomyTerm>, warnings: usize) -> Result<Self, TaxonomyError> {
        let mut map = BTreeMap::new();
        for term in terms {
            if map.contains_key(&term.term_id) {
                return Err(TaxonomyError::DuplicateTerm(term.term_id));
            }
            map.insert(term.term_id.clone(), term);
        }

        for term in map.values() {
            for b in &term.broader {
                if !map.contains_key(b) {
                    return Err(TaxonomyError::DanglingReference(b.clone()));
                }
            }
            if let Some((a, b)) = &term.composite_of {
                for part in [a, b] {
                    match map.get(part) {
                        None => return Err(TaxonomyError::DanglingReference(part.clone())),
                        Some(t) if t.is_composite() => {
                            return Err(TaxonomyError::InvalidComposite(term.term_id.clone()))
                        }
                        Some(_) => {}
                    }
                }
                if a == b {
                    return Err(TaxonomyError::InvalidComposite(term.term_id.clone()));
                }
            }
        }

        // Composite labels default to "first, second".
        let defaults: Vec<(String, String)> = map
            .values()
            .filter(|t| t.pref_label.is_empty())
            .map(|t| match &t.composite_of {
                Some((a, b)) => Ok((
                    t.term_id.clone(),
                    format!("{}, {}", map[a].pref_label, map[b].pref_label),
                )),
                None => Err(TaxonomyError::MissingPrefLabel(t.term_id.clone())),
            })
            .collect::<Result<_, _>>()?;
        for (id, label) in defaults {
            map.get_mut(&id).expect("term exists").pref_label = label;
        }

        check_acyclic(&map)?;

        let order: Vec<String> = map.keys().cloned().collect();
        let mut label_index = BTreeMap::new();
        let mut phrases = PhraseTrie::new();
        for (idx, id) in order.iter().enumerate() {
            let term = &map[id];
            if term.is_composite() {
                continue;
            }
            for label in std::iter::once(&term.pref_label).chain(&term.alt_labels) {
                let normalized = normalize_label(label);
                let words = label_phrase(label);
                if words.is_empty() {
                    return Err(TaxonomyError::Syntax {
                        line: 0,
                        message: format!("label {label:?} of {id} has no words"),
                    });
                }
                if let Some(prev) = phrases.insert(&words, idx) {
                    if prev != idx {
                        return Err(TaxonomyError::DuplicateLabel {
                            phrase: normalized,
                            term_ids: (order[prev].clone(), id.clone()),
                        });
                    }
                }
                label_index.insert(normalized, id.clone());
            }
        }

        Ok(Taxonomy {
            terms: map,
            order,
            label_index,
            phrases,
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: &str) -> Option<&TaxonomyTerm> {
        self.terms.get(id)
    }

    pub fn terms(&self) -> impl Iterator<Item = &TaxonomyTerm> {
        self.terms.values()
    }

    /// Normalised label → term id, for non-composite terms.
    pub fn label_index(&self) -> &BTreeMap<String, String> {
        &self.label_index
    }

    pub fn lookup_label(&self, label: &str) -> Option<&TaxonomyTerm> {
        self.label_index
            .get(&normalize_label(label))
            .and_then(|id| self.terms.get(id))
    }

    /// Number of ignored lines with unsupported keys.
    pub fn warnings(&self) -> usize {
        self.warnings
    }

    /// All ancestors of a term along broader links, excluding the term.
    pub fn broader_closure(&self, id: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(term) = self.terms.get(cur) {
                for b in &term.broader {
                    if seen.insert(b.clone()) {
                        stack.push(b);
                    }
                }
            }
        }
        seen
    }

    pub(crate) fn term_at(&self, idx: usize) -> &TaxonomyTerm {
        &self.terms[&self.order[idx]]
    }

    pub(crate) fn index_of(&self, id: &str) -> Option<usize> {
        self.order.binary_search_by(|t| t.as_str().cmp(id)).ok()
    }

    pub(crate) fn term_count(&self) -> usize {
        self.order.len()
    }

    pub(crate) fn phrases(&self) -> &PhraseTrie {
        &self.phrases
    }
}

fn check_acyclic(map: &BTreeMap<String, TaxonomyTerm>) -> Result<(), TaxonomyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unseen,
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = map.keys().map(|k| (k.as_str(), Mark::Unseen)).collect();

    fn visit<'a>(
        id: &'a str,
        map: &'a BTreeMap<String, TaxonomyTerm>,
        marks: &mut HashMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Result<(), TaxonomyError> {
        match marks[id] {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let start = path.iter().position(|p| *p == id).unwrap_or(0);
                let mut chain: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                chain.push(id.to_string());
                return Err(TaxonomyError::CyclicBroaderLink(chain));
            }
            Mark::Unseen => {}
        }
        marks.insert(id, Mark::Active);
        path.push(id);
        for b in &map[id].broader {
            visit(b, map, marks, path)?;
        }
        path.pop();
        marks.insert(id, Mark::Done);
        Ok(())
    }

    for id in map.keys() {
        visit(id, map, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}

fn parse_terms(text: &str) -> Result<(Vec<TaxonomyTerm>, usize), TaxonomyError> {
    let mut terms = Vec::new();
    let mut current: Option<TaxonomyTerm> = None;
    let mut warnings = 0;

    let finish = |current: &mut Option<TaxonomyTerm>, terms: &mut Vec<TaxonomyTerm>| {
        if let Some(mut t) = current.take() {
            // Alternative labels are deduplicated after normalisation.
            let mut seen = BTreeSet::new();
            seen.insert(normalize_label(&t.pref_label));
            t.alt_labels.retain(|a| seen.insert(normalize_label(a)));
            terms.push(t);
        }
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            finish(&mut current, &mut terms);
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let syntax = |message: String| TaxonomyError::Syntax {
            line: line_no,
            message,
        };
        let (key, value) = trimmed
            .split_once(':')
            .ok_or_else(|| syntax("expected `key: value`".into()))?;
        let key = key.trim();
        let value = value.split_whitespace().collect::<Vec<_>>().join(" ");

        if key == "term" {
            finish(&mut current, &mut terms);
            if value.is_empty() {
                return Err(syntax("empty term id".into()));
            }
            current = Some(TaxonomyTerm {
                term_id: value,
                pref_label: String::new(),
                alt_labels: Vec::new(),
                broader: Vec::new(),
                composite_of: None,
            });
            continue;
        }
        let Some(term) = current.as_mut() else {
            return Err(syntax(format!("`{key}` outside of a term block")));
        };
        match key {
            "pref" => {
                if value.is_empty() {
                    return Err(syntax("empty preferred label".into()));
                }
                term.pref_label = value;
            }
            "alt" => {
                if !value.is_empty() {
                    term.alt_labels.push(value);
                }
            }
            "broader" => term.broader.push(value),
            "composite" => {
                let (a, b) = value
                    .split_once('+')
                    .ok_or_else(|| syntax("composite needs `<id> + <id>`".into()))?;
                term.composite_of = Some((a.trim().to_string(), b.trim().to_string()));
            }
            other => {
                log::warn!("taxonomy line {line_no}: ignoring unsupported key `{other}`");
                warnings += 1;
            }
        }
    }
    finish(&mut current, &mut terms);
    Ok((terms, warnings))
}
