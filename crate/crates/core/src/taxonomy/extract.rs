use std::collections::BTreeSet;

use super::tokenize::{stem, tokenize, Token};
use super::Taxonomy;

/// One controlled keyword assigned to a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordAssignment {
    pub term_id: String,
    pub display_label: String,
    pub occurrence: usize,
    /// Whole-document counts of the two components, for composites.
    pub component_counts: Option<(usize, usize)>,
}

impl KeywordAssignment {
    /// `38 [73, 121]` for composites, `39` otherwise.
    pub fn occurrence_text(&self) -> String {
        match self.component_counts {
            Some((a, b)) => format!("{} [{a}, {b}]", self.occurrence),
            None => self.occurrence.to_string(),
        }
    }
}

/// Assigns controlled keywords to a document.
///
/// Single terms are counted as non-overlapping phrase matches over the
/// stemmed token stream, taking the longest phrase at each position. A
/// composite counts the sentences in which both components matched.
/// Results are ordered by occurrence (descending), then label, then id,
/// and cut to `max_results`.
pub fn extract_keywords(
    fulltext: &str,
    taxonomy: &Taxonomy,
    max_results: usize,
) -> Vec<KeywordAssignment> {
    let tokens = tokenize(fulltext);
    let stems: Vec<Option<&str>> = tokens.iter().map(|t| t.word().map(stem)).collect();

    let mut counts = vec![0usize; taxonomy.term_count()];
    let mut sentences: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    let trie = taxonomy.phrases();
    let mut i = 0;
    while i < stems.len() {
        if matches!(tokens[i], Token::SentenceEnd) {
            sentences.push(BTreeSet::new());
            i += 1;
            continue;
        }
        match trie.longest_match(&stems[i..]) {
            Some((term, len)) => {
                counts[term] += 1;
                sentences.last_mut().expect("non-empty").insert(term);
                i += len;
            }
            None => i += 1,
        }
    }

    let mut out = Vec::new();
    for (idx, &count) in counts.iter().enumerate() {
        let term = taxonomy.term_at(idx);
        match &term.composite_of {
            None if count > 0 => out.push(KeywordAssignment {
                term_id: term.term_id.clone(),
                display_label: term.pref_label.clone(),
                occurrence: count,
                component_counts: None,
            }),
            None => {}
            Some((a, b)) => {
                let (Some(ia), Some(ib)) = (taxonomy.index_of(a), taxonomy.index_of(b)) else {
                    continue;
                };
                let together = sentences
                    .iter()
                    .filter(|s| s.contains(&ia) && s.contains(&ib))
                    .count();
                if together > 0 {
                    out.push(KeywordAssignment {
                        term_id: term.term_id.clone(),
                        display_label: term.pref_label.clone(),
                        occurrence: together,
                        component_counts: Some((counts[ia], counts[ib])),
                    });
                }
            }
        }
    }

    out.sort_by(|x, y| {
        y.occurrence
            .cmp(&x.occurrence)
            .then_with(|| x.display_label.cmp(&y.display_label))
            .then_with(|| x.term_id.cmp(&y.term_id))
    });
    out.truncate(max_results);
    out
}
