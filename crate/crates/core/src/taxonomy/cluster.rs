use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{KeywordAssignment, Taxonomy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("similarity threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Jaccard index of two sets; two empty sets have similarity 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn term_set(assignments: &[KeywordAssignment], taxonomy: &Taxonomy) -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    for kw in assignments {
        set.insert(kw.term_id.clone());
        if let Some((a, b)) = taxonomy.term(&kw.term_id).and_then(|t| t.composite_of.as_ref()) {
            set.insert(a.clone());
            set.insert(b.clone());
        }
    }
    set
}

/// Groups documents whose keyword sets overlap.
///
/// Two documents are linked when the Jaccard index of their term sets
/// (composites expanded to their components plus themselves) reaches
/// `threshold`; clusters are the connected components. Every document
/// appears in exactly one cluster. Members are sorted, and clusters are
/// ordered by their smallest member.
pub fn cluster_documents(
    assignments: &BTreeMap<String, Vec<KeywordAssignment>>,
    taxonomy: &Taxonomy,
    threshold: f64,
) -> Result<Vec<Vec<String>>, ClusterError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ClusterError::InvalidThreshold(threshold));
    }
    let ids: Vec<&String> = assignments.keys().collect();
    let sets: Vec<BTreeSet<String>> = assignments
        .values()
        .map(|kws| term_set(kws, taxonomy))
        .collect();

    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if jaccard(&sets[i], &sets[j]) >= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    // keep the smaller index as root so ordering stays stable
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(id.to_string());
    }
    let mut clusters: Vec<Vec<String>> = groups.into_values().collect();
    for c in &mut clusters {
        c.sort();
    }
    clusters.sort();
    Ok(clusters)
}
