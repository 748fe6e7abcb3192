use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::exec::Execution;
use crate::layout::Embedder;
use crate::model::UseCase;

use super::IngestError;

pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.92;

/// Uses folded into one representative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeCluster {
    pub representative: String,
    /// Distinct ids of the member uses, sorted.
    pub member_use_ids: Vec<String>,
    pub member_incident_ids: BTreeSet<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeReport {
    pub threshold: f64,
    /// Number of use pairs whose similarity was compared.
    pub pairwise_decisions: usize,
    /// Pairs at or above the threshold.
    pub similar_pairs: usize,
    pub clusters: Vec<MergeCluster>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Text embedded to compare uses for merging.
pub fn merge_text(u: &UseCase) -> String {
    u.component_text()
}

/// Single-linkage clustering of uses whose embeddings have cosine
/// similarity at or above `threshold`. Uses with equal ids always share a
/// cluster. Each cluster becomes its member with the smallest id, carrying
/// the union of the members' incident ids. Output is sorted by id.
pub fn merge_similar(uses: &[UseCase], embedder: &dyn Embedder, threshold: f64) -> Result<(Vec<UseCase>, MergeReport), IngestError> {
    merge_similar_with(uses, embedder, threshold, Execution::default())
}

pub fn merge_similar_with(
    uses: &[UseCase],
    embedder: &dyn Embedder,
    threshold: f64,
    exec: Execution,
) -> Result<(Vec<UseCase>, MergeReport), IngestError> {
    let groups = cluster(uses, embedder, threshold, exec)?;
    Ok(assemble(uses, groups.clusters, threshold, groups.pairs, groups.similar))
}

/// Like [`merge_similar_with`], but every cluster of more than one distinct
/// use is passed to `confirm`; rejected clusters are kept apart (only exact
/// id duplicates are still folded).
pub fn merge_with_review<F>(
    uses: &[UseCase],
    embedder: &dyn Embedder,
    threshold: f64,
    exec: Execution,
    mut confirm: F,
) -> Result<(Vec<UseCase>, MergeReport), IngestError>
where
    F: FnMut(&[&UseCase]) -> bool,
{
    let groups = cluster(uses, embedder, threshold, exec)?;
    let mut reviewed = Vec::new();
    for members in groups.clusters {
        let distinct: BTreeMap<&str, &UseCase> = members.iter().map(|&i| (uses[i].id.as_str(), &uses[i])).collect();
        if distinct.len() > 1 && !confirm(&distinct.values().copied().collect::<Vec<_>>()) {
            let mut by_id: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for i in members {
                by_id.entry(&uses[i].id).or_default().push(i);
            }
            reviewed.extend(by_id.into_values());
        } else {
            reviewed.push(members);
        }
    }
    Ok(assemble(uses, reviewed, threshold, groups.pairs, groups.similar))
}

struct Clusters {
    clusters: Vec<Vec<usize>>,
    pairs: usize,
    similar: usize,
}

fn cluster(uses: &[UseCase], embedder: &dyn Embedder, threshold: f64, exec: Execution) -> Result<Clusters, IngestError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(IngestError::InvalidThreshold(threshold));
    }
    let n = uses.len();
    let texts: Vec<String> = uses.iter().map(merge_text).collect();
    let vectors = embedder.embed_batch(&texts, exec)?;
    let edges: Vec<Vec<usize>> = exec.map_range(n, |i| {
        ((i + 1)..n)
            .filter(|&j| uses[i].id == uses[j].id || vectors[i].cosine(&vectors[j]) >= threshold)
            .collect()
    });
    let mut uf = UnionFind::new(n);
    let mut similar = 0;
    for (i, row) in edges.iter().enumerate() {
        similar += row.len();
        for &j in row {
            uf.union(i, j);
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf.find(i);
        by_root.entry(r).or_default().push(i);
    }
    Ok(Clusters { clusters: by_root.into_values().collect(), pairs: n * n.saturating_sub(1) / 2, similar })
}

fn assemble(uses: &[UseCase], groups: Vec<Vec<usize>>, threshold: f64, pairs: usize, similar: usize) -> (Vec<UseCase>, MergeReport) {
    let mut merged = Vec::with_capacity(groups.len());
    let mut clusters = Vec::with_capacity(groups.len());
    for members in groups {
        let rep = *members.iter().min_by(|&&a, &&b| uses[a].id.cmp(&uses[b].id).then(a.cmp(&b))).expect("clusters are non-empty");
        let mut u = uses[rep].clone();
        let incidents: BTreeSet<u64> = members.iter().flat_map(|&i| uses[i].source_incident_ids.iter().copied()).collect();
        let ids: BTreeSet<&str> = members.iter().map(|&i| uses[i].id.as_str()).collect();
        u.source_incident_ids = incidents.clone();
        clusters.push(MergeCluster {
            representative: u.id.clone(),
            member_use_ids: ids.into_iter().map(str::to_string).collect(),
            member_incident_ids: incidents,
        });
        merged.push(u);
    }
    merged.sort_by(|a, b| a.id.cmp(&b.id));
    clusters.sort_by(|a, b| a.representative.cmp(&b.representative));
    (merged, MergeReport { threshold, pairwise_decisions: pairs, similar_pairs: similar, clusters })
}
