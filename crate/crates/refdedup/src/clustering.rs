//! Graph clustering of coreferent references.
//!
//! Similarity or classifier output becomes an adjacency matrix over
//! reference ids; connected components of that graph are the clusters.
//! Blocking is a single block for this domain, with a partition hook for
//! multi-class corpora.

use std::collections::BTreeSet;

use crate::comparison::ComparisonModel;
use crate::corpus::RequestLog;
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            // Path halving: point at the grandparent while walking up.
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    /// Merge the sets holding `a` and `b`; false when already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Undirected graph over reference ids, stored as normalized (i, j) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    dimension: usize,
    edges: BTreeSet<(u32, u32)>,
}

impl AdjacencyMatrix {
    pub fn new(dimension: usize) -> Self {
        AdjacencyMatrix {
            dimension,
            edges: BTreeSet::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn add_edge(&mut self, i: u32, j: u32) {
        assert_ne!(i, j, "self-edges are not representable");
        assert!(
            (i as usize) < self.dimension && (j as usize) < self.dimension,
            "edge ({i}, {j}) outside dimension {}",
            self.dimension
        );
        self.edges.insert((i.min(j), i.max(j)));
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        i != j && self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Clusters as an exact partition of 0..dimension, ordered by smallest
/// member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSet {
    clusters: Vec<Vec<u32>>,
    cluster_of: Vec<u32>,
}

impl ClusterSet {
    /// Rebuild a cluster set from stored member lists, validating that they
    /// form an exact partition of 0..num_references.
    pub fn from_parts(clusters: Vec<Vec<u32>>, num_references: usize) -> Result<Self> {
        let mut cluster_of = vec![u32::MAX; num_references];
        let mut seen = 0usize;
        for (cid, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::config("clusters", format!("cluster {cid} is empty")));
            }
            for &rid in members {
                let slot = cluster_of.get_mut(rid as usize).ok_or_else(|| {
                    Error::config("clusters", format!("reference {rid} out of range"))
                })?;
                if *slot != u32::MAX {
                    return Err(Error::config(
                        "clusters",
                        format!("reference {rid} appears twice"),
                    ));
                }
                *slot = cid as u32;
                seen += 1;
            }
        }
        if seen != num_references {
            return Err(Error::config(
                "clusters",
                format!("{seen} references clustered, expected {num_references}"),
            ));
        }
        Ok(ClusterSet {
            clusters,
            cluster_of,
        })
    }

    pub fn clusters(&self) -> &[Vec<u32>] {
        &self.clusters
    }

    pub fn cluster_of(&self, ref_id: u32) -> u32 {
        self.cluster_of[ref_id as usize]
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn num_refs(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn same_cluster(&self, a: u32, b: u32) -> bool {
        self.cluster_of[a as usize] == self.cluster_of[b as usize]
    }
}

/// All references of the log as one block.
pub fn make_block(log: &RequestLog) -> Vec<u32> {
    (0..log.num_references() as u32).collect()
}

/// Partition references into blocks keyed by a caller-supplied function.
pub fn make_blocks<K, F>(log: &RequestLog, key: F) -> Vec<Vec<u32>>
where
    K: Ord,
    F: Fn(&str) -> K,
{
    let mut by_key: std::collections::BTreeMap<K, Vec<u32>> = std::collections::BTreeMap::new();
    for rid in 0..log.num_references() as u32 {
        by_key
            .entry(key(log.ref_string(rid)))
            .or_default()
            .push(rid);
    }
    by_key.into_values().collect()
}

/// Edge (i, j) iff s_ij ≥ tau. Absent entries score 0, so tau = 0 yields
/// the complete graph.
pub fn threshold_adjacency(s: &SimilarityMatrix, tau: f64) -> Result<AdjacencyMatrix> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidThreshold(tau));
    }
    let mut adj = AdjacencyMatrix::new(s.dimension);
    if tau == 0.0 {
        for i in 0..s.dimension as u32 {
            for j in i + 1..s.dimension as u32 {
                adj.add_edge(i, j);
            }
        }
        return Ok(adj);
    }
    for (i, j, score) in s.entries() {
        if score >= tau {
            adj.add_edge(i, j);
        }
    }
    Ok(adj)
}

/// Edge iff the model classifies the pair as a link. Pairs absent from
/// both matrices carry (0, 0) and are skipped as guaranteed negatives.
pub fn classifier_adjacency(
    model: &ComparisonModel,
    block: &[u32],
    c: &SimilarityMatrix,
    u: &SimilarityMatrix,
) -> AdjacencyMatrix {
    let dimension = c.dimension.max(u.dimension);
    let mut adj = AdjacencyMatrix::new(dimension);
    for (k, &i) in block.iter().enumerate() {
        for &j in &block[k + 1..] {
            let features = (c.get(i, j), u.get(i, j));
            if features == (0.0, 0.0) {
                continue;
            }
            if model.classify(features) == 1 {
                adj.add_edge(i, j);
            }
        }
    }
    adj
}

/// Connected components of the graph, singletons included.
pub fn connected_components(adj: &AdjacencyMatrix) -> ClusterSet {
    let n = adj.dimension();
    let mut forest = UnionFind::new(n);
    for (i, j) in adj.edges() {
        forest.union(i, j);
    }
    let mut root_to_cluster: std::collections::BTreeMap<u32, u32> =
        std::collections::BTreeMap::new();
    let mut clusters: Vec<Vec<u32>> = Vec::new();
    let mut cluster_of = vec![0u32; n];
    for rid in 0..n as u32 {
        let root = forest.find(rid);
        let cid = *root_to_cluster.entry(root).or_insert_with(|| {
            clusters.push(Vec::new());
            (clusters.len() - 1) as u32
        });
        clusters[cid as usize].push(rid);
        cluster_of[rid as usize] = cid;
    }
    ClusterSet {
        clusters,
        cluster_of,
    }
}

/// Tau maximizing pairwise F1 of `score ≥ tau` over the labeled pairs.
///
/// Scores come from the matrix; a self-pair scores 1 since a reference
/// always matches itself. Ties resolve toward the higher, stricter tau.
pub fn tune_threshold(
    s: &SimilarityMatrix,
    pairs: &[crate::comparison::LabeledPair],
) -> Result<f64> {
    if !pairs.iter().any(|p| p.label == 1) {
        return Err(Error::NoPositiveLabels);
    }
    let scored: Vec<(f64, u8)> = pairs
        .iter()
        .map(|p| {
            let score = if p.ref_a == p.ref_b {
                1.0
            } else {
                s.get(p.ref_a, p.ref_b)
            };
            (score, p.label)
        })
        .collect();
    Ok(crate::comparison::best_f1_cut(&scored).0)
}
