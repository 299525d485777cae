//! Cluster-quality metrics: repeat-pair recall, resolution precision, F1.
//!
//! Recall asks how many independently mined repeat pairs land inside one
//! cluster, so it checks the transitive closure. Precision audits the
//! edges actually emitted: among output edges whose endpoints both carry a
//! click resolution, how many link references of the same entity.

mod wer;

pub use wer::{simulate_wer, WerReport, WerScope};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clustering::{connected_components, AdjacencyMatrix};

/// Recall of mined repeat pairs against the cluster closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecall {
    /// None when no known pairs exist to measure against.
    pub recall: Option<f64>,
    pub tp: usize,
    pub fn_: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Precision over resolved intra-cluster pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPrecision {
    /// None when no closure edge has both endpoints resolved.
    pub precision: Option<f64>,
    pub fp: usize,
    pub evaluated_edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One row of a dedup-quality comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub model: String,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub evaluated_edges: usize,
    pub known_pairs: usize,
}

/// Fraction of known pairs that share a connected component.
pub fn recall(output: &AdjacencyMatrix, known_pairs: &BTreeSet<(u32, u32)>) -> PairRecall {
    if known_pairs.is_empty() {
        return PairRecall {
            recall: None,
            tp: 0,
            fn_: 0,
            note: Some("no mined repeat pairs; recall undefined".into()),
        };
    }
    let clusters = connected_components(output);
    let in_range = |r: u32| (r as usize) < output.dimension();
    let mut tp = 0usize;
    for &(a, b) in known_pairs {
        if in_range(a) && in_range(b) && clusters.same_cluster(a, b) {
            tp += 1;
        }
    }
    let fn_ = known_pairs.len() - tp;
    PairRecall {
        recall: Some(tp as f64 / known_pairs.len() as f64),
        tp,
        fn_,
        note: None,
    }
}

/// Over output edges with both endpoints resolved: the fraction linking
/// references of the same entity.
pub fn precision(output: &AdjacencyMatrix, resolutions: &BTreeMap<u32, String>) -> PairPrecision {
    let mut evaluated = 0usize;
    let mut fp = 0usize;
    for (a, b) in output.edges() {
        let (Some(entity_a), Some(entity_b)) = (resolutions.get(&a), resolutions.get(&b)) else {
            continue;
        };
        evaluated += 1;
        if entity_a != entity_b {
            fp += 1;
        }
    }
    if evaluated == 0 {
        return PairPrecision {
            precision: None,
            fp: 0,
            evaluated_edges: 0,
            note: Some("no output edge has both endpoints resolved; precision undefined".into()),
        };
    }
    PairPrecision {
        precision: Some((evaluated - fp) as f64 / evaluated as f64),
        fp,
        evaluated_edges: evaluated,
        note: None,
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Assemble the full metric row for one clustering output.
pub fn evaluate_clusters(
    output: &AdjacencyMatrix,
    known_pairs: &BTreeSet<(u32, u32)>,
    resolutions: &BTreeMap<u32, String>,
    dataset: &str,
    model: &str,
) -> EvalReport {
    let r = recall(output, known_pairs);
    let p = precision(output, resolutions);
    let f = match (p.precision, r.recall) {
        (Some(p), Some(r)) => Some(f1(p, r)),
        _ => None,
    };
    EvalReport {
        dataset: dataset.to_string(),
        model: model.to_string(),
        recall: r.recall,
        precision: p.precision,
        f1: f,
        tp: r.tp,
        fn_: r.fn_,
        fp: p.fp,
        evaluated_edges: p.evaluated_edges,
        known_pairs: known_pairs.len(),
    }
}
