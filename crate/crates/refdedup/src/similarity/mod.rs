//! Pairwise reference similarity features.
//!
//! Two signals feed the comparison models: how often two references appear
//! in the same n-best list (`nbest_cooccurrence`) and how similar their
//! user bases look (`item_similarity`, item-item cosine over per-user
//! request histories). A character-edit baseline lives in [`edit`].

mod edit;

pub use edit::{
    edit_baseline_match, edit_distance, word_edit_distance, EditMatchReport, MatchCounts,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::RequestLog;
use crate::error::{Error, Result};

/// Sparse symmetric reference×reference scores in [0, 1].
///
/// Entries are keyed by unordered pair with i < j; an absent entry reads
/// as 0. Most pairs never cooccur, so dense storage is never built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityMatrix {
    pub dimension: usize,
    entries: BTreeMap<(u32, u32), f64>,
}

impl SimilarityMatrix {
    pub fn new(dimension: usize) -> Self {
        SimilarityMatrix {
            dimension,
            entries: BTreeMap::new(),
        }
    }

    fn key(i: u32, j: u32) -> (u32, u32) {
        (i.min(j), i.max(j))
    }

    /// Insert a score. Panics on diagonal, out-of-range, or non-[0,1]
    /// scores — those are construction bugs, not data conditions.
    pub fn set(&mut self, i: u32, j: u32, score: f64) {
        assert_ne!(i, j, "diagonal is excluded by definition");
        assert!(
            (i as usize) < self.dimension && (j as usize) < self.dimension,
            "reference id out of range"
        );
        assert!(
            score.is_finite() && (0.0..=1.0).contains(&score),
            "score {score} outside [0, 1]"
        );
        self.entries.insert(Self::key(i, j), score);
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        if i == j {
            return 0.0;
        }
        self.entries.get(&Self::key(i, j)).copied().unwrap_or(0.0)
    }

    /// Stored (i, j, score) triples, i < j, in key order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &s)| (i, j, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Occurrence and co-occurrence counts over n-best lists.
///
/// Partial stats from log shards merge commutatively, so counting can be
/// sharded and reduced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceStats {
    /// Requests whose n-best contains the reference (top-1 included).
    pub occurrences: BTreeMap<u32, u32>,
    /// Requests whose n-best contains both members of the pair (i < j).
    pub co_occurrences: BTreeMap<(u32, u32), u32>,
}

impl CooccurrenceStats {
    pub fn count(log: &RequestLog) -> Self {
        let mut stats = CooccurrenceStats::default();
        for req in &log.requests {
            let mut ids: Vec<u32> = req
                .nbest
                .iter()
                .map(|h| log.ref_id(h).expect("indexed"))
                .collect();
            ids.sort_unstable();
            for &id in &ids {
                *stats.occurrences.entry(id).or_default() += 1;
            }
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    *stats.co_occurrences.entry((i, j)).or_default() += 1;
                }
            }
        }
        stats
    }

    pub fn merge(&mut self, other: &CooccurrenceStats) {
        for (&id, &n) in &other.occurrences {
            *self.occurrences.entry(id).or_default() += n;
        }
        for (&pair, &n) in &other.co_occurrences {
            *self.co_occurrences.entry(pair).or_default() += n;
        }
    }
}

/// n-best cooccurrence feature: c_ij = (p(r_i|r_j) + p(r_j|r_i)) / 2 with
/// p(r_i|r_j) = co(i,j) / occ(j).
pub fn nbest_cooccurrence(log: &RequestLog) -> Result<SimilarityMatrix> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let stats = CooccurrenceStats::count(log);
    let mut matrix = SimilarityMatrix::new(log.num_references());
    for (&(i, j), &co) in &stats.co_occurrences {
        let occ_i = stats.occurrences.get(&i).copied().unwrap_or(0);
        let occ_j = stats.occurrences.get(&j).copied().unwrap_or(0);
        if occ_i == 0 || occ_j == 0 {
            return Err(Error::InconsistentStats(format!(
                "pair ({i}, {j}) cooccurs {co} times but occ({i})={occ_i}, occ({j})={occ_j}"
            )));
        }
        let p_i_given_j = co as f64 / occ_j as f64;
        let p_j_given_i = co as f64 / occ_i as f64;
        matrix.set(i, j, (p_i_given_j + p_j_given_i) / 2.0);
    }
    Ok(matrix)
}

/// Aggregated request-frequency vector for one reference's user base.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryVector {
    pub ref_id: u32,
    /// counts[j] = total top-1 requests for r_j made by users who
    /// requested r_i at least once.
    pub counts: BTreeMap<u32, f64>,
}

impl HistoryVector {
    pub fn norm(&self) -> f64 {
        self.counts.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity; 0 when either vector has zero norm.
    pub fn cosine(&self, other: &HistoryVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (&self.counts, &other.counts)
        } else {
            (&other.counts, &self.counts)
        };
        let dot: f64 = small
            .iter()
            .filter_map(|(k, v)| large.get(k).map(|w| v * w))
            .sum();
        dot / denom
    }
}

/// Build the per-reference history vectors from top-1 requests.
pub fn history_vectors(log: &RequestLog) -> Vec<HistoryVector> {
    // Per-user top-1 frequency vectors.
    let mut user_counts: BTreeMap<&str, BTreeMap<u32, f64>> = BTreeMap::new();
    for req in &log.requests {
        let rid = log.ref_id(req.top1()).expect("indexed");
        *user_counts
            .entry(req.user_id.as_str())
            .or_default()
            .entry(rid)
            .or_default() += 1.0;
    }

    let mut vectors: Vec<HistoryVector> = (0..log.num_references() as u32)
        .map(|ref_id| HistoryVector {
            ref_id,
            counts: BTreeMap::new(),
        })
        .collect();
    for counts in user_counts.values() {
        for &rid in counts.keys() {
            let target = &mut vectors[rid as usize].counts;
            for (&j, &n) in counts {
                *target.entry(j).or_default() += n;
            }
        }
    }
    vectors
}

/// Item-item similarity: u_ij = cosine(U_i, U_j) over history vectors.
///
/// Only pairs whose supports can intersect are visited; everything else
/// is an implicit 0.
pub fn item_similarity(log: &RequestLog) -> Result<SimilarityMatrix> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let vectors = history_vectors(log);
    let norms: Vec<f64> = vectors.iter().map(HistoryVector::norm).collect();

    // Invert supports: dimension k → refs whose vector touches k.
    let mut touching: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for v in &vectors {
        for &k in v.counts.keys() {
            touching.entry(k).or_default().push(v.ref_id);
        }
    }
    let mut candidates: BTreeSet<(u32, u32)> = BTreeSet::new();
    for refs in touching.values() {
        for (a, &i) in refs.iter().enumerate() {
            for &j in &refs[a + 1..] {
                candidates.insert((i.min(j), i.max(j)));
            }
        }
    }

    let mut matrix = SimilarityMatrix::new(log.num_references());
    for (i, j) in candidates {
        if norms[i as usize] == 0.0 || norms[j as usize] == 0.0 {
            continue;
        }
        let u = vectors[i as usize].cosine(&vectors[j as usize]);
        if u > 0.0 {
            // Counts are non-negative, so cosine stays in [0, 1] up to
            // rounding; clamp the upper bound against f64 noise.
            matrix.set(i, j, u.min(1.0));
        }
    }
    Ok(matrix)
}
