//! Latent entity distribution and biasing-list selection.
//!
//! Request mass lives on surface references; summing member masses inside
//! each cluster recovers the per-entity distribution. The biasing list
//! ranks clusters by how much of their mass sits on unresolved
//! (likely-misrecognized) members and boosts each cluster's canonical form
//! under a fixed entity budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::corpus::{RequestLog, MASS_EPSILON};
use crate::error::{Error, Result};

/// Request-probability mass per cluster and per reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDistribution {
    /// Cluster id → p_e, the exact sum of member reference masses.
    pub per_cluster: BTreeMap<u32, f64>,
    /// Reference id → p_r.
    pub per_reference: BTreeMap<u32, f64>,
}

impl EntityDistribution {
    pub fn total_mass(&self) -> f64 {
        self.per_cluster.values().sum()
    }

    /// Masses must be non-negative and sum to 1 within tolerance.
    pub fn validate(&self) -> Result<()> {
        if self
            .per_cluster
            .values()
            .any(|&m| !(m.is_finite() && m >= 0.0))
        {
            return Err(Error::config(
                "distribution",
                "negative or non-finite cluster mass",
            ));
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > MASS_EPSILON {
            return Err(Error::config(
                "distribution",
                format!("cluster masses sum to {total}, expected 1"),
            ));
        }
        Ok(())
    }
}

/// One boosted entry of a biasing list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasingEntry {
    pub canonical: String,
    pub weight: f64,
    pub cluster_id: u32,
    /// Mass that drove selection: unresolved-member mass for deduplicated
    /// lists, raw reference mass for the mention-count baseline.
    pub misrecognized_mass: f64,
}

/// Budget-capped list of boost targets, sorted by descending selection
/// mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasingList {
    pub entries: Vec<BiasingEntry>,
    pub budget: usize,
}

impl BiasingList {
    /// One canonical form per line, for shallow-fusion consumers.
    pub fn to_plain_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&entry.canonical);
            out.push('\n');
        }
        out
    }
}

/// p_r: fraction of requests whose top hypothesis is each reference.
pub fn reference_probabilities(log: &RequestLog) -> Result<BTreeMap<u32, f64>> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for req in &log.requests {
        let rid = log.ref_id(req.top1()).expect("top-1 hypothesis is indexed");
        *counts.entry(rid).or_insert(0) += 1;
    }
    let n = log.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(rid, c)| (rid, c as f64 / n))
        .collect())
}

/// p_e per cluster as the exact sum of member masses.
pub fn cluster_distribution(
    clusters: &ClusterSet,
    p_r: &BTreeMap<u32, f64>,
) -> Result<EntityDistribution> {
    if let Some((&rid, _)) = p_r
        .iter()
        .find(|(&rid, &mass)| mass > 0.0 && (rid as usize) >= clusters.num_refs())
    {
        return Err(Error::config(
            "distribution",
            format!("reference {rid} carries mass but belongs to no cluster"),
        ));
    }
    let mut per_cluster: BTreeMap<u32, f64> = BTreeMap::new();
    for (cid, members) in clusters.clusters().iter().enumerate() {
        let mass = members
            .iter()
            .map(|rid| p_r.get(rid).copied().unwrap_or(0.0))
            .sum();
        per_cluster.insert(cid as u32, mass);
    }
    Ok(EntityDistribution {
        per_cluster,
        per_reference: p_r.clone(),
    })
}

/// The cluster member to bias toward: resolved members first, then highest
/// mass, then lexicographically smallest reference string.
pub fn select_canonical(
    cluster: &[u32],
    p_r: &BTreeMap<u32, f64>,
    resolutions: &BTreeMap<u32, String>,
    log: &RequestLog,
) -> u32 {
    assert!(!cluster.is_empty(), "clusters are never empty");
    let score = |rid: u32| {
        let resolved = resolutions.contains_key(&rid);
        let mass = p_r.get(&rid).copied().unwrap_or(0.0);
        (resolved, mass)
    };
    let mut best = cluster[0];
    for &rid in &cluster[1..] {
        let (br, bm) = score(best);
        let (cr, cm) = score(rid);
        let better = (cr, cm) > (br, bm)
            || ((cr, cm) == (br, bm) && log.ref_string(rid) < log.ref_string(best));
        if better {
            best = rid;
        }
    }
    best
}

/// Rank clusters by unresolved-member mass and boost the top k canonicals,
/// weights scaled so the largest equals `weight_cap`.
pub fn select_biasing_entities(
    dist: &EntityDistribution,
    clusters: &ClusterSet,
    resolutions: &BTreeMap<u32, String>,
    log: &RequestLog,
    k: usize,
    weight_cap: f64,
) -> Result<BiasingList> {
    if k == 0 {
        return Err(Error::config("budget", "k must be at least 1"));
    }
    if !(weight_cap > 0.0 && weight_cap.is_finite()) {
        return Err(Error::config(
            "weight cap",
            "must be a positive finite number",
        ));
    }
    let mut ranked: Vec<(f64, u32)> = Vec::new();
    for (cid, members) in clusters.clusters().iter().enumerate() {
        let misrecognized: f64 = members
            .iter()
            .filter(|rid| !resolutions.contains_key(rid))
            .map(|rid| dist.per_reference.get(rid).copied().unwrap_or(0.0))
            .sum();
        if misrecognized > 0.0 {
            ranked.push((misrecognized, cid as u32));
        }
    }
    // Descending mass, ascending cluster id on ties.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.truncate(k);

    let max_mass = ranked.first().map_or(1.0, |r| r.0);
    let entries = ranked
        .into_iter()
        .map(|(mass, cid)| {
            let canonical = select_canonical(
                &clusters.clusters()[cid as usize],
                &dist.per_reference,
                resolutions,
                log,
            );
            BiasingEntry {
                canonical: log.ref_string(canonical).to_string(),
                weight: weight_cap * mass / max_mass,
                cluster_id: cid,
                misrecognized_mass: mass,
            }
        })
        .collect();
    Ok(BiasingList { entries, budget: k })
}

/// Degradation baseline: boost the k most-mentioned raw references, no
/// dedup and no resolution filter.
pub fn topk_mentions_baseline(log: &RequestLog, k: usize, weight_cap: f64) -> Result<BiasingList> {
    if k == 0 {
        return Err(Error::config("budget", "k must be at least 1"));
    }
    if !(weight_cap > 0.0 && weight_cap.is_finite()) {
        return Err(Error::config(
            "weight cap",
            "must be a positive finite number",
        ));
    }
    let p_r = reference_probabilities(log)?;
    let mut ranked: Vec<(f64, u32)> = p_r.iter().map(|(&rid, &mass)| (mass, rid)).collect();
    ranked.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| log.ref_string(a.1).cmp(log.ref_string(b.1)))
    });
    ranked.truncate(k);

    let max_mass = ranked.first().map_or(1.0, |r| r.0);
    let entries = ranked
        .into_iter()
        .map(|(mass, rid)| BiasingEntry {
            canonical: log.ref_string(rid).to_string(),
            weight: weight_cap * mass / max_mass,
            cluster_id: rid,
            misrecognized_mass: mass,
        })
        .collect();
    Ok(BiasingList { entries, budget: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{connected_components, AdjacencyMatrix};
    use crate::corpus::Request;

    fn log_of(top1s: &[&str]) -> RequestLog {
        let requests: Vec<Request> = top1s
            .iter()
            .enumerate()
            .map(|(i, s)| Request {
                user_id: format!("u{i}"),
                ts: i as u64,
                nbest: vec![s.to_string()],
                clicked_entity: None,
                repeat_of: None,
            })
            .collect();
        RequestLog::from_requests(requests).unwrap()
    }

    fn clusters_over(n: usize, edges: &[(u32, u32)]) -> ClusterSet {
        let mut adj = AdjacencyMatrix::new(n);
        for &(a, b) in edges {
            adj.add_edge(a, b);
        }
        connected_components(&adj)
    }

    #[test]
    fn single_request_gets_unit_mass() {
        let log = log_of(&["alpha beast"]);
        let p = reference_probabilities(&log).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[&0], 1.0);
    }

    #[test]
    fn masses_follow_top1_counts() {
        let log = log_of(&["a b", "a b", "c d", "e f"]);
        let p = reference_probabilities(&log).unwrap();
        assert_eq!(p[&log.ref_id("a b").unwrap()], 0.5);
        assert_eq!(p[&log.ref_id("c d").unwrap()], 0.25);
        assert_eq!(p[&log.ref_id("e f").unwrap()], 0.25);
        assert!((p.values().sum::<f64>() - 1.0).abs() <= MASS_EPSILON);
    }

    #[test]
    fn tail_hypotheses_carry_no_mass() {
        let requests = vec![Request {
            user_id: "u0".into(),
            ts: 0,
            nbest: vec!["a b".into(), "c d".into()],
            clicked_entity: None,
            repeat_of: None,
        }];
        let log = RequestLog::from_requests(requests).unwrap();
        let p = reference_probabilities(&log).unwrap();
        assert_eq!(p.get(&log.ref_id("c d").unwrap()), None);
    }

    #[test]
    fn empty_log_is_rejected() {
        let log = RequestLog::from_requests(Vec::new()).unwrap();
        assert!(matches!(
            reference_probabilities(&log),
            Err(Error::EmptyLog)
        ));
    }

    #[test]
    fn one_cluster_holds_all_mass() {
        let log = log_of(&["a b", "c d"]);
        let p = reference_probabilities(&log).unwrap();
        let clusters = clusters_over(2, &[(0, 1)]);
        let dist = cluster_distribution(&clusters, &p).unwrap();
        assert_eq!(dist.per_cluster[&0], 1.0);
        dist.validate().unwrap();
    }

    #[test]
    fn cluster_mass_is_the_member_sum() {
        // Masses: a b = 0.4, c d = 0.2, e f = 0.2, g h = 0.2.
        let log = log_of(&["a b", "a b", "c d", "e f", "g h"]);
        let p = reference_probabilities(&log).unwrap();
        let clusters = clusters_over(4, &[(1, 2)]);
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let joined = dist.per_cluster[&clusters.cluster_of(1)];
        assert!((joined - 0.4).abs() < 1e-15);
        dist.validate().unwrap();
    }

    #[test]
    fn singleton_clusters_reproduce_reference_masses() {
        let log = log_of(&["a b", "a b", "c d", "e f"]);
        let p = reference_probabilities(&log).unwrap();
        let clusters = clusters_over(3, &[]);
        let dist = cluster_distribution(&clusters, &p).unwrap();
        for (rid, mass) in &p {
            assert_eq!(dist.per_cluster[&clusters.cluster_of(*rid)], *mass);
        }
    }

    #[test]
    fn mass_outside_the_partition_is_rejected() {
        let mut p = BTreeMap::new();
        p.insert(0u32, 0.5);
        p.insert(7u32, 0.5);
        let clusters = clusters_over(2, &[]);
        assert!(cluster_distribution(&clusters, &p).is_err());
    }

    #[test]
    fn merging_clusters_adds_their_masses() {
        let log = log_of(&["a b", "a b", "c d", "e f", "e f", "e f"]);
        let p = reference_probabilities(&log).unwrap();
        let apart = cluster_distribution(&clusters_over(3, &[]), &p).unwrap();
        let merged = cluster_distribution(&clusters_over(3, &[(0, 2)]), &p).unwrap();
        let expected = apart.per_cluster[&0] + apart.per_cluster[&2];
        assert_eq!(merged.per_cluster[&0], expected);
        assert!((apart.total_mass() - merged.total_mass()).abs() <= MASS_EPSILON);
    }

    fn resolutions_of(entries: &[(u32, &str)]) -> BTreeMap<u32, String> {
        entries
            .iter()
            .map(|&(rid, e)| (rid, e.to_string()))
            .collect()
    }

    #[test]
    fn canonical_prefers_resolved_over_heavier_unresolved() {
        // "arcade eighty one" outweighs the true form but never resolved.
        let log = log_of(&[
            "archive eighty one",
            "arcade eighty one",
            "arcade eighty one",
            "arcade eighty one",
        ]);
        let p = reference_probabilities(&log).unwrap();
        let resolutions = resolutions_of(&[(0, "e0001")]);
        let canonical = select_canonical(&[0, 1], &p, &resolutions, &log);
        assert_eq!(log.ref_string(canonical), "archive eighty one");
    }

    #[test]
    fn canonical_of_singleton_is_that_member() {
        let log = log_of(&["a b"]);
        let p = reference_probabilities(&log).unwrap();
        assert_eq!(select_canonical(&[0], &p, &BTreeMap::new(), &log), 0);
    }

    #[test]
    fn canonical_among_resolved_takes_higher_mass() {
        let log = log_of(&["a b", "a b", "c d"]);
        let p = reference_probabilities(&log).unwrap();
        let resolutions = resolutions_of(&[(0, "x"), (1, "x")]);
        assert_eq!(select_canonical(&[0, 1], &p, &resolutions, &log), 0);
    }

    #[test]
    fn canonical_ties_break_lexicographically() {
        let log = log_of(&["c d", "a b"]);
        let p = reference_probabilities(&log).unwrap();
        let canonical = select_canonical(&[0, 1], &p, &BTreeMap::new(), &log);
        assert_eq!(log.ref_string(canonical), "a b");
    }

    /// Three clusters: {0,1} with 0 resolved and unresolved mass 0.3,
    /// {2,3} all unresolved with mass 0.2, {4} fully resolved.
    fn biasing_fixture() -> (RequestLog, ClusterSet, BTreeMap<u32, String>) {
        let log = log_of(&[
            "a b", "a b", "a x", "a x", "a x", "c d", "c e", "f g", "f g", "f g",
        ]);
        // refs: 0 = a b (0.2), 1 = a x (0.3), 2 = c d (0.1), 3 = c e (0.1),
        // 4 = f g (0.3).
        let clusters = clusters_over(5, &[(0, 1), (2, 3)]);
        let resolutions = resolutions_of(&[(0, "e1"), (4, "e3")]);
        (log, clusters, resolutions)
    }

    #[test]
    fn biasing_ranks_by_unresolved_mass() {
        let (log, clusters, resolutions) = biasing_fixture();
        let p = reference_probabilities(&log).unwrap();
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let list = select_biasing_entities(&dist, &clusters, &resolutions, &log, 2, 1.0).unwrap();
        assert_eq!(list.entries.len(), 2);
        // Cluster {0,1} leads with unresolved mass 0.3 over {2,3} at 0.2;
        // its canonical is the resolved member. The runner-up cluster has
        // no resolved member and equal masses, so the canonical falls back
        // to the lexicographically smaller string.
        assert_eq!(list.entries[0].canonical, "a b");
        assert!((list.entries[0].misrecognized_mass - 0.3).abs() < 1e-12);
        assert_eq!(list.entries[0].weight, 1.0);
        assert_eq!(list.entries[1].canonical, "c d");
        // The fully resolved cluster {4} never qualifies.
        assert!(list.entries.iter().all(|e| e.canonical != "f g"));
    }

    #[test]
    fn fully_resolved_clusters_yield_an_empty_list() {
        let log = log_of(&["a b", "c d"]);
        let p = reference_probabilities(&log).unwrap();
        let clusters = clusters_over(2, &[]);
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let resolutions = resolutions_of(&[(0, "x"), (1, "y")]);
        let list = select_biasing_entities(&dist, &clusters, &resolutions, &log, 5, 1.0).unwrap();
        assert!(list.entries.is_empty());
    }

    #[test]
    fn budget_caps_the_list_and_large_budgets_take_all() {
        let (log, clusters, resolutions) = biasing_fixture();
        let p = reference_probabilities(&log).unwrap();
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let capped = select_biasing_entities(&dist, &clusters, &resolutions, &log, 1, 1.0).unwrap();
        assert_eq!(capped.entries.len(), 1);
        let all = select_biasing_entities(&dist, &clusters, &resolutions, &log, 100, 1.0).unwrap();
        // Only the two clusters holding unresolved mass qualify.
        assert_eq!(all.entries.len(), 2);
        assert!(all.entries.len() <= all.budget);
    }

    #[test]
    fn weights_scale_with_mass_under_the_cap() {
        let (log, clusters, resolutions) = biasing_fixture();
        let p = reference_probabilities(&log).unwrap();
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let list = select_biasing_entities(&dist, &clusters, &resolutions, &log, 2, 2.5).unwrap();
        assert_eq!(list.entries[0].weight, 2.5);
        let ratio = list.entries[1].misrecognized_mass / list.entries[0].misrecognized_mass;
        assert!((list.entries[1].weight - 2.5 * ratio).abs() < 1e-12);
        assert!(list.entries.iter().all(|e| e.weight > 0.0));
    }

    #[test]
    fn selection_is_scale_invariant() {
        let (log, clusters, resolutions) = biasing_fixture();
        let p = reference_probabilities(&log).unwrap();
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let scaled = EntityDistribution {
            per_cluster: dist
                .per_cluster
                .iter()
                .map(|(&c, &m)| (c, 3.0 * m))
                .collect(),
            per_reference: dist
                .per_reference
                .iter()
                .map(|(&r, &m)| (r, 3.0 * m))
                .collect(),
        };
        let base = select_biasing_entities(&dist, &clusters, &resolutions, &log, 2, 1.0).unwrap();
        let rescaled =
            select_biasing_entities(&scaled, &clusters, &resolutions, &log, 2, 1.0).unwrap();
        let ranking = |l: &BiasingList| -> Vec<(String, u32)> {
            l.entries
                .iter()
                .map(|e| (e.canonical.clone(), e.cluster_id))
                .collect()
        };
        assert_eq!(ranking(&base), ranking(&rescaled));
        for (a, b) in base.entries.iter().zip(&rescaled.entries) {
            assert!((a.weight - b.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn topk_baseline_takes_most_mentioned_raw_forms() {
        let log = log_of(&[
            "a b", "a b", "a b", "a b", "a b", "c d", "c d", "c d", "e f",
        ]);
        let top1 = topk_mentions_baseline(&log, 1, 1.0).unwrap();
        assert_eq!(top1.entries.len(), 1);
        assert_eq!(top1.entries[0].canonical, "a b");
        assert_eq!(top1.entries[0].weight, 1.0);

        let top2 = topk_mentions_baseline(&log, 2, 1.0).unwrap();
        let names: Vec<&str> = top2.entries.iter().map(|e| e.canonical.as_str()).collect();
        assert_eq!(names, vec!["a b", "c d"]);
    }

    #[test]
    fn topk_baseline_happily_selects_misrecognitions() {
        // The corrupted form out-mentions the true one; with no resolution
        // filter the baseline boosts the misrecognition.
        let log = log_of(&[
            "arcade eighty one",
            "arcade eighty one",
            "arcade eighty one",
            "archive eighty one",
        ]);
        let list = topk_mentions_baseline(&log, 1, 1.0).unwrap();
        assert_eq!(list.entries[0].canonical, "arcade eighty one");
    }

    #[test]
    fn plain_text_export_is_one_name_per_line() {
        let (log, clusters, resolutions) = biasing_fixture();
        let p = reference_probabilities(&log).unwrap();
        let dist = cluster_distribution(&clusters, &p).unwrap();
        let list = select_biasing_entities(&dist, &clusters, &resolutions, &log, 2, 1.0).unwrap();
        assert_eq!(list.to_plain_text(), "a b\nc d\n");
    }

    #[test]
    fn zero_budget_is_rejected() {
        let log = log_of(&["a b"]);
        assert!(topk_mentions_baseline(&log, 0, 1.0).is_err());
    }
}
