//! Simulated shallow-fusion WER replay.
//!
//! Each logged request is replayed as a rescoring problem over its own
//! n-best candidates: rank r starts at score 1/(1+r), and a candidate
//! equal to a biased canonical form gains boost_strength × weight. The
//! emitted top-1 is judged by word-level edit distance against the
//! generator's true spoken form, which is stronger ground truth than the
//! machine transcripts the production protocol settles for; reports carry
//! a reference_source tag making that substitution explicit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::corpus::{Catalog, GroundTruth, RequestLog};
use crate::distribution::BiasingList;
use crate::error::{Error, Result};
use crate::similarity::word_edit_distance;

/// Which requests count toward the aggregate.
#[derive(Debug, Clone, Copy)]
pub enum WerScope<'a> {
    /// Every request in the log.
    Full,
    /// Only requests whose true spoken form sits in a dedup cluster with
    /// at least two members — the traffic the model actually captured.
    ModeledOnly(&'a ClusterSet),
}

impl WerScope<'_> {
    fn name(&self) -> &'static str {
        match self {
            WerScope::Full => "full",
            WerScope::ModeledOnly(_) => "modeled_only",
        }
    }
}

/// Outcome of one biased replay against its unbiased baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    pub scope: String,
    pub biasing_source: String,
    pub base_wer: f64,
    pub biased_wer: f64,
    /// Negative means the biasing list helped.
    pub relative_wer_percent: f64,
    pub requests_evaluated: usize,
    /// Requests whose emitted top-1 changed under biasing.
    pub flipped_requests: usize,
    /// What the error rate is measured against.
    pub reference_source: String,
}

/// Replay the log with and without biasing and report the relative WER.
pub fn simulate_wer(
    log: &RequestLog,
    truth: &GroundTruth,
    catalog: &Catalog,
    biasing: &BiasingList,
    boost_strength: f64,
    scope: WerScope<'_>,
    source_tag: &str,
) -> Result<WerReport> {
    if boost_strength < 0.0 {
        return Err(Error::NegativeBoost(boost_strength));
    }
    if truth.len() != log.len() {
        return Err(Error::config(
            "ground truth",
            format!("{} truth entries for {} requests", truth.len(), log.len()),
        ));
    }

    let spoken_of: BTreeMap<&str, &str> = catalog
        .entities
        .iter()
        .map(|e| (e.id.as_str(), e.spoken_form.as_str()))
        .collect();
    let mut boost: BTreeMap<&str, f64> = BTreeMap::new();
    for entry in &biasing.entries {
        let bonus = boost_strength * entry.weight;
        boost
            .entry(entry.canonical.as_str())
            .and_modify(|b| *b = b.max(bonus))
            .or_insert(bonus);
    }

    let mut reference_words = 0usize;
    let mut base_errors = 0usize;
    let mut biased_errors = 0usize;
    let mut evaluated = 0usize;
    let mut flipped = 0usize;
    for (idx, req) in log.requests.iter().enumerate() {
        let entity = truth.entity(idx);
        let spoken = *spoken_of
            .get(entity)
            .ok_or_else(|| Error::config("ground truth", format!("unknown entity {entity:?}")))?;

        if let WerScope::ModeledOnly(clusters) = scope {
            let modeled = log.ref_id(spoken).is_some_and(|rid| {
                (rid as usize) < clusters.num_refs()
                    && clusters.clusters()[clusters.cluster_of(rid) as usize].len() >= 2
            });
            if !modeled {
                continue;
            }
        }

        // Highest rescored candidate; ties keep the earlier rank.
        let mut winner = req.top1();
        let mut best_score = f64::NEG_INFINITY;
        for (rank, candidate) in req.nbest.iter().enumerate() {
            let mut score = 1.0 / (1.0 + rank as f64);
            if let Some(bonus) = boost.get(candidate.as_str()) {
                score += bonus;
            }
            if score > best_score {
                best_score = score;
                winner = candidate;
            }
        }

        evaluated += 1;
        if winner != req.top1() {
            flipped += 1;
        }
        reference_words += spoken.split_whitespace().count();
        base_errors += word_edit_distance(req.top1(), spoken);
        biased_errors += word_edit_distance(winner, spoken);
    }
    if evaluated == 0 || reference_words == 0 {
        return Err(Error::config(
            "wer scope",
            "no requests in scope to evaluate",
        ));
    }

    let base_wer = base_errors as f64 / reference_words as f64;
    let biased_wer = biased_errors as f64 / reference_words as f64;
    let relative_wer_percent = if base_errors == biased_errors {
        // Identical replays report exactly zero, even on perfect logs.
        0.0
    } else if base_errors == 0 {
        return Err(Error::config(
            "wer",
            "base replay has zero errors; relative change is undefined",
        ));
    } else {
        100.0 * (biased_wer - base_wer) / base_wer
    };
    Ok(WerReport {
        scope: scope.name().to_string(),
        biasing_source: source_tag.to_string(),
        base_wer,
        biased_wer,
        relative_wer_percent,
        requests_evaluated: evaluated,
        flipped_requests: flipped,
        reference_source: "generator_truth".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{connected_components, AdjacencyMatrix};
    use crate::corpus::{Entity, Request};
    use crate::distribution::BiasingEntry;

    fn catalog() -> Catalog {
        Catalog::new(vec![
            Entity {
                id: "e1".into(),
                canonical_title: "Alpha Beast".into(),
                spoken_form: "alpha beast".into(),
                popularity: 0.5,
            },
            Entity {
                id: "e2".into(),
                canonical_title: "Gamma Ray".into(),
                spoken_form: "gamma ray".into(),
                popularity: 0.5,
            },
        ])
        .unwrap()
    }

    fn log_of(nbests: &[&[&str]]) -> RequestLog {
        let requests: Vec<Request> = nbests
            .iter()
            .enumerate()
            .map(|(i, nbest)| Request {
                user_id: format!("u{i}"),
                ts: i as u64,
                nbest: nbest.iter().map(|s| s.to_string()).collect(),
                clicked_entity: None,
                repeat_of: None,
            })
            .collect();
        RequestLog::from_requests(requests).unwrap()
    }

    fn truth_of(entities: &[&str]) -> GroundTruth {
        GroundTruth {
            entities: entities.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn list_of(entries: &[(&str, f64)]) -> BiasingList {
        BiasingList {
            entries: entries
                .iter()
                .enumerate()
                .map(|(i, &(canonical, weight))| BiasingEntry {
                    canonical: canonical.into(),
                    weight,
                    cluster_id: i as u32,
                    misrecognized_mass: weight,
                })
                .collect(),
            budget: entries.len().max(1),
        }
    }

    /// One misrecognized request with the truth at rank 1, one correct
    /// request carrying the biased form deep in its tail.
    fn fixture() -> (RequestLog, GroundTruth) {
        let log = log_of(&[
            &["alpha best", "alpha beast"],
            &["gamma ray", "gamma bay", "alpha beast"],
        ]);
        let truth = truth_of(&["e1", "e2"]);
        (log, truth)
    }

    #[test]
    fn empty_list_changes_nothing() {
        let (log, truth) = fixture();
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[]),
            1.0,
            WerScope::Full,
            "none",
        )
        .unwrap();
        assert_eq!(report.relative_wer_percent, 0.0);
        assert_eq!(report.flipped_requests, 0);
        assert_eq!(report.base_wer, report.biased_wer);
        // One wrong word out of four reference words.
        assert!((report.base_wer - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_boost_replays_bit_for_bit() {
        let (log, truth) = fixture();
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[("alpha beast", 1.0)]),
            0.0,
            WerScope::Full,
            "dedup",
        )
        .unwrap();
        assert_eq!(report.flipped_requests, 0);
        assert_eq!(report.relative_wer_percent, 0.0);
    }

    #[test]
    fn negative_boost_is_rejected() {
        let (log, truth) = fixture();
        let err = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[]),
            -0.5,
            WerScope::Full,
            "none",
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeBoost(_)));
    }

    #[test]
    fn moderate_boost_fixes_the_misrecognition() {
        let (log, truth) = fixture();
        // 0.6 lifts rank 1 (0.5 → 1.1) past rank 0 in the wrong request,
        // but not rank 2 (1/3 → 0.93) in the correct one.
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[("alpha beast", 1.0)]),
            0.6,
            WerScope::Full,
            "dedup",
        )
        .unwrap();
        assert_eq!(report.flipped_requests, 1);
        assert_eq!(report.biased_wer, 0.0);
        assert_eq!(report.relative_wer_percent, -100.0);
    }

    #[test]
    fn over_boosting_reverses_the_benefit() {
        let (log, truth) = fixture();
        let run = |strength: f64| {
            simulate_wer(
                &log,
                &truth,
                &catalog(),
                &list_of(&[("alpha beast", 1.0)]),
                strength,
                WerScope::Full,
                "dedup",
            )
            .unwrap()
        };
        let moderate = run(0.6);
        // 5.0 also drags the biased form past the correct "gamma ray"
        // top-1, breaking a previously right answer.
        let aggressive = run(5.0);
        assert!(moderate.relative_wer_percent < 0.0);
        assert!(aggressive.relative_wer_percent > moderate.relative_wer_percent);
        assert!(aggressive.relative_wer_percent > 0.0);
        assert_eq!(aggressive.flipped_requests, 2);
    }

    #[test]
    fn equal_scores_keep_the_earlier_rank() {
        let log = log_of(&[&["alpha best", "alpha beast"]]);
        let truth = truth_of(&["e1"]);
        // Boost 0.5 lifts rank 1 to exactly 1.0, tying rank 0.
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[("alpha beast", 1.0)]),
            0.5,
            WerScope::Full,
            "dedup",
        )
        .unwrap();
        assert_eq!(report.flipped_requests, 0);
    }

    #[test]
    fn modeled_scope_keeps_only_clustered_truth() {
        let (log, truth) = fixture();
        // Refs: 0 = alpha best, 1 = alpha beast, 2 = gamma ray, 3 = gamma
        // bay. Cluster {0, 1} models e1; e2's spoken form stays a
        // singleton.
        let mut adj = AdjacencyMatrix::new(4);
        adj.add_edge(0, 1);
        let clusters = connected_components(&adj);
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[("alpha beast", 1.0)]),
            0.6,
            WerScope::ModeledOnly(&clusters),
            "dedup",
        )
        .unwrap();
        assert_eq!(report.requests_evaluated, 1);
        assert_eq!(report.scope, "modeled_only");
        // The in-scope request is exactly the one the boost fixes.
        assert_eq!(report.relative_wer_percent, -100.0);
    }

    #[test]
    fn modeled_scope_with_no_clustered_requests_is_rejected() {
        let (log, truth) = fixture();
        let clusters = connected_components(&AdjacencyMatrix::new(4));
        let err = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[]),
            1.0,
            WerScope::ModeledOnly(&clusters),
            "none",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn truth_length_mismatch_is_rejected() {
        let (log, _) = fixture();
        let short = truth_of(&["e1"]);
        assert!(simulate_wer(
            &log,
            &short,
            &catalog(),
            &list_of(&[]),
            1.0,
            WerScope::Full,
            "none"
        )
        .is_err());
    }

    #[test]
    fn unknown_truth_entity_is_rejected() {
        let (log, _) = fixture();
        let bad = truth_of(&["e1", "e9"]);
        assert!(simulate_wer(
            &log,
            &bad,
            &catalog(),
            &list_of(&[]),
            1.0,
            WerScope::Full,
            "none"
        )
        .is_err());
    }

    #[test]
    fn reports_tag_their_reference_source() {
        let (log, truth) = fixture();
        let report = simulate_wer(
            &log,
            &truth,
            &catalog(),
            &list_of(&[]),
            1.0,
            WerScope::Full,
            "none",
        )
        .unwrap();
        assert_eq!(report.reference_source, "generator_truth");
        assert_eq!(report.biasing_source, "none");
    }
}
