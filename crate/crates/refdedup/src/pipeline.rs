//! The pipeline stages behind the command-line driver and the examples.
//!
//! Stages communicate only through the artifact files named by the run
//! manifest, so each one can be re-run in isolation; unchanged outputs are
//! left untouched on disk. Stage inputs and outputs:
//!
//! ```text
//! generate    ()                          -> catalog, log, truth
//! featurize   (log)                       -> cooccurrence, item_similarity
//! mine-labels (log, matrices)             -> resolutions, repeat_pairs, labels
//! train       (labels)                    -> model, model_summary
//! dedup       (log, matrices, model|tau, resolutions) -> clusters
//! distribute  (log, clusters)             -> distribution
//! bias        (log, clusters, distribution, resolutions) -> biasing, topk, biasing.txt
//! evaluate    (everything above)          -> report.json (+ gate outcomes)
//! report      (report.json)               -> report.txt
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::clustering::{
    classifier_adjacency, connected_components, make_block, threshold_adjacency, AdjacencyMatrix,
    ClusterSet,
};
use crate::comparison::{
    build_training_set, split_train_test, train, ComparisonModel, LabeledPair, ModelKind,
    TrainConfig,
};
use crate::corpus::{
    generate_corpus, mine_click_resolutions, mine_repeat_pairs, Catalog, Entity, GroundTruth,
    Request, RequestLog,
};
use crate::distribution::{
    cluster_distribution, reference_probabilities, select_biasing_entities, select_canonical,
    topk_mentions_baseline, BiasingList, EntityDistribution,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_clusters, simulate_wer, EvalReport, WerReport, WerScope};
use crate::io::{self, FileHeader};
use crate::manifest::RunManifest;
use crate::presets;
use crate::similarity::{
    edit_baseline_match, item_similarity, nbest_cooccurrence, SimilarityMatrix,
};

/// One artifact a stage produced: where it went and whether this run
/// changed it on disk.
#[derive(Debug, Clone)]
pub struct Written {
    pub path: PathBuf,
    pub changed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TruthRow {
    entity: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ResolutionRow {
    reference: String,
    entity: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RepeatPairRow {
    a: String,
    b: String,
}

/// One dedup cluster as stored in the cluster file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub cluster_id: u32,
    pub members: Vec<String>,
    pub canonical: String,
}

/// Train/held-out F1 per model family, from one shared split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummaryRow {
    pub kind: String,
    pub train_f1: f64,
    pub test_f1: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub models: Vec<ModelSummaryRow>,
}

/// The edit-distance resolution baseline, aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// One acceptance gate from the manifest, checked against a measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub name: String,
    pub threshold: f64,
    pub value: Option<f64>,
    pub pass: bool,
}

/// Everything the evaluate stage measures; serialized as report.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub dataset: String,
    pub model: String,
    pub dedup: EvalReport,
    pub edit_baseline: BaselineReport,
    pub models: Vec<ModelSummaryRow>,
    pub wer: Vec<WerReport>,
    pub gates: Vec<GateCheck>,
}

impl PipelineReport {
    pub fn gates_pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

fn header(stage: &str, manifest: &RunManifest) -> FileHeader {
    FileHeader::new(stage, &manifest.sha256())
}

fn record(written: &mut Vec<Written>, path: PathBuf, changed: bool) {
    written.push(Written { path, changed });
}

pub fn load_log(manifest: &RunManifest) -> Result<RequestLog> {
    let (_, requests): (_, Vec<Request>) = io::read_jsonl(&manifest.log_path(), "generate")?;
    RequestLog::from_requests(requests)
}

pub fn load_catalog(manifest: &RunManifest) -> Result<Catalog> {
    let (_, entities): (_, Vec<Entity>) = io::read_jsonl(&manifest.catalog_path(), "generate")?;
    Catalog::new(entities)
}

pub fn load_truth(manifest: &RunManifest) -> Result<GroundTruth> {
    let (_, rows): (_, Vec<TruthRow>) = io::read_jsonl(&manifest.truth_path(), "generate")?;
    Ok(GroundTruth {
        entities: rows.into_iter().map(|r| r.entity).collect(),
    })
}

/// Resolutions keyed by reference id; the file stores strings so it stays
/// readable without the log.
pub fn load_resolutions(manifest: &RunManifest, log: &RequestLog) -> Result<BTreeMap<u32, String>> {
    let (_, rows): (_, Vec<ResolutionRow>) =
        io::read_jsonl(&manifest.resolutions_path(), "mine-labels")?;
    let mut resolutions = BTreeMap::new();
    for row in rows {
        let rid = log.ref_id(&row.reference).ok_or_else(|| {
            Error::config(
                "resolutions",
                format!("reference {:?} is not in the log", row.reference),
            )
        })?;
        resolutions.insert(rid, row.entity);
    }
    Ok(resolutions)
}

pub fn load_repeat_pairs(manifest: &RunManifest, log: &RequestLog) -> Result<BTreeSet<(u32, u32)>> {
    let (_, rows): (_, Vec<RepeatPairRow>) =
        io::read_jsonl(&manifest.repeat_pairs_path(), "mine-labels")?;
    let mut pairs = BTreeSet::new();
    for row in rows {
        let a = log.ref_id(&row.a).ok_or_else(|| {
            Error::config(
                "repeat_pairs",
                format!("reference {:?} is not in the log", row.a),
            )
        })?;
        let b = log.ref_id(&row.b).ok_or_else(|| {
            Error::config(
                "repeat_pairs",
                format!("reference {:?} is not in the log", row.b),
            )
        })?;
        pairs.insert((a.min(b), a.max(b)));
    }
    Ok(pairs)
}

pub fn load_clusters(manifest: &RunManifest, log: &RequestLog) -> Result<ClusterSet> {
    let (_, rows): (_, Vec<ClusterRow>) = io::read_jsonl(&manifest.clusters_path(), "dedup")?;
    let mut members: Vec<Vec<u32>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut ids = Vec::with_capacity(row.members.len());
        for reference in &row.members {
            let rid = log.ref_id(reference).ok_or_else(|| {
                Error::config(
                    "clusters",
                    format!("reference {reference:?} is not in the log"),
                )
            })?;
            ids.push(rid);
        }
        members.push(ids);
    }
    ClusterSet::from_parts(members, log.num_references())
}

/// Synthesize the preset corpus and write catalog, log, and ground truth.
pub fn stage_generate(manifest: &RunManifest) -> Result<Vec<Written>> {
    let preset = presets::build(&manifest.preset, manifest.seed)?;
    let mut config = preset.config;
    if let Some(n) = manifest.n_max {
        config.n_max = n;
    }
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &config)?;
    let h = header("generate", manifest);
    let mut written = Vec::new();
    record(
        &mut written,
        manifest.catalog_path(),
        io::write_jsonl(&manifest.catalog_path(), &h, &preset.catalog.entities)?,
    );
    record(
        &mut written,
        manifest.log_path(),
        io::write_jsonl(&manifest.log_path(), &h, &corpus.log.requests)?,
    );
    let truth_rows: Vec<TruthRow> = corpus
        .truth
        .entities
        .iter()
        .map(|e| TruthRow { entity: e.clone() })
        .collect();
    record(
        &mut written,
        manifest.truth_path(),
        io::write_jsonl(&manifest.truth_path(), &h, &truth_rows)?,
    );
    Ok(written)
}

/// Compute both feature matrices from the log.
pub fn stage_featurize(manifest: &RunManifest) -> Result<Vec<Written>> {
    let log = load_log(manifest)?;
    let h = header("featurize", manifest);
    let (c, u) = if log.is_empty() {
        (SimilarityMatrix::new(0), SimilarityMatrix::new(0))
    } else {
        (nbest_cooccurrence(&log)?, item_similarity(&log)?)
    };
    let mut written = Vec::new();
    record(
        &mut written,
        manifest.cooccurrence_path(),
        io::write_matrix(&manifest.cooccurrence_path(), &h, &c)?,
    );
    record(
        &mut written,
        manifest.item_similarity_path(),
        io::write_matrix(&manifest.item_similarity_path(), &h, &u)?,
    );
    Ok(written)
}

/// Mine click resolutions and repeat pairs, then assemble the balanced
/// labeled pair set over the feature matrices.
pub fn stage_mine_labels(manifest: &RunManifest) -> Result<Vec<Written>> {
    let log = load_log(manifest)?;
    let h = header("mine-labels", manifest);
    let resolutions = mine_click_resolutions(&log);
    let repeats = mine_repeat_pairs(&log, manifest.min_support);

    let resolution_rows: Vec<ResolutionRow> = resolutions
        .iter()
        .map(|(&rid, entity)| ResolutionRow {
            reference: log.ref_string(rid).to_string(),
            entity: entity.clone(),
        })
        .collect();
    let pair_rows: Vec<RepeatPairRow> = repeats
        .iter()
        .map(|&(a, b)| RepeatPairRow {
            a: log.ref_string(a).to_string(),
            b: log.ref_string(b).to_string(),
        })
        .collect();
    let labels: Vec<LabeledPair> = if resolutions.is_empty() {
        Vec::new()
    } else {
        let (_, c) = io::read_matrix(&manifest.cooccurrence_path(), "featurize")?;
        let (_, u) = io::read_matrix(&manifest.item_similarity_path(), "featurize")?;
        build_training_set(&resolutions, &c, &u, manifest.seed)?
    };

    let mut written = Vec::new();
    record(
        &mut written,
        manifest.resolutions_path(),
        io::write_jsonl(&manifest.resolutions_path(), &h, &resolution_rows)?,
    );
    record(
        &mut written,
        manifest.repeat_pairs_path(),
        io::write_jsonl(&manifest.repeat_pairs_path(), &h, &pair_rows)?,
    );
    record(
        &mut written,
        manifest.labels_path(),
        io::write_jsonl(&manifest.labels_path(), &h, &labels)?,
    );
    Ok(written)
}

/// Train every model family on one shared split; persist the configured
/// kind as the dedup model and the full comparison as the summary.
pub fn stage_train(manifest: &RunManifest) -> Result<Vec<Written>> {
    let (_, labels): (_, Vec<LabeledPair>) =
        io::read_jsonl(&manifest.labels_path(), "mine-labels")?;
    let h = header("train", manifest);
    let config = TrainConfig {
        seed: manifest.seed,
        ..TrainConfig::default()
    };
    let (train_set, test_set) = split_train_test(&labels, manifest.split_ratio, manifest.seed)?;

    let mut summary = Vec::new();
    let mut selected: Option<ComparisonModel> = None;
    for kind in ModelKind::ALL {
        let mut model = train(kind, &train_set, &config)?;
        model.test_f1 = Some(model.f1(&test_set));
        summary.push(ModelSummaryRow {
            kind: kind.name().to_string(),
            train_f1: model.train_f1,
            test_f1: model.test_f1.unwrap_or(0.0),
            boundary: model.boundary(),
        });
        if kind == manifest.model_kind {
            selected = Some(model);
        }
    }
    let model = selected.expect("ModelKind::ALL covers every kind");

    let mut written = Vec::new();
    record(
        &mut written,
        manifest.model_path(),
        io::write_json(&manifest.model_path(), &h, &model)?,
    );
    record(
        &mut written,
        manifest.model_summary_path(),
        io::write_json(
            &manifest.model_summary_path(),
            &h,
            &ModelSummary { models: summary },
        )?,
    );
    Ok(written)
}

/// The pairwise edge set the configured variant produces: a fixed tau cut
/// on the cooccurrence feature, or the trained classifier over both.
fn dedup_adjacency(manifest: &RunManifest, log: &RequestLog) -> Result<AdjacencyMatrix> {
    let (_, c) = io::read_matrix(&manifest.cooccurrence_path(), "featurize")?;
    if let Some(tau) = manifest.tau {
        return threshold_adjacency(&c, tau);
    }
    let model: ComparisonModel = io::read_json(&manifest.model_path(), "train")?;
    let (_, u) = io::read_matrix(&manifest.item_similarity_path(), "featurize")?;
    let block = make_block(log);
    Ok(classifier_adjacency(&model, &block, &c, &u))
}

fn cluster_rows(
    log: &RequestLog,
    clusters: &ClusterSet,
    p_r: &BTreeMap<u32, f64>,
    resolutions: &BTreeMap<u32, String>,
) -> Vec<ClusterRow> {
    clusters
        .clusters()
        .iter()
        .enumerate()
        .map(|(cid, members)| ClusterRow {
            cluster_id: cid as u32,
            members: members
                .iter()
                .map(|&r| log.ref_string(r).to_string())
                .collect(),
            canonical: log
                .ref_string(select_canonical(members, p_r, resolutions, log))
                .to_string(),
        })
        .collect()
}

/// Run the configured variant and emit the cluster file. An empty log
/// yields an empty cluster file.
pub fn stage_dedup(manifest: &RunManifest) -> Result<Vec<Written>> {
    let log = load_log(manifest)?;
    let h = header("dedup", manifest);
    if log.is_empty() {
        let changed = io::write_jsonl(&manifest.clusters_path(), &h, &[] as &[ClusterRow])?;
        return Ok(vec![Written {
            path: manifest.clusters_path(),
            changed,
        }]);
    }
    let adjacency = dedup_adjacency(manifest, &log)?;
    let clusters = connected_components(&adjacency);
    let p_r = reference_probabilities(&log)?;
    let resolutions = load_resolutions(manifest, &log)?;
    let rows = cluster_rows(&log, &clusters, &p_r, &resolutions);
    let changed = io::write_jsonl(&manifest.clusters_path(), &h, &rows)?;
    Ok(vec![Written {
        path: manifest.clusters_path(),
        changed,
    }])
}

/// Aggregate reference mass into the per-cluster entity distribution.
pub fn stage_distribute(manifest: &RunManifest) -> Result<Vec<Written>> {
    let log = load_log(manifest)?;
    let clusters = load_clusters(manifest, &log)?;
    let p_r = reference_probabilities(&log)?;
    let dist = cluster_distribution(&clusters, &p_r)?;
    dist.validate()?;
    let h = header("distribute", manifest);
    let changed = io::write_json(&manifest.distribution_path(), &h, &dist)?;
    Ok(vec![Written {
        path: manifest.distribution_path(),
        changed,
    }])
}

/// Select the budgeted biasing list plus the equal-budget top-k baseline.
pub fn stage_bias(manifest: &RunManifest) -> Result<Vec<Written>> {
    let log = load_log(manifest)?;
    let clusters = load_clusters(manifest, &log)?;
    let resolutions = load_resolutions(manifest, &log)?;
    let dist: EntityDistribution = io::read_json(&manifest.distribution_path(), "distribute")?;
    let list = select_biasing_entities(
        &dist,
        &clusters,
        &resolutions,
        &log,
        manifest.budget,
        manifest.weight_cap,
    )?;
    let topk = topk_mentions_baseline(&log, manifest.budget, manifest.weight_cap)?;
    let h = header("bias", manifest);
    let mut written = Vec::new();
    record(
        &mut written,
        manifest.biasing_path(),
        io::write_json(&manifest.biasing_path(), &h, &list)?,
    );
    record(
        &mut written,
        manifest.topk_path(),
        io::write_json(&manifest.topk_path(), &h, &topk)?,
    );
    record(
        &mut written,
        manifest.biasing_text_path(),
        io::write_text(&manifest.biasing_text_path(), &h, &list.to_plain_text())?,
    );
    Ok(written)
}

fn check_gates(
    manifest: &RunManifest,
    dedup: &EvalReport,
    edit_f1: f64,
    dedup_full_wer: f64,
) -> Vec<GateCheck> {
    let mut gates = Vec::new();
    let g = &manifest.gates;
    if let Some(t) = g.min_recall {
        gates.push(GateCheck {
            name: "min_recall".to_string(),
            threshold: t,
            value: dedup.recall,
            pass: dedup.recall.is_some_and(|v| v >= t),
        });
    }
    if let Some(t) = g.min_precision {
        gates.push(GateCheck {
            name: "min_precision".to_string(),
            threshold: t,
            value: dedup.precision,
            pass: dedup.precision.is_some_and(|v| v >= t),
        });
    }
    if let Some(t) = g.min_edit_f1_gap {
        let gap = dedup.f1.map(|f| f - edit_f1);
        gates.push(GateCheck {
            name: "min_edit_f1_gap".to_string(),
            threshold: t,
            value: gap,
            pass: gap.is_some_and(|v| v >= t),
        });
    }
    if let Some(t) = g.max_dedup_relative_wer {
        gates.push(GateCheck {
            name: "max_dedup_relative_wer".to_string(),
            threshold: t,
            value: Some(dedup_full_wer),
            pass: dedup_full_wer <= t,
        });
    }
    gates
}

/// Score the cluster output against mined pairs and resolutions, run the
/// edit baseline and the biasing replays, check gates, and write
/// report.json. The caller decides what a failed gate means.
pub fn stage_evaluate(manifest: &RunManifest) -> Result<(Vec<Written>, PipelineReport)> {
    let log = load_log(manifest)?;
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let catalog = load_catalog(manifest)?;
    let truth = load_truth(manifest)?;
    let cluster_set = load_clusters(manifest, &log)?;
    let resolutions = load_resolutions(manifest, &log)?;
    let repeats = load_repeat_pairs(manifest, &log)?;

    // Re-derive the edge set; precision is judged on direct edges, and the
    // stored clusters must be its components or they are stale.
    let adjacency = dedup_adjacency(manifest, &log)?;
    if connected_components(&adjacency) != cluster_set {
        return Err(Error::config(
            "clusters",
            "cluster file does not match the configured variant; re-run dedup",
        ));
    }
    let model_name = match manifest.tau {
        Some(tau) => format!("threshold tau={tau}"),
        None => manifest.model_kind.name().to_string(),
    };
    let dedup = evaluate_clusters(
        &adjacency,
        &repeats,
        &resolutions,
        &manifest.preset,
        &model_name,
    );

    let index_of: BTreeMap<&str, usize> = catalog
        .entities
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    let outputs: Vec<String> = log.requests.iter().map(|r| r.top1().to_string()).collect();
    let truths = truth
        .entities
        .iter()
        .map(|id| {
            index_of.get(id.as_str()).copied().ok_or_else(|| {
                Error::config(
                    "ground truth",
                    format!("entity {id:?} is not in the catalog"),
                )
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let inputs: Vec<String> = catalog
        .entities
        .iter()
        .map(|e| e.spoken_form.clone())
        .collect();
    let edit = edit_baseline_match(&outputs, &truths, &inputs);
    let edit_baseline = BaselineReport {
        precision: edit.precision(),
        recall: edit.recall(),
        f1: edit.f1(),
        tp: edit.tp,
        fp: edit.fp,
        fn_: edit.fn_,
    };

    let biasing: BiasingList = io::read_json(&manifest.biasing_path(), "bias")?;
    let topk: BiasingList = io::read_json(&manifest.topk_path(), "bias")?;
    let empty = BiasingList {
        entries: Vec::new(),
        budget: manifest.budget,
    };
    let boost = manifest.boost_strength;
    let wer = vec![
        simulate_wer(
            &log,
            &truth,
            &catalog,
            &empty,
            boost,
            WerScope::Full,
            "none",
        )?,
        simulate_wer(
            &log,
            &truth,
            &catalog,
            &topk,
            boost,
            WerScope::Full,
            "top_k_mentions",
        )?,
        simulate_wer(
            &log,
            &truth,
            &catalog,
            &biasing,
            boost,
            WerScope::Full,
            "dedup_clusters",
        )?,
        simulate_wer(
            &log,
            &truth,
            &catalog,
            &biasing,
            boost,
            WerScope::ModeledOnly(&cluster_set),
            "dedup_clusters",
        )?,
    ];

    let models = match io::read_json::<ModelSummary>(&manifest.model_summary_path(), "train") {
        Ok(summary) => summary.models,
        Err(Error::MissingInput { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };

    let gates = check_gates(
        manifest,
        &dedup,
        edit_baseline.f1,
        wer[2].relative_wer_percent,
    );
    let report = PipelineReport {
        dataset: manifest.preset.clone(),
        model: model_name,
        dedup,
        edit_baseline,
        models,
        wer,
        gates,
    };
    let h = header("evaluate", manifest);
    let changed = io::write_json(&manifest.report_json_path(), &h, &report)?;
    Ok((
        vec![Written {
            path: manifest.report_json_path(),
            changed,
        }],
        report,
    ))
}

/// Render report.json as the aligned plain-text report.
pub fn stage_report(manifest: &RunManifest) -> Result<(Vec<Written>, String)> {
    let report: PipelineReport = io::read_json(&manifest.report_json_path(), "evaluate")?;
    let body = crate::report::render(&report);
    let h = header("report", manifest);
    let changed = io::write_text(&manifest.report_text_path(), &h, &body)?;
    Ok((
        vec![Written {
            path: manifest.report_text_path(),
            changed,
        }],
        body,
    ))
}

/// Run every stage in order; returns all written artifacts plus the final
/// report and its rendered text.
pub fn run_all(manifest: &RunManifest) -> Result<(Vec<Written>, PipelineReport, String)> {
    let mut written = Vec::new();
    written.extend(stage_generate(manifest)?);
    written.extend(stage_featurize(manifest)?);
    written.extend(stage_mine_labels(manifest)?);
    written.extend(stage_train(manifest)?);
    written.extend(stage_dedup(manifest)?);
    written.extend(stage_distribute(manifest)?);
    written.extend(stage_bias(manifest)?);
    let (more, report) = stage_evaluate(manifest)?;
    written.extend(more);
    let (more, text) = stage_report(manifest)?;
    written.extend(more);
    Ok((written, report, text))
}
