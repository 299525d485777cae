//! Replay the request log with each biasing list and report relative WER,
//! over all requests and over the modeled subset.

use refdedup::clustering::{connected_components, threshold_adjacency};
use refdedup::corpus::{generate_corpus, mine_click_resolutions};
use refdedup::distribution::{
    cluster_distribution, reference_probabilities, select_biasing_entities, topk_mentions_baseline,
    BiasingList,
};
use refdedup::evaluation::{simulate_wer, WerScope};
use refdedup::presets;
use refdedup::similarity::nbest_cooccurrence;

fn main() -> refdedup::Result<()> {
    let preset = presets::build("wer", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let cooccurrence = nbest_cooccurrence(log)?;
    let adjacency = threshold_adjacency(&cooccurrence, 0.05)?;
    let clusters = connected_components(&adjacency);
    let p_r = reference_probabilities(log)?;
    let resolutions = mine_click_resolutions(log);
    let dist = cluster_distribution(&clusters, &p_r)?;

    let deduped = select_biasing_entities(&dist, &clusters, &resolutions, log, 25, 1.0)?;
    let topk = topk_mentions_baseline(log, 25, 1.0)?;
    let empty = BiasingList {
        entries: Vec::new(),
        budget: 25,
    };
    let boost = 8.0;

    let rows = [
        simulate_wer(
            log,
            &corpus.truth,
            &preset.catalog,
            &empty,
            boost,
            WerScope::Full,
            "none",
        )?,
        simulate_wer(
            log,
            &corpus.truth,
            &preset.catalog,
            &topk,
            boost,
            WerScope::Full,
            "top_k_mentions",
        )?,
        simulate_wer(
            log,
            &corpus.truth,
            &preset.catalog,
            &deduped,
            boost,
            WerScope::Full,
            "dedup_clusters",
        )?,
        simulate_wer(
            log,
            &corpus.truth,
            &preset.catalog,
            &deduped,
            boost,
            WerScope::ModeledOnly(&clusters),
            "dedup_clusters",
        )?,
    ];

    println!(
        "{:<16}  {:<12}  {:>8}  {:>10}  {:>8}  {:>7}",
        "list", "scope", "base wer", "biased wer", "rel wer", "flipped"
    );
    for row in &rows {
        println!(
            "{:<16}  {:<12}  {:>8.4}  {:>10.4}  {:>+7.2}%  {:>7}",
            row.biasing_source,
            row.scope,
            row.base_wer,
            row.biased_wer,
            row.relative_wer_percent,
            row.flipped_requests
        );
    }
    println!(
        "\nerror rates measured against {}",
        rows[0].reference_source
    );
    Ok(())
}
