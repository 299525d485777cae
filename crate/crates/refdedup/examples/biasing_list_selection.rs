//! Build the entity distribution over clusters, then select a budgeted
//! biasing list and compare it with the raw top-k-mentions baseline.

use refdedup::clustering::{connected_components, threshold_adjacency};
use refdedup::corpus::{generate_corpus, mine_click_resolutions};
use refdedup::distribution::{
    cluster_distribution, reference_probabilities, select_biasing_entities, topk_mentions_baseline,
    BiasingList,
};
use refdedup::presets;
use refdedup::similarity::nbest_cooccurrence;

fn show(name: &str, list: &BiasingList) {
    println!("\n{name} (budget {}):", list.budget);
    for entry in list.entries.iter().take(8) {
        println!(
            "  weight {:.3}  mass {:.4}  {:?}",
            entry.weight, entry.misrecognized_mass, entry.canonical
        );
    }
}

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
    println!("total probability mass {:.9}", dist.total_mass());

    let deduped = select_biasing_entities(&dist, &clusters, &resolutions, log, 25, 1.0)?;
    let baseline = topk_mentions_baseline(log, 25, 1.0)?;
    show("dedup-derived list", &deduped);
    show("top-k mentions baseline", &baseline);
    Ok(())
}
