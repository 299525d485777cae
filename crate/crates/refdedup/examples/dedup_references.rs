//! Cluster noisy references into entities with a fixed cooccurrence cut
//! and pick each cluster's canonical form.

use refdedup::clustering::{connected_components, threshold_adjacency};
use refdedup::corpus::{generate_corpus, mine_click_resolutions};
use refdedup::distribution::{reference_probabilities, select_canonical};
use refdedup::presets;
use refdedup::similarity::nbest_cooccurrence;

fn main() -> refdedup::Result<()> {
    let preset = presets::build("public", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let cooccurrence = nbest_cooccurrence(log)?;
    let adjacency = threshold_adjacency(&cooccurrence, 0.05)?;
    let clusters = connected_components(&adjacency);
    let p_r = reference_probabilities(log)?;
    let resolutions = mine_click_resolutions(log);

    let multi: Vec<&Vec<u32>> = clusters
        .clusters()
        .iter()
        .filter(|members| members.len() > 1)
        .collect();
    println!("references          {}", log.num_references());
    println!("clusters            {}", clusters.clusters().len());
    println!("multi-member        {}", multi.len());

    let mut largest: Vec<&Vec<u32>> = multi.clone();
    largest.sort_by_key(|members| std::cmp::Reverse(members.len()));
    println!("\nlargest clusters:");
    for members in largest.into_iter().take(5) {
        let canonical = select_canonical(members, &p_r, &resolutions, log);
        println!("  canonical {:?}", log.ref_string(canonical));
        for &rid in members.iter().take(6) {
            if rid != canonical {
                println!("    variant {:?}", log.ref_string(rid));
            }
        }
    }
    Ok(())
}
