//! Match corrupted outputs back to catalog forms by edit distance alone
//! and compare against behavior-driven record deduplication.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use refdedup::clustering::threshold_adjacency;
use refdedup::corpus::{generate_corpus, mine_click_resolutions, mine_repeat_pairs};
use refdedup::evaluation::evaluate_clusters;
use refdedup::presets;
use refdedup::similarity::{edit_baseline_match, nbest_cooccurrence};

fn main() -> refdedup::Result<()> {
    let preset = presets::build("public", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let index_of: BTreeMap<&str, usize> = preset
        .catalog
        .entities
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    let outputs: Vec<String> = log.requests.iter().map(|r| r.top1().to_string()).collect();
    let truths: Vec<usize> = corpus
        .truth
        .entities
        .iter()
        .map(|id| index_of[id.as_str()])
        .collect();
    let inputs: Vec<String> = preset
        .catalog
        .entities
        .iter()
        .map(|e| e.spoken_form.clone())
        .collect();
    let edit = edit_baseline_match(&outputs, &truths, &inputs);
    println!(
        "edit baseline    precision {:.3}  recall {:.3}  f1 {:.3}",
        edit.precision(),
        edit.recall(),
        edit.f1()
    );

    let cooccurrence = nbest_cooccurrence(log)?;
    let adjacency = threshold_adjacency(&cooccurrence, 0.05)?;
    let resolutions = mine_click_resolutions(log);
    let repeats: BTreeSet<(u32, u32)> = mine_repeat_pairs(log, 3);
    let report = evaluate_clusters(&adjacency, &repeats, &resolutions, "public", "tau=0.05");
    let stat = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    println!(
        "record dedup     precision {}  recall {}  f1 {}",
        stat(report.precision),
        stat(report.recall),
        stat(report.f1)
    );
    Ok(())
}
