//! Mine weak labels from user behavior: click resolutions and repeat
//! pairs, then a balanced labeled pair set for model training.

use refdedup::comparison::build_training_set;
use refdedup::corpus::{generate_corpus, mine_click_resolutions, mine_repeat_pairs};
use refdedup::presets;
use refdedup::similarity::{item_similarity, nbest_cooccurrence};

fn main() -> refdedup::Result<()> {
    let preset = presets::build("community", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let resolutions = mine_click_resolutions(log);
    let repeats = mine_repeat_pairs(log, 3);
    println!("click-resolved references {}", resolutions.len());
    println!("repeat-linked pairs       {}", repeats.len());

    let cooccurrence = nbest_cooccurrence(log)?;
    let item = item_similarity(log)?;
    let pairs = build_training_set(&resolutions, &cooccurrence, &item, 42)?;
    let positives = pairs.iter().filter(|p| p.label == 1).count();
    println!(
        "labeled pairs             {} ({positives} positive)",
        pairs.len()
    );

    for label in [1u8, 0u8] {
        let name = if label == 1 { "positive" } else { "negative" };
        println!("\nsample {name} pairs (cooccurrence, item cosine):");
        for pair in pairs
            .iter()
            .filter(|p| p.label == label && p.ref_a != p.ref_b)
            .take(3)
        {
            println!(
                "  ({:.3}, {:.3})  {:?} ~ {:?}",
                pair.features.0,
                pair.features.1,
                log.ref_string(pair.ref_a),
                log.ref_string(pair.ref_b)
            );
        }
    }
    Ok(())
}
