//! Train every comparison model family on mined labels and compare
//! held-out F1: feature combination vs the single-feature cut.

use refdedup::comparison::{build_training_set, split_train_test, train, ModelKind, TrainConfig};
use refdedup::corpus::{generate_corpus, mine_click_resolutions};
use refdedup::presets;
use refdedup::similarity::{item_similarity, nbest_cooccurrence};

fn main() -> refdedup::Result<()> {
    let preset = presets::build("community", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let resolutions = mine_click_resolutions(log);
    let cooccurrence = nbest_cooccurrence(log)?;
    let item = item_similarity(log)?;
    let pairs = build_training_set(&resolutions, &cooccurrence, &item, 42)?;
    let (train_pairs, test_pairs) = split_train_test(&pairs, 0.8, 42)?;
    println!(
        "{} training pairs, {} held out",
        train_pairs.len(),
        test_pairs.len()
    );

    let config = TrainConfig::default();
    println!(
        "\n{:<10}  {:>8}  {:>11}",
        "model", "train f1", "held-out f1"
    );
    for kind in ModelKind::ALL {
        let model = train(kind, &train_pairs, &config)?;
        println!(
            "{:<10}  {:>8.3}  {:>11.3}",
            kind.name(),
            model.train_f1,
            model.f1(&test_pairs)
        );
    }
    Ok(())
}
