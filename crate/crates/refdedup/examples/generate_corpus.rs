//! Synthesize a request log from the public preset and inspect what the
//! noisy channel produced.

use std::collections::BTreeMap;

use refdedup::corpus::generate_corpus;
use refdedup::presets;

fn main() -> refdedup::Result<()> {
    let preset = presets::build("public", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let spoken: BTreeMap<&str, &str> = preset
        .catalog
        .entities
        .iter()
        .map(|e| (e.id.as_str(), e.spoken_form.as_str()))
        .collect();
    let corrupted = log
        .requests
        .iter()
        .zip(&corpus.truth.entities)
        .filter(|(req, entity)| req.top1() != spoken[entity.as_str()])
        .count();

    println!("catalog entities    {}", preset.catalog.entities.len());
    println!("requests            {}", log.len());
    println!("distinct references {}", log.num_references());
    println!(
        "corrupted top-1     {corrupted} ({:.1}% of requests)",
        100.0 * corrupted as f64 / log.len() as f64
    );

    for (req, entity) in log.requests.iter().zip(&corpus.truth.entities).take(3) {
        println!(
            "\nuser {} asked for {:?}",
            req.user_id,
            spoken[entity.as_str()]
        );
        for (rank, hyp) in req.nbest.iter().enumerate() {
            println!("  hypothesis {rank}: {hyp}");
        }
        if let Some(clicked) = &req.clicked_entity {
            println!("  clicked: {clicked}");
        }
    }
    Ok(())
}
