//! Compute both pairwise features over a generated log: n-best
//! cooccurrence and item-item history cosine.

use refdedup::corpus::generate_corpus;
use refdedup::presets;
use refdedup::similarity::{item_similarity, nbest_cooccurrence, SimilarityMatrix};

fn top_pairs(name: &str, matrix: &SimilarityMatrix, log: &refdedup::corpus::RequestLog) {
    let mut entries: Vec<(u32, u32, f64)> = matrix.entries().collect();
    entries.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    println!("\n{name}: {} scored pairs, top 5:", matrix.len());
    for (i, j, score) in entries.into_iter().take(5) {
        println!(
            "  {score:.3}  {:?} ~ {:?}",
            log.ref_string(i),
            log.ref_string(j)
        );
    }
}

fn main() -> refdedup::Result<()> {
    let preset = presets::build("public", 42)?;
    let corpus = generate_corpus(&preset.catalog, &preset.profiles, &preset.config)?;
    let log = &corpus.log;

    let cooccurrence = nbest_cooccurrence(log)?;
    let item = item_similarity(log)?;

    println!(
        "log: {} requests, {} references",
        log.len(),
        log.num_references()
    );
    top_pairs("n-best cooccurrence", &cooccurrence, log);
    top_pairs("item-item cosine", &item, log);
    Ok(())
}
