//! Run every pipeline stage from an inline manifest and print the report.
//!
//! Pass an output directory as the first argument; defaults to
//! `out/full-pipeline`.

use refdedup::manifest::RunManifest;
use refdedup::pipeline::run_all;

fn main() -> refdedup::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/full-pipeline".to_string());
    let text = format!(
        "seed = 42\n\
         out.dir = {out}\n\
         corpus.preset = public\n\
         model.kind = threshold\n\
         model.tau = 0.05\n\
         bias.budget = 25\n\
         gates.min_recall = 0.95\n\
         gates.min_precision = 0.98\n"
    );
    let manifest = RunManifest::parse(&text)?;

    let (written, report, body) = run_all(&manifest)?;
    for w in &written {
        let verb = if w.changed { "wrote" } else { "unchanged" };
        println!("{verb} {}", w.path.display());
    }
    println!();
    print!("{body}");
    if !report.gates_pass() {
        println!("\none or more gates failed");
    }
    Ok(())
}
