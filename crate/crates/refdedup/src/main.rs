//! Thin command-line driver over the pipeline stages.
//!
//! Exit codes: 0 success, 1 a configured acceptance gate failed,
//! 2 usage or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use refdedup::manifest::RunManifest;
use refdedup::pipeline::{self, GateCheck, Written};
use refdedup::{Error, Result};

#[derive(Parser)]
#[command(
    name = "refdedup",
    version,
    about = "Record deduplication and biasing-list selection over synthetic entity request logs"
)]
struct Cli {
    /// Run manifest: key = value lines, one stage configuration per file.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Override the manifest seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Suppress progress and gate lines; errors still go to stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the preset corpus: catalog, request log, ground truth.
    Generate,
    /// Compute the cooccurrence and item-similarity matrices from the log.
    Featurize,
    /// Mine click resolutions, repeat pairs, and the labeled pair set.
    MineLabels,
    /// Train every comparison model; persist the configured one.
    Train,
    /// Cluster references with the configured variant (tau cut or classifier).
    Dedup,
    /// Aggregate reference mass into the per-entity distribution.
    Distribute,
    /// Select the budgeted biasing list and the top-k-mentions baseline.
    Bias,
    /// Score clusters, replay biasing lists, and check acceptance gates.
    Evaluate,
    /// Render the evaluation report as aligned text tables.
    Report,
    /// Run every stage in order and print the final report.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_manifest(cli: &Cli) -> Result<RunManifest> {
    let path = cli
        .manifest
        .as_ref()
        .ok_or_else(|| Error::config("--manifest", "required: pass --manifest PATH"))?;
    let mut manifest = RunManifest::load(path)?;
    if let Some(seed) = cli.seed {
        manifest.seed = seed;
    }
    Ok(manifest)
}

fn print_written(written: &[Written], quiet: bool) {
    if quiet {
        return;
    }
    for w in written {
        let verb = if w.changed { "wrote" } else { "unchanged" };
        println!("{verb} {}", w.path.display());
    }
}

fn print_gates(gates: &[GateCheck], quiet: bool) {
    if quiet {
        return;
    }
    for g in gates {
        let status = if g.pass { "pass" } else { "FAIL" };
        let value = g
            .value
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "gate {} {status}: value {value}, threshold {:.4}",
            g.name, g.threshold
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let manifest = load_manifest(&cli)?;
    match cli.command {
        Command::Generate => print_written(&pipeline::stage_generate(&manifest)?, cli.quiet),
        Command::Featurize => print_written(&pipeline::stage_featurize(&manifest)?, cli.quiet),
        Command::MineLabels => print_written(&pipeline::stage_mine_labels(&manifest)?, cli.quiet),
        Command::Train => print_written(&pipeline::stage_train(&manifest)?, cli.quiet),
        Command::Dedup => print_written(&pipeline::stage_dedup(&manifest)?, cli.quiet),
        Command::Distribute => print_written(&pipeline::stage_distribute(&manifest)?, cli.quiet),
        Command::Bias => print_written(&pipeline::stage_bias(&manifest)?, cli.quiet),
        Command::Evaluate => {
            let (written, report) = pipeline::stage_evaluate(&manifest)?;
            print_written(&written, cli.quiet);
            print_gates(&report.gates, cli.quiet);
            if !report.gates_pass() {
                eprintln!("one or more acceptance gates failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report => {
            let (written, body) = pipeline::stage_report(&manifest)?;
            print_written(&written, cli.quiet);
            print!("{body}");
        }
        Command::Run => {
            let (written, report, body) = pipeline::run_all(&manifest)?;
            print_written(&written, cli.quiet);
            print!("{body}");
            print_gates(&report.gates, cli.quiet);
            if !report.gates_pass() {
                eprintln!("one or more acceptance gates failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
