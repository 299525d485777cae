//! Black-box tests of the command-line binary: exit codes, diagnostics,
//! and the stage subcommand surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::{fs, str};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_refdedup"))
}

fn write_manifest(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, body).expect("write manifest");
    path
}

/// Smallest fast corpus: the wer preset with a fixed clustering cut.
fn fast_manifest(out: &Path) -> String {
    format!(
        "seed = 42\nout.dir = {}\ncorpus.preset = wer\nmodel.kind = threshold\n\
         model.tau = 0.05\nbias.budget = 25\nbias.weight_cap = 1.0\n\
         bias.boost_strength = 8.0\n",
        out.display()
    )
}

fn run_stage(manifest: &Path, args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("--manifest").arg(manifest);
    cmd.args(args);
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> &str {
    str::from_utf8(&out.stdout).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> &str {
    str::from_utf8(&out.stderr).expect("utf-8 stderr")
}

#[test]
fn missing_manifest_is_a_usage_error() {
    let out = bin().arg("generate").output().expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("--manifest"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_key_reports_key_and_line() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), "seed = 1\nbogus.key = 2\n");
    let out = run_stage(&manifest, &["generate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("bogus.key") && err.contains("line 2"),
        "stderr: {err}"
    );
}

#[test]
fn invalid_model_kind_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), "model.kind = banana\n");
    let out = run_stage(&manifest, &["generate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("model.kind"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unparsable_number_reports_the_line() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), "seed = abc\n");
    let out = run_stage(&manifest, &["generate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("seed") && err.contains("cannot parse"),
        "stderr: {err}"
    );
}

#[test]
fn unexpected_argument_is_a_usage_error() {
    let out = bin()
        .args(["dedup", "--bogus"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("unexpected argument"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn failing_gate_exits_one_and_names_the_gate() {
    let dir = tempfile::tempdir().expect("tempdir");
    let body = fast_manifest(&dir.path().join("out")) + "gates.max_dedup_relative_wer = -99\n";
    let manifest = write_manifest(dir.path(), &body);
    let out = run_stage(&manifest, &["run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("gates failed"),
        "stderr: {}",
        stderr(&out)
    );
    assert!(
        stdout(&out).contains("gate max_dedup_relative_wer FAIL"),
        "stdout: {}",
        stdout(&out)
    );
}

#[test]
fn classifier_without_trained_model_names_the_missing_stage() {
    let dir = tempfile::tempdir().expect("tempdir");
    let body = format!(
        "seed = 42\nout.dir = {}\ncorpus.preset = wer\nmodel.kind = tree\n",
        dir.path().join("out").display()
    );
    let manifest = write_manifest(dir.path(), &body);
    assert!(run_stage(&manifest, &["generate"]).status.success());
    assert!(run_stage(&manifest, &["featurize"]).status.success());
    let out = run_stage(&manifest, &["dedup"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("train"), "stderr: {}", stderr(&out));
}

#[test]
fn rerunning_a_stage_reports_unchanged_outputs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), &fast_manifest(&dir.path().join("out")));
    let first = run_stage(&manifest, &["generate"]);
    assert!(first.status.success());
    assert!(
        stdout(&first).lines().all(|l| l.starts_with("wrote ")),
        "{}",
        stdout(&first)
    );
    let second = run_stage(&manifest, &["generate"]);
    assert!(second.status.success());
    assert!(
        stdout(&second).lines().all(|l| l.starts_with("unchanged ")),
        "{}",
        stdout(&second)
    );
}

#[test]
fn quiet_suppresses_progress_lines() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), &fast_manifest(&dir.path().join("out")));
    let out = run_stage(&manifest, &["--quiet", "generate"]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty(), "stdout: {}", stdout(&out));
}

#[test]
fn seed_flag_overrides_the_manifest_seed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), &fast_manifest(&dir.path().join("out")));
    assert!(run_stage(&manifest, &["generate"]).status.success());
    let default_log = fs::read(dir.path().join("out/log.jsonl")).expect("log");
    let reseeded = run_stage(&manifest, &["--seed", "99", "generate"]);
    assert!(reseeded.status.success());
    let reseeded_log = fs::read(dir.path().join("out/log.jsonl")).expect("log");
    assert_ne!(default_log, reseeded_log);
}

#[test]
fn every_stage_subcommand_runs_in_order() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), &fast_manifest(&dir.path().join("out")));
    let stages = [
        "generate",
        "featurize",
        "mine-labels",
        "train",
        "dedup",
        "distribute",
        "bias",
        "evaluate",
        "report",
    ];
    for stage in stages {
        let out = run_stage(&manifest, &[stage]);
        assert!(
            out.status.success(),
            "stage {stage} failed: {}{}",
            stdout(&out),
            stderr(&out)
        );
    }
    let report = run_stage(&manifest, &["report"]);
    let body = stdout(&report);
    assert!(
        body.contains("pair quality") && body.contains("biasing replay"),
        "{body}"
    );
}

#[test]
fn run_executes_the_whole_pipeline_and_prints_the_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = write_manifest(dir.path(), &fast_manifest(&dir.path().join("out")));
    let out = run_stage(&manifest, &["--quiet", "run"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let body = stdout(&out);
    assert!(
        body.contains("pair quality") && body.contains("biasing replay"),
        "{body}"
    );
    assert!(dir.path().join("out/report.json").exists());
}
