//! Run manifests: one key = value text file drives every pipeline stage.
//!
//! Format: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored. Unknown or duplicated keys are rejected with the
//! offending key and line number. The full key set:
//!
//! ```text
//! seed = 42                         # master seed (u64)
//! out.dir = out/public              # directory that receives all artifacts
//! corpus.preset = public            # public | nbest2 | community | wer
//! corpus.n_max = 5                  # optional n-best depth override
//! labels.min_support = 3            # distinct users required per repeat pair
//! labels.split_ratio = 0.8          # train fraction of labeled pairs
//! model.kind = threshold            # threshold | linear | tree | svm
//! model.tau = 0.35                  # optional fixed cut; skips training
//! bias.budget = 25                  # biasing list size k
//! bias.weight_cap = 1.0             # weight of the heaviest entry
//! bias.boost_strength = 2.0         # hypothesis score bonus multiplier
//! paths.catalog = ...               # optional per-artifact overrides
//! paths.log = ...
//! paths.model = ...
//! paths.clusters = ...
//! paths.report = ...
//! gates.min_recall = 0.95           # optional pass/fail thresholds,
//! gates.min_precision = 0.98        # checked by the evaluate stage
//! gates.min_edit_f1_gap = 0.20
//! gates.max_dedup_relative_wer = -0.01
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::comparison::ModelKind;
use crate::error::{Error, Result};
use crate::presets;

/// Optional pass/fail thresholds applied by the evaluate stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gates {
    /// Dedup pair recall must be at least this.
    pub min_recall: Option<f64>,
    /// Dedup pair precision must be at least this.
    pub min_precision: Option<f64>,
    /// Dedup F1 minus edit-baseline F1 must be at least this.
    pub min_edit_f1_gap: Option<f64>,
    /// Relative WER (%) of the dedup list, full scope, must be at most this.
    pub max_dedup_relative_wer: Option<f64>,
}

impl Gates {
    pub fn any(&self) -> bool {
        self.min_recall.is_some()
            || self.min_precision.is_some()
            || self.min_edit_f1_gap.is_some()
            || self.max_dedup_relative_wer.is_some()
    }
}

/// Optional replacements for individual artifact locations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathOverrides {
    pub catalog: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Everything one pipeline run needs. Stages communicate only through the
/// artifact files named here, and every artifact records the manifest hash
/// in its header.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub preset: String,
    pub n_max: Option<usize>,
    pub min_support: usize,
    pub split_ratio: f64,
    pub model_kind: ModelKind,
    /// Fixed clustering cut on the cooccurrence feature; when set, the
    /// dedup stage needs no trained model.
    pub tau: Option<f64>,
    pub budget: usize,
    pub weight_cap: f64,
    pub boost_strength: f64,
    pub paths: PathOverrides,
    pub gates: Gates,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            seed: 42,
            out_dir: PathBuf::from("out"),
            preset: "public".to_string(),
            n_max: None,
            min_support: 3,
            split_ratio: 0.8,
            model_kind: ModelKind::Threshold,
            tau: None,
            budget: 25,
            weight_cap: 1.0,
            boost_strength: 2.0,
            paths: PathOverrides::default(),
            gates: Gates::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize, what: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::config(
            key,
            format!("line {line}: cannot parse {value:?} as {what}"),
        )
    })
}

fn unit_open(key: &str, value: f64, line: usize) -> Result<f64> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::config(
            key,
            format!("line {line}: {value} outside (0, 1)"),
        ));
    }
    Ok(value)
}

impl RunManifest {
    /// Parse the documented key = value format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut manifest = RunManifest::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::config(
                    format!("line {line}"),
                    format!("expected `key = value`, got {content:?}"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::config(format!("line {line}"), "empty key"));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, format!("duplicated on line {line}")));
            }
            manifest.apply(key, value, line)?;
        }
        Ok(manifest)
    }

    /// Read and parse a manifest file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--manifest", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "seed" => self.seed = parse_num(key, value, line, "an unsigned integer")?,
            "out.dir" => self.out_dir = PathBuf::from(value),
            "corpus.preset" => {
                if !presets::PRESET_NAMES.contains(&value) {
                    return Err(Error::config(
                        key,
                        format!(
                            "line {line}: unknown preset {value:?}; expected one of {}",
                            presets::PRESET_NAMES.join(", ")
                        ),
                    ));
                }
                self.preset = value.to_string();
            }
            "corpus.n_max" => {
                let n: usize = parse_num(key, value, line, "an unsigned integer")?;
                if n == 0 {
                    return Err(Error::config(key, format!("line {line}: must be ≥ 1")));
                }
                self.n_max = Some(n);
            }
            "labels.min_support" => {
                let n: usize = parse_num(key, value, line, "an unsigned integer")?;
                if n == 0 {
                    return Err(Error::config(key, format!("line {line}: must be ≥ 1")));
                }
                self.min_support = n;
            }
            "labels.split_ratio" => {
                let r: f64 = parse_num(key, value, line, "a number")?;
                self.split_ratio = unit_open(key, r, line)?;
            }
            "model.kind" => {
                self.model_kind = value
                    .parse()
                    .map_err(|e: Error| Error::config(key, format!("line {line}: {e}")))?;
            }
            "model.tau" => {
                let t: f64 = parse_num(key, value, line, "a number")?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::config(
                        key,
                        format!("line {line}: {t} outside [0, 1]"),
                    ));
                }
                self.tau = Some(t);
            }
            "bias.budget" => {
                let k: usize = parse_num(key, value, line, "an unsigned integer")?;
                if k == 0 {
                    return Err(Error::config(key, format!("line {line}: must be ≥ 1")));
                }
                self.budget = k;
            }
            "bias.weight_cap" => {
                let w: f64 = parse_num(key, value, line, "a number")?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::config(key, format!("line {line}: must be positive")));
                }
                self.weight_cap = w;
            }
            "bias.boost_strength" => {
                let b: f64 = parse_num(key, value, line, "a number")?;
                if !(b >= 0.0 && b.is_finite()) {
                    return Err(Error::config(key, format!("line {line}: must be ≥ 0")));
                }
                self.boost_strength = b;
            }
            "paths.catalog" => self.paths.catalog = Some(PathBuf::from(value)),
            "paths.log" => self.paths.log = Some(PathBuf::from(value)),
            "paths.model" => self.paths.model = Some(PathBuf::from(value)),
            "paths.clusters" => self.paths.clusters = Some(PathBuf::from(value)),
            "paths.report" => self.paths.report = Some(PathBuf::from(value)),
            "gates.min_recall" => {
                self.gates.min_recall = Some(parse_num(key, value, line, "a number")?)
            }
            "gates.min_precision" => {
                self.gates.min_precision = Some(parse_num(key, value, line, "a number")?)
            }
            "gates.min_edit_f1_gap" => {
                self.gates.min_edit_f1_gap = Some(parse_num(key, value, line, "a number")?)
            }
            "gates.max_dedup_relative_wer" => {
                self.gates.max_dedup_relative_wer = Some(parse_num(key, value, line, "a number")?)
            }
            _ => {
                return Err(Error::config(
                    key,
                    format!("line {line}: unknown manifest key"),
                ));
            }
        }
        Ok(())
    }

    /// The normalized manifest text: every effective key in a fixed order.
    /// Parsing this text reproduces the manifest exactly.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &str| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("seed", &self.seed.to_string());
        kv("out.dir", &self.out_dir.display().to_string());
        kv("corpus.preset", &self.preset);
        if let Some(n) = self.n_max {
            kv("corpus.n_max", &n.to_string());
        }
        kv("labels.min_support", &self.min_support.to_string());
        kv("labels.split_ratio", &self.split_ratio.to_string());
        kv("model.kind", self.model_kind.name());
        if let Some(t) = self.tau {
            kv("model.tau", &t.to_string());
        }
        kv("bias.budget", &self.budget.to_string());
        kv("bias.weight_cap", &self.weight_cap.to_string());
        kv("bias.boost_strength", &self.boost_strength.to_string());
        let mut path = |k: &str, v: &Option<PathBuf>| {
            if let Some(p) = v {
                let _ = writeln!(out, "{k} = {}", p.display());
            }
        };
        path("paths.catalog", &self.paths.catalog);
        path("paths.log", &self.paths.log);
        path("paths.model", &self.paths.model);
        path("paths.clusters", &self.paths.clusters);
        path("paths.report", &self.paths.report);
        let mut gate = |k: &str, v: Option<f64>| {
            if let Some(g) = v {
                let _ = writeln!(out, "{k} = {g}");
            }
        };
        gate("gates.min_recall", self.gates.min_recall);
        gate("gates.min_precision", self.gates.min_precision);
        gate("gates.min_edit_f1_gap", self.gates.min_edit_f1_gap);
        gate(
            "gates.max_dedup_relative_wer",
            self.gates.max_dedup_relative_wer,
        );
        out
    }

    /// Hex SHA-256 of the canonical text; stamped into every output header.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.paths
            .catalog
            .clone()
            .unwrap_or_else(|| self.artifact("catalog.jsonl"))
    }

    pub fn log_path(&self) -> PathBuf {
        self.paths
            .log
            .clone()
            .unwrap_or_else(|| self.artifact("log.jsonl"))
    }

    pub fn truth_path(&self) -> PathBuf {
        self.artifact("truth.jsonl")
    }

    pub fn cooccurrence_path(&self) -> PathBuf {
        self.artifact("cooccurrence.jsonl")
    }

    pub fn item_similarity_path(&self) -> PathBuf {
        self.artifact("item_similarity.jsonl")
    }

    pub fn resolutions_path(&self) -> PathBuf {
        self.artifact("resolutions.jsonl")
    }

    pub fn repeat_pairs_path(&self) -> PathBuf {
        self.artifact("repeat_pairs.jsonl")
    }

    pub fn labels_path(&self) -> PathBuf {
        self.artifact("labels.jsonl")
    }

    pub fn model_path(&self) -> PathBuf {
        self.paths
            .model
            .clone()
            .unwrap_or_else(|| self.artifact("model.json"))
    }

    pub fn model_summary_path(&self) -> PathBuf {
        self.artifact("model_summary.json")
    }

    pub fn clusters_path(&self) -> PathBuf {
        self.paths
            .clusters
            .clone()
            .unwrap_or_else(|| self.artifact("clusters.jsonl"))
    }

    pub fn distribution_path(&self) -> PathBuf {
        self.artifact("distribution.json")
    }

    pub fn biasing_path(&self) -> PathBuf {
        self.artifact("biasing.json")
    }

    pub fn biasing_text_path(&self) -> PathBuf {
        self.artifact("biasing.txt")
    }

    pub fn topk_path(&self) -> PathBuf {
        self.artifact("topk_biasing.json")
    }

    pub fn report_json_path(&self) -> PathBuf {
        self.artifact("report.json")
    }

    pub fn report_text_path(&self) -> PathBuf {
        self.paths
            .report
            .clone()
            .unwrap_or_else(|| self.artifact("report.txt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_defaults() {
        let m = RunManifest::parse("").unwrap();
        assert_eq!(m, RunManifest::default());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let m = RunManifest::parse("# a comment\n\nseed = 7   # trailing note\n").unwrap();
        assert_eq!(m.seed, 7);
    }

    #[test]
    fn canonical_text_round_trips() {
        let m = RunManifest {
            seed: 99,
            preset: "wer".into(),
            n_max: Some(3),
            tau: Some(0.25),
            model_kind: ModelKind::Tree,
            out_dir: PathBuf::from("out/custom"),
            paths: PathOverrides {
                report: Some(PathBuf::from("elsewhere/report.txt")),
                ..PathOverrides::default()
            },
            gates: Gates {
                min_recall: Some(0.95),
                max_dedup_relative_wer: Some(-0.01),
                ..Gates::default()
            },
            ..RunManifest::default()
        };
        let reparsed = RunManifest::parse(&m.canonical_text()).unwrap();
        assert_eq!(reparsed, m);
    }

    #[test]
    fn unknown_key_is_rejected_with_key_and_line() {
        let err = RunManifest::parse("seed = 1\ncorpus.flavor = spicy\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("corpus.flavor"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = RunManifest::parse("seed = 1\nseed = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicated on line 2"));
    }

    #[test]
    fn malformed_line_is_rejected() {
        let err = RunManifest::parse("just some words\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn bad_values_name_the_key() {
        for (text, key) in [
            ("seed = minus-one", "seed"),
            ("corpus.preset = nope", "corpus.preset"),
            ("corpus.n_max = 0", "corpus.n_max"),
            ("labels.min_support = 0", "labels.min_support"),
            ("labels.split_ratio = 1.0", "labels.split_ratio"),
            ("model.kind = forest", "model.kind"),
            ("model.tau = 1.5", "model.tau"),
            ("bias.budget = 0", "bias.budget"),
            ("bias.weight_cap = 0", "bias.weight_cap"),
            ("bias.boost_strength = -1", "bias.boost_strength"),
            ("gates.min_recall = soon", "gates.min_recall"),
        ] {
            let err = RunManifest::parse(text).unwrap_err();
            assert!(err.to_string().contains(key), "{text} → {err}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunManifest::default();
        let mut b = RunManifest::default();
        assert_eq!(a.sha256(), b.sha256());
        b.seed += 1;
        assert_ne!(a.sha256(), b.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn path_overrides_replace_derived_locations() {
        let m = RunManifest::parse("out.dir = base\npaths.clusters = elsewhere/c.jsonl\n").unwrap();
        assert_eq!(m.clusters_path(), PathBuf::from("elsewhere/c.jsonl"));
        assert_eq!(m.log_path(), PathBuf::from("base/log.jsonl"));
    }
}
