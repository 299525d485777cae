//! Pairwise comparison models over (cooccurrence, item-similarity) features.
//!
//! Click resolutions provide weak labels: two references resolving to the
//! same entity are a positive pair, references resolving to different
//! entities are negative candidates. Four model kinds map a feature pair to
//! a link decision; all train from scratch with pinned hyperparameters so a
//! seed pins the model.

mod train;

pub(crate) use train::best_f1_cut;
pub use train::{train, TrainConfig};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// One labeled reference pair with its comparison features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub ref_a: u32,
    pub ref_b: u32,
    /// (c, u): n-best cooccurrence and item similarity, both in [0, 1].
    pub features: (f64, f64),
    /// 1 = coreferent.
    pub label: u8,
}

/// Model families, in the order they appear in comparison reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Cut on the cooccurrence feature alone.
    Threshold,
    /// Logistic regression via full-batch gradient descent.
    Linear,
    /// CART decision tree on both features.
    Tree,
    /// Linear soft-margin SVM with a calibrated logistic link.
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Threshold,
        ModelKind::Linear,
        ModelKind::Tree,
        ModelKind::Svm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Threshold => "threshold",
            ModelKind::Linear => "linear",
            ModelKind::Tree => "tree",
            ModelKind::Svm => "svm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(ModelKind::Threshold),
            "linear" => Ok(ModelKind::Linear),
            "tree" => Ok(ModelKind::Tree),
            "svm" => Ok(ModelKind::Svm),
            other => Err(Error::config("model", format!("unknown kind {other:?}"))),
        }
    }
}

/// One node of a trained CART tree, stored as an index-linked arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        positive_fraction: f64,
        count: usize,
    },
}

/// Kind-specific trained parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum ModelParameters {
    Threshold {
        cut: f64,
    },
    Linear {
        weights: [f64; 2],
        bias: f64,
        /// Mean training loss per epoch; diagnostic only.
        #[serde(default, skip_serializing)]
        loss_trace: Vec<f64>,
    },
    Tree {
        nodes: Vec<TreeNode>,
    },
    Svm {
        weights: [f64; 2],
        bias: f64,
        /// Logistic link (slope ≥ 0, intercept) fit on training margins.
        calibration: (f64, f64),
    },
}

/// A trained comparison model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonModel {
    pub kind: ModelKind,
    pub parameters: ModelParameters,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub train_f1: f64,
    /// Filled by the pipeline after held-out evaluation.
    pub test_f1: Option<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ComparisonModel {
    /// [0, 1]-bounded link score for a feature pair.
    pub fn score(&self, features: (f64, f64)) -> f64 {
        let (c, u) = features;
        match &self.parameters {
            ModelParameters::Threshold { .. } => c,
            ModelParameters::Linear { weights, bias, .. } => {
                sigmoid(weights[0] * c + weights[1] * u + bias)
            }
            ModelParameters::Tree { nodes } => {
                let mut at = 0usize;
                loop {
                    match &nodes[at] {
                        TreeNode::Leaf {
                            positive_fraction, ..
                        } => return *positive_fraction,
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let v = if *feature == 0 { c } else { u };
                            at = if v <= *threshold { *left } else { *right };
                        }
                    }
                }
            }
            ModelParameters::Svm {
                weights,
                bias,
                calibration,
            } => {
                let margin = weights[0] * c + weights[1] * u + bias;
                sigmoid(calibration.0 * margin + calibration.1)
            }
        }
    }

    /// Score at or above which a pair is declared a link.
    pub fn boundary(&self) -> f64 {
        match &self.parameters {
            ModelParameters::Threshold { cut } => *cut,
            ModelParameters::Linear { .. } | ModelParameters::Tree { .. } => 0.5,
            // The raw decision is the margin sign; through the calibrated
            // link, margin 0 lands exactly at sigmoid(intercept).
            ModelParameters::Svm { calibration, .. } => sigmoid(calibration.1),
        }
    }

    pub fn classify(&self, features: (f64, f64)) -> u8 {
        u8::from(self.score(features) >= self.boundary())
    }

    /// Pairwise F1 of this model's decisions against the given labels.
    pub fn f1(&self, pairs: &[LabeledPair]) -> f64 {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for p in pairs {
            match (self.classify(p.features), p.label) {
                (1, 1) => tp += 1,
                (1, 0) => fp += 1,
                (0, 1) => fn_ += 1,
                _ => {}
            }
        }
        f1_from_counts(tp, fp, fn_)
    }
}

pub(crate) fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Assemble a balanced labeled training set from click resolutions.
///
/// Positives are distinct same-entity pairs plus one self-pair per resolved
/// reference (features (1, 1): a reference trivially cooccurs with itself).
/// Negatives are sampled uniformly without replacement from cross-entity
/// pairs until the counts match.
pub fn build_training_set(
    resolutions: &BTreeMap<u32, String>,
    c: &SimilarityMatrix,
    u: &SimilarityMatrix,
    seed: u64,
) -> Result<Vec<LabeledPair>> {
    if resolutions.is_empty() {
        return Err(Error::config(
            "resolutions",
            "no resolved references to label",
        ));
    }
    let mut by_entity: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for (&rid, entity) in resolutions {
        by_entity.entry(entity.as_str()).or_default().push(rid);
    }

    let features = |a: u32, b: u32| -> (f64, f64) {
        if a == b {
            (1.0, 1.0)
        } else {
            (c.get(a, b), u.get(a, b))
        }
    };

    let mut pairs: Vec<LabeledPair> = Vec::new();
    for members in by_entity.values() {
        for (k, &a) in members.iter().enumerate() {
            pairs.push(LabeledPair {
                ref_a: a,
                ref_b: a,
                features: features(a, a),
                label: 1,
            });
            for &b in &members[k + 1..] {
                let (a, b) = (a.min(b), a.max(b));
                pairs.push(LabeledPair {
                    ref_a: a,
                    ref_b: b,
                    features: features(a, b),
                    label: 1,
                });
            }
        }
    }
    let needed = pairs.len();

    let refs: Vec<u32> = resolutions.keys().copied().collect();
    let total_pairs = refs.len() * (refs.len() - 1) / 2;
    let same_entity: usize = by_entity
        .values()
        .map(|m| m.len() * (m.len() - 1) / 2)
        .sum();
    let available = total_pairs - same_entity;
    if available < needed {
        return Err(Error::NotEnoughNegatives { needed, available });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut negatives: Vec<(u32, u32)> = Vec::with_capacity(needed);
    if needed * 4 >= available {
        // Dense regime: enumerate every cross-entity pair and take a
        // shuffled prefix.
        let mut all: Vec<(u32, u32)> = Vec::with_capacity(available);
        for (k, &a) in refs.iter().enumerate() {
            for &b in &refs[k + 1..] {
                if resolutions[&a] != resolutions[&b] {
                    all.push((a, b));
                }
            }
        }
        all.shuffle(&mut rng);
        negatives.extend(all.into_iter().take(needed));
    } else {
        // Sparse regime: rejection-sample without enumerating the space.
        let mut taken = std::collections::BTreeSet::new();
        while negatives.len() < needed {
            let a = refs[rng.random_range(0..refs.len())];
            let b = refs[rng.random_range(0..refs.len())];
            if a == b || resolutions[&a] == resolutions[&b] {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if taken.insert(key) {
                negatives.push(key);
            }
        }
    }
    for (a, b) in negatives {
        pairs.push(LabeledPair {
            ref_a: a,
            ref_b: b,
            features: features(a, b),
            label: 0,
        });
    }
    Ok(pairs)
}

/// Label-stratified deterministic shuffle split.
pub fn split_train_test(
    pairs: &[LabeledPair],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<LabeledPair>, Vec<LabeledPair>)> {
    if pairs.len() < 5 {
        return Err(Error::TooFewPairs {
            min: 5,
            got: pairs.len(),
        });
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config(
            "split ratio",
            "must lie strictly inside (0, 1)",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [1u8, 0u8] {
        let mut group: Vec<LabeledPair> =
            pairs.iter().copied().filter(|p| p.label == label).collect();
        group.shuffle(&mut rng);
        let cut = (group.len() as f64 * ratio).round() as usize;
        test.extend(group.split_off(cut));
        train.extend(group);
    }
    Ok((train, test))
}
