//! Training routines for the four comparison model families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{f1_from_counts, ComparisonModel, LabeledPair, ModelKind, ModelParameters, TreeNode};

/// Pinned training hyperparameters; defaults are what the pipeline uses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Gradient-descent step size for logistic regression.
    pub learning_rate: f64,
    /// Full-batch epochs for logistic regression.
    pub epochs: usize,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    /// Soft-margin penalty weight.
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 500,
            tree_max_depth: 4,
            tree_min_leaf: 5,
            svm_c: 1.0,
            svm_epochs: 200,
            seed: 0,
        }
    }
}

/// Train one model family on labeled pairs.
pub fn train(
    kind: ModelKind,
    pairs: &[LabeledPair],
    config: &TrainConfig,
) -> Result<ComparisonModel> {
    for p in pairs {
        if !(p.features.0.is_finite() && p.features.1.is_finite()) {
            return Err(Error::NonFiniteFeature {
                a: p.ref_a,
                b: p.ref_b,
            });
        }
    }
    let n_pos = pairs.iter().filter(|p| p.label == 1).count();
    if n_pos == 0 || n_pos == pairs.len() {
        return Err(Error::SingleLabelTrainingSet);
    }

    let parameters = match kind {
        ModelKind::Threshold => train_threshold(pairs),
        ModelKind::Linear => train_linear(pairs, config),
        ModelKind::Tree => train_tree(pairs, config),
        ModelKind::Svm => train_svm(pairs, config),
    };
    let mut model = ComparisonModel {
        kind,
        parameters,
        feature_names: vec!["cooccurrence".into(), "item_similarity".into()],
        seed: config.seed,
        train_f1: 0.0,
        test_f1: None,
    };
    model.train_f1 = model.f1(pairs);
    Ok(model)
}

/// Midpoints between consecutive distinct values, with 0 and 1 as sentinels.
pub(crate) fn candidate_cuts(values: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::with_capacity(values.len() + 2);
    distinct.push(0.0);
    distinct.extend_from_slice(values);
    distinct.push(1.0);
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Cut maximizing F1 of `score ≥ cut` over scored labels, with ties
/// resolved toward the higher (stricter) cut. Returns (cut, best F1).
pub(crate) fn best_f1_cut(scored: &[(f64, u8)]) -> (f64, f64) {
    let scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
    let mut best = (0.5, f64::NEG_INFINITY);
    for cut in candidate_cuts(&scores) {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for &(score, label) in scored {
            match (score >= cut, label) {
                (true, 1) => tp += 1,
                (true, 0) => fp += 1,
                (false, 1) => fn_ += 1,
                _ => {}
            }
        }
        let f1 = f1_from_counts(tp, fp, fn_);
        if f1 >= best.1 {
            best = (cut, f1);
        }
    }
    best
}

fn train_threshold(pairs: &[LabeledPair]) -> ModelParameters {
    let scored: Vec<(f64, u8)> = pairs.iter().map(|p| (p.features.0, p.label)).collect();
    ModelParameters::Threshold {
        cut: best_f1_cut(&scored).0,
    }
}

/// Mean cross-entropy of a logistic fit, computed in log-space for
/// stability.
fn logistic_loss(pairs: &[LabeledPair], weights: [f64; 2], bias: f64) -> f64 {
    let mut total = 0.0;
    for p in pairs {
        let z = weights[0] * p.features.0 + weights[1] * p.features.1 + bias;
        let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
        total += softplus - f64::from(p.label) * z;
    }
    total / pairs.len() as f64
}

/// Analytic gradient of `logistic_loss` in (w0, w1, b).
fn logistic_grad(pairs: &[LabeledPair], weights: [f64; 2], bias: f64) -> [f64; 3] {
    let mut grad = [0.0f64; 3];
    for p in pairs {
        let z = weights[0] * p.features.0 + weights[1] * p.features.1 + bias;
        let residual = 1.0 / (1.0 + (-z).exp()) - f64::from(p.label);
        grad[0] += residual * p.features.0;
        grad[1] += residual * p.features.1;
        grad[2] += residual;
    }
    let n = pairs.len() as f64;
    [grad[0] / n, grad[1] / n, grad[2] / n]
}

fn train_linear(pairs: &[LabeledPair], config: &TrainConfig) -> ModelParameters {
    let mut weights = [0.0f64; 2];
    let mut bias = 0.0f64;
    let mut loss_trace = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        loss_trace.push(logistic_loss(pairs, weights, bias));
        let g = logistic_grad(pairs, weights, bias);
        weights[0] -= config.learning_rate * g[0];
        weights[1] -= config.learning_rate * g[1];
        bias -= config.learning_rate * g[2];
    }
    loss_trace.push(logistic_loss(pairs, weights, bias));
    ModelParameters::Linear {
        weights,
        bias,
        loss_trace,
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn grow_tree(
    points: &[(f64, f64, u8)],
    depth: usize,
    config: &TrainConfig,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let total = points.len();
    let pos = points.iter().filter(|p| p.2 == 1).count();
    let make_leaf = |nodes: &mut Vec<TreeNode>| {
        nodes.push(TreeNode::Leaf {
            positive_fraction: pos as f64 / total as f64,
            count: total,
        });
        nodes.len() - 1
    };
    if depth >= config.tree_max_depth || pos == 0 || pos == total {
        return make_leaf(nodes);
    }

    // Best (feature, threshold) by weighted gini; feature 0 then ascending
    // thresholds, so ties resolve deterministically to the first candidate.
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..2usize {
        let mut values: Vec<f64> = points
            .iter()
            .map(|p| if feature == 0 { p.0 } else { p.1 })
            .collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        for w in values.windows(2) {
            let cut = (w[0] + w[1]) / 2.0;
            let (mut left_n, mut left_pos) = (0usize, 0usize);
            for p in points {
                let v = if feature == 0 { p.0 } else { p.1 };
                if v <= cut {
                    left_n += 1;
                    left_pos += usize::from(p.2 == 1);
                }
            }
            let right_n = total - left_n;
            if left_n < config.tree_min_leaf || right_n < config.tree_min_leaf {
                continue;
            }
            let right_pos = pos - left_pos;
            let impurity = (left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(right_pos, right_n))
                / total as f64;
            if best.is_none_or(|b| impurity < b.0 - 1e-12) {
                best = Some((impurity, feature, cut));
            }
        }
    }
    let Some((impurity, feature, cut)) = best else {
        return make_leaf(nodes);
    };
    if impurity >= gini(pos, total) - 1e-12 {
        return make_leaf(nodes);
    }

    let (left_pts, right_pts): (Vec<_>, Vec<_>) = points
        .iter()
        .partition(|p| (if feature == 0 { p.0 } else { p.1 }) <= cut);
    let at = nodes.len();
    nodes.push(TreeNode::Split {
        feature,
        threshold: cut,
        left: 0,
        right: 0,
    });
    let left = grow_tree(&left_pts, depth + 1, config, nodes);
    let right = grow_tree(&right_pts, depth + 1, config, nodes);
    nodes[at] = TreeNode::Split {
        feature,
        threshold: cut,
        left,
        right,
    };
    at
}

fn train_tree(pairs: &[LabeledPair], config: &TrainConfig) -> ModelParameters {
    let points: Vec<(f64, f64, u8)> = pairs
        .iter()
        .map(|p| (p.features.0, p.features.1, p.label))
        .collect();
    let mut nodes = Vec::new();
    grow_tree(&points, 0, config, &mut nodes);
    ModelParameters::Tree { nodes }
}

fn train_svm(pairs: &[LabeledPair], config: &TrainConfig) -> ModelParameters {
    // Soft-margin objective C·Σ hinge + ½‖w‖² in its equivalent mean form
    // with λ = 1/(C·n), minimized by full-batch subgradient steps η = 1/(λt).
    // The bias rides along as a third, weakly regularized coordinate.
    let n = pairs.len() as f64;
    let lambda = 1.0 / (config.svm_c * n);
    let mut w = [0.0f64; 3];
    for t in 1..=config.svm_epochs {
        let mut active = [0.0f64; 3];
        for p in pairs {
            let y = if p.label == 1 { 1.0 } else { -1.0 };
            let margin = y * (w[0] * p.features.0 + w[1] * p.features.1 + w[2]);
            if margin < 1.0 {
                active[0] += y * p.features.0;
                active[1] += y * p.features.1;
                active[2] += y;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        for k in 0..3 {
            w[k] = w[k] * (1.0 - eta * lambda) + eta * active[k] / n;
        }
    }
    let weights = [w[0], w[1]];
    let bias = w[2];

    // Logistic link over raw margins turns the sign decision into a
    // [0, 1] score; the slope is kept non-negative so score ordering
    // follows margin ordering.
    let margins: Vec<f64> = pairs
        .iter()
        .map(|p| weights[0] * p.features.0 + weights[1] * p.features.1 + bias)
        .collect();
    let (mut slope, mut intercept) = (1.0f64, 0.0f64);
    for _ in 0..500 {
        let (mut gs, mut gi) = (0.0f64, 0.0f64);
        for (m, p) in margins.iter().zip(pairs) {
            let z = slope * m + intercept;
            let residual = 1.0 / (1.0 + (-z).exp()) - f64::from(p.label);
            gs += residual * m;
            gi += residual;
        }
        slope = (slope - 0.5 * gs / n).max(0.0);
        intercept -= 0.5 * gi / n;
    }
    ModelParameters::Svm {
        weights,
        bias,
        calibration: (slope, intercept),
    }
}
