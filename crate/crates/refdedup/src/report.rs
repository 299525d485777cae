//! Plain-text rendering of the pipeline report.
//!
//! The JSON report is the machine interface; this module lays the same
//! numbers out as aligned tables so runs can be compared side by side.

use crate::pipeline::PipelineReport;

/// Left-align the first column, right-align the rest, two-space gutters.
fn align(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[0]));
            } else {
                line.push_str(&format!("{cell:>width$}", width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn ratio(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    }
}

fn list_name(tag: &str) -> String {
    match tag {
        "none" => "none".to_string(),
        "top_k_mentions" => "top-k mentions".to_string(),
        "dedup_clusters" => "dedup clusters".to_string(),
        other => other.replace('_', " "),
    }
}

fn scope_name(scope: &str) -> String {
    match scope {
        "modeled_only" => "modeled".to_string(),
        other => other.to_string(),
    }
}

/// Render the full report as aligned plain-text tables.
pub fn render(report: &PipelineReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "dataset: {}    model: {}\n",
        report.dataset, report.model
    ));

    out.push_str("\npair quality\n");
    let pair_rows = vec![
        vec![
            "method".to_string(),
            "precision".to_string(),
            "recall".to_string(),
            "f1".to_string(),
        ],
        vec![
            "edit baseline".to_string(),
            format!("{:.3}", report.edit_baseline.precision),
            format!("{:.3}", report.edit_baseline.recall),
            format!("{:.3}", report.edit_baseline.f1),
        ],
        vec![
            "record dedup".to_string(),
            ratio(report.dedup.precision),
            ratio(report.dedup.recall),
            ratio(report.dedup.f1),
        ],
    ];
    out.push_str(&indent(&align(&pair_rows)));

    if !report.models.is_empty() {
        out.push_str("\ncomparison models\n");
        let mut rows = vec![vec![
            "model".to_string(),
            "train f1".to_string(),
            "held-out f1".to_string(),
        ]];
        for m in &report.models {
            rows.push(vec![
                m.kind.clone(),
                format!("{:.3}", m.train_f1),
                format!("{:.3}", m.test_f1),
            ]);
        }
        out.push_str(&indent(&align(&rows)));
    }

    if !report.wer.is_empty() {
        out.push_str("\nbiasing replay\n");
        let mut rows = vec![vec![
            "list".to_string(),
            "scope".to_string(),
            "base wer".to_string(),
            "biased wer".to_string(),
            "rel wer %".to_string(),
            "flipped".to_string(),
        ]];
        for w in &report.wer {
            rows.push(vec![
                list_name(&w.biasing_source),
                scope_name(&w.scope),
                format!("{:.3}", w.base_wer),
                format!("{:.3}", w.biased_wer),
                format!("{:+.2}", w.relative_wer_percent),
                w.flipped_requests.to_string(),
            ]);
        }
        out.push_str(&indent(&align(&rows)));
        if let Some(w) = report.wer.first() {
            out.push_str(&format!("  references: {}\n", w.reference_source));
        }
    }

    out.push_str("\ngates\n");
    if report.gates.is_empty() {
        out.push_str("  none configured\n");
    } else {
        let mut rows = vec![vec![
            "gate".to_string(),
            "threshold".to_string(),
            "value".to_string(),
            "pass".to_string(),
        ]];
        for g in &report.gates {
            rows.push(vec![
                g.name.clone(),
                format!("{:.3}", g.threshold),
                ratio(g.value),
                if g.pass { "yes" } else { "NO" }.to_string(),
            ]);
        }
        out.push_str(&indent(&align(&rows)));
    }
    out
}

fn indent(block: &str) -> String {
    block.lines().map(|l| format!("  {l}\n")).collect()
}
