//! Edit distances (character- and word-level) and the nearest-form
//! matching baseline.

/// Levenshtein distance over arbitrary comparable items.
///
/// Single-row DP; O(|a|·|b|) time, O(min) extra space.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, lc) in long.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let cost = if lc == sc { 0 } else { 1 };
            let next = (prev_diag + cost).min(row[j] + 1).min(row[j + 1] + 1);
            prev_diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[short.len()]
}

/// Character-level edit distance with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b)
}

/// Word-level edit distance over whitespace tokens, the unit WER counts.
pub fn word_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<&str> = a.split_whitespace().collect();
    let b: Vec<&str> = b.split_whitespace().collect();
    levenshtein(&a, &b)
}

/// Per-entity tallies from the nearest-form baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Outcome of matching observed references against catalog forms by edit
/// distance alone.
#[derive(Debug, Clone)]
pub struct EditMatchReport {
    /// Indexed like the `inputs` slice passed to [`edit_baseline_match`].
    pub per_entity: Vec<MatchCounts>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl EditMatchReport {
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Match each observed output to the nearest catalog form by edit distance.
///
/// `truths[k]` is the index into `inputs` of the form output `k` actually
/// referred to. An output is correct (TP for its entity) iff its distance to
/// the true form is ≤ its distance to every other form — a tie goes to the
/// true form. A wrong match books one FP against the nearest other form and
/// one FN against the true form.
pub fn edit_baseline_match(
    outputs: &[String],
    truths: &[usize],
    inputs: &[String],
) -> EditMatchReport {
    assert_eq!(outputs.len(), truths.len(), "one truth index per output");
    let mut per_entity = vec![MatchCounts::default(); inputs.len()];

    // Distinct outputs share one nearest-form resolution; logs repeat the
    // popular forms heavily, so this collapses most of the work.
    let mut resolved: std::collections::HashMap<(&str, usize), Option<usize>> =
        std::collections::HashMap::new();

    for (output, &truth) in outputs.iter().zip(truths) {
        let wrong = *resolved.entry((output.as_str(), truth)).or_insert_with(|| {
            let d_true = edit_distance(output, &inputs[truth]);
            let mut best_other: Option<(usize, usize)> = None;
            for (idx, form) in inputs.iter().enumerate() {
                if idx == truth {
                    continue;
                }
                // d(output, form) ≥ length difference; skip forms that
                // cannot beat the true distance.
                let len_gap = output.chars().count().abs_diff(form.chars().count());
                if len_gap >= d_true {
                    continue;
                }
                let d = edit_distance(output, form);
                if d < d_true && best_other.is_none_or(|(bd, _)| d < bd) {
                    best_other = Some((d, idx));
                    if d == 0 {
                        break;
                    }
                }
            }
            best_other.map(|(_, idx)| idx)
        });

        match wrong {
            None => per_entity[truth].tp += 1,
            Some(matched) => {
                per_entity[matched].fp += 1;
                per_entity[truth].fn_ += 1;
            }
        }
    }

    let tp = per_entity.iter().map(|c| c.tp).sum();
    let fp = per_entity.iter().map(|c| c.fp).sum();
    let fn_ = per_entity.iter().map(|c| c.fn_).sum();
    EditMatchReport {
        per_entity,
        tp,
        fp,
        fn_,
    }
}
