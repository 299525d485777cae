//! Title normalization: canonical titles to spoken forms.
//!
//! Spoken forms are lowercase, token-separated, and digit-free: numerals
//! (arabic or roman) are verbalized the way a user would say them, e.g.
//! "Tiny Times III" becomes "tiny times three" and "Archive 81" becomes
//! "archive eighty one".

use crate::error::{Error, Result};

/// Normalize a raw title into its spoken form.
///
/// Lowercases, strips punctuation (apostrophes are removed, everything else
/// becomes a token break), verbalizes digit runs and roman-numeral tokens,
/// and collapses whitespace. Idempotent: normalizing a spoken form returns
/// it unchanged.
pub fn normalize_title(raw: &str) -> Result<String> {
    let mut cleaned = String::with_capacity(raw.len());
    for ch in raw.chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_alphanumeric() {
            for low in ch.to_lowercase() {
                cleaned.push(low);
            }
        } else {
            cleaned.push(' ');
        }
    }

    let mut out: Vec<String> = Vec::new();
    for token in cleaned.split_whitespace() {
        for piece in split_alpha_digit_runs(token) {
            match piece {
                Run::Digits(d) => {
                    let value: u64 = d.parse().unwrap_or(0);
                    out.push(number_to_words(value));
                }
                Run::Alpha(a) => {
                    if let Some(v) = parse_roman(a) {
                        out.push(number_to_words(v));
                    } else {
                        out.push(a.to_string());
                    }
                }
            }
        }
    }

    let spoken = out.join(" ");
    if spoken.is_empty() {
        return Err(Error::EmptyAfterNormalize(raw.to_string()));
    }
    Ok(spoken)
}

enum Run<'a> {
    Alpha(&'a str),
    Digits(&'a str),
}

/// Split "r2d2" into ["r", "2", "d", "2"] so digit runs can be verbalized.
fn split_alpha_digit_runs(token: &str) -> Vec<Run<'_>> {
    let mut runs = Vec::new();
    let mut start = 0;
    let mut prev_digit: Option<bool> = None;
    for (idx, ch) in token.char_indices() {
        let is_digit = ch.is_ascii_digit();
        if let Some(prev) = prev_digit {
            if prev != is_digit {
                runs.push(slice_run(&token[start..idx], prev));
                start = idx;
            }
        }
        prev_digit = Some(is_digit);
    }
    if let Some(prev) = prev_digit {
        runs.push(slice_run(&token[start..], prev));
    }
    runs
}

fn slice_run(s: &str, digits: bool) -> Run<'_> {
    if digits {
        Run::Digits(s)
    } else {
        Run::Alpha(s)
    }
}

/// Parse a roman-numeral token in the sequel range.
///
/// Only tokens built from i/v/x with length >= 2 are accepted, and only for
/// values 1..=20. Single letters ("i", "v", "x") and anything containing
/// l/c/d/m stay words: "I Am Legend" and "The Mix" must survive untouched.
fn parse_roman(token: &str) -> Option<u64> {
    if token.len() < 2 || !token.chars().all(|c| matches!(c, 'i' | 'v' | 'x')) {
        return None;
    }
    const FORMS: [&str; 20] = [
        "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv",
        "xv", "xvi", "xvii", "xviii", "xix", "xx",
    ];
    FORMS
        .iter()
        .position(|f| *f == token)
        .map(|idx| idx as u64 + 1)
}

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Verbalize a number as space-separated lowercase words, no hyphens or "and".
pub fn number_to_words(n: u64) -> String {
    if n < 20 {
        return ONES[n as usize].to_string();
    }
    if n < 100 {
        let tens = TENS[(n / 10) as usize];
        if n.is_multiple_of(10) {
            return tens.to_string();
        }
        return format!("{} {}", tens, ONES[(n % 10) as usize]);
    }
    if n < 1000 {
        let head = format!("{} hundred", ONES[(n / 100) as usize]);
        if n.is_multiple_of(100) {
            return head;
        }
        return format!("{} {}", head, number_to_words(n % 100));
    }
    if n < 1_000_000 {
        let head = format!("{} thousand", number_to_words(n / 1000));
        if n.is_multiple_of(1000) {
            return head;
        }
        return format!("{} {}", head, number_to_words(n % 1000));
    }
    // Titles beyond the millions are not a thing; spell the digits out.
    n.to_string()
        .chars()
        .map(|c| ONES[c.to_digit(10).unwrap() as usize])
        .collect::<Vec<_>>()
        .join(" ")
}
