//! Token-level confusion channel.
//!
//! `corrupt_reference` applies per-token substitution/deletion/insertion
//! edits drawn from a `CorruptionProfile`; `synthesize_nbest` wraps it to
//! produce the ranked hypothesis list a decoder would emit, optionally
//! recovering the true form at a lower rank.

use rand::seq::SliceRandom;
use rand::Rng;

use super::CorruptionProfile;
use crate::error::{Error, Result};

/// Inserted filler tokens; all stable under normalization.
const FILLERS: [&str; 6] = ["the", "a", "of", "to", "in", "and"];

/// Run one spoken form through the confusion channel.
///
/// Edits are drawn token by token in input order, so an identical
/// (spoken form, profile, rng state) triple yields an identical output.
/// Substitution only fires for tokens with a homophone-table entry;
/// deletion never removes the last remaining token.
pub fn corrupt_reference(
    spoken_form: &str,
    profile: &CorruptionProfile,
    rng: &mut impl Rng,
) -> String {
    let tokens: Vec<&str> = spoken_form.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());

    for token in &tokens {
        let deleted = profile.deletion_rate > 0.0 && rng.random_bool(profile.deletion_rate);
        if !deleted {
            let substituted =
                profile.substitution_rate > 0.0 && rng.random_bool(profile.substitution_rate);
            let candidates = profile.homophone_table.get(*token);
            match (substituted, candidates) {
                (true, Some(cands)) if !cands.is_empty() => {
                    let pick = rng.random_range(0..cands.len());
                    out.push(cands[pick].clone());
                }
                _ => out.push(token.to_string()),
            }
        }
        if profile.insertion_rate > 0.0 && rng.random_bool(profile.insertion_rate) {
            let pick = rng.random_range(0..FILLERS.len());
            out.push(FILLERS[pick].to_string());
        }
    }

    if out.is_empty() {
        // Everything was deleted; a decoder still emits something.
        out.push(tokens[0].to_string());
    }
    out.join(" ")
}

/// Build the ranked n-best list for one utterance.
///
/// The first element is the simulated top-1 (`corrupted`). When the top-1
/// differs from the truth, the true form is recovered at a uniformly random
/// lower rank with probability `recovery_probability`; remaining slots are
/// filled with fresh corruption draws. Entries are unique and the list never
/// exceeds `n`.
pub fn synthesize_nbest(
    true_ref: &str,
    corrupted: &str,
    n: usize,
    recovery_probability: f64,
    profile: &CorruptionProfile,
    rng: &mut impl Rng,
) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::ZeroNbest);
    }
    let mut list = vec![corrupted.to_string()];
    if n == 1 {
        return Ok(list);
    }

    let mut tail: Vec<String> = Vec::with_capacity(n - 1);
    if corrupted != true_ref && recovery_probability > 0.0 && rng.random_bool(recovery_probability)
    {
        tail.push(true_ref.to_string());
    }

    let mut attempts = 0;
    while tail.len() < n - 1 && attempts < 4 * n {
        attempts += 1;
        let draw = corrupt_reference(true_ref, profile, rng);
        if draw != corrupted && !tail.contains(&draw) {
            tail.push(draw);
        }
    }

    tail.shuffle(rng);
    list.extend(tail);
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn forced_sub_profile() -> CorruptionProfile {
        CorruptionProfile {
            profile_id: "p".into(),
            substitution_rate: 1.0,
            deletion_rate: 0.0,
            insertion_rate: 0.0,
            homophone_table: BTreeMap::from([("archive".to_string(), vec!["arcade".to_string()])]),
            seed: 0,
        }
    }

    #[test]
    fn identity_channel_returns_input() {
        let profile = CorruptionProfile::identity("p0", 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            corrupt_reference("archive eighty one", &profile, &mut rng),
            "archive eighty one"
        );
    }

    #[test]
    fn forced_homophone_substitution() {
        // Only "archive" has a table entry, so rate 1 rewrites exactly it.
        let profile = forced_sub_profile();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            corrupt_reference("archive eighty one", &profile, &mut rng),
            "arcade eighty one"
        );
    }

    #[test]
    fn channel_is_deterministic_under_fixed_seed() {
        let profile = CorruptionProfile {
            profile_id: "p".into(),
            substitution_rate: 0.5,
            deletion_rate: 0.2,
            insertion_rate: 0.2,
            homophone_table: BTreeMap::from([
                (
                    "archive".to_string(),
                    vec!["arcade".to_string(), "arkive".to_string()],
                ),
                ("eighty".to_string(), vec!["eddie".to_string()]),
            ]),
            seed: 0,
        };
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50)
                .map(|_| corrupt_reference("archive eighty one", &profile, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn deletion_never_empties_the_output() {
        let profile = CorruptionProfile {
            profile_id: "p".into(),
            substitution_rate: 0.0,
            deletion_rate: 1.0,
            insertion_rate: 0.0,
            homophone_table: BTreeMap::new(),
            seed: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            corrupt_reference("archive eighty one", &profile, &mut rng),
            "archive"
        );
    }

    #[test]
    fn nbest_degenerate_n_is_top1_only() {
        let profile = forced_sub_profile();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let list = synthesize_nbest(
            "archive eighty one",
            "arcade eighty one",
            1,
            1.0,
            &profile,
            &mut rng,
        )
        .unwrap();
        assert_eq!(list, vec!["arcade eighty one".to_string()]);
    }

    #[test]
    fn nbest_zero_rejected() {
        let profile = forced_sub_profile();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(synthesize_nbest("a", "a", 0, 1.0, &profile, &mut rng).is_err());
    }

    #[test]
    fn nbest_forced_recovery_includes_truth() {
        let profile = forced_sub_profile();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let list = synthesize_nbest(
                "archive eighty one",
                "arcade eighty one",
                5,
                1.0,
                &profile,
                &mut rng,
            )
            .unwrap();
            assert_eq!(list[0], "arcade eighty one");
            assert!(list.iter().any(|h| h == "archive eighty one"));
            assert!(list.len() <= 5);
            let mut dedup = list.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), list.len(), "entries must be unique");
        }
    }

    #[test]
    fn nbest_recovery_rate_matches_configuration() {
        // Monte-Carlo oracle: count inclusions over 10k draws where the
        // top-1 is forced away from the truth.
        let profile = forced_sub_profile();
        let recovery = 0.37;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut included = 0usize;
        let draws = 10_000;
        for _ in 0..draws {
            let list = synthesize_nbest(
                "archive eighty one",
                "arcade eighty one",
                5,
                recovery,
                &profile,
                &mut rng,
            )
            .unwrap();
            if list.iter().any(|h| h == "archive eighty one") {
                included += 1;
            }
        }
        let rate = included as f64 / draws as f64;
        assert!(
            (rate - recovery).abs() <= 0.02,
            "inclusion rate {rate} deviates from configured {recovery}"
        );
    }
}
