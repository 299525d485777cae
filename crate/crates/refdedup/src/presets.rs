//! Built-in corpus presets, selected by name in the run manifest.
//!
//! Each preset fixes a catalog plan, a corruption-profile family, and the
//! generator knobs; the manifest seed derives all of their seeds, so one
//! (preset, seed) pair pins the corpus bit-for-bit.

use std::collections::BTreeMap;

use crate::corpus::synth::{
    synth_catalog, synth_profiles, CatalogPlan, ChannelRates, EntityKind, VocabMode,
};
use crate::corpus::{Catalog, CorruptionProfile, GenerateConfig, GenerateMode, RequestsPerUser};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 4] = ["public", "nbest2", "community", "wer"];

/// A fully specified corpus recipe: feed straight into `generate_corpus`.
pub struct PresetCorpus {
    pub catalog: Catalog,
    pub profiles: Vec<CorruptionProfile>,
    pub config: GenerateConfig,
}

/// Build the named preset. `seed` drives catalog, profiles, and traffic.
pub fn build(name: &str, seed: u64) -> Result<PresetCorpus> {
    match name {
        "public" => public(seed, 5, 0.5, 0.4, 0.75, 0.3),
        // Shallow n-best plus a widened, noisier channel: with one tail
        // slot, no recovery, and near-clean repeats, many entities never
        // get a cooccurrence path between their corrupted and true forms,
        // so recall drops.
        "nbest2" => public(seed, 2, 0.99, 0.0, 0.0, 0.02),
        "community" => community(seed),
        "wer" => wer(seed),
        other => Err(Error::config(
            "corpus.preset",
            format!("unknown preset {other:?}"),
        )),
    }
}

/// 900 entities (330 confusable pairs, 231 benign, 9 sequels) under nine
/// corruption profiles sharing one variant vocabulary; 1350 users x 6
/// requests = 8100 requests.
fn public(
    seed: u64,
    n_max: usize,
    substitution: f64,
    spread: f64,
    recovery: f64,
    repeat_scale: f64,
) -> Result<PresetCorpus> {
    let synth = synth_catalog(&CatalogPlan {
        confusable_pairs: 330,
        benign: 231,
        sequels: 9,
        diluters: 0,
        num_variants: 3,
        zipf_exponent: 0.8,
        seed,
    })?;
    // No deletions: dropping a token can leave a bare shared word
    // ("hidden", or a shared noun variant) that is the same string for
    // every entity using that word, bridging unrelated entities into one
    // cluster. Insertions keep the full base string, so they cannot
    // collide across entities.
    let profiles = synth_profiles(
        9,
        ChannelRates {
            substitution,
            deletion: 0.0,
            insertion: 0.08,
        },
        spread,
        VocabMode::Shared,
        &synth.variants,
        seed.wrapping_add(1),
    )?;
    let config = GenerateConfig {
        mode: GenerateMode::Sampled {
            users: 1350,
            requests_per_user: RequestsPerUser::Fixed(6),
        },
        n_max,
        recovery_default: recovery,
        repeat_rate: 0.28,
        repeat_corruption_scale: repeat_scale,
        click_rate_correct: 0.9,
        click_rate_misrecognized: 0.6,
        entities_per_user: (1, 3),
        seed: seed.wrapping_add(2),
        ..GenerateConfig::default()
    };
    Ok(PresetCorpus {
        catalog: synth.catalog,
        profiles,
        config,
    })
}

/// 300 benign entities under nine profiles with disjoint per-profile
/// corruption vocabularies, plus 30 user communities with exclusive entity
/// pools: variants of one entity emitted by different profiles never share
/// an n-best, so only user-history similarity can link them.
fn community(seed: u64) -> Result<PresetCorpus> {
    let synth = synth_catalog(&CatalogPlan {
        confusable_pairs: 0,
        benign: 300,
        sequels: 0,
        diluters: 0,
        num_variants: 9,
        zipf_exponent: 0.8,
        seed,
    })?;
    let profiles = synth_profiles(
        9,
        ChannelRates {
            substitution: 0.5,
            deletion: 0.0,
            insertion: 0.0,
        },
        0.3,
        VocabMode::PerProfile,
        &synth.variants,
        seed.wrapping_add(1),
    )?;
    let config = GenerateConfig {
        mode: GenerateMode::Sampled {
            users: 3000,
            requests_per_user: RequestsPerUser::Uniform(4, 8),
        },
        n_max: 5,
        recovery_default: 0.6,
        repeat_rate: 0.3,
        repeat_corruption_scale: 0.3,
        click_rate_correct: 0.95,
        click_rate_misrecognized: 0.7,
        num_communities: 30,
        community_affinity: 1.0,
        entities_per_user: (1, 3),
        seed: seed.wrapping_add(2),
        ..GenerateConfig::default()
    };
    Ok(PresetCorpus {
        catalog: synth.catalog,
        profiles,
        config,
    })
}

/// Biasing-replay corpus: 138 benign entities that are misrecognized often
/// but recover the true form in the n-best tail, plus 12 popular diluters
/// that are always misrecognized to one fixed form with no recovery — their
/// errors are unfixable and their true forms never enter the log.
fn wer(seed: u64) -> Result<PresetCorpus> {
    let synth = synth_catalog(&CatalogPlan {
        confusable_pairs: 0,
        benign: 138,
        sequels: 0,
        diluters: 12,
        num_variants: 1,
        zipf_exponent: 0.8,
        seed,
    })?;
    let profiles = synth_profiles(
        3,
        ChannelRates {
            substitution: 0.65,
            deletion: 0.0,
            insertion: 0.0,
        },
        0.0,
        VocabMode::Shared,
        &synth.variants,
        seed.wrapping_add(1),
    )?;
    let diluter_ids = synth.ids_of_kind(|k| matches!(k, EntityKind::Diluter));
    let per_diluter = |v: f64| -> BTreeMap<String, f64> {
        diluter_ids.iter().map(|id| (id.clone(), v)).collect()
    };
    let config = GenerateConfig {
        mode: GenerateMode::Sampled {
            users: 1100,
            requests_per_user: RequestsPerUser::Uniform(4, 7),
        },
        n_max: 5,
        recovery_default: 0.85,
        recovery_overrides: per_diluter(0.0),
        substitution_scale: per_diluter(1.6),
        repeat_rate: 0.25,
        // Repeats corrupt at full strength: a cleaner repeat would leak the
        // diluters' true forms into the log and pull them into the modeled
        // scope.
        repeat_corruption_scale: 1.0,
        click_rate_correct: 0.9,
        click_rate_misrecognized: 0.3,
        click_mis_overrides: per_diluter(0.9),
        entities_per_user: (1, 3),
        seed: seed.wrapping_add(2),
        ..GenerateConfig::default()
    };
    Ok(PresetCorpus {
        catalog: synth.catalog,
        profiles,
        config,
    })
}
