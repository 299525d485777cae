//! Synthetic catalog and corruption-profile construction.
//!
//! Builds entity catalogs with controllable confusion structure:
//!
//! * benign entities whose misrecognitions stay nearest their own form,
//! * confusable pairs whose misrecognitions land strictly nearer the
//!   partner entity (defeating nearest-form matching while remaining
//!   string-distinct from every real form),
//! * diluter entities that are always misrecognized and never recovered,
//! * sequel entities exercising numeral/roman-numeral normalization.
//!
//! Every corrupted variant token is globally unique, so reference strings
//! never collide across entities and cluster structure stays identifiable.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::{normalize_title, Catalog, CorruptionProfile, Entity};
use crate::error::{Error, Result};
use crate::similarity::edit_distance;

const ADJECTIVES: [&str; 30] = [
    "silent",
    "crimson",
    "golden",
    "hidden",
    "broken",
    "frozen",
    "velvet",
    "savage",
    "gentle",
    "hollow",
    "burning",
    "distant",
    "electric",
    "lunar",
    "solar",
    "copper",
    "scarlet",
    "emerald",
    "midnight",
    "wandering",
    "shattered",
    "secret",
    "final",
    "lost",
    "rising",
    "falling",
    "silver",
    "crystal",
    "phantom",
    "ancient",
];

const NOUNS: [&str; 44] = [
    "harbor", "valley", "meadow", "canyon", "ember", "forest", "garden", "lantern", "marble",
    "nebula", "orchard", "palace", "quarry", "raven", "saddle", "temple", "vessel", "willow",
    "zephyr", "anchor", "beacon", "cascade", "dagger", "engine", "falcon", "glacier", "hammer",
    "island", "jungle", "kettle", "ladder", "mirror", "needle", "parrot", "quiver", "rocket",
    "signal", "tunnel", "walnut", "zenith", "compass", "thunder", "corridor", "monarch",
];

/// Onset/rime products for single-token stems; every product contains
/// letters outside {i, v, x}, keeping tokens stable under normalization.
const ONSETS: [&str; 24] = [
    "bar", "cal", "dor", "fen", "gor", "hal", "jun", "kel", "lor", "mar", "nor", "pol", "quin",
    "ral", "sol", "tar", "ver", "wil", "zan", "bel", "cor", "dun", "gal", "hol",
];

const RIMES: [&str; 30] = [
    "adine", "ethor", "umbra", "ovan", "aster", "elion", "andor", "umel", "arion", "ovel", "ander",
    "estin", "oder", "ulan", "amir", "ethan", "orin", "aleth", "undor", "emar", "ostin", "ulver",
    "aren", "odel", "unta", "alor", "ezan", "ormel", "usk", "aban",
];

const NUMERALS: [(&str, &str, Option<&str>); 8] = [
    ("two", "2", Some("II")),
    ("three", "3", Some("III")),
    ("four", "4", Some("IV")),
    ("five", "5", None), // "V" alone reads as a letter, not a numeral
    ("six", "6", Some("VI")),
    ("seven", "7", Some("VII")),
    ("eight", "8", Some("VIII")),
    ("nine", "9", Some("IX")),
];

/// What role an entity plays in the synthetic confusion structure.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EntityKind {
    /// Misrecognitions stay nearest the entity's own form.
    Benign,
    /// Misrecognitions land strictly nearer the named partner entity.
    Confusable { partner: String },
    /// Numeral-suffixed title exercising verbalization.
    Sequel,
    /// Intended for always-misrecognized, never-recovered traffic.
    Diluter,
}

/// Shape of a synthesized catalog.
#[derive(Debug, Clone)]
pub struct CatalogPlan {
    /// Number of confusable pairs (two entities each).
    pub confusable_pairs: usize,
    /// Number of benign two-token entities (includes one fixed flavor
    /// entity, "archive eighty one", when ≥ 1).
    pub benign: usize,
    /// Number of numeral-suffixed entities.
    pub sequels: usize,
    /// Number of three-token diluter entities, placed at the top of the
    /// popularity order.
    pub diluters: usize,
    /// Corrupted variants generated per corruptible token (≥ 1).
    pub num_variants: usize,
    /// Popularity decay: weight ∝ 1/rank^exponent.
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for CatalogPlan {
    fn default() -> Self {
        CatalogPlan {
            confusable_pairs: 0,
            benign: 24,
            sequels: 0,
            diluters: 0,
            num_variants: 1,
            zipf_exponent: 0.8,
            seed: 0,
        }
    }
}

/// A synthesized catalog plus the corruption vocabulary built alongside it.
#[derive(Debug, Clone)]
pub struct SynthCatalog {
    pub catalog: Catalog,
    /// Corruptible token → its variant tokens (index = variant slot).
    pub variants: BTreeMap<String, Vec<String>>,
    pub kinds: BTreeMap<String, EntityKind>,
}

impl SynthCatalog {
    /// Entity ids of a given kind, in catalog (popularity) order.
    pub fn ids_of_kind(&self, want: impl Fn(&EntityKind) -> bool) -> Vec<String> {
        self.catalog
            .entities
            .iter()
            .filter(|e| want(&self.kinds[&e.id]))
            .map(|e| e.id.clone())
            .collect()
    }
}

/// Replace one interior character of `base`, yielding a token unused so far.
///
/// The variant differs from `base` by exactly one substitution, so its
/// distance to `base` is 1 and (by triangle inequality) its distance to any
/// form ≥ d away from `base` is ≥ d − 1.
fn mutate_token(base: &str, salt: usize, used: &mut BTreeSet<String>) -> String {
    const LETTERS: [char; 10] = ['q', 'z', 'j', 'k', 'w', 'p', 'g', 'b', 'm', 'f'];
    let chars: Vec<char> = base.chars().collect();
    let interior = chars.len().saturating_sub(2).max(1);
    let total = interior * LETTERS.len();
    for t in 0..total {
        let k = (salt + t) % total;
        let pos = 1 + k % interior;
        let letter = LETTERS[(k / interior) % LETTERS.len()];
        if pos >= chars.len() || chars[pos] == letter {
            continue;
        }
        let mut cand: Vec<char> = chars.clone();
        cand[pos] = letter;
        let cand: String = cand.into_iter().collect();
        if cand != base && !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
    }
    // Exhausted single substitutions; grow a suffix until unique.
    let mut cand = format!("{base}q");
    while used.contains(&cand) {
        cand.push('z');
    }
    used.insert(cand.clone());
    cand
}

fn title_case(spoken: &str) -> String {
    spoken
        .split_whitespace()
        .map(|t| {
            let mut cs = t.chars();
            match cs.next() {
                Some(first) => first.to_uppercase().collect::<String>() + cs.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Draft {
    spoken: String,
    canonical: String,
    kind: EntityKind,
    /// (token, variant source): variants are mutations of the source token.
    corruptible: Vec<(String, String)>,
}

/// Build a catalog per the plan. Popularity follows a Zipf law over the
/// construction order: diluters first, then confusable pairs interleaved
/// with benign entities, then sequels.
pub fn synth_catalog(plan: &CatalogPlan) -> Result<SynthCatalog> {
    if plan.num_variants == 0 {
        return Err(Error::config("num_variants", "must be ≥ 1"));
    }
    if plan.zipf_exponent < 0.0 || !plan.zipf_exponent.is_finite() {
        return Err(Error::config("zipf_exponent", "must be finite and ≥ 0"));
    }
    let total = plan.diluters + 2 * plan.confusable_pairs + plan.benign + plan.sequels;
    if total == 0 {
        return Err(Error::config("catalog plan", "no entities requested"));
    }

    let mut used: BTreeSet<String> = BTreeSet::new();
    for t in ADJECTIVES.iter().chain(NOUNS.iter()) {
        used.insert((*t).to_string());
    }
    for (word, _, _) in NUMERALS {
        used.insert(word.to_string());
    }
    used.insert("archive".to_string());
    used.insert("arcade".to_string());
    used.insert("eighty".to_string());
    used.insert("one".to_string());

    // Stem supply for single-token and diluter entities.
    let stem_pool: Vec<String> = ONSETS
        .iter()
        .flat_map(|o| RIMES.iter().map(move |r| format!("{o}{r}")))
        .collect();
    let mut stem_cursor = 0usize;
    let mut next_stem = |used: &mut BTreeSet<String>| -> Result<String> {
        while stem_cursor < stem_pool.len() {
            let stem = &stem_pool[stem_cursor];
            stem_cursor += 1;
            if used.insert(stem.clone()) {
                return Ok(stem.clone());
            }
        }
        Err(Error::config("catalog plan", "stem pool exhausted"))
    };

    let mut diluters: Vec<Draft> = Vec::new();
    for _ in 0..plan.diluters {
        let t1 = next_stem(&mut used)?;
        let t2 = next_stem(&mut used)?;
        let t3 = next_stem(&mut used)?;
        let spoken = format!("{t1} {t2} {t3}");
        diluters.push(Draft {
            canonical: title_case(&spoken),
            kind: EntityKind::Diluter,
            corruptible: vec![(t1.clone(), t1), (t2.clone(), t2), (t3.clone(), t3)],
            spoken,
        });
    }

    let mut confusables: Vec<Draft> = Vec::new();
    for _ in 0..plan.confusable_pairs {
        let a = next_stem(&mut used)?;
        let mut b = next_stem(&mut used)?;
        // Partner stems must sit ≥ 3 apart so a one-substitution variant of
        // one stem stays strictly nearer it than the other (1 < 3 − 1).
        while edit_distance(&a, &b) < 3 {
            b = next_stem(&mut used)?;
        }
        // Variants of each stem are mutations of the partner's stem.
        confusables.push(Draft {
            spoken: a.clone(),
            canonical: title_case(&a),
            kind: EntityKind::Confusable {
                partner: String::new(),
            }, // patched below
            corruptible: vec![(a.clone(), b.clone())],
        });
        confusables.push(Draft {
            spoken: b.clone(),
            canonical: title_case(&b),
            kind: EntityKind::Confusable {
                partner: String::new(),
            },
            corruptible: vec![(b, a)],
        });
    }

    let mut benign: Vec<Draft> = Vec::new();
    if plan.benign > 0 {
        benign.push(Draft {
            spoken: "archive eighty one".to_string(),
            canonical: "Archive 81".to_string(),
            kind: EntityKind::Benign,
            corruptible: vec![("archive".to_string(), "archive".to_string())],
        });
    }
    let mut combos = (0..NOUNS.len())
        .flat_map(|j| (0..ADJECTIVES.len()).map(move |i| (i, j)))
        .map(|(i, j)| (ADJECTIVES[i], NOUNS[j]));
    while benign.len() < plan.benign {
        let (adj, noun) = combos
            .next()
            .ok_or_else(|| Error::config("benign", "title pool exhausted"))?;
        let spoken = format!("{adj} {noun}");
        benign.push(Draft {
            canonical: title_case(&spoken),
            kind: EntityKind::Benign,
            corruptible: vec![(noun.to_string(), noun.to_string())],
            spoken,
        });
    }

    let mut sequels: Vec<Draft> = Vec::new();
    for s in 0..plan.sequels {
        let (adj, noun) = combos
            .next()
            .ok_or_else(|| Error::config("sequels", "title pool exhausted"))?;
        let (word, digit, roman) = NUMERALS[s % NUMERALS.len()];
        let spoken = format!("{adj} {noun} {word}");
        let suffix = match roman {
            Some(r) if s % 2 == 1 => r,
            _ => digit,
        };
        sequels.push(Draft {
            canonical: format!("{} {}", title_case(&format!("{adj} {noun}")), suffix),
            kind: EntityKind::Sequel,
            corruptible: vec![(noun.to_string(), noun.to_string())],
            spoken,
        });
    }

    // Interleave confusable-pair entities with benign ones so both kinds
    // span the popularity range (Bresenham merge keeps it deterministic).
    let mut middle: Vec<Draft> = Vec::with_capacity(confusables.len() + benign.len());
    {
        let (na, nb) = (confusables.len(), benign.len());
        let mut ia = confusables.into_iter();
        let mut ib = benign.into_iter();
        let mut acc: isize = 0;
        for _ in 0..(na + nb) {
            acc += na as isize;
            if acc >= (na + nb) as isize {
                acc -= (na + nb) as isize;
                middle.push(ia.next().expect("confusable stream"));
            } else {
                middle.push(ib.next().expect("benign stream"));
            }
        }
    }

    let mut drafts = diluters;
    drafts.extend(middle);
    drafts.extend(sequels);

    // Zipf popularity over construction order.
    let weights: Vec<f64> = (0..drafts.len())
        .map(|i| 1.0 / ((i + 1) as f64).powf(plan.zipf_exponent))
        .collect();
    let weight_sum: f64 = weights.iter().sum();

    let mut entities = Vec::with_capacity(drafts.len());
    let mut kinds = BTreeMap::new();
    let mut variants: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut partner_of: Vec<Option<usize>> = vec![None; drafts.len()];

    // Recover pair partners by matching corruption sources to spoken forms.
    let spoken_to_idx: BTreeMap<String, usize> = drafts
        .iter()
        .enumerate()
        .map(|(i, d)| (d.spoken.clone(), i))
        .collect();
    for (i, d) in drafts.iter().enumerate() {
        if matches!(d.kind, EntityKind::Confusable { .. }) {
            let source = &d.corruptible[0].1;
            partner_of[i] = Some(spoken_to_idx[source]);
        }
    }

    for (i, d) in drafts.iter().enumerate() {
        let id = format!("e{i:04}");
        let kind = match d.kind {
            EntityKind::Confusable { .. } => EntityKind::Confusable {
                partner: format!("e{:04}", partner_of[i].expect("paired")),
            },
            ref k => k.clone(),
        };
        kinds.insert(id.clone(), kind);
        entities.push(Entity {
            id,
            canonical_title: d.canonical.clone(),
            spoken_form: d.spoken.clone(),
            popularity: weights[i] / weight_sum,
        });
    }

    let salt_base = plan.seed as usize;
    for d in &drafts {
        for (token, source) in &d.corruptible {
            if variants.contains_key(token) {
                continue;
            }
            let mut list = Vec::with_capacity(plan.num_variants);
            if token == "archive" {
                list.push("arcade".to_string());
            }
            let mut salt = salt_base.wrapping_add(7 * list.len());
            while list.len() < plan.num_variants {
                list.push(mutate_token(source, salt, &mut used));
                salt = salt.wrapping_add(13);
            }
            variants.insert(token.clone(), list);
        }
    }

    let catalog = Catalog::new(entities)?;
    for entity in &catalog.entities {
        debug_assert_eq!(
            normalize_title(&entity.canonical_title).as_deref().ok(),
            Some(entity.spoken_form.as_str()),
            "canonical title must normalize to the spoken form"
        );
    }
    Ok(SynthCatalog {
        catalog,
        variants,
        kinds,
    })
}

/// Per-token channel rates for a profile family.
#[derive(Debug, Clone, Copy)]
pub struct ChannelRates {
    pub substitution: f64,
    pub deletion: f64,
    pub insertion: f64,
}

/// How profiles share the corruption vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    /// Every profile maps a token to the full variant list.
    Shared,
    /// Profile p maps a token only to variant slot p (mod list length), so
    /// different profiles emit disjoint corrupted forms.
    PerProfile,
}

/// Build a family of corruption profiles with rates spread linearly around
/// `base` by ±`spread` (profile 0 mildest, last strongest), sharing or
/// splitting the variant vocabulary per `vocab`.
pub fn synth_profiles(
    count: usize,
    base: ChannelRates,
    spread: f64,
    vocab: VocabMode,
    variants: &BTreeMap<String, Vec<String>>,
    seed: u64,
) -> Result<Vec<CorruptionProfile>> {
    if count == 0 {
        return Err(Error::config("profiles", "need at least one profile"));
    }
    if !(0.0..=1.0).contains(&spread) {
        return Err(Error::config("profile spread", "must lie in [0, 1]"));
    }
    let mut profiles = Vec::with_capacity(count);
    for p in 0..count {
        let factor = if count == 1 {
            1.0
        } else {
            1.0 + spread * (2.0 * p as f64 / (count - 1) as f64 - 1.0)
        };
        let clamp = |r: f64| (r * factor).clamp(0.0, 1.0);
        let table: BTreeMap<String, Vec<String>> = variants
            .iter()
            .map(|(token, list)| {
                let targets = match vocab {
                    VocabMode::Shared => list.clone(),
                    VocabMode::PerProfile => vec![list[p % list.len()].clone()],
                };
                (token.clone(), targets)
            })
            .collect();
        let profile = CorruptionProfile {
            profile_id: format!("p{p}"),
            substitution_rate: clamp(base.substitution),
            deletion_rate: clamp(base.deletion),
            insertion_rate: clamp(base.insertion),
            homophone_table: table,
            seed: seed.wrapping_add(p as u64),
        };
        profile.validate()?;
        profiles.push(profile);
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> CatalogPlan {
        CatalogPlan {
            confusable_pairs: 20,
            benign: 30,
            sequels: 8,
            diluters: 4,
            num_variants: 2,
            zipf_exponent: 0.8,
            seed: 11,
        }
    }

    #[test]
    fn catalog_validates_and_counts_match() {
        let out = synth_catalog(&plan()).unwrap();
        assert_eq!(out.catalog.entities.len(), 4 + 40 + 30 + 8);
        out.catalog.validate().unwrap();
        assert_eq!(out.kinds.len(), out.catalog.entities.len());
    }

    #[test]
    fn spoken_forms_are_normalization_stable() {
        let out = synth_catalog(&plan()).unwrap();
        for e in &out.catalog.entities {
            assert_eq!(normalize_title(&e.spoken_form).unwrap(), e.spoken_form);
            assert_eq!(normalize_title(&e.canonical_title).unwrap(), e.spoken_form);
        }
    }

    #[test]
    fn variant_tokens_are_normalization_stable_and_unique() {
        let out = synth_catalog(&plan()).unwrap();
        let mut seen = BTreeSet::new();
        for list in out.variants.values() {
            for v in list {
                assert_eq!(&normalize_title(v).unwrap(), v);
                assert!(seen.insert(v.clone()), "variant {v} duplicated");
                assert!(
                    !out.variants.contains_key(v),
                    "variant {v} collides with a real token"
                );
            }
        }
    }

    #[test]
    fn confusable_variants_sit_strictly_nearer_the_partner() {
        let out = synth_catalog(&plan()).unwrap();
        let by_id: BTreeMap<&str, &Entity> = out
            .catalog
            .entities
            .iter()
            .map(|e| (e.id.as_str(), e))
            .collect();
        let mut checked = 0;
        for e in &out.catalog.entities {
            if let EntityKind::Confusable { partner } = &out.kinds[&e.id] {
                let partner_form = &by_id[partner.as_str()].spoken_form;
                for v in &out.variants[&e.spoken_form] {
                    assert!(
                        edit_distance(v, partner_form) < edit_distance(v, &e.spoken_form),
                        "{v} should sit nearer {partner_form} than {}",
                        e.spoken_form
                    );
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 20 * 2 * 2);
    }

    #[test]
    fn diluters_lead_the_popularity_order() {
        let out = synth_catalog(&plan()).unwrap();
        let pops: Vec<f64> = out.catalog.entities.iter().map(|e| e.popularity).collect();
        for w in pops.windows(2) {
            assert!(w[0] >= w[1], "popularity must be non-increasing");
        }
        for e in &out.catalog.entities[..4] {
            assert_eq!(out.kinds[&e.id], EntityKind::Diluter);
        }
    }

    #[test]
    fn numeral_tokens_are_never_corruptible() {
        let out = synth_catalog(&plan()).unwrap();
        for (word, _, _) in NUMERALS {
            assert!(!out.variants.contains_key(word));
        }
        assert!(!out.variants.contains_key("one"));
        assert!(!out.variants.contains_key("eighty"));
    }

    #[test]
    fn flavor_entity_keeps_the_arcade_variant() {
        let out = synth_catalog(&plan()).unwrap();
        assert_eq!(out.variants["archive"][0], "arcade");
        assert!(out
            .catalog
            .entities
            .iter()
            .any(|e| e.spoken_form == "archive eighty one" && e.canonical_title == "Archive 81"));
    }

    #[test]
    fn per_profile_vocab_is_disjoint_across_profiles() {
        let mut p = plan();
        p.num_variants = 9;
        let out = synth_catalog(&p).unwrap();
        let rates = ChannelRates {
            substitution: 0.5,
            deletion: 0.0,
            insertion: 0.0,
        };
        let profiles =
            synth_profiles(9, rates, 0.4, VocabMode::PerProfile, &out.variants, 3).unwrap();
        assert_eq!(profiles.len(), 9);
        let token = out.variants.keys().next().unwrap();
        let mut targets = BTreeSet::new();
        for prof in &profiles {
            let list = &prof.homophone_table[token];
            assert_eq!(list.len(), 1);
            assert!(
                targets.insert(list[0].clone()),
                "profiles must not share variants"
            );
        }
        // Rates spread monotonically from mild to strong.
        for w in profiles.windows(2) {
            assert!(w[0].substitution_rate <= w[1].substitution_rate);
        }
    }

    #[test]
    fn shared_vocab_lists_every_variant() {
        let out = synth_catalog(&plan()).unwrap();
        let rates = ChannelRates {
            substitution: 0.5,
            deletion: 0.1,
            insertion: 0.1,
        };
        let profiles = synth_profiles(3, rates, 0.2, VocabMode::Shared, &out.variants, 3).unwrap();
        let token = out.variants.keys().next().unwrap();
        for prof in &profiles {
            assert_eq!(prof.homophone_table[token], out.variants[token]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = synth_catalog(&plan()).unwrap();
        let b = synth_catalog(&plan()).unwrap();
        assert_eq!(a.variants, b.variants);
        let forms_a: Vec<&str> = a
            .catalog
            .entities
            .iter()
            .map(|e| e.spoken_form.as_str())
            .collect();
        let forms_b: Vec<&str> = b
            .catalog
            .entities
            .iter()
            .map(|e| e.spoken_form.as_str())
            .collect();
        assert_eq!(forms_a, forms_b);
    }
}
