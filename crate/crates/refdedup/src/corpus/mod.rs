//! Request-log ingestion and synthesis.
//!
//! The corpus module owns the domain types (catalog entities, corruption
//! profiles, requests) plus the feedback miners that turn raw logs into the
//! weak labels everything downstream consumes: repeat pairs for recall
//! measurement and click resolutions for training labels and precision.

mod channel;
mod generate;
mod normalize;
pub mod synth;

pub use channel::{corrupt_reference, synthesize_nbest};
pub use generate::{
    generate_corpus, Corpus, GenerateConfig, GenerateMode, GroundTruth, RequestsPerUser,
};
pub use normalize::{normalize_title, number_to_words};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass-conservation slack for popularity and probability sums.
pub const MASS_EPSILON: f64 = 1e-9;

/// One catalog entity: the latent thing users ask for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub canonical_title: String,
    /// Normalized spoken form: lowercase, token-separated, digit-free.
    pub spoken_form: String,
    /// Probability that a random request targets this entity.
    pub popularity: f64,
}

/// The full entity catalog.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Catalog {
    pub entities: Vec<Entity>,
}

impl Catalog {
    pub fn new(entities: Vec<Entity>) -> Result<Self> {
        let catalog = Catalog { entities };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entities.is_empty() {
            return Err(Error::InvalidCatalog("catalog has no entities".into()));
        }
        let mut ids = HashSet::new();
        let mut forms = HashSet::new();
        let mut total = 0.0;
        for e in &self.entities {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidCatalog(format!(
                    "duplicate entity id {:?}",
                    e.id
                )));
            }
            if !forms.insert(e.spoken_form.as_str()) {
                return Err(Error::InvalidCatalog(format!(
                    "duplicate spoken form {:?}",
                    e.spoken_form
                )));
            }
            if e.popularity <= 0.0 || !e.popularity.is_finite() {
                return Err(Error::InvalidCatalog(format!(
                    "entity {:?} has non-positive popularity {}",
                    e.id, e.popularity
                )));
            }
            if e.spoken_form
                .chars()
                .any(|c| c.is_ascii_digit() || c.is_uppercase())
            {
                return Err(Error::InvalidCatalog(format!(
                    "spoken form {:?} is not normalized",
                    e.spoken_form
                )));
            }
            total += e.popularity;
        }
        if (total - 1.0).abs() > MASS_EPSILON {
            return Err(Error::InvalidCatalog(format!(
                "popularity sums to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// Token-level confusion channel parameters for one synthetic voice profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptionProfile {
    pub profile_id: String,
    /// Per-token probability of replacing the token.
    pub substitution_rate: f64,
    /// Per-token probability of dropping the token.
    pub deletion_rate: f64,
    /// Per-token probability of inserting a filler after the token.
    pub insertion_rate: f64,
    /// Substitution targets per token; tokens without an entry are never
    /// substituted, which keeps the corrupted vocabulary fully declared.
    pub homophone_table: BTreeMap<String, Vec<String>>,
    pub seed: u64,
}

impl CorruptionProfile {
    /// An identity channel: never alters its input.
    pub fn identity(profile_id: impl Into<String>, seed: u64) -> Self {
        CorruptionProfile {
            profile_id: profile_id.into(),
            substitution_rate: 0.0,
            deletion_rate: 0.0,
            insertion_rate: 0.0,
            homophone_table: BTreeMap::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("substitution_rate", self.substitution_rate),
            ("deletion_rate", self.deletion_rate),
            ("insertion_rate", self.insertion_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidCatalog(format!(
                    "profile {:?}: {name} {rate} outside [0, 1]",
                    self.profile_id
                )));
            }
        }
        Ok(())
    }
}

/// One user interaction: an n-best transcription list plus optional feedback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub user_id: String,
    pub ts: u64,
    pub nbest: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clicked_entity: Option<String>,
    /// Index of the earlier request this one repeats, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat_of: Option<u64>,
}

impl Request {
    pub fn top1(&self) -> &str {
        &self.nbest[0]
    }
}

/// A validated batch of requests with a dense reference index.
///
/// Reference ids are assigned in first-appearance order over the request
/// stream (top-1 first, then the rest of each n-best), so the index is a
/// pure function of the log contents.
#[derive(Debug, Clone, Default)]
pub struct RequestLog {
    pub requests: Vec<Request>,
    index: HashMap<String, u32>,
    strings: Vec<String>,
}

impl RequestLog {
    pub fn from_requests(requests: Vec<Request>) -> Result<Self> {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut strings: Vec<String> = Vec::new();
        for (pos, req) in requests.iter().enumerate() {
            if req.nbest.is_empty() {
                return Err(Error::InvalidLog(format!(
                    "request {pos} has an empty n-best"
                )));
            }
            let mut seen = HashSet::new();
            for hyp in &req.nbest {
                if !seen.insert(hyp.as_str()) {
                    return Err(Error::InvalidLog(format!(
                        "request {pos} repeats hypothesis {hyp:?}"
                    )));
                }
                if !index.contains_key(hyp) {
                    index.insert(hyp.clone(), strings.len() as u32);
                    strings.push(hyp.clone());
                }
            }
            if let Some(prior) = req.repeat_of {
                let prior = prior as usize;
                if prior >= pos {
                    return Err(Error::InvalidLog(format!(
                        "request {pos} repeats a later request {prior}"
                    )));
                }
                let earlier = &requests[prior];
                if earlier.user_id != req.user_id {
                    return Err(Error::InvalidLog(format!(
                        "request {pos} repeats a request from a different user"
                    )));
                }
                if earlier.ts >= req.ts {
                    return Err(Error::InvalidLog(format!(
                        "request {pos} repeats a request with a later timestamp"
                    )));
                }
            }
        }
        Ok(RequestLog {
            requests,
            index,
            strings,
        })
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Number of distinct reference strings across all n-bests.
    pub fn num_references(&self) -> usize {
        self.strings.len()
    }

    pub fn ref_id(&self, reference: &str) -> Option<u32> {
        self.index.get(reference).copied()
    }

    pub fn ref_string(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    pub fn references(&self) -> impl Iterator<Item = (u32, &str)> {
        self.strings
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u32, s.as_str()))
    }
}

/// Mine coreference candidates from explicit repeat links.
///
/// Returns unordered top-1 pairs (a, b), a != b, that were observed as a
/// (request, repeat) pair by at least `min_support` distinct users.
pub fn mine_repeat_pairs(log: &RequestLog, min_support: usize) -> BTreeSet<(u32, u32)> {
    let mut supporters: BTreeMap<(u32, u32), BTreeSet<&str>> = BTreeMap::new();
    for req in &log.requests {
        let Some(prior) = req.repeat_of else { continue };
        let earlier = &log.requests[prior as usize];
        let a = log.ref_id(earlier.top1()).expect("indexed");
        let b = log.ref_id(req.top1()).expect("indexed");
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        supporters
            .entry(key)
            .or_default()
            .insert(req.user_id.as_str());
    }
    supporters
        .into_iter()
        .filter(|(_, users)| users.len() >= min_support)
        .map(|(pair, _)| pair)
        .collect()
}

/// Mine reference -> entity resolutions from click feedback.
///
/// A reference resolves to its most-clicked entity iff that entity's
/// clickthrough rate over the reference's impressions exceeds 0.5.
/// Impressions are all requests whose top-1 is the reference, clicked or not.
pub fn mine_click_resolutions(log: &RequestLog) -> BTreeMap<u32, String> {
    let mut impressions: BTreeMap<u32, usize> = BTreeMap::new();
    let mut clicks: BTreeMap<u32, BTreeMap<&str, usize>> = BTreeMap::new();
    for req in &log.requests {
        let rid = log.ref_id(req.top1()).expect("indexed");
        *impressions.entry(rid).or_default() += 1;
        if let Some(entity) = &req.clicked_entity {
            *clicks
                .entry(rid)
                .or_default()
                .entry(entity.as_str())
                .or_default() += 1;
        }
    }
    let mut resolved = BTreeMap::new();
    for (rid, per_entity) in clicks {
        // Modal entity; ties break toward the smaller id for determinism.
        let (entity, count) = per_entity
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(e, c)| (*e, *c))
            .expect("non-empty click map");
        let shown = impressions[&rid] as f64;
        if count as f64 / shown > 0.5 {
            resolved.insert(rid, entity.to_string());
        }
    }
    resolved
}
