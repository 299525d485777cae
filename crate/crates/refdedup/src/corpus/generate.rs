//! Deterministic request-log generation.
//!
//! Two modes: `Exhaustive` runs every (entity, profile) pair a fixed number
//! of times — the flat benchmark-corpus shape — while `Sampled` simulates a
//! user population with popularity-weighted entity choice, optional
//! community structure, repeat links, and click feedback. Everything draws
//! from one seeded stream, so a config is a complete description of its log.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{corrupt_reference, synthesize_nbest, Catalog, CorruptionProfile, Request, RequestLog};
use crate::error::{Error, Result};

/// Per-user request-count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RequestsPerUser {
    Fixed(usize),
    /// Inclusive bounds.
    Uniform(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenerateMode {
    /// Every entity × profile combination, `samples_per_pair` times each,
    /// one synthetic user per request. No repeats, no communities.
    Exhaustive { samples_per_pair: usize },
    /// A simulated user population.
    Sampled {
        users: usize,
        requests_per_user: RequestsPerUser,
    },
}

/// Knobs for the generator. Per-entity override maps let one corpus mix
/// reliably-recovered, rarely-recovered, and always-misrecognized traffic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub mode: GenerateMode,
    /// Hypotheses per n-best list (≥ 1).
    pub n_max: usize,
    /// Chance the true form appears at a lower rank when the top-1 missed.
    pub recovery_default: f64,
    pub recovery_overrides: BTreeMap<String, f64>,
    /// Per-entity multiplier on the profile substitution rate (clamped to 1).
    pub substitution_scale: BTreeMap<String, f64>,
    /// Chance a follow-up request re-utters the user's previous request.
    pub repeat_rate: f64,
    /// Rate multiplier applied on repeats: users enunciate more clearly.
    pub repeat_corruption_scale: f64,
    pub click_rate_correct: f64,
    pub click_rate_misrecognized: f64,
    /// Per-entity override of the misrecognized click rate.
    pub click_mis_overrides: BTreeMap<String, f64>,
    /// 0 disables community structure.
    pub num_communities: usize,
    /// Chance a pool entity is drawn from the user's own community.
    pub community_affinity: f64,
    /// Inclusive bounds on the number of distinct entities a user requests.
    pub entities_per_user: (usize, usize),
    pub seed: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            mode: GenerateMode::Sampled {
                users: 100,
                requests_per_user: RequestsPerUser::Fixed(5),
            },
            n_max: 5,
            recovery_default: 0.75,
            recovery_overrides: BTreeMap::new(),
            substitution_scale: BTreeMap::new(),
            repeat_rate: 0.0,
            repeat_corruption_scale: 0.3,
            click_rate_correct: 0.0,
            click_rate_misrecognized: 0.0,
            click_mis_overrides: BTreeMap::new(),
            num_communities: 0,
            community_affinity: 0.9,
            entities_per_user: (1, 2),
            seed: 0,
        }
    }
}

impl GenerateConfig {
    fn validate(&self, catalog: &Catalog) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::ZeroNbest);
        }
        let unit = |key: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(key, format!("{v} outside [0, 1]")));
            }
            Ok(())
        };
        unit("recovery_default", self.recovery_default)?;
        unit("repeat_rate", self.repeat_rate)?;
        unit("click_rate_correct", self.click_rate_correct)?;
        unit("click_rate_misrecognized", self.click_rate_misrecognized)?;
        unit("community_affinity", self.community_affinity)?;
        for (id, v) in &self.recovery_overrides {
            unit(&format!("recovery_overrides.{id}"), *v)?;
            if catalog.entity(id).is_none() {
                return Err(Error::config(
                    "recovery_overrides",
                    format!("unknown entity {id}"),
                ));
            }
        }
        for (id, v) in &self.click_mis_overrides {
            unit(&format!("click_mis_overrides.{id}"), *v)?;
            if catalog.entity(id).is_none() {
                return Err(Error::config(
                    "click_mis_overrides",
                    format!("unknown entity {id}"),
                ));
            }
        }
        for (id, v) in &self.substitution_scale {
            if *v < 0.0 || !v.is_finite() {
                return Err(Error::config(
                    "substitution_scale",
                    format!("{v} must be ≥ 0"),
                ));
            }
            if catalog.entity(id).is_none() {
                return Err(Error::config(
                    "substitution_scale",
                    format!("unknown entity {id}"),
                ));
            }
        }
        if self.repeat_corruption_scale < 0.0 || !self.repeat_corruption_scale.is_finite() {
            return Err(Error::config("repeat_corruption_scale", "must be ≥ 0"));
        }
        let (lo, hi) = self.entities_per_user;
        if lo == 0 || lo > hi {
            return Err(Error::config("entities_per_user", "need 1 ≤ lo ≤ hi"));
        }
        match &self.mode {
            GenerateMode::Exhaustive { samples_per_pair } if *samples_per_pair == 0 => {
                Err(Error::config("samples_per_pair", "must be ≥ 1"))
            }
            GenerateMode::Sampled {
                users,
                requests_per_user,
            } => {
                if *users == 0 {
                    return Err(Error::config("users", "must be ≥ 1"));
                }
                match requests_per_user {
                    RequestsPerUser::Fixed(0) => {
                        Err(Error::config("requests_per_user", "must be ≥ 1"))
                    }
                    RequestsPerUser::Uniform(lo, hi) if *lo == 0 || lo > hi => {
                        Err(Error::config("requests_per_user", "need 1 ≤ lo ≤ hi"))
                    }
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

/// Which entity each request actually referred to — the generator's
/// sidecar for evaluation against true forms.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Entity id per request index.
    pub entities: Vec<String>,
}

impl GroundTruth {
    pub fn entity(&self, request_idx: usize) -> &str {
        &self.entities[request_idx]
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// A generated log together with its ground truth.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub log: RequestLog,
    pub truth: GroundTruth,
}

/// Cache of per-(profile, scale, repeat) effective channels, so the hot
/// loop never clones homophone tables.
struct ProfileCache<'a> {
    base: &'a [CorruptionProfile],
    repeat_scale: f64,
    map: BTreeMap<(usize, u64, bool), CorruptionProfile>,
}

impl<'a> ProfileCache<'a> {
    fn new(base: &'a [CorruptionProfile], repeat_scale: f64) -> Self {
        ProfileCache {
            base,
            repeat_scale,
            map: BTreeMap::new(),
        }
    }

    fn effective(&mut self, idx: usize, sub_scale: f64, repeat: bool) -> &CorruptionProfile {
        let repeat_scale = self.repeat_scale;
        let base = &self.base[idx];
        self.map
            .entry((idx, sub_scale.to_bits(), repeat))
            .or_insert_with(|| {
                let rs = if repeat { repeat_scale } else { 1.0 };
                CorruptionProfile {
                    profile_id: base.profile_id.clone(),
                    substitution_rate: (base.substitution_rate * sub_scale * rs).clamp(0.0, 1.0),
                    deletion_rate: (base.deletion_rate * rs).clamp(0.0, 1.0),
                    insertion_rate: (base.insertion_rate * rs).clamp(0.0, 1.0),
                    homophone_table: base.homophone_table.clone(),
                    seed: base.seed,
                }
            })
    }
}

fn weighted_pick(cumulative: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let x = rng.random_range(0.0..total);
    cumulative
        .partition_point(|&c| c <= x)
        .min(cumulative.len() - 1)
}

/// Generate a request log from a catalog and a profile family.
pub fn generate_corpus(
    catalog: &Catalog,
    profiles: &[CorruptionProfile],
    config: &GenerateConfig,
) -> Result<Corpus> {
    catalog.validate()?;
    if profiles.is_empty() {
        return Err(Error::config("profiles", "need at least one profile"));
    }
    for p in profiles {
        p.validate()?;
    }
    config.validate(catalog)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache = ProfileCache::new(profiles, config.repeat_corruption_scale);
    let mut requests: Vec<Request> = Vec::new();
    let mut truth: Vec<String> = Vec::new();

    let emit = |entity_idx: usize,
                profile_idx: usize,
                user_id: String,
                repeat_of: Option<u64>,
                requests: &mut Vec<Request>,
                truth: &mut Vec<String>,
                rng: &mut ChaCha8Rng,
                cache: &mut ProfileCache|
     -> Result<()> {
        let entity = &catalog.entities[entity_idx];
        let sub_scale = config
            .substitution_scale
            .get(&entity.id)
            .copied()
            .unwrap_or(1.0);
        let profile = cache.effective(profile_idx, sub_scale, repeat_of.is_some());
        let corrupted = corrupt_reference(&entity.spoken_form, profile, rng);
        let recovery = config
            .recovery_overrides
            .get(&entity.id)
            .copied()
            .unwrap_or(config.recovery_default);
        let nbest = synthesize_nbest(
            &entity.spoken_form,
            &corrupted,
            config.n_max,
            recovery,
            profile,
            rng,
        )?;
        let click_rate = if nbest[0] == entity.spoken_form {
            config.click_rate_correct
        } else {
            config
                .click_mis_overrides
                .get(&entity.id)
                .copied()
                .unwrap_or(config.click_rate_misrecognized)
        };
        let clicked_entity =
            (click_rate > 0.0 && rng.random_bool(click_rate)).then(|| entity.id.clone());
        requests.push(Request {
            user_id,
            ts: requests.len() as u64,
            nbest,
            clicked_entity,
            repeat_of,
        });
        truth.push(entity.id.clone());
        Ok(())
    };

    match &config.mode {
        GenerateMode::Exhaustive { samples_per_pair } => {
            let mut user = 0usize;
            for entity_idx in 0..catalog.entities.len() {
                for profile_idx in 0..profiles.len() {
                    for _ in 0..*samples_per_pair {
                        emit(
                            entity_idx,
                            profile_idx,
                            format!("x{user:06}"),
                            None,
                            &mut requests,
                            &mut truth,
                            &mut rng,
                            &mut cache,
                        )?;
                        user += 1;
                    }
                }
            }
        }
        GenerateMode::Sampled {
            users,
            requests_per_user,
        } => {
            // Popularity tables: one global, plus one per community when
            // community structure is on (entities round-robin by rank, so
            // every community spans the popularity range).
            let cumulative: Vec<f64> = catalog
                .entities
                .iter()
                .scan(0.0, |acc, e| {
                    *acc += e.popularity;
                    Some(*acc)
                })
                .collect();
            let mut community_members: Vec<Vec<usize>> = Vec::new();
            let mut community_cumulative: Vec<Vec<f64>> = Vec::new();
            if config.num_communities > 0 {
                community_members = vec![Vec::new(); config.num_communities];
                for idx in 0..catalog.entities.len() {
                    community_members[idx % config.num_communities].push(idx);
                }
                community_members.retain(|m| !m.is_empty());
                for members in &community_members {
                    community_cumulative.push(
                        members
                            .iter()
                            .scan(0.0, |acc, &idx| {
                                *acc += catalog.entities[idx].popularity;
                                Some(*acc)
                            })
                            .collect(),
                    );
                }
            }

            for user in 0..*users {
                let user_id = format!("u{user:05}");
                let community = (!community_members.is_empty())
                    .then(|| rng.random_range(0..community_members.len()));
                let pool_size = {
                    let (lo, hi) = config.entities_per_user;
                    rng.random_range(lo..=hi)
                };
                let mut pool: Vec<usize> = Vec::with_capacity(pool_size);
                for _ in 0..32 * pool_size {
                    if pool.len() == pool_size {
                        break;
                    }
                    let idx = match community {
                        Some(c) if rng.random_bool(config.community_affinity) => {
                            community_members[c][weighted_pick(&community_cumulative[c], &mut rng)]
                        }
                        _ => weighted_pick(&cumulative, &mut rng),
                    };
                    if !pool.contains(&idx) {
                        pool.push(idx);
                    }
                }

                let n_requests = match requests_per_user {
                    RequestsPerUser::Fixed(k) => *k,
                    RequestsPerUser::Uniform(lo, hi) => rng.random_range(*lo..=*hi),
                };
                let mut prev: Option<(u64, usize)> = None;
                for _ in 0..n_requests {
                    let repeat_target = match prev {
                        Some((prior, entity_idx))
                            if config.repeat_rate > 0.0 && rng.random_bool(config.repeat_rate) =>
                        {
                            Some((prior, entity_idx))
                        }
                        _ => None,
                    };
                    let entity_idx = match repeat_target {
                        Some((_, idx)) => idx,
                        None => pool[rng.random_range(0..pool.len())],
                    };
                    let profile_idx = rng.random_range(0..profiles.len());
                    let global_idx = requests.len() as u64;
                    emit(
                        entity_idx,
                        profile_idx,
                        user_id.clone(),
                        repeat_target.map(|(prior, _)| prior),
                        &mut requests,
                        &mut truth,
                        &mut rng,
                        &mut cache,
                    )?;
                    prev = Some((global_idx, entity_idx));
                }
            }
        }
    }

    let log = RequestLog::from_requests(requests)?;
    Ok(Corpus {
        log,
        truth: GroundTruth { entities: truth },
    })
}
