//! Outbreak simulation on existing streams.
//!
//! - boost: extra records matching a target syndrome are drawn from the
//!   generator for every slot of a multi-slot window (Poisson(magnitude) per
//!   slot).
//! - inject: a syndrome observed in the training part is drawn uniformly,
//!   and Poisson(σ) copies of existing matching records are appended to one
//!   test slot, σ being the standard deviation of the training slot totals.
//!
//! Added records are tagged [`RecordOrigin::Injected`].

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::error::{Error, Result};
use crate::model::{DataStream, OutbreakLabel, PatientRecord, RecordOrigin, Syndrome};
use crate::seed::{rng_from, Rng};
use crate::stats::tail::mean_variance;
use crate::syndrome::{build_count_matrix, enumerate_syndromes, EnumerationMode};

pub const DEFAULT_BOOST_DURATION: usize = 14;
pub const DEFAULT_BOOST_MAGNITUDE: f64 = 10.0;
/// Default cap on the training share of a drawn boost target.
pub const DEFAULT_MAX_TARGET_SHARE: f64 = 0.15;
pub const DEFAULT_INJECT_DURATION: usize = 1;

/// Target draws before injection gives up.
const MAX_TARGET_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutbreakMode {
    Boost,
    Inject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutbreakSpec {
    pub mode: OutbreakMode,
    /// Target syndrome as `attr=value[&attr=value]`; drawn at random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Slots; 14 for boost and 1 for inject by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<usize>,
    /// Mean extra records per outbreak slot. Inject defaults to the training
    /// standard deviation of the slot totals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
    /// Boost only: a drawn target must have a mean training count of at most
    /// this share of the mean training slot total (0.15 by default; 1 keeps
    /// every single condition).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_target_share: Option<f64>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl OutbreakSpec {
    pub fn boost() -> Self {
        OutbreakSpec {
            mode: OutbreakMode::Boost,
            target: None,
            duration: None,
            magnitude: None,
            max_target_share: None,
            rng_seed: 0,
        }
    }

    pub fn inject() -> Self {
        OutbreakSpec {
            mode: OutbreakMode::Inject,
            ..Self::boost()
        }
    }

    pub fn duration(&self) -> usize {
        self.duration.unwrap_or(match self.mode {
            OutbreakMode::Boost => DEFAULT_BOOST_DURATION,
            OutbreakMode::Inject => DEFAULT_INJECT_DURATION,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration() == 0 {
            return Err(Error::Outbreak("duration must be at least 1".into()));
        }
        if let Some(s) = self.max_target_share {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Outbreak(format!("max_target_share must lie in (0, 1], got {s}")));
            }
        }
        if let Some(m) = self.magnitude {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Outbreak(format!("magnitude must be non-negative, got {m}")));
            }
        }
        Ok(())
    }
}

/// What one outbreak simulation did, for the corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutbreakInfo {
    pub syndrome: String,
    pub order: usize,
    pub start: usize,
    pub length: usize,
    /// Records added over the whole outbreak.
    pub size: usize,
    /// Mean of the Poisson size draw per slot.
    pub magnitude: f64,
    /// Inject only: mean training count below one per slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare: Option<bool>,
}

/// Corpus-wide cap on outbreaks with rare target syndromes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RareQuota {
    limit: Option<usize>,
    used: usize,
}

impl RareQuota {
    pub fn new(limit: Option<usize>) -> Self {
        RareQuota { limit, used: 0 }
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn used(&self) -> usize {
        self.used
    }

    fn allows_rare(&self) -> bool {
        self.limit.is_none_or(|l| self.used < l)
    }
}

fn poisson(mean: f64, rng: &mut Rng) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Outbreak(format!("Poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as usize)
}

fn place(stream: &DataStream, duration: usize, rng: &mut Rng) -> Result<usize> {
    let lo = stream.train_len();
    if stream.len() < lo + duration {
        return Err(Error::Outbreak(format!(
            "test part of {} slots cannot hold a {duration}-slot outbreak",
            stream.test_len()
        )));
    }
    Ok(rng.random_range(lo..=stream.len() - duration))
}

/// Adds a `duration`-slot outbreak of generator-drawn records matching the
/// target. The default target is a uniformly drawn single condition whose
/// training mean is within the share cap.
pub fn simulate_outbreak_boost(
    stream: &DataStream,
    spec: &OutbreakSpec,
    generator: &Generator,
) -> Result<(DataStream, OutbreakInfo)> {
    spec.validate()?;
    if generator.schema().as_ref() != stream.schema() {
        return Err(Error::Outbreak("generator and stream schemas differ".into()));
    }
    let schema = stream.schema();
    let mut rng = rng_from(spec.rng_seed);
    let target = match &spec.target {
        Some(label) => Syndrome::parse(schema, label)?,
        None => {
            let mut singles = enumerate_syndromes(schema, 1, EnumerationMode::Full, None)?;
            let share = spec.max_target_share.unwrap_or(DEFAULT_MAX_TARGET_SHARE);
            if share < 1.0 {
                let m = build_count_matrix(stream, &singles, stream.train_len())?;
                let n = stream.train_len() as f64;
                let mean_total = m.slot_totals().iter().map(|&x| x as f64).sum::<f64>() / n;
                let keep: Vec<bool> = (0..m.n_cols())
                    .map(|j| m.rows().map(|r| r[j] as f64).sum::<f64>() / n <= share * mean_total)
                    .collect();
                singles = singles
                    .into_iter()
                    .zip(keep)
                    .filter(|(_, k)| *k)
                    .map(|(s, _)| s)
                    .collect();
                if singles.is_empty() {
                    return Err(Error::Outbreak(format!("no single condition is below share {share}")));
                }
            }
            singles[rng.random_range(0..singles.len())].clone()
        }
    };
    let duration = spec.duration();
    let magnitude = spec.magnitude.unwrap_or(DEFAULT_BOOST_MAGNITUDE);
    let start = place(stream, duration, &mut rng)?;
    let mut out = stream.clone();
    let mut size = 0;
    for t in start..start + duration {
        let k = poisson(magnitude, &mut rng)?;
        if k == 0 {
            continue;
        }
        let env = out.slot(t).env.clone();
        let extra: Vec<PatientRecord> = (0..k)
            .map(|_| {
                PatientRecord::from_indices_unchecked(
                    generator.sample_matching(&env, &target, &mut rng),
                    RecordOrigin::Injected,
                )
            })
            .collect();
        out.slot_mut(t).records.extend(extra);
        size += k;
    }
    out.push_outbreak(OutbreakLabel {
        start,
        length: duration,
    })?;
    Ok((
        out,
        OutbreakInfo {
            syndrome: target.label(schema),
            order: target.order(),
            start,
            length: duration,
            size,
            magnitude,
            rare: None,
        },
    ))
}

/// Per-syndrome candidates for injection: every S≤2 syndrome seen in the
/// training part with its mean count per training slot.
pub fn injection_candidates(stream: &DataStream) -> Result<Vec<(Syndrome, f64)>> {
    let history: Vec<_> = stream.slots().take(stream.train_len()).collect();
    let syndromes = enumerate_syndromes(stream.schema(), 2, EnumerationMode::Observed, Some(&history))?;
    let m = build_count_matrix(stream, &syndromes, stream.train_len())?;
    let mut sums = vec![0u64; m.n_cols()];
    for row in m.rows() {
        for (s, &x) in sums.iter_mut().zip(row) {
            *s += x as u64;
        }
    }
    let n = stream.train_len() as f64;
    Ok(syndromes
        .into_iter()
        .zip(sums)
        .map(|(s, c)| (s, c as f64 / n))
        .collect())
}

/// Injects copies of existing records matching a drawn syndrome into one
/// test slot. Rare targets (mean training count below one per slot) are
/// redrawn once `quota` is used up.
pub fn inject_outbreak(
    stream: &DataStream,
    spec: &OutbreakSpec,
    quota: &mut RareQuota,
) -> Result<(DataStream, OutbreakInfo)> {
    let candidates = injection_candidates(stream)?;
    inject_with_candidates(stream, spec, quota, &candidates)
}

pub(crate) fn inject_with_candidates(
    stream: &DataStream,
    spec: &OutbreakSpec,
    quota: &mut RareQuota,
    candidates: &[(Syndrome, f64)],
) -> Result<(DataStream, OutbreakInfo)> {
    spec.validate()?;
    let schema = stream.schema();
    let mut rng = rng_from(spec.rng_seed);
    let all_records = || stream.slots().flat_map(|s| s.records.iter());

    let fixed = spec.target.as_deref().map(|l| Syndrome::parse(schema, l)).transpose()?;
    let mut chosen = None;
    for _ in 0..MAX_TARGET_DRAWS {
        let (target, mean) = match &fixed {
            Some(t) => {
                let mean = candidates.iter().find(|(s, _)| s == t).map_or(0.0, |c| c.1);
                (t.clone(), mean)
            }
            None => {
                if candidates.is_empty() {
                    return Err(Error::Outbreak("no syndrome occurs in the training part".into()));
                }
                candidates[rng.random_range(0..candidates.len())].clone()
            }
        };
        let rare = mean < 1.0;
        if rare && fixed.is_none() && !quota.allows_rare() {
            continue;
        }
        let pool: Vec<&PatientRecord> = all_records()
            .filter(|r| target.conditions().iter().all(|c| r.values()[c.attr] == c.value))
            .collect();
        if pool.is_empty() {
            if fixed.is_some() {
                break;
            }
            continue;
        }
        chosen = Some((target, rare, pool));
        break;
    }
    let Some((target, rare, pool)) = chosen else {
        return Err(Error::Outbreak(match &fixed {
            Some(t) => format!("no record in the stream matches {}", t.label(schema)),
            None => format!("no admissible target syndrome after {MAX_TARGET_DRAWS} draws"),
        }));
    };
    if rare {
        quota.used += 1;
    }

    let magnitude = match spec.magnitude {
        Some(m) => m,
        None => {
            let totals: Vec<u32> = stream.slot_totals()[..stream.train_len()].to_vec();
            mean_variance(&totals)?.1.sqrt()
        }
    };
    let duration = spec.duration();
    let start = place(stream, duration, &mut rng)?;
    let mut out = stream.clone();
    let mut size = 0;
    for t in start..start + duration {
        let k = poisson(magnitude, &mut rng)?;
        if k == 0 {
            continue;
        }
        let copies: Vec<PatientRecord> = (0..k)
            .map(|_| {
                pool[rng.random_range(0..pool.len())]
                    .clone()
                    .with_origin(RecordOrigin::Injected)
            })
            .collect();
        out.slot_mut(t).records.extend(copies);
        size += k;
    }
    out.push_outbreak(OutbreakLabel {
        start,
        length: duration,
    })?;
    Ok((
        out,
        OutbreakInfo {
            syndrome: target.label(schema),
            order: target.order(),
            start,
            length: duration,
            size,
            magnitude,
            rare: Some(rare),
        },
    ))
}
