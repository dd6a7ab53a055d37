//! WSARE 2.0 and 2.5: compare each syndrome's share of the current slot with
//! its share of a reference set of earlier records.
//!
//! - 2.0 merges the records of the slots at fixed lags (35, 42, 49 and 56
//!   slots back by default, i.e. the same weekday on daily data).
//! - 2.5 merges the records of every earlier slot whose environmental
//!   setting equals the current one.
//!
//! The reference set is the merged multiset of records, so larger lag slots
//! weigh more.

use serde::{Deserialize, Serialize};

use super::{Aggregation, DetectorConfig, ScoringContext, SlotScore};
use crate::error::{Error, Result};
use crate::model::PatientRecord;
use crate::seed::derive_seed;
use crate::stats::contingency::IncreaseTester;
use crate::stats::permutation::{min_p, permutation_min_p};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WsareVersion {
    #[serde(rename = "2.0")]
    V20,
    #[serde(rename = "2.5")]
    V25,
}

impl ScoringContext<'_> {
    /// Slots merged into the reference set of slot `t`; `None` when 2.5 finds
    /// no earlier slot with the same environment.
    pub fn reference_slots(
        &self,
        version: WsareVersion,
        t: usize,
        config: &DetectorConfig,
    ) -> Result<Option<Vec<usize>>> {
        match version {
            WsareVersion::V20 => {
                let mut slots = Vec::with_capacity(config.wsare20_lags.len());
                for &lag in &config.wsare20_lags {
                    if lag == 0 || lag > t {
                        return Err(Error::InsufficientHistory(format!(
                            "lag {lag} reaches before the first slot from slot {t}"
                        )));
                    }
                    slots.push(t - lag);
                }
                slots.sort_unstable();
                slots.dedup();
                Ok(Some(slots))
            }
            WsareVersion::V25 => {
                let env = &self.stream.slot(t).env;
                let slots: Vec<usize> = (0..t).filter(|&s| self.stream.slot(s).env == *env).collect();
                Ok((!slots.is_empty()).then_some(slots))
            }
        }
    }

    pub fn wsare(&self, version: WsareVersion, t: usize, config: &DetectorConfig) -> Result<SlotScore> {
        self.check_slot(t)?;
        let Some(reference) = self.reference_slots(version, t, config)? else {
            log::warn!("WSARE 2.5: no earlier slot shares the environment of slot {t}; scoring 0");
            return Ok(SlotScore {
                score: 0.0,
                syndrome: None,
            });
        };
        let m = &self.matrix;
        let current_total = m.slot_totals()[t] as u64;
        let reference_total: u64 = reference.iter().map(|&s| m.slot_totals()[s] as u64).sum();
        if current_total == 0 || reference_total == 0 {
            return Ok(SlotScore {
                score: 0.0,
                syndrome: None,
            });
        }

        match config.aggregation {
            Aggregation::MinP => {
                let mut ref_counts = vec![0u32; m.n_cols()];
                for &s in &reference {
                    for (acc, &x) in ref_counts.iter_mut().zip(m.row(s)) {
                        *acc += x;
                    }
                }
                let tester = IncreaseTester::new((current_total + reference_total) as usize, config.test);
                let (p, col) = min_p(m.row(t), current_total, &ref_counts, reference_total, &tester);
                Ok(SlotScore {
                    score: 1.0 - p,
                    syndrome: col,
                })
            }
            Aggregation::Permutation => {
                let current = &self.stream.slot(t).records;
                let pooled: Vec<PatientRecord> = reference
                    .iter()
                    .flat_map(|&s| self.stream.slot(s).records.iter().cloned())
                    .collect();
                let outcome = permutation_min_p(
                    self.stream.schema(),
                    current,
                    &pooled,
                    self.syndromes(),
                    config.permutation_reps,
                    derive_seed(config.rng_seed, &[t as u64]),
                    config.test,
                )?;
                Ok(SlotScore {
                    score: 1.0 - outcome.p,
                    syndrome: None,
                })
            }
        }
    }
}
