//! Ancestral sampling of streams from a [`GeneratorSpec`].
//!
//! Random streams are split by purpose so that each piece can be redrawn
//! independently: `(seed, 0)` drives the environment, `(seed, 1, t)` the
//! records of slot `t`.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::spec::{CompiledEnv, CompiledSpec, GeneratorSpec};
use crate::error::{Error, Result};
use crate::model::{DataStream, PatientRecord, RecordOrigin, StreamSchema, Syndrome, TimeSlot};
use crate::seed::{derived_rng, Rng};

/// A compiled generator bound to its schema.
#[derive(Debug, Clone)]
pub struct Generator {
    spec: GeneratorSpec,
    schema: Arc<StreamSchema>,
    compiled: CompiledSpec,
}

/// Rejection attempts per conditioned record before falling back to clamping.
const MAX_REJECTIONS: usize = 100_000;

impl Generator {
    pub fn new(spec: GeneratorSpec) -> Result<Self> {
        let compiled = spec.compile()?;
        Ok(Generator {
            schema: Arc::new(spec.schema.clone()),
            spec,
            compiled,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn schema(&self) -> &Arc<StreamSchema> {
        &self.schema
    }

    /// Environmental settings of slots `0..len`.
    pub fn env_sequence(&self, seed: u64, len: usize) -> Vec<Vec<u16>> {
        let mut rng = derived_rng(seed, &[0]);
        let mut out: Vec<Vec<u16>> = vec![Vec::with_capacity(self.compiled.env.len()); len];
        for env in &self.compiled.env {
            match env {
                CompiledEnv::Cycle { values, offset } => {
                    for (t, slot) in out.iter_mut().enumerate() {
                        slot.push(values[(t + offset) % values.len()]);
                    }
                }
                CompiledEnv::Markov { initial, transitions } => {
                    let mut state = None;
                    for slot in out.iter_mut() {
                        let u = rng.random::<f64>();
                        let v = match state {
                            None => initial.pick(u),
                            Some(prev) => transitions[prev as usize].pick(u),
                        };
                        state = Some(v);
                        slot.push(v);
                    }
                }
            }
        }
        out
    }

    /// Expected number of records in a slot with environment `env`.
    pub fn visit_rate(&self, env: &[u16]) -> f64 {
        env.iter()
            .zip(&self.compiled.multipliers)
            .fold(self.spec.visit_rate, |acc, (&v, m)| acc * m[v as usize])
    }

    /// One record drawn from the network under environment `env`.
    pub fn sample_values(&self, env: &[u16], rng: &mut Rng) -> Vec<u16> {
        let mut values = vec![0u16; self.compiled.cpts.len()];
        for &a in &self.compiled.order {
            let row = self.compiled.cpts[a].row(env, &values);
            values[a] = row.pick(rng.random::<f64>());
        }
        values
    }

    /// One record conditioned on matching `target`: rejection sampling, or
    /// if that keeps failing, ancestral sampling with the target's values
    /// clamped.
    pub fn sample_matching(&self, env: &[u16], target: &Syndrome, rng: &mut Rng) -> Vec<u16> {
        let matches = |v: &[u16]| target.conditions().iter().all(|c| v[c.attr] == c.value);
        for _ in 0..MAX_REJECTIONS {
            let v = self.sample_values(env, rng);
            if matches(&v) {
                return v;
            }
        }
        log::warn!(
            "rejection sampling for {} failed; clamping",
            target.display(&self.schema)
        );
        let mut values = vec![0u16; self.compiled.cpts.len()];
        for &a in &self.compiled.order {
            let row = self.compiled.cpts[a].row(env, &values);
            let drawn = row.pick(rng.random::<f64>());
            values[a] = target
                .conditions()
                .iter()
                .find(|c| c.attr == a)
                .map_or(drawn, |c| c.value);
        }
        values
    }

    fn sample_slot(&self, seed: u64, t: usize, env: Vec<u16>) -> Result<TimeSlot> {
        let mut rng = derived_rng(seed, &[1, t as u64]);
        let rate = self.visit_rate(&env);
        let n = if rate > 0.0 {
            let d = Poisson::new(rate).map_err(|e| Error::Generator(format!("visit rate {rate}: {e}")))?;
            d.sample(&mut rng) as usize
        } else {
            0
        };
        let records = (0..n)
            .map(|_| PatientRecord::from_indices_unchecked(self.sample_values(&env, &mut rng), RecordOrigin::Observed))
            .collect();
        Ok(TimeSlot::new(t, records, env))
    }

    /// A stream of `spec.stream_len` slots from `seed`, without outbreaks.
    pub fn generate(&self, seed: u64) -> Result<DataStream> {
        let len = self.spec.stream_len;
        let envs = self.env_sequence(seed, len);
        let slots = envs
            .into_par_iter()
            .enumerate()
            .map(|(t, env)| self.sample_slot(seed, t, env))
            .collect::<Result<Vec<_>>>()?;
        DataStream::new(self.schema.clone(), slots, self.spec.train_len, Vec::new())
    }
}

/// Generates one stream from `spec`, seeded by `spec.rng_seed`.
pub fn generate_stream(spec: &GeneratorSpec) -> Result<DataStream> {
    Generator::new(spec.clone())?.generate(spec.rng_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::spec::CptSpec;

    #[test]
    fn deterministic_and_sized() {
        let spec = GeneratorSpec {
            rng_seed: 42,
            ..GeneratorSpec::synthetic_default()
        };
        let a = generate_stream(&spec).unwrap();
        let b = generate_stream(&spec).unwrap();
        assert_eq!(a.len(), 730);
        assert_eq!(a.train_len(), 365);
        assert_eq!(crate::io::records_csv(&a).unwrap(), crate::io::records_csv(&b).unwrap());
        let other = generate_stream(&GeneratorSpec { rng_seed: 43, ..spec }).unwrap();
        assert_ne!(a.slot_totals(), other.slot_totals());
    }

    #[test]
    fn mean_slot_size_near_visit_rate() {
        for seed in 0..3 {
            let spec = GeneratorSpec {
                rng_seed: seed,
                ..GeneratorSpec::synthetic_default()
            };
            let s = generate_stream(&spec).unwrap();
            let mean = s.slot_totals().iter().map(|&n| n as f64).sum::<f64>() / s.len() as f64;
            assert!((mean - 34.0).abs() <= 3.4, "mean {mean}");
        }
    }

    #[test]
    fn independent_attribute_matches_its_marginal() {
        let mut spec = GeneratorSpec::synthetic_default();
        spec.cpts.insert(
            "symptom".into(),
            CptSpec {
                parents: vec![],
                table: serde_json::json!({"none": 0.5, "nausea": 0.1, "rash": 0.25, "respiratory": 0.15}),
            },
        );
        spec.rng_seed = 5;
        let s = generate_stream(&spec).unwrap();
        let total: usize = s.slots().map(|x| x.len()).sum();
        let rash: usize = s
            .slots()
            .flat_map(|x| x.records.iter())
            .filter(|r| r.values()[3] == 2)
            .count();
        let frac = rash as f64 / total as f64;
        let sd = (0.25 * 0.75 / total as f64).sqrt();
        assert!((frac - 0.25).abs() < 3.0 * sd, "{frac}");
    }

    #[test]
    fn cycles_are_exactly_periodic() {
        let g = Generator::new(GeneratorSpec::synthetic_default()).unwrap();
        let env = g.env_sequence(9, 730);
        let day = g.schema().env_index("day_of_week").unwrap();
        let season = g.schema().env_index("season").unwrap();
        for t in 7..730 {
            assert_eq!(env[t][day], env[t - 7][day]);
        }
        for t in 365..730 {
            assert_eq!(env[t][season], env[t - 365][season]);
        }
        let weekday = g.schema().environmental()[day].value_index("weekday").unwrap();
        assert_eq!(env[..7].iter().filter(|e| e[day] == weekday).count(), 5);
    }

    #[test]
    fn conditioned_samples_match_target() {
        let g = Generator::new(GeneratorSpec::synthetic_default()).unwrap();
        let target = Syndrome::parse(g.schema(), "symptom=rash&location=west").unwrap();
        let env = g.env_sequence(1, 1).remove(0);
        let mut rng = crate::seed::rng_from(3);
        for _ in 0..50 {
            let v = g.sample_matching(&env, &target, &mut rng);
            assert_eq!(g.schema().response()[3].values[v[3] as usize], "rash");
            assert_eq!(g.schema().response()[5].values[v[5] as usize], "west");
        }
    }
}
