//! Generator specification: the schema, how environmental attributes evolve,
//! the visit rate and one conditional probability table per response
//! attribute.
//!
//! CPT tables are nested JSON maps keyed by parent values in the order of
//! `parents`; the innermost map gives the probability of each value of the
//! attribute itself. A `"*"` key at any level matches every parent value not
//! listed explicitly. Values missing from a leaf have probability 0.
//!
//! ```json
//! "drug": {
//!   "parents": ["symptom"],
//!   "table": {
//!     "respiratory": {"none": 0.3, "nyquil": 0.7},
//!     "*": {"none": 1.0}
//!   }
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{Attribute, StreamSchema};

/// How one environmental attribute moves from slot to slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvProcess {
    /// Deterministic cycle through `sequence`, starting `offset` slots into it.
    Cycle {
        sequence: Vec<CycleStep>,
        #[serde(default)]
        offset: usize,
    },
    /// First-order Markov chain.
    Markov {
        initial: BTreeMap<String, f64>,
        transitions: BTreeMap<String, BTreeMap<String, f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleStep {
    pub value: String,
    pub duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptSpec {
    /// Environmental or response attributes this one depends on.
    #[serde(default)]
    pub parents: Vec<String>,
    pub table: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub schema: StreamSchema,
    pub env_process: BTreeMap<String, EnvProcess>,
    /// Mean records per slot before environmental multipliers.
    pub visit_rate: f64,
    /// `attribute -> value -> factor` applied to the visit rate; missing entries are 1.
    #[serde(default)]
    pub visit_multipliers: BTreeMap<String, BTreeMap<String, f64>>,
    pub cpts: BTreeMap<String, CptSpec>,
    pub stream_len: usize,
    pub train_len: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ParentRef {
    Env(usize),
    Response(usize),
}

/// A probability row stored as a cumulative distribution.
#[derive(Debug, Clone)]
pub(crate) struct Categorical {
    cum: Vec<f64>,
}

impl Categorical {
    fn from_probs(probs: &[f64]) -> Self {
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in probs {
            acc += p;
            cum.push(acc);
        }
        // pin the last positive entry (and any trailing zeros) to exactly 1
        if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
            for c in &mut cum[last..] {
                *c = 1.0;
            }
        }
        Categorical { cum }
    }

    /// Index for a uniform draw `u ∈ [0, 1)`.
    pub(crate) fn pick(&self, u: f64) -> u16 {
        self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1) as u16
    }

    #[cfg(test)]
    pub(crate) fn prob(&self, i: usize) -> f64 {
        self.cum[i] - if i == 0 { 0.0 } else { self.cum[i - 1] }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CompiledEnv {
    Cycle {
        values: Vec<u16>,
        offset: usize,
    },
    Markov {
        initial: Categorical,
        transitions: Vec<Categorical>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledCpt {
    pub(crate) parents: Vec<ParentRef>,
    radices: Vec<usize>,
    rows: Vec<Categorical>,
}

impl CompiledCpt {
    pub(crate) fn row(&self, env: &[u16], response: &[u16]) -> &Categorical {
        let mut idx = 0;
        for (p, &radix) in self.parents.iter().zip(&self.radices) {
            let v = match *p {
                ParentRef::Env(i) => env[i],
                ParentRef::Response(i) => response[i],
            };
            idx = idx * radix + v as usize;
        }
        &self.rows[idx]
    }
}

/// A validated spec, ready for sampling.
#[derive(Debug, Clone)]
pub(crate) struct CompiledSpec {
    pub(crate) env: Vec<CompiledEnv>,
    /// Response attributes in an order where parents come first.
    pub(crate) order: Vec<usize>,
    pub(crate) cpts: Vec<CompiledCpt>,
    pub(crate) multipliers: Vec<Vec<f64>>,
}

fn check_row(what: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Generator(format!(
            "{what}: probabilities must be finite and non-negative"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(Error::Generator(format!("{what}: probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

fn prob_map(attr: &Attribute, map: &BTreeMap<String, f64>, what: &str) -> Result<Vec<f64>> {
    let mut row = vec![0.0; attr.cardinality()];
    for (k, &p) in map {
        let i = attr
            .value_index(k)
            .ok_or_else(|| Error::Generator(format!("{what}: '{k}' is not a value of '{}'", attr.name)))?;
        row[i as usize] = p;
    }
    check_row(what, &row)?;
    Ok(row)
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    pub(crate) fn compile(&self) -> Result<CompiledSpec> {
        let schema = &self.schema;
        if !(self.visit_rate.is_finite() && self.visit_rate > 0.0) {
            return Err(Error::Generator(format!(
                "visit_rate must be positive, got {}",
                self.visit_rate
            )));
        }
        if self.train_len == 0 || self.train_len >= self.stream_len {
            return Err(Error::Generator(format!(
                "need 0 < train_len < stream_len, got {} and {}",
                self.train_len, self.stream_len
            )));
        }
        for name in self.env_process.keys() {
            if schema.env_index(name).is_none() {
                return Err(Error::Generator(format!("env_process for unknown attribute '{name}'")));
            }
        }
        let env = schema
            .environmental()
            .iter()
            .map(|a| {
                let p = self
                    .env_process
                    .get(&a.name)
                    .ok_or_else(|| Error::Generator(format!("no env_process for '{}'", a.name)))?;
                compile_env(a, p)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut multipliers: Vec<Vec<f64>> = schema
            .environmental()
            .iter()
            .map(|a| vec![1.0; a.cardinality()])
            .collect();
        for (name, factors) in &self.visit_multipliers {
            let e = schema
                .env_index(name)
                .ok_or_else(|| Error::Generator(format!("visit multiplier for unknown attribute '{name}'")))?;
            let attr = &schema.environmental()[e];
            for (v, &f) in factors {
                let i = attr
                    .value_index(v)
                    .ok_or_else(|| Error::Generator(format!("visit multiplier: '{v}' is not a value of '{name}'")))?;
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::Generator(format!(
                        "visit multiplier {name}={v} must be non-negative"
                    )));
                }
                multipliers[e][i as usize] = f;
            }
        }

        for name in self.cpts.keys() {
            if schema.response_index(name).is_none() {
                return Err(Error::Generator(format!("CPT for unknown response attribute '{name}'")));
            }
        }
        let cpts = schema
            .response()
            .iter()
            .map(|a| {
                let c = self
                    .cpts
                    .get(&a.name)
                    .ok_or_else(|| Error::Generator(format!("no CPT for response attribute '{}'", a.name)))?;
                compile_cpt(schema, a, c)
            })
            .collect::<Result<Vec<_>>>()?;
        let order = topological_order(schema, &cpts)?;
        Ok(CompiledSpec {
            env,
            order,
            cpts,
            multipliers,
        })
    }
}

fn compile_env(attr: &Attribute, p: &EnvProcess) -> Result<CompiledEnv> {
    let value = |v: &str| {
        attr.value_index(v)
            .ok_or_else(|| Error::Generator(format!("env_process: '{v}' is not a value of '{}'", attr.name)))
    };
    match p {
        EnvProcess::Cycle { sequence, offset } => {
            let mut values = Vec::new();
            for step in sequence {
                if step.duration == 0 {
                    return Err(Error::Generator(format!(
                        "cycle for '{}' has a zero duration",
                        attr.name
                    )));
                }
                let v = value(&step.value)?;
                values.extend(std::iter::repeat_n(v, step.duration));
            }
            if values.is_empty() {
                return Err(Error::Generator(format!("cycle for '{}' is empty", attr.name)));
            }
            Ok(CompiledEnv::Cycle {
                values,
                offset: *offset,
            })
        }
        EnvProcess::Markov { initial, transitions } => {
            let initial = Categorical::from_probs(&prob_map(attr, initial, &format!("initial '{}'", attr.name))?);
            let mut rows = Vec::with_capacity(attr.cardinality());
            for v in &attr.values {
                let map = transitions
                    .get(v)
                    .ok_or_else(|| Error::Generator(format!("no transition row for {}={v}", attr.name)))?;
                rows.push(Categorical::from_probs(&prob_map(
                    attr,
                    map,
                    &format!("transition {}={v}", attr.name),
                )?));
            }
            for k in transitions.keys() {
                value(k)?;
            }
            Ok(CompiledEnv::Markov {
                initial,
                transitions: rows,
            })
        }
    }
}

fn compile_cpt(schema: &StreamSchema, attr: &Attribute, spec: &CptSpec) -> Result<CompiledCpt> {
    let mut parents = Vec::new();
    let mut parent_attrs = Vec::new();
    for p in &spec.parents {
        if *p == attr.name {
            return Err(Error::Generator(format!("'{}' lists itself as a parent", attr.name)));
        }
        if let Some(i) = schema.env_index(p) {
            parents.push(ParentRef::Env(i));
            parent_attrs.push(&schema.environmental()[i]);
        } else if let Some(i) = schema.response_index(p) {
            parents.push(ParentRef::Response(i));
            parent_attrs.push(&schema.response()[i]);
        } else {
            return Err(Error::Generator(format!("CPT '{}': unknown parent '{p}'", attr.name)));
        }
    }
    let radices: Vec<usize> = parent_attrs.iter().map(|a| a.cardinality()).collect();
    let n_rows: usize = radices.iter().product();
    let mut rows = Vec::with_capacity(n_rows);
    let mut config = vec![0usize; radices.len()];
    for _ in 0..n_rows {
        let describe = || {
            parent_attrs
                .iter()
                .zip(&config)
                .map(|(a, &v)| format!("{}={}", a.name, a.values[v]))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut node = &spec.table;
        for (a, &v) in parent_attrs.iter().zip(&config) {
            let obj = node.as_object().ok_or_else(|| {
                Error::Generator(format!("CPT '{}': expected a map at parent '{}'", attr.name, a.name))
            })?;
            node = obj
                .get(&a.values[v])
                .or_else(|| obj.get("*"))
                .ok_or_else(|| Error::Generator(format!("CPT '{}' has no row for [{}]", attr.name, describe())))?;
        }
        let leaf: BTreeMap<String, f64> = serde_json::from_value(node.clone()).map_err(|e| {
            Error::Generator(format!(
                "CPT '{}' row [{}] is not a value->probability map: {e}",
                attr.name,
                describe()
            ))
        })?;
        let row = prob_map(attr, &leaf, &format!("CPT '{}' row [{}]", attr.name, describe()))?;
        rows.push(Categorical::from_probs(&row));
        // advance the mixed-radix counter, last parent fastest
        for k in (0..config.len()).rev() {
            config[k] += 1;
            if config[k] < radices[k] {
                break;
            }
            config[k] = 0;
        }
    }
    Ok(CompiledCpt { parents, radices, rows })
}

fn topological_order(schema: &StreamSchema, cpts: &[CompiledCpt]) -> Result<Vec<usize>> {
    let n = cpts.len();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let ready = (0..n).find(|&i| {
            !placed[i]
                && cpts[i].parents.iter().all(|p| match *p {
                    ParentRef::Response(j) => placed[j],
                    ParentRef::Env(_) => true,
                })
        });
        match ready {
            Some(i) => {
                placed[i] = true;
                order.push(i);
            }
            None => {
                let stuck: Vec<&str> = (0..n)
                    .filter(|&i| !placed[i])
                    .map(|i| schema.response()[i].name.as_str())
                    .collect();
                return Err(Error::Generator(format!(
                    "CPT parents form a cycle among {}",
                    stuck.join(", ")
                )));
            }
        }
    }
    Ok(order)
}

/// Builds a nested CPT table by calling `f` with the value indices of every
/// parent configuration; `f` returns unnormalized weights over `child`.
pub fn build_table(parents: &[&Attribute], child: &Attribute, f: impl Fn(&[usize]) -> Vec<f64>) -> Value {
    fn rec(
        parents: &[&Attribute],
        child: &Attribute,
        config: &mut Vec<usize>,
        f: &dyn Fn(&[usize]) -> Vec<f64>,
    ) -> Value {
        if config.len() == parents.len() {
            let w = f(config);
            assert_eq!(w.len(), child.cardinality(), "weights for '{}'", child.name);
            let total: f64 = w.iter().sum();
            let mut leaf = Map::new();
            for (v, x) in child.values.iter().zip(w) {
                if x > 0.0 {
                    leaf.insert(v.clone(), Value::from(x / total));
                }
            }
            return Value::Object(leaf);
        }
        let attr = parents[config.len()];
        let mut obj = Map::new();
        for i in 0..attr.cardinality() {
            config.push(i);
            obj.insert(attr.values[i].clone(), rec(parents, child, config, f));
            config.pop();
        }
        Value::Object(obj)
    }
    rec(parents, child, &mut Vec::new(), &f)
}

fn cycle(steps: &[(&str, usize)]) -> EnvProcess {
    EnvProcess::Cycle {
        sequence: steps
            .iter()
            .map(|&(v, d)| CycleStep {
                value: v.to_string(),
                duration: d,
            })
            .collect(),
        offset: 0,
    }
}

fn markov(initial: &[(&str, f64)], transitions: &[(&str, &[(&str, f64)])]) -> EnvProcess {
    let map = |pairs: &[(&str, f64)]| pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    EnvProcess::Markov {
        initial: map(initial),
        transitions: transitions.iter().map(|&(k, row)| (k.to_string(), map(row))).collect(),
    }
}

fn factors(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn cpt(parents: &[&Attribute], child: &Attribute, f: impl Fn(&[usize]) -> Vec<f64>) -> CptSpec {
    CptSpec {
        parents: parents.iter().map(|a| a.name.clone()).collect(),
        table: build_table(parents, child, f),
    }
}

impl GeneratorSpec {
    /// Two years of daily slots with the attributes of the classic synthetic
    /// city data: 6 response attributes (25 values) and 4 environmental
    /// attributes. Symptoms depend on flu level, season, weather and age;
    /// the visit rate depends on flu level and day of week. About 34 records
    /// per slot.
    pub fn synthetic_default() -> Self {
        let age = Attribute::new("age", &["child", "senior", "working"]);
        let gender = Attribute::new("gender", &["female", "male"]);
        let action = Attribute::new("action", &["absent", "evisit", "purchase"]);
        let symptom = Attribute::new("symptom", &["none", "nausea", "rash", "respiratory"]);
        let drug = Attribute::new("drug", &["none", "aspirin", "nyquil", "vomit-b-gone"]);
        let location = Attribute::new(
            "location",
            &[
                "center",
                "east",
                "west",
                "north",
                "south",
                "northeast",
                "northwest",
                "southeast",
                "southwest",
            ],
        );
        let flu = Attribute::new("flu_level", &["decline", "high", "low", "none"]);
        let day = Attribute::new("day_of_week", &["saturday", "sunday", "weekday"]);
        let weather = Attribute::new("weather", &["cold", "hot"]);
        let season = Attribute::new("season", &["fall", "spring", "summer", "winter"]);

        let mut cpts = BTreeMap::new();
        cpts.insert("age".into(), cpt(&[], &age, |_| vec![0.25, 0.2, 0.55]));
        cpts.insert("gender".into(), cpt(&[], &gender, |_| vec![0.52, 0.48]));
        cpts.insert(
            "location".into(),
            cpt(&[], &location, |_| {
                vec![0.2, 0.12, 0.12, 0.1, 0.1, 0.09, 0.09, 0.09, 0.09]
            }),
        );
        cpts.insert(
            "symptom".into(),
            cpt(&[&flu, &season, &weather, &age], &symptom, |c| {
                let (flu, season, weather, age) = (c[0], c[1], c[2], c[3]);
                let flu_f = [2.5, 5.0, 2.0, 1.0][flu];
                let season_resp = [1.2, 1.0, 0.6, 1.7][season];
                let weather_resp = [1.4, 0.8][weather];
                let age_resp = [1.3, 1.5, 1.0][age];
                let nausea = 0.8 * [1.0, 1.0, 1.5, 1.0][season] * [1.3, 1.0, 1.0][age];
                let rash = 0.4 * [1.0, 1.3, 2.0, 0.7][season] * [0.8, 1.5][weather];
                let resp = 1.0 * flu_f * season_resp * weather_resp * age_resp;
                vec![6.0, nausea, rash, resp]
            }),
        );
        cpts.insert(
            "action".into(),
            cpt(&[&symptom, &day], &action, |c| {
                let (symptom, day) = (c[0], c[1]);
                let mut w = if symptom == 0 {
                    vec![0.45, 0.05, 0.5]
                } else {
                    vec![0.3, 0.3, 0.4]
                };
                if day != 2 {
                    w[1] *= 0.6;
                    w[2] *= 1.2;
                }
                w
            }),
        );
        cpts.insert(
            "drug".into(),
            cpt(&[&symptom, &action], &drug, |c| {
                let (symptom, action) = (c[0], c[1]);
                let mut w = match symptom {
                    0 => vec![0.85, 0.1, 0.03, 0.02],
                    1 => vec![0.3, 0.1, 0.05, 0.55],
                    2 => vec![0.6, 0.3, 0.05, 0.05],
                    _ => vec![0.25, 0.25, 0.45, 0.05],
                };
                if action == 2 {
                    w[1..].iter_mut().for_each(|x| *x *= 2.0);
                }
                w
            }),
        );

        let mut env_process = BTreeMap::new();
        env_process.insert(
            "flu_level".into(),
            markov(
                &[("none", 1.0)],
                &[
                    ("none", &[("none", 0.95), ("low", 0.05)]),
                    ("low", &[("low", 0.9), ("high", 0.07), ("none", 0.03)]),
                    ("high", &[("high", 0.92), ("decline", 0.08)]),
                    ("decline", &[("decline", 0.9), ("low", 0.05), ("none", 0.05)]),
                ],
            ),
        );
        env_process.insert(
            "day_of_week".into(),
            cycle(&[("weekday", 5), ("saturday", 1), ("sunday", 1)]),
        );
        env_process.insert(
            "weather".into(),
            markov(
                &[("cold", 0.5), ("hot", 0.5)],
                &[
                    ("cold", &[("cold", 0.85), ("hot", 0.15)]),
                    ("hot", &[("hot", 0.85), ("cold", 0.15)]),
                ],
            ),
        );
        env_process.insert(
            "season".into(),
            cycle(&[("winter", 91), ("spring", 91), ("summer", 92), ("fall", 91)]),
        );

        let mut visit_multipliers = BTreeMap::new();
        visit_multipliers.insert(
            "flu_level".into(),
            factors(&[("none", 0.9), ("low", 1.0), ("high", 1.25), ("decline", 1.05)]),
        );
        visit_multipliers.insert(
            "day_of_week".into(),
            factors(&[("weekday", 1.03), ("saturday", 0.95), ("sunday", 0.9)]),
        );

        GeneratorSpec {
            schema: StreamSchema::new(
                vec![age, gender, action, symptom, drug, location],
                vec![flu, day, weather, season],
            )
            .expect("static schema"),
            env_process,
            visit_rate: 34.0,
            visit_multipliers,
            cpts,
            stream_len: 730,
            train_len: 365,
            rng_seed: 0,
        }
    }

    /// Two years of daily emergency-department-like slots: 8 response
    /// attributes including a 28-value triage presentation, day of week and
    /// season as environment, about 165 records per slot.
    pub fn emergency_default() -> Self {
        let age = Attribute::new("age", &["child", "adult", "senior"]);
        let gender = Attribute::new("gender", &["female", "male"]);
        let mts = Attribute::new("mts", &MTS_VALUES);
        let fever = Attribute::new("fever", &["no", "yes"]);
        let pulse = Attribute::new("pulse", &["low", "normal", "high"]);
        let respiration = Attribute::new("respiration", &["low", "normal", "high"]);
        let oxygen = Attribute::new("oxygen_saturation", &["normal", "low"]);
        let bp = Attribute::new("blood_pressure", &["normal", "abnormal"]);
        let day = Attribute::new(
            "day_of_week",
            &[
                "monday",
                "tuesday",
                "wednesday",
                "thursday",
                "friday",
                "saturday",
                "sunday",
            ],
        );
        let season = Attribute::new("season", &["winter", "spring", "summer", "fall"]);

        let infectious = |m: usize| {
            matches!(
                MTS_VALUES[m],
                "shortness_of_breath"
                    | "sore_throat"
                    | "unwell_adult"
                    | "unwell_child"
                    | "diarrhoea_vomiting"
                    | "rashes"
                    | "asthma"
            )
        };
        let mut cpts = BTreeMap::new();
        cpts.insert("age".into(), cpt(&[], &age, |_| vec![0.18, 0.55, 0.27]));
        cpts.insert("gender".into(), cpt(&[], &gender, |_| vec![0.49, 0.51]));
        cpts.insert(
            "mts".into(),
            cpt(&[&age, &season], &mts, |c| {
                let (age, season) = (c[0], c[1]);
                (0..MTS_VALUES.len())
                    .map(|m| {
                        // the grouped non-infectious value dominates; the rest decay
                        let mut w = if MTS_VALUES[m] == "injury" {
                            30.0
                        } else {
                            8.0 / (1.0 + m as f64 * 0.25)
                        };
                        if infectious(m) {
                            w *= [1.6, 1.0, 0.7, 1.1][season];
                        }
                        if MTS_VALUES[m] == "unwell_child" {
                            w *= if age == 0 { 4.0 } else { 0.05 };
                        }
                        if MTS_VALUES[m] == "falls" && age == 2 {
                            w *= 3.0;
                        }
                        w
                    })
                    .collect()
            }),
        );
        cpts.insert(
            "fever".into(),
            cpt(&[&mts], &fever, |c| {
                if infectious(c[0]) {
                    vec![0.6, 0.4]
                } else {
                    vec![0.95, 0.05]
                }
            }),
        );
        cpts.insert(
            "pulse".into(),
            cpt(&[&fever], &pulse, |c| {
                if c[0] == 1 {
                    vec![0.05, 0.45, 0.5]
                } else {
                    vec![0.08, 0.8, 0.12]
                }
            }),
        );
        cpts.insert(
            "respiration".into(),
            cpt(&[&mts], &respiration, |c| {
                if matches!(MTS_VALUES[c[0]], "shortness_of_breath" | "asthma") {
                    vec![0.05, 0.45, 0.5]
                } else {
                    vec![0.05, 0.85, 0.1]
                }
            }),
        );
        cpts.insert(
            "oxygen_saturation".into(),
            cpt(&[&respiration], &oxygen, |c| {
                if c[0] == 2 {
                    vec![0.7, 0.3]
                } else {
                    vec![0.97, 0.03]
                }
            }),
        );
        cpts.insert(
            "blood_pressure".into(),
            cpt(
                &[&age],
                &bp,
                |c| if c[0] == 2 { vec![0.7, 0.3] } else { vec![0.9, 0.1] },
            ),
        );

        let mut env_process = BTreeMap::new();
        env_process.insert(
            "day_of_week".into(),
            cycle(&[
                ("monday", 1),
                ("tuesday", 1),
                ("wednesday", 1),
                ("thursday", 1),
                ("friday", 1),
                ("saturday", 1),
                ("sunday", 1),
            ]),
        );
        env_process.insert(
            "season".into(),
            cycle(&[("winter", 91), ("spring", 91), ("summer", 92), ("fall", 91)]),
        );
        let mut visit_multipliers = BTreeMap::new();
        visit_multipliers.insert(
            "day_of_week".into(),
            factors(&[
                ("monday", 1.1),
                ("tuesday", 1.0),
                ("wednesday", 0.98),
                ("thursday", 0.98),
                ("friday", 1.0),
                ("saturday", 0.96),
                ("sunday", 0.98),
            ]),
        );
        visit_multipliers.insert(
            "season".into(),
            factors(&[("winter", 1.04), ("spring", 1.0), ("summer", 0.97), ("fall", 1.0)]),
        );

        GeneratorSpec {
            schema: StreamSchema::new(
                vec![age, gender, mts, fever, pulse, respiration, oxygen, bp],
                vec![day, season],
            )
            .expect("static schema"),
            env_process,
            visit_rate: 165.0,
            visit_multipliers,
            cpts,
            stream_len: 730,
            train_len: 365,
            rng_seed: 0,
        }
    }
}

const MTS_VALUES: [&str; 28] = [
    "injury",
    "abdominal_pain",
    "chest_pain",
    "shortness_of_breath",
    "unwell_adult",
    "falls",
    "headache",
    "back_pain",
    "limb_problems",
    "wounds",
    "unwell_child",
    "diarrhoea_vomiting",
    "collapse",
    "palpitations",
    "mental_illness",
    "behaving_strangely",
    "sore_throat",
    "urinary_problems",
    "eye_problems",
    "ear_problems",
    "rashes",
    "allergy",
    "asthma",
    "fits",
    "diabetes",
    "neck_pain",
    "burns",
    "major_trauma",
];
