//! Core domain types: schemas, patient records, time slots, streams,
//! outbreak labels and syndromes.
//!
//! Categorical values are stored as indices into the owning attribute's
//! vocabulary. Every type that holds indices is only meaningful together with
//! the [`StreamSchema`] it was validated against.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical attribute and its ordered value vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, values: &[&str]) -> Self {
        Attribute {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, value: &str) -> Option<u16> {
        self.values.iter().position(|v| v == value).map(|i| i as u16)
    }
}

#[derive(Deserialize, Serialize)]
struct RawSchema {
    response: Vec<Attribute>,
    environmental: Vec<Attribute>,
}

/// Response and environmental attribute vocabularies of a stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct StreamSchema {
    response: Vec<Attribute>,
    environmental: Vec<Attribute>,
}

impl TryFrom<RawSchema> for StreamSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        StreamSchema::new(raw.response, raw.environmental)
    }
}

impl From<StreamSchema> for RawSchema {
    fn from(s: StreamSchema) -> Self {
        RawSchema {
            response: s.response,
            environmental: s.environmental,
        }
    }
}

impl StreamSchema {
    pub fn new(response: Vec<Attribute>, environmental: Vec<Attribute>) -> Result<Self> {
        if response.is_empty() {
            return Err(Error::Schema("at least one response attribute is required".into()));
        }
        let mut names = HashSet::new();
        for attr in response.iter().chain(environmental.iter()) {
            if attr.name.is_empty() {
                return Err(Error::Schema("attribute names must be non-empty".into()));
            }
            if !names.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute name '{}'", attr.name)));
            }
            if attr.values.is_empty() {
                return Err(Error::Schema(format!(
                    "attribute '{}' has an empty vocabulary",
                    attr.name
                )));
            }
            if attr.values.len() > u16::MAX as usize {
                return Err(Error::Schema(format!("attribute '{}' has too many values", attr.name)));
            }
            let mut seen = HashSet::new();
            for v in &attr.values {
                if !seen.insert(v.as_str()) {
                    return Err(Error::Schema(format!(
                        "attribute '{}' lists value '{}' twice",
                        attr.name, v
                    )));
                }
            }
        }
        Ok(StreamSchema {
            response,
            environmental,
        })
    }

    pub fn response(&self) -> &[Attribute] {
        &self.response
    }

    pub fn environmental(&self) -> &[Attribute] {
        &self.environmental
    }

    pub fn response_index(&self, name: &str) -> Option<usize> {
        self.response.iter().position(|a| a.name == name)
    }

    pub fn env_index(&self, name: &str) -> Option<usize> {
        self.environmental.iter().position(|a| a.name == name)
    }

    /// Vocabulary sizes of the response attributes, in declaration order.
    pub fn response_cardinalities(&self) -> Vec<usize> {
        self.response.iter().map(Attribute::cardinality).collect()
    }
}

/// Whether a record was observed or added by an outbreak simulation.
///
/// Provenance only lives in memory; it is not part of any file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RecordOrigin {
    #[default]
    Observed,
    Injected,
}

/// One patient: a value index per response attribute.
#[derive(Debug, Clone)]
pub struct PatientRecord {
    values: Box<[u16]>,
    origin: RecordOrigin,
}

impl PartialEq for PatientRecord {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Eq for PatientRecord {}

impl std::hash::Hash for PatientRecord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.values.hash(state);
    }
}

impl PatientRecord {
    /// Builds a record from value indices in response-attribute order.
    pub fn new(schema: &StreamSchema, values: Vec<u16>) -> Result<Self> {
        if values.len() != schema.response.len() {
            return Err(Error::SchemaMismatch(format!(
                "record has {} values, schema has {} response attributes",
                values.len(),
                schema.response.len()
            )));
        }
        for (attr, &v) in schema.response.iter().zip(&values) {
            if v as usize >= attr.cardinality() {
                return Err(Error::SchemaMismatch(format!(
                    "value index {v} out of range for attribute '{}'",
                    attr.name
                )));
            }
        }
        Ok(PatientRecord {
            values: values.into_boxed_slice(),
            origin: RecordOrigin::Observed,
        })
    }

    /// Builds a record from `(attribute, value)` names. Every response
    /// attribute must be given exactly once.
    pub fn from_named(schema: &StreamSchema, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut values = vec![None; schema.response.len()];
        for &(name, value) in pairs {
            let a = schema
                .response_index(name)
                .ok_or_else(|| Error::SchemaMismatch(format!("unknown response attribute '{name}'")))?;
            let v = schema.response[a]
                .value_index(value)
                .ok_or_else(|| Error::SchemaMismatch(format!("unknown value '{value}' for attribute '{name}'")))?;
            if values[a].replace(v).is_some() {
                return Err(Error::SchemaMismatch(format!("attribute '{name}' given twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| Error::SchemaMismatch(format!("missing value for '{}'", schema.response[i].name)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PatientRecord {
            values: values.into_boxed_slice(),
            origin: RecordOrigin::Observed,
        })
    }

    pub(crate) fn from_indices_unchecked(values: Vec<u16>, origin: RecordOrigin) -> Self {
        PatientRecord {
            values: values.into_boxed_slice(),
            origin,
        }
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn value_name<'s>(&self, schema: &'s StreamSchema, attr: usize) -> &'s str {
        &schema.response[attr].values[self.values[attr] as usize]
    }

    pub fn origin(&self) -> RecordOrigin {
        self.origin
    }

    pub fn with_origin(mut self, origin: RecordOrigin) -> Self {
        self.origin = origin;
        self
    }
}

/// One time slot: its records C(t) and environmental setting e(t).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlot {
    pub index: usize,
    pub records: Vec<PatientRecord>,
    pub env: Vec<u16>,
}

impl TimeSlot {
    pub fn new(index: usize, records: Vec<PatientRecord>, env: Vec<u16>) -> Self {
        TimeSlot { index, records, env }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn validate(&self, schema: &StreamSchema) -> Result<()> {
        if self.env.len() != schema.environmental.len() {
            return Err(Error::Stream(format!(
                "slot {} has {} environmental values, schema declares {}",
                self.index,
                self.env.len(),
                schema.environmental.len()
            )));
        }
        for (attr, &v) in schema.environmental.iter().zip(&self.env) {
            if v as usize >= attr.cardinality() {
                return Err(Error::Stream(format!(
                    "slot {}: environmental value index {v} out of range for '{}'",
                    self.index, attr.name
                )));
            }
        }
        let n = schema.response.len();
        for r in &self.records {
            if r.values.len() != n
                || r.values
                    .iter()
                    .zip(&schema.response)
                    .any(|(&v, a)| v as usize >= a.cardinality())
            {
                return Err(Error::Stream(format!(
                    "slot {}: record does not conform to the schema",
                    self.index
                )));
            }
        }
        Ok(())
    }
}

/// A labelled outbreak interval `[start, start + length)` in absolute slot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutbreakLabel {
    pub start: usize,
    pub length: usize,
}

impl OutbreakLabel {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.length
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.range().contains(&slot)
    }
}

/// An ordered sequence of time slots with a training prefix and outbreak labels.
///
/// Slots are shared copy-on-write, so replicated streams that differ in a few
/// slots only pay for the slots that differ.
#[derive(Debug, Clone)]
pub struct DataStream {
    schema: Arc<StreamSchema>,
    slots: Vec<Arc<TimeSlot>>,
    train_len: usize,
    outbreaks: Vec<OutbreakLabel>,
}

impl DataStream {
    pub fn new(
        schema: Arc<StreamSchema>,
        slots: Vec<TimeSlot>,
        train_len: usize,
        outbreaks: Vec<OutbreakLabel>,
    ) -> Result<Self> {
        let stream = DataStream {
            schema,
            slots: slots.into_iter().map(Arc::new).collect(),
            train_len,
            outbreaks,
        };
        stream.validate()?;
        Ok(stream)
    }

    fn validate(&self) -> Result<()> {
        let len = self.slots.len();
        for (i, slot) in self.slots.iter().enumerate() {
            if slot.index != i {
                return Err(Error::Stream(format!(
                    "slot indices must be contiguous from 0: position {i} holds slot {}",
                    slot.index
                )));
            }
            slot.validate(&self.schema)?;
        }
        if self.train_len == 0 || self.train_len >= len {
            return Err(Error::Stream(format!(
                "training length {} must satisfy 0 < train_len < {len}",
                self.train_len
            )));
        }
        validate_labels(&self.outbreaks, self.train_len, len)
    }

    pub fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<StreamSchema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, t: usize) -> &TimeSlot {
        &self.slots[t]
    }

    pub fn slots(&self) -> impl ExactSizeIterator<Item = &TimeSlot> + '_ {
        self.slots.iter().map(|s| s.as_ref())
    }

    pub(crate) fn slot_mut(&mut self, t: usize) -> &mut TimeSlot {
        Arc::make_mut(&mut self.slots[t])
    }

    pub fn train_len(&self) -> usize {
        self.train_len
    }

    pub fn test_range(&self) -> Range<usize> {
        self.train_len..self.slots.len()
    }

    pub fn test_len(&self) -> usize {
        self.slots.len() - self.train_len
    }

    pub fn outbreaks(&self) -> &[OutbreakLabel] {
        &self.outbreaks
    }

    pub fn with_outbreaks(mut self, outbreaks: Vec<OutbreakLabel>) -> Result<Self> {
        validate_labels(&outbreaks, self.train_len, self.slots.len())?;
        self.outbreaks = outbreaks;
        Ok(self)
    }

    pub(crate) fn push_outbreak(&mut self, label: OutbreakLabel) -> Result<()> {
        let mut labels = self.outbreaks.clone();
        labels.push(label);
        validate_labels(&labels, self.train_len, self.slots.len())?;
        self.outbreaks = labels;
        Ok(())
    }

    /// Number of records per slot.
    pub fn slot_totals(&self) -> Vec<u32> {
        self.slots.iter().map(|s| s.records.len() as u32).collect()
    }

    /// The stream with every injected record removed and outbreak labels kept.
    pub fn without_injected(&self) -> DataStream {
        let mut out = self.clone();
        for slot in out.slots.iter_mut() {
            if slot.records.iter().any(|r| r.origin == RecordOrigin::Injected) {
                Arc::make_mut(slot)
                    .records
                    .retain(|r| r.origin != RecordOrigin::Injected);
            }
        }
        out
    }
}

fn validate_labels(labels: &[OutbreakLabel], train_len: usize, len: usize) -> Result<()> {
    let mut sorted: Vec<_> = labels.to_vec();
    sorted.sort_by_key(|l| l.start);
    for l in &sorted {
        if l.length == 0 {
            return Err(Error::Stream(format!("outbreak at {} has zero length", l.start)));
        }
        if l.start < train_len || l.start + l.length > len {
            return Err(Error::Stream(format!(
                "outbreak [{}, {}) must lie inside the test part [{train_len}, {len})",
                l.start,
                l.start + l.length
            )));
        }
    }
    for w in sorted.windows(2) {
        if w[0].start + w[0].length > w[1].start {
            return Err(Error::Stream(format!(
                "outbreaks starting at {} and {} overlap",
                w[0].start, w[1].start
            )));
        }
    }
    Ok(())
}

/// One `attribute = value` condition, by response-attribute and value index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub attr: usize,
    pub value: u16,
}

/// A conjunction of conditions on distinct response attributes.
///
/// Conditions are kept sorted by attribute index, so equality is
/// insensitive to the order they were given in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    conditions: Vec<Condition>,
}

impl Syndrome {
    pub fn new(mut conditions: Vec<Condition>) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::Syndrome("a syndrome needs at least one condition".into()));
        }
        conditions.sort();
        if conditions.windows(2).any(|w| w[0].attr == w[1].attr) {
            return Err(Error::Syndrome("conditions must refer to distinct attributes".into()));
        }
        Ok(Syndrome { conditions })
    }

    pub fn single(attr: usize, value: u16) -> Self {
        Syndrome {
            conditions: vec![Condition { attr, value }],
        }
    }

    /// Builds a syndrome from named conditions, validated against the schema.
    pub fn from_named(schema: &StreamSchema, pairs: &[(&str, &str)]) -> Result<Self> {
        let conditions = pairs
            .iter()
            .map(|&(name, value)| {
                let attr = schema
                    .response_index(name)
                    .ok_or_else(|| Error::SchemaMismatch(format!("'{name}' is not a response attribute")))?;
                let value = schema.response[attr]
                    .value_index(value)
                    .ok_or_else(|| Error::SchemaMismatch(format!("unknown value '{value}' for attribute '{name}'")))?;
                Ok(Condition { attr, value })
            })
            .collect::<Result<Vec<_>>>()?;
        Syndrome::new(conditions)
    }

    /// Parses the `attr=value&attr=value` label form.
    pub fn parse(schema: &StreamSchema, label: &str) -> Result<Self> {
        let pairs = label
            .split('&')
            .map(|c| {
                c.split_once('=')
                    .map(|(a, v)| (a.trim(), v.trim()))
                    .ok_or_else(|| Error::Syndrome(format!("malformed condition '{c}' in '{label}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Syndrome::from_named(schema, &pairs)
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn order(&self) -> usize {
        self.conditions.len()
    }

    /// True when every condition of `self` is also a condition of `other`.
    pub fn is_subset_of(&self, other: &Syndrome) -> bool {
        self.conditions.iter().all(|c| other.conditions.contains(c))
    }

    /// Checks that every condition refers to a valid attribute and value.
    pub fn validate(&self, schema: &StreamSchema) -> Result<()> {
        for c in &self.conditions {
            let attr = schema
                .response
                .get(c.attr)
                .ok_or_else(|| Error::SchemaMismatch(format!("syndrome refers to unknown attribute #{}", c.attr)))?;
            if c.value as usize >= attr.cardinality() {
                return Err(Error::SchemaMismatch(format!(
                    "syndrome value #{} out of range for '{}'",
                    c.value, attr.name
                )));
            }
        }
        Ok(())
    }

    /// True iff the record satisfies every condition.
    pub fn matches(&self, record: &PatientRecord) -> Result<bool> {
        let mut all = true;
        for c in &self.conditions {
            let v = record.values.get(c.attr).ok_or_else(|| {
                Error::SchemaMismatch(format!(
                    "syndrome refers to attribute #{} but the record has {} values",
                    c.attr,
                    record.values.len()
                ))
            })?;
            all &= *v == c.value;
        }
        Ok(all)
    }

    /// `attr=value&attr=value` with conditions sorted by attribute name.
    pub fn label(&self, schema: &StreamSchema) -> String {
        let mut parts: Vec<(&str, &str)> = self
            .conditions
            .iter()
            .map(|c| {
                let a = &schema.response[c.attr];
                (a.name.as_str(), a.values[c.value as usize].as_str())
            })
            .collect();
        parts.sort();
        parts
            .iter()
            .map(|(a, v)| format!("{a}={v}"))
            .collect::<Vec<_>>()
            .join("&")
    }

    pub fn display<'a>(&'a self, schema: &'a StreamSchema) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Syndrome, &'a StreamSchema);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.label(self.1))
            }
        }
        D(self, schema)
    }
}

/// True iff `record` satisfies every condition of `syndrome`.
pub fn record_matches(record: &PatientRecord, syndrome: &Syndrome) -> Result<bool> {
    syndrome.matches(record)
}
