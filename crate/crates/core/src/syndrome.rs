//! Syndrome enumeration and counting.
//!
//! A [`SyndromeCounter`] maps each record to the syndrome columns it
//! satisfies through per-attribute and per-attribute-pair lookup tables, so
//! counting a slot costs O(records × m²) regardless of how many syndromes are
//! monitored.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Condition, DataStream, PatientRecord, StreamSchema, Syndrome, TimeSlot};

/// Which syndromes of the full cross-product are monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMode {
    /// Every value combination of every attribute subset.
    #[default]
    Full,
    /// Only syndromes seen at least once in the supplied history.
    Observed,
}

/// Enumerates all syndromes with at most `max_order` conditions.
///
/// Order is by number of conditions, then attribute declaration order, then
/// vocabulary order. In observed mode, syndromes with zero count over
/// `history` are dropped.
pub fn enumerate_syndromes(
    schema: &StreamSchema,
    max_order: usize,
    mode: EnumerationMode,
    history: Option<&[&TimeSlot]>,
) -> Result<Vec<Syndrome>> {
    if max_order < 1 {
        return Err(Error::InvalidArgument("max_order must be at least 1".into()));
    }
    if max_order > 2 {
        return Err(Error::InvalidArgument(format!(
            "max_order {max_order} is not supported (1 or 2)"
        )));
    }
    let cards = schema.response_cardinalities();
    let mut out = Vec::new();
    for (a, &ca) in cards.iter().enumerate() {
        for v in 0..ca {
            out.push(Syndrome::single(a, v as u16));
        }
    }
    if max_order >= 2 {
        for a in 0..cards.len() {
            for b in a + 1..cards.len() {
                for va in 0..cards[a] {
                    for vb in 0..cards[b] {
                        out.push(
                            Syndrome::new(vec![
                                Condition {
                                    attr: a,
                                    value: va as u16,
                                },
                                Condition {
                                    attr: b,
                                    value: vb as u16,
                                },
                            ])
                            .expect("distinct attributes"),
                        );
                    }
                }
            }
        }
    }
    match mode {
        EnumerationMode::Full => Ok(out),
        EnumerationMode::Observed => {
            let history =
                history.ok_or_else(|| Error::InvalidArgument("observed enumeration requires a history".into()))?;
            let counter = SyndromeCounter::new(schema, &out)?;
            let mut totals = vec![0u64; out.len()];
            let mut buf = vec![0u32; out.len()];
            for slot in history {
                counter.count_into(&slot.records, &mut buf);
                for (t, &c) in totals.iter_mut().zip(&buf) {
                    *t += c as u64;
                }
            }
            Ok(out
                .into_iter()
                .zip(totals)
                .filter(|(_, t)| *t > 0)
                .map(|(s, _)| s)
                .collect())
        }
    }
}

/// Enumerates syndromes for a stream, using the training part as history in observed mode.
pub fn enumerate_for_stream(stream: &DataStream, max_order: usize, mode: EnumerationMode) -> Result<Vec<Syndrome>> {
    let history: Vec<&TimeSlot> = stream.slots().take(stream.train_len()).collect();
    enumerate_syndromes(stream.schema(), max_order, mode, Some(&history))
}

const NONE: u32 = u32::MAX;

struct PairTable {
    a: usize,
    b: usize,
    card_b: usize,
    cols: Vec<u32>,
}

/// Precomputed lookup from records to the syndrome columns they satisfy.
pub struct SyndromeCounter {
    n_cols: usize,
    n_attrs: usize,
    singles: Vec<Vec<u32>>,
    pairs: Vec<PairTable>,
    higher: Vec<(u32, Syndrome)>,
}

impl SyndromeCounter {
    pub fn new(schema: &StreamSchema, syndromes: &[Syndrome]) -> Result<Self> {
        let cards = schema.response_cardinalities();
        let mut singles: Vec<Vec<u32>> = cards.iter().map(|&c| vec![NONE; c]).collect();
        let mut pairs: Vec<PairTable> = Vec::new();
        let mut higher = Vec::new();
        for (col, s) in syndromes.iter().enumerate() {
            s.validate(schema)?;
            let col = col as u32;
            match s.conditions() {
                [c] => set_once(&mut singles[c.attr][c.value as usize], col, s, schema)?,
                [c1, c2] => {
                    let idx = match pairs.iter().position(|p| p.a == c1.attr && p.b == c2.attr) {
                        Some(i) => i,
                        None => {
                            pairs.push(PairTable {
                                a: c1.attr,
                                b: c2.attr,
                                card_b: cards[c2.attr],
                                cols: vec![NONE; cards[c1.attr] * cards[c2.attr]],
                            });
                            pairs.len() - 1
                        }
                    };
                    let p = &mut pairs[idx];
                    let slot = c1.value as usize * p.card_b + c2.value as usize;
                    set_once(&mut p.cols[slot], col, s, schema)?;
                }
                _ => higher.push((col, s.clone())),
            }
        }
        Ok(SyndromeCounter {
            n_cols: syndromes.len(),
            n_attrs: cards.len(),
            singles,
            pairs,
            higher,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Calls `f` with every column the record satisfies.
    #[inline]
    pub fn for_each_match(&self, record: &PatientRecord, mut f: impl FnMut(usize)) {
        let v = record.values();
        debug_assert_eq!(v.len(), self.n_attrs);
        for (a, table) in self.singles.iter().enumerate() {
            let c = table[v[a] as usize];
            if c != NONE {
                f(c as usize);
            }
        }
        for p in &self.pairs {
            let c = p.cols[v[p.a] as usize * p.card_b + v[p.b] as usize];
            if c != NONE {
                f(c as usize);
            }
        }
        for (c, s) in &self.higher {
            if s.conditions().iter().all(|cond| v[cond.attr] == cond.value) {
                f(*c as usize);
            }
        }
    }

    /// Column indices satisfied by a record.
    pub fn matched_columns(&self, record: &PatientRecord) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_match(record, |c| out.push(c as u32));
        out
    }

    /// Overwrites `counts` with the per-column counts over `records`.
    pub fn count_into(&self, records: &[PatientRecord], counts: &mut [u32]) {
        assert_eq!(counts.len(), self.n_cols);
        counts.fill(0);
        for r in records {
            self.for_each_match(r, |c| counts[c] += 1);
        }
    }

    pub fn count(&self, records: &[PatientRecord]) -> Vec<u32> {
        let mut out = vec![0; self.n_cols];
        self.count_into(records, &mut out);
        out
    }
}

fn set_once(cell: &mut u32, col: u32, s: &Syndrome, schema: &StreamSchema) -> Result<()> {
    if *cell != NONE {
        return Err(Error::Syndrome(format!(
            "syndrome '{}' is listed twice",
            s.label(schema)
        )));
    }
    *cell = col;
    Ok(())
}

/// Counts of each syndrome among the records of one slot.
pub fn count_slot(schema: &StreamSchema, slot: &TimeSlot, syndromes: &[Syndrome]) -> Result<Vec<u32>> {
    Ok(SyndromeCounter::new(schema, syndromes)?.count(&slot.records))
}

/// Count history of a single syndrome over slots `[0, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeCountSeries {
    pub syndrome: Syndrome,
    pub counts: Vec<u32>,
}

/// Per-slot syndrome counts: one row per slot, one column per syndrome.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    syndromes: Vec<Syndrome>,
    data: Vec<u32>,
    slot_totals: Vec<u32>,
}

impl CountMatrix {
    pub fn syndromes(&self) -> &[Syndrome] {
        &self.syndromes
    }

    pub fn n_rows(&self) -> usize {
        self.slot_totals.len()
    }

    pub fn n_cols(&self) -> usize {
        self.syndromes.len()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let n = self.syndromes.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        let n = self.syndromes.len().max(1);
        self.data.chunks(n).take(self.n_rows())
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.data[row * self.syndromes.len() + col]
    }

    pub fn slot_totals(&self) -> &[u32] {
        &self.slot_totals
    }

    /// Count series H_s of column `col` over the first `upto` rows.
    pub fn series(&self, col: usize, upto: usize) -> SyndromeCountSeries {
        SyndromeCountSeries {
            syndrome: self.syndromes[col].clone(),
            counts: (0..upto).map(|i| self.get(i, col)).collect(),
        }
    }

    /// `slot,total,<syndrome labels...>` CSV.
    pub fn write_csv<W: Write>(&self, schema: &StreamSchema, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["slot".to_string(), "total".to_string()];
        header.extend(self.syndromes.iter().map(|s| s.label(schema)));
        w.write_record(&header)?;
        for (i, row) in self.rows().enumerate() {
            let mut rec = vec![i.to_string(), self.slot_totals[i].to_string()];
            rec.extend(row.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<count matrix>", e))?;
        Ok(())
    }
}

/// Count matrix over slots `[0, upto)` of a stream.
pub fn build_count_matrix(stream: &DataStream, syndromes: &[Syndrome], upto: usize) -> Result<CountMatrix> {
    if upto > stream.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot count {upto} slots of a {}-slot stream",
            stream.len()
        )));
    }
    let counter = SyndromeCounter::new(stream.schema(), syndromes)?;
    let n = syndromes.len();
    let mut data = vec![0u32; upto * n];
    let mut slot_totals = Vec::with_capacity(upto);
    for (i, slot) in stream.slots().take(upto).enumerate() {
        counter.count_into(&slot.records, &mut data[i * n..(i + 1) * n]);
        slot_totals.push(slot.records.len() as u32);
    }
    Ok(CountMatrix {
        syndromes: syndromes.to_vec(),
        data,
        slot_totals,
    })
}
