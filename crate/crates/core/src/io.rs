//! On-disk formats for schemas, records and outbreak labels.
//!
//! - schema: JSON `{"response": [{"name", "values"}], "environmental": [...]}`
//! - records: CSV `slot,<env attrs...>,<response attrs...>`, one row per patient
//! - labels: JSON array of `{"start", "length"}`
//!
//! A records row whose response columns are all empty is a slot marker: it
//! carries the environmental setting of a slot that has no patients. The
//! writer emits one for every empty slot so streams round-trip exactly,
//! trailing empty slots included.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{DataStream, OutbreakLabel, PatientRecord, StreamSchema, TimeSlot};

pub const SCHEMA_FILE: &str = "schema.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const LABELS_FILE: &str = "labels.json";

/// Options that are not carried by the three stream files.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Number of leading training slots. Defaults to half the stream length.
    pub train_len: Option<usize>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_schema(path: &Path) -> Result<StreamSchema> {
    read_json(path)
}

pub fn write_schema(path: &Path, schema: &StreamSchema) -> Result<()> {
    write_json(path, schema)
}

pub fn read_labels(path: &Path) -> Result<Vec<OutbreakLabel>> {
    read_json(path)
}

pub fn write_labels(path: &Path, labels: &[OutbreakLabel]) -> Result<()> {
    write_json(path, &labels)
}

/// Loads a stream from its schema, records and optional labels files.
pub fn load_stream(
    schema_path: &Path,
    records_path: &Path,
    labels_path: Option<&Path>,
    opts: LoadOptions,
) -> Result<DataStream> {
    let schema = Arc::new(read_schema(schema_path)?);
    let file = fs::File::open(records_path).map_err(|e| Error::io(records_path, e))?;
    let slots = parse_records(&schema, file)?;
    let labels = match labels_path {
        Some(p) => read_labels(p)?,
        None => Vec::new(),
    };
    let train_len = opts.train_len.unwrap_or(slots.len() / 2);
    DataStream::new(schema, slots, train_len, labels)
}

/// Loads `<dir>/schema.json`, `<dir>/records.csv` and `<dir>/labels.json` (if present).
pub fn load_stream_dir(dir: &Path, opts: LoadOptions) -> Result<DataStream> {
    let labels = dir.join(LABELS_FILE);
    load_stream(
        &dir.join(SCHEMA_FILE),
        &dir.join(RECORDS_FILE),
        labels.exists().then_some(labels.as_path()),
        opts,
    )
}

pub fn write_stream(stream: &DataStream, schema_path: &Path, records_path: &Path, labels_path: &Path) -> Result<()> {
    write_schema(schema_path, stream.schema())?;
    write_atomic(records_path, &records_csv(stream)?)?;
    write_labels(labels_path, stream.outbreaks())
}

pub fn write_stream_dir(stream: &DataStream, dir: &Path) -> Result<()> {
    write_stream(
        stream,
        &dir.join(SCHEMA_FILE),
        &dir.join(RECORDS_FILE),
        &dir.join(LABELS_FILE),
    )
}

/// Serializes the records of a stream in canonical column order.
pub fn records_csv(stream: &DataStream) -> Result<Vec<u8>> {
    let schema = stream.schema();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["slot".to_string()];
    header.extend(schema.environmental().iter().map(|a| a.name.clone()));
    header.extend(schema.response().iter().map(|a| a.name.clone()));
    w.write_record(&header)?;

    let n_resp = schema.response().len();
    for slot in stream.slots() {
        let mut row: Vec<&str> = Vec::with_capacity(header.len());
        let index = slot.index.to_string();
        let env: Vec<&str> = schema
            .environmental()
            .iter()
            .zip(&slot.env)
            .map(|(a, &v)| a.values[v as usize].as_str())
            .collect();
        if slot.records.is_empty() {
            row.clear();
            row.push(&index);
            row.extend(&env);
            row.extend(std::iter::repeat_n("", n_resp));
            w.write_record(&row)?;
            continue;
        }
        for r in &slot.records {
            row.clear();
            row.push(&index);
            row.extend(&env);
            row.extend((0..n_resp).map(|a| r.value_name(schema, a)));
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| Error::Stream(format!("csv buffer: {e}")))
}

enum Column {
    Slot,
    Env(usize),
    Response(usize),
}

/// Parses a records CSV into contiguous slots, materializing empty slots for
/// missing indices.
pub fn parse_records<R: std::io::Read>(schema: &StreamSchema, reader: R) -> Result<Vec<TimeSlot>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = Vec::with_capacity(headers.len());
    let mut seen_slot = false;
    let mut seen_env = vec![false; schema.environmental().len()];
    let mut seen_resp = vec![false; schema.response().len()];
    for h in headers.iter() {
        let col = if h == "slot" {
            seen_slot = true;
            Column::Slot
        } else if let Some(i) = schema.env_index(h) {
            seen_env[i] = true;
            Column::Env(i)
        } else if let Some(i) = schema.response_index(h) {
            seen_resp[i] = true;
            Column::Response(i)
        } else {
            return Err(Error::SchemaMismatch(format!(
                "records column '{h}' is not in the schema"
            )));
        };
        columns.push(col);
    }
    if !seen_slot {
        return Err(Error::SchemaMismatch("records file has no 'slot' column".into()));
    }
    if let Some(i) = seen_env.iter().position(|s| !s) {
        return Err(Error::SchemaMismatch(format!(
            "records file lacks environmental column '{}'",
            schema.environmental()[i].name
        )));
    }
    if let Some(i) = seen_resp.iter().position(|s| !s) {
        return Err(Error::SchemaMismatch(format!(
            "records file lacks response column '{}'",
            schema.response()[i].name
        )));
    }

    // (env, records) per slot index, filled as rows arrive
    let mut slots: Vec<Option<(Vec<u16>, Vec<PatientRecord>)>> = Vec::new();
    let n_env = schema.environmental().len();
    let n_resp = schema.response().len();

    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let mut slot_idx = None;
        let mut env = vec![0u16; n_env];
        let mut values = vec![0u16; n_resp];
        let mut blank_responses = 0;
        for (field, col) in rec.iter().zip(&columns) {
            match *col {
                Column::Slot => {
                    let t: i64 = field.trim().parse().map_err(|_| Error::Record {
                        row,
                        message: format!("slot index '{field}' is not an integer"),
                    })?;
                    if t < 0 {
                        return Err(Error::Record {
                            row,
                            message: format!("slot index {t} is negative"),
                        });
                    }
                    slot_idx = Some(t as usize);
                }
                Column::Env(a) => {
                    let attr = &schema.environmental()[a];
                    env[a] = attr.value_index(field).ok_or_else(|| Error::UnknownValue {
                        attribute: attr.name.clone(),
                        value: field.to_string(),
                        row,
                    })?;
                }
                Column::Response(a) => {
                    if field.is_empty() {
                        blank_responses += 1;
                        continue;
                    }
                    let attr = &schema.response()[a];
                    values[a] = attr.value_index(field).ok_or_else(|| Error::UnknownValue {
                        attribute: attr.name.clone(),
                        value: field.to_string(),
                        row,
                    })?;
                }
            }
        }
        let t = slot_idx.ok_or_else(|| Error::Record {
            row,
            message: "missing slot index".into(),
        })?;
        let marker = blank_responses == n_resp;
        if !marker && blank_responses > 0 {
            return Err(Error::Record {
                row,
                message: "response values may only be all empty (slot marker) or all present".into(),
            });
        }
        if t >= slots.len() {
            slots.resize_with(t + 1, || None);
        }
        match &mut slots[t] {
            Some((slot_env, records)) => {
                if *slot_env != env {
                    return Err(Error::Record {
                        row,
                        message: format!("environmental values differ from earlier rows of slot {t}"),
                    });
                }
                if !marker {
                    records.push(PatientRecord::new(schema, values)?);
                }
            }
            empty @ None => {
                let records = if marker {
                    Vec::new()
                } else {
                    vec![PatientRecord::new(schema, values)?]
                };
                *empty = Some((env, records));
            }
        }
    }

    if slots.is_empty() {
        return Err(Error::Stream("records file contains no rows".into()));
    }
    let first_env = slots
        .iter()
        .flatten()
        .next()
        .map(|(e, _)| e.clone())
        .unwrap_or_default();
    let mut prev_env = first_env;
    let mut out = Vec::with_capacity(slots.len());
    for (t, slot) in slots.into_iter().enumerate() {
        match slot {
            Some((env, records)) => {
                prev_env = env.clone();
                out.push(TimeSlot::new(t, records, env));
            }
            None => {
                log::warn!("slot {t} has no rows; carrying the environmental setting of the previous slot");
                out.push(TimeSlot::new(t, Vec::new(), prev_env.clone()));
            }
        }
    }
    Ok(out)
}
