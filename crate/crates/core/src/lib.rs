//! Non-specific syndromic surveillance.
//!
//! A stream of categorical patient records is grouped into time slots. Every
//! low-order syndrome (a conjunction of `attribute=value` conditions) is
//! counted per slot, each test slot is scored for outbreak likelihood by one
//! of several detectors, and detectors are compared by the partial area under
//! the AMOC curve (FAR-averaged detection delay for a false alarm rate below
//! a cap, 5% by default).
//!
//! Module map:
//!
//! - [`model`] / [`io`]: schemas, records, slots, streams and their on-disk formats.
//! - [`syndrome`]: syndrome enumeration, per-slot counting and count matrices.
//! - [`stats`]: tail probabilities, 2×2 contingency tests, permutation correction.
//! - [`detectors`]: syndrome-based benchmarks, WSARE 2.0/2.5, global benchmarks
//!   and the anomaly-detector adapter.
//! - [`simulation`]: synthetic stream generation and outbreak simulation.
//! - [`evaluation`]: AMOC curves, partial AAUC and corpus averaging.
//! - [`experiment`]: config-driven runs over corpora.

pub mod corpus;
pub mod detectors;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod model;
pub mod seed;
pub mod simulation;
pub mod stats;
pub mod syndrome;

pub use error::{Error, Result};
pub use model::{Attribute, DataStream, OutbreakLabel, PatientRecord, RecordOrigin, StreamSchema, Syndrome, TimeSlot};
