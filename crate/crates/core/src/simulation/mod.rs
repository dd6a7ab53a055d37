//! Synthetic streams and outbreak simulation.
//!
//! [`GeneratorSpec`] describes a categorical Bayesian network over the
//! response attributes, driven by environmental processes; [`Generator`]
//! samples streams from it. Outbreaks are either boosted (extra generated
//! records over several slots) or injected (copies of existing records in a
//! single slot).

mod generator;
mod outbreak;
mod spec;

pub use generator::{generate_stream, Generator};
pub(crate) use outbreak::inject_with_candidates;
pub use outbreak::{
    inject_outbreak, injection_candidates, simulate_outbreak_boost, OutbreakInfo, OutbreakMode, OutbreakSpec,
    RareQuota, DEFAULT_BOOST_DURATION, DEFAULT_BOOST_MAGNITUDE, DEFAULT_INJECT_DURATION, DEFAULT_MAX_TARGET_SHARE,
};
pub use spec::{build_table, CptSpec, CycleStep, EnvProcess, GeneratorSpec};
