//! Detectors map the history of a stream and its current slot to an anomaly
//! score, higher meaning more likely to be inside an outbreak.
//!
//! Every detector is refitted from scratch on slots `[0, t)` to score slot
//! `t`; nothing at or after `t + 1` is ever read.

pub mod anomaly;
mod benchmark;
mod global;
mod wsare;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataStream, Syndrome};
use crate::stats::contingency::TestChoice;
use crate::stats::tail::TailKind;
use crate::syndrome::{build_count_matrix, enumerate_for_stream, CountMatrix, EnumerationMode};

pub use anomaly::{AnomalyBackend, AnomalyModel, BackendRegistry, MahalanobisDiag};
pub use wsare::WsareVersion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    StatGaussian,
    StatPoisson,
    StatNegbinomial,
    Wsare20,
    Wsare25,
    ControlChart,
    MovingAverage,
    LinearRegression,
    AdaptedAnomaly,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 9] = [
        DetectorKind::StatGaussian,
        DetectorKind::StatPoisson,
        DetectorKind::StatNegbinomial,
        DetectorKind::Wsare20,
        DetectorKind::Wsare25,
        DetectorKind::ControlChart,
        DetectorKind::MovingAverage,
        DetectorKind::LinearRegression,
        DetectorKind::AdaptedAnomaly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::StatGaussian => "stat_gaussian",
            DetectorKind::StatPoisson => "stat_poisson",
            DetectorKind::StatNegbinomial => "stat_negbinomial",
            DetectorKind::Wsare20 => "wsare20",
            DetectorKind::Wsare25 => "wsare25",
            DetectorKind::ControlChart => "control_chart",
            DetectorKind::MovingAverage => "moving_average",
            DetectorKind::LinearRegression => "linear_regression",
            DetectorKind::AdaptedAnomaly => "adapted_anomaly",
        }
    }

    /// Whether the detector monitors syndromes (and so depends on `max_order`).
    pub fn uses_syndromes(self) -> bool {
        !matches!(
            self,
            DetectorKind::ControlChart | DetectorKind::MovingAverage | DetectorKind::LinearRegression
        )
    }

    pub fn is_wsare(self) -> bool {
        matches!(self, DetectorKind::Wsare20 | DetectorKind::Wsare25)
    }

    fn tail_kind(self) -> Option<TailKind> {
        match self {
            DetectorKind::StatGaussian => Some(TailKind::Gaussian),
            DetectorKind::StatPoisson => Some(TailKind::Poisson),
            DetectorKind::StatNegbinomial => Some(TailKind::NegBinomial),
            _ => None,
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let known: Vec<_> = DetectorKind::ALL.iter().map(|k| k.as_str()).collect();
            Error::Config(format!("unknown detector '{s}' (known: {})", known.join(", ")))
        })
    }
}

/// How per-syndrome p-values of one slot are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    MinP,
    Permutation,
}

fn default_max_order() -> usize {
    2
}
fn default_reps() -> usize {
    1000
}
fn default_lags() -> Vec<usize> {
    vec![35, 42, 49, 56]
}
fn default_window() -> usize {
    7
}
fn default_backend() -> String {
    MahalanobisDiag::NAME.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    /// Optional display name; defaults to [`DetectorConfig::label`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default)]
    pub enumeration: EnumerationMode,
    #[serde(default)]
    pub aggregation: Aggregation,
    #[serde(default = "default_reps")]
    pub permutation_reps: usize,
    #[serde(default)]
    pub test: TestChoice,
    #[serde(default = "default_lags")]
    pub wsare20_lags: Vec<usize>,
    #[serde(default = "default_window")]
    pub moving_average_window: usize,
    #[serde(default = "default_backend")]
    pub anomaly_backend: String,
    #[serde(default)]
    pub rng_seed: u64,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        DetectorConfig {
            kind,
            name: None,
            max_order: default_max_order(),
            enumeration: EnumerationMode::Full,
            aggregation: Aggregation::MinP,
            permutation_reps: default_reps(),
            test: TestChoice::Auto,
            wsare20_lags: default_lags(),
            moving_average_window: default_window(),
            anomaly_backend: default_backend(),
            rng_seed: 0,
        }
    }

    pub fn with_max_order(mut self, order: usize) -> Self {
        self.max_order = order;
        self
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// `name`, or the kind with a `_perm` suffix for permutation aggregation.
    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None if self.aggregation == Aggregation::Permutation => format!("{}_perm", self.kind),
            None => self.kind.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.aggregation == Aggregation::Permutation && !self.kind.is_wsare() {
            return Err(Error::Config(format!(
                "permutation aggregation is only defined for WSARE, not {}",
                self.kind
            )));
        }
        if !(1..=2).contains(&self.max_order) {
            return Err(Error::Config(format!("max_order {} must be 1 or 2", self.max_order)));
        }
        if self.wsare20_lags.is_empty() || self.wsare20_lags.contains(&0) {
            return Err(Error::Config("wsare20_lags must be non-empty and positive".into()));
        }
        if self.permutation_reps == 0 {
            return Err(Error::Config("permutation_reps must be at least 1".into()));
        }
        if self.moving_average_window == 0 {
            return Err(Error::Config("moving_average_window must be at least 1".into()));
        }
        Ok(())
    }

    /// Fewest history slots the detector needs before its first test slot.
    pub fn min_history(&self) -> usize {
        match self.kind {
            DetectorKind::Wsare20 => self.wsare20_lags.iter().copied().max().unwrap_or(1),
            DetectorKind::Wsare25 => 1,
            _ => 2,
        }
    }
}

/// One anomaly score per test slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    /// Absolute index of the first scored slot (the training length).
    pub offset: usize,
    pub scores: Vec<f64>,
    /// For p-value detectors: column of the first syndrome attaining the
    /// minimum p-value at each slot.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attribution: Vec<Option<usize>>,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `slot,score` CSV with absolute slot indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slot", "score"])?;
        for (i, s) in self.scores.iter().enumerate() {
            w.write_record([(self.offset + i).to_string(), s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<scores>", e))?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

/// Score of one slot plus the syndrome that drove it, when there is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotScore {
    pub score: f64,
    pub syndrome: Option<usize>,
}

impl SlotScore {
    fn plain(score: f64) -> Self {
        SlotScore { score, syndrome: None }
    }
}

/// Counts of every monitored syndrome for slots `[0, upto)` of a stream.
///
/// Scoring slot `t` requires `t < upto` and reads only rows `0..=t`.
pub struct ScoringContext<'a> {
    stream: &'a DataStream,
    matrix: CountMatrix,
    registry: &'a BackendRegistry,
}

impl<'a> ScoringContext<'a> {
    pub fn new(
        stream: &'a DataStream,
        syndromes: &[Syndrome],
        upto: usize,
        registry: &'a BackendRegistry,
    ) -> Result<Self> {
        Ok(ScoringContext {
            stream,
            matrix: build_count_matrix(stream, syndromes, upto)?,
            registry,
        })
    }

    pub fn matrix(&self) -> &CountMatrix {
        &self.matrix
    }

    pub fn syndromes(&self) -> &[Syndrome] {
        self.matrix.syndromes()
    }

    fn check_slot(&self, t: usize) -> Result<()> {
        if t >= self.matrix.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "slot {t} is outside the counted range [0, {})",
                self.matrix.n_rows()
            )));
        }
        if t < 2 {
            return Err(Error::InsufficientHistory(format!(
                "slot {t} has fewer than 2 prior slots"
            )));
        }
        Ok(())
    }

    /// Scores slot `t` with the configured detector.
    pub fn score(&self, config: &DetectorConfig, t: usize) -> Result<SlotScore> {
        if let Some(kind) = config.kind.tail_kind() {
            return self.stat_benchmark(kind, t);
        }
        match config.kind {
            DetectorKind::Wsare20 => self.wsare(WsareVersion::V20, t, config),
            DetectorKind::Wsare25 => self.wsare(WsareVersion::V25, t, config),
            DetectorKind::ControlChart | DetectorKind::MovingAverage | DetectorKind::LinearRegression => {
                self.global(config.kind, t, config).map(SlotScore::plain)
            }
            DetectorKind::AdaptedAnomaly => self.adapted_anomaly(t, &config.anomaly_backend).map(SlotScore::plain),
            _ => unreachable!("tail kinds handled above"),
        }
    }
}

/// Syndrome-based statistical benchmark score of slot `t`.
pub fn score_stat_benchmark(kind: TailKind, stream: &DataStream, t: usize, syndromes: &[Syndrome]) -> Result<f64> {
    let registry = BackendRegistry::default();
    let ctx = ScoringContext::new(stream, syndromes, t + 1, &registry)?;
    Ok(ctx.stat_benchmark(kind, t)?.score)
}

/// WSARE 2.0 / 2.5 score of slot `t`.
pub fn score_wsare(
    version: WsareVersion,
    stream: &DataStream,
    t: usize,
    syndromes: &[Syndrome],
    config: &DetectorConfig,
) -> Result<f64> {
    let registry = BackendRegistry::default();
    let ctx = ScoringContext::new(stream, syndromes, t + 1, &registry)?;
    Ok(ctx.wsare(version, t, config)?.score)
}

/// Control chart, moving average or linear regression score of slot `t`.
pub fn score_global(kind: DetectorKind, stream: &DataStream, t: usize, config: &DetectorConfig) -> Result<f64> {
    let registry = BackendRegistry::default();
    let ctx = ScoringContext::new(stream, &[], t + 1, &registry)?;
    ctx.global(kind, t, config)
}

/// Score of slot `t` from an anomaly backend fitted on the syndrome-count rows of `[0, t)`.
pub fn score_adapted_anomaly(
    stream: &DataStream,
    t: usize,
    syndromes: &[Syndrome],
    backend: &str,
    registry: &BackendRegistry,
) -> Result<f64> {
    let ctx = ScoringContext::new(stream, syndromes, t + 1, registry)?;
    ctx.adapted_anomaly(t, backend)
}

/// Scores every test slot, enumerating syndromes per the config.
///
/// Observed-mode enumeration uses the training part only.
pub fn run_detector(config: &DetectorConfig, stream: &DataStream) -> Result<ScoreSeries> {
    let syndromes = if config.kind.uses_syndromes() {
        enumerate_for_stream(stream, config.max_order, config.enumeration)?
    } else {
        Vec::new()
    };
    run_detector_with(config, stream, &syndromes, &BackendRegistry::default())
}

/// Scores every test slot against an explicit syndrome list and backend registry.
pub fn run_detector_with(
    config: &DetectorConfig,
    stream: &DataStream,
    syndromes: &[Syndrome],
    registry: &BackendRegistry,
) -> Result<ScoreSeries> {
    let ctx = ScoringContext::new(stream, syndromes, stream.len(), registry)?;
    ctx.run(config)
}

impl ScoringContext<'_> {
    /// Scores every test slot of the context's stream. The context may be
    /// shared by several detectors that monitor the same syndromes.
    pub fn run(&self, config: &DetectorConfig) -> Result<ScoreSeries> {
        config.validate()?;
        let stream = self.stream;
        if self.matrix.n_rows() != stream.len() {
            return Err(Error::InvalidArgument("context does not cover the whole stream".into()));
        }
        let need = config.min_history().max(2);
        if stream.train_len() < need {
            return Err(Error::InsufficientHistory(format!(
                "{} needs at least {need} training slots, stream has {}",
                config.kind,
                stream.train_len()
            )));
        }
        let scored: Vec<SlotScore> = stream
            .test_range()
            .into_par_iter()
            .map(|t| {
                let s = self.score(config, t).map_err(|e| Error::AtSlot {
                    slot: t,
                    source: Box::new(e),
                })?;
                if !s.score.is_finite() {
                    return Err(Error::AtSlot {
                        slot: t,
                        source: Box::new(Error::InvalidArgument(format!("non-finite score {}", s.score))),
                    });
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let attribution = if config.kind.tail_kind().is_some() || config.kind.is_wsare() {
            scored.iter().map(|s| s.syndrome).collect()
        } else {
            Vec::new()
        };
        Ok(ScoreSeries {
            offset: stream.train_len(),
            scores: scored.into_iter().map(|s| s.score).collect(),
            attribution,
        })
    }
}
