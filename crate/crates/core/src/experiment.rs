//! Config-driven experiment runs: every (detector, max order) cell over every
//! stream of a corpus, with per-stream resume markers.
//!
//! Output directory layout:
//!
//! ```text
//! effective_config.json   config with every default resolved
//! results.csv             one row per cell, ascending by mean AAUC
//! per_stream.csv          one row per cell and stream
//! curves/<cell>/stream_<i>.csv   AMOC curves (`curves: true` only)
//! corpus/                 generated corpus (generated sources only)
//! progress/               per-stream markers, removed when the config changes
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{generate_corpus, CorpusDir};
use crate::detectors::{BackendRegistry, DetectorConfig, DetectorKind, ScoringContext};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_scores, sort_results, write_per_stream_csv, write_results_csv, CellResult, StreamOutcome, DEFAULT_FAR_CAP,
};
use crate::io::{read_json, write_atomic, write_json};
use crate::model::DataStream;
use crate::seed::derive_seed;
use crate::simulation::{GeneratorSpec, OutbreakMode, OutbreakSpec};
use crate::syndrome::{enumerate_for_stream, EnumerationMode};

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";
pub const RESULTS_FILE: &str = "results.csv";
pub const PER_STREAM_FILE: &str = "per_stream.csv";
const PROGRESS_DIR: &str = "progress";
const PROGRESS_CONFIG: &str = "config.json";

/// Where the streams come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusSource {
    Path(PathBuf),
    Generate { generate: GenerateSource },
}

/// A corpus generated into `<output_dir>/corpus` from the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSource {
    /// `synthetic` (default), `emergency`, or a path to a generator spec JSON.
    #[serde(default = "default_spec_ref")]
    pub spec: String,
    pub n: usize,
    #[serde(default = "OutbreakSpec::boost")]
    pub outbreak: OutbreakSpec,
}

fn default_spec_ref() -> String {
    "synthetic".into()
}

impl GenerateSource {
    pub fn load_spec(&self) -> Result<GeneratorSpec> {
        match self.spec.as_str() {
            "synthetic" => Ok(GeneratorSpec::synthetic_default()),
            "emergency" => Ok(GeneratorSpec::emergency_default()),
            path => read_json(Path::new(path)),
        }
    }
}

/// A detector given by name only or as a full config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DetectorEntry {
    Kind(DetectorKind),
    Config(DetectorConfig),
}

impl DetectorEntry {
    pub fn config(&self) -> DetectorConfig {
        match self {
            DetectorEntry::Kind(k) => DetectorConfig::new(*k),
            DetectorEntry::Config(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationChoice {
    /// Full for boosted corpora, observed for injected ones.
    #[default]
    Auto,
    Full,
    Observed,
}

fn default_orders() -> Vec<usize> {
    vec![1, 2]
}
fn default_far_cap() -> f64 {
    DEFAULT_FAR_CAP
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    pub detectors: Vec<DetectorEntry>,
    /// Orders run for syndrome-based detectors; each gives its own cell.
    #[serde(default = "default_orders")]
    pub max_orders: Vec<usize>,
    #[serde(default = "default_far_cap")]
    pub far_cap: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    /// Overrides the enumeration mode of every detector.
    #[serde(default)]
    pub enumeration: EnumerationChoice,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub curves: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.detectors.is_empty() {
            return Err(Error::Config("at least one detector is required".into()));
        }
        if self.max_orders.is_empty() || self.max_orders.iter().any(|o| !(1..=2).contains(o)) {
            return Err(Error::Config(format!(
                "max_orders {:?} must be a non-empty subset of {{1, 2}}",
                self.max_orders
            )));
        }
        if !(self.far_cap > 0.0 && self.far_cap <= 1.0) {
            return Err(Error::Config(format!("far_cap {} must lie in (0, 1]", self.far_cap)));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if let CorpusSource::Generate { generate } = &self.corpus {
            if generate.n == 0 {
                return Err(Error::Config("generate.n must be at least 1".into()));
            }
            generate.outbreak.validate()?;
        }
        for d in &self.detectors {
            d.config().validate()?;
        }
        Ok(())
    }

    /// The config with detectors expanded to full configs, orders deduplicated
    /// and the enumeration mode and detector seeds fixed.
    pub fn resolve(&self, corpus_mode: Option<OutbreakMode>) -> Result<ExperimentConfig> {
        self.validate()?;
        let mode = match self.enumeration {
            EnumerationChoice::Auto => match corpus_mode {
                Some(OutbreakMode::Inject) => EnumerationChoice::Observed,
                _ => EnumerationChoice::Full,
            },
            other => other,
        };
        let enumeration = match mode {
            EnumerationChoice::Observed => EnumerationMode::Observed,
            _ => EnumerationMode::Full,
        };
        let mut orders = self.max_orders.clone();
        orders.sort_unstable();
        orders.dedup();
        let detectors = self
            .detectors
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut c = d.config();
                c.enumeration = enumeration;
                if c.rng_seed == 0 {
                    c.rng_seed = derive_seed(self.master_seed, &[i as u64]);
                }
                DetectorEntry::Config(c)
            })
            .collect();
        Ok(ExperimentConfig {
            detectors,
            max_orders: orders,
            enumeration: mode,
            ..self.clone()
        })
    }

    /// One config per cell: syndrome-based detectors once per order.
    pub fn cells(&self) -> Vec<DetectorConfig> {
        let mut out = Vec::new();
        for d in &self.detectors {
            let c = d.config();
            if c.kind.uses_syndromes() {
                for &o in &self.max_orders {
                    out.push(c.clone().with_max_order(o));
                }
            } else {
                out.push(c);
            }
        }
        out
    }
}

fn cell_key(c: &DetectorConfig) -> String {
    if c.kind.uses_syndromes() {
        format!("{}_s{}", c.label(), c.max_order)
    } else {
        c.label()
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub results: Vec<CellResult>,
    pub output_dir: PathBuf,
    /// Streams taken from progress markers instead of being rescored.
    pub resumed: usize,
}

impl ExperimentOutcome {
    pub fn all_failed(&self) -> bool {
        self.results.iter().all(|r| r.n_streams == 0)
    }
}

/// Per-stream marker: outcome per cell key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StreamMarker {
    index: usize,
    cells: BTreeMap<String, StreamOutcome>,
}

fn open_corpus(config: &ExperimentConfig) -> Result<CorpusDir> {
    match &config.corpus {
        CorpusSource::Path(p) => CorpusDir::open(p),
        CorpusSource::Generate { generate } => {
            let dir = config.output_dir.join("corpus");
            let spec = GeneratorSpec {
                rng_seed: config.master_seed,
                ..generate.load_spec()?
            };
            log::info!("generating {} streams into {}", generate.n, dir.display());
            let corpus = generate_corpus(&spec, generate.n, &generate.outbreak)?;
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            }
            corpus.write_dir(&dir)?;
            CorpusDir::open(&dir)
        }
    }
}

/// Prepares `progress/`, clearing it when it was written under another
/// config. The thread count does not matter.
fn prepare_progress(dir: &Path, effective: &ExperimentConfig) -> Result<()> {
    let effective = &ExperimentConfig {
        jobs: None,
        ..effective.clone()
    };
    let cfg_path = dir.join(PROGRESS_CONFIG);
    if dir.exists() {
        let same = read_json::<ExperimentConfig>(&cfg_path)
            .map(|c| &c == effective)
            .unwrap_or(false);
        if !same {
            log::info!("config changed; discarding progress in {}", dir.display());
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&cfg_path, effective)
}

fn marker_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("stream_{index}.json"))
}

fn score_stream(
    stream: &DataStream,
    index: usize,
    cells: &[DetectorConfig],
    config: &ExperimentConfig,
    registry: &BackendRegistry,
) -> Result<BTreeMap<String, StreamOutcome>> {
    if stream.outbreaks().is_empty() {
        return Err(Error::Evaluation("stream has no outbreak labels".into()));
    }
    let mut out = BTreeMap::new();
    // Cells sharing a syndrome set share one count matrix.
    let mut groups: BTreeMap<(usize, bool), Vec<&DetectorConfig>> = BTreeMap::new();
    for c in cells {
        let order = if c.kind.uses_syndromes() { c.max_order } else { 0 };
        groups
            .entry((order, c.enumeration == EnumerationMode::Observed))
            .or_default()
            .push(c);
    }
    for ((order, observed), group) in groups {
        let syndromes = if order == 0 {
            Ok(Vec::new())
        } else {
            let mode = if observed {
                EnumerationMode::Observed
            } else {
                EnumerationMode::Full
            };
            enumerate_for_stream(stream, order, mode)
        };
        let ctx = syndromes.and_then(|s| ScoringContext::new(stream, &s, stream.len(), registry));
        for c in group {
            let key = cell_key(c);
            let res = ctx
                .as_ref()
                .map_err(|e| Error::Evaluation(e.to_string()))
                .and_then(|ctx| {
                    let scores = ctx.run(c)?;
                    evaluate_scores(&scores, stream.outbreaks(), config.far_cap)
                });
            let outcome = match res {
                Ok(r) => {
                    if config.curves {
                        let dir = config.output_dir.join("curves").join(&key);
                        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                        write_atomic(&dir.join(format!("stream_{index}.csv")), &r.curve.to_csv()?)?;
                    }
                    StreamOutcome {
                        stream: index,
                        aauc: Some(r.aauc),
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("{key} on stream {index}: {e}");
                    StreamOutcome {
                        stream: index,
                        aauc: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            out.insert(key, outcome);
        }
    }
    Ok(out)
}

/// Runs the experiment and writes its outputs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = config.jobs {
            b = b.num_threads(j);
        }
        b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?
    };
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let corpus = open_corpus(config)?;
    let effective = config.resolve(corpus.manifest.as_ref().map(|m| m.mode))?;
    write_json(&out_dir.join(EFFECTIVE_CONFIG_FILE), &effective)?;
    let progress = out_dir.join(PROGRESS_DIR);
    prepare_progress(&progress, &effective)?;

    let cells = effective.cells();
    let registry = BackendRegistry::default();
    let corpus_name = corpus.name();
    log::info!("{} cells over {} streams of {corpus_name}", cells.len(), corpus.len());

    let markers: Vec<(StreamMarker, bool)> = (0..corpus.len())
        .into_par_iter()
        .map(|k| {
            let index = corpus.entries[k].0;
            let path = marker_path(&progress, index);
            if let Ok(m) = read_json::<StreamMarker>(&path) {
                if m.index == index && cells.iter().all(|c| m.cells.contains_key(&cell_key(c))) {
                    return Ok((m, true));
                }
            }
            let scored = corpus
                .load(k)
                .and_then(|stream| score_stream(&stream, index, &cells, &effective, &registry));
            let cells_out = match scored {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("stream {index}: {e}");
                    cells
                        .iter()
                        .map(|c| {
                            let o = StreamOutcome {
                                stream: index,
                                aauc: None,
                                error: Some(e.to_string()),
                            };
                            (cell_key(c), o)
                        })
                        .collect()
                }
            };
            let marker = StreamMarker {
                index,
                cells: cells_out,
            };
            write_json(&path, &marker)?;
            log::debug!("stream {index} done");
            Ok((marker, false))
        })
        .collect::<Result<_>>()?;

    let resumed = markers.iter().filter(|(_, r)| *r).count();
    let mut results: Vec<CellResult> = cells
        .iter()
        .map(|c| {
            let key = cell_key(c);
            let outcomes = markers.iter().filter_map(|(m, _)| m.cells.get(&key).cloned()).collect();
            let order = c.kind.uses_syndromes().then_some(c.max_order);
            CellResult::from_outcomes(c.label(), order, corpus_name.clone(), outcomes)
        })
        .collect();
    sort_results(&mut results);

    let mut buf = Vec::new();
    write_results_csv(&results, &mut buf)?;
    write_atomic(&out_dir.join(RESULTS_FILE), &buf)?;
    let mut buf = Vec::new();
    write_per_stream_csv(&results, &mut buf)?;
    write_atomic(&out_dir.join(PER_STREAM_FILE), &buf)?;

    Ok(ExperimentOutcome {
        results,
        output_dir: out_dir.clone(),
        resumed,
    })
}

/// Plain-text table of cell results, in the given order.
pub fn format_summary(results: &[CellResult]) -> String {
    let width = results.iter().map(|r| r.detector.len()).max().unwrap_or(8).max(8);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>5}  {:>10}  {:>7}  {:>8}",
        "detector", "order", "mean_aauc5", "streams", "failures"
    );
    for r in results {
        let mean = if r.mean_aauc.is_nan() {
            "-".to_string()
        } else {
            format!("{:.3}", r.mean_aauc)
        };
        let _ = writeln!(
            s,
            "{:<width$}  {:>5}  {:>10}  {:>7}  {:>8}",
            r.detector,
            r.order_label(),
            mean,
            r.n_streams,
            r.n_failures
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detectors_accept_names_and_configs() {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "corpus": "data/corpus",
            "detectors": ["stat_gaussian", {"kind": "control_chart"}, {"kind": "wsare20", "aggregation": "permutation"}]
        }))
        .unwrap();
        assert_eq!(cfg.corpus, CorpusSource::Path("data/corpus".into()));
        assert_eq!(cfg.far_cap, 0.05);
        let cells = cfg.resolve(None).unwrap().cells();
        let keys: Vec<_> = cells.iter().map(cell_key).collect();
        assert_eq!(
            keys,
            [
                "stat_gaussian_s1",
                "stat_gaussian_s2",
                "control_chart",
                "wsare20_perm_s1",
                "wsare20_perm_s2"
            ]
        );
    }

    #[test]
    fn auto_enumeration_follows_corpus_mode() {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "corpus": {"generate": {"n": 2}},
            "detectors": ["stat_poisson"],
            "max_orders": [2, 1, 2]
        }))
        .unwrap();
        let boost = cfg.resolve(Some(OutbreakMode::Boost)).unwrap();
        assert_eq!(boost.max_orders, [1, 2]);
        assert_eq!(boost.cells()[0].enumeration, EnumerationMode::Full);
        let inject = cfg.resolve(Some(OutbreakMode::Inject)).unwrap();
        assert_eq!(inject.cells()[0].enumeration, EnumerationMode::Observed);
        assert_ne!(inject.cells()[0].rng_seed, 0);
        // resolving twice changes nothing
        assert_eq!(inject.resolve(Some(OutbreakMode::Inject)).unwrap(), inject);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "corpus": "c", "detectors": ["stat_poisson"]
        }))
        .unwrap();
        assert!(base.validate().is_ok());
        for bad in [
            ExperimentConfig {
                detectors: vec![],
                ..base.clone()
            },
            ExperimentConfig {
                max_orders: vec![3],
                ..base.clone()
            },
            ExperimentConfig {
                far_cap: 0.0,
                ..base.clone()
            },
            ExperimentConfig {
                jobs: Some(0),
                ..base.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }
}
