//! Corpora: sets of streams with one simulated outbreak each, plus a
//! manifest describing every outbreak.
//!
//! Layout on disk:
//!
//! ```text
//! corpus/manifest.json
//! corpus/stream_<i>/{schema.json, records.csv, labels.json}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_stream_dir, read_json, write_json, write_stream_dir, LoadOptions, SCHEMA_FILE};
use crate::model::DataStream;
use crate::seed::derive_seed;
use crate::simulation::{
    injection_candidates, simulate_outbreak_boost, Generator, GeneratorSpec, OutbreakInfo, OutbreakMode, OutbreakSpec,
    RareQuota,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEntry {
    pub index: usize,
    pub dir: String,
    pub seed: u64,
    pub train_len: usize,
    #[serde(flatten)]
    pub outbreak: OutbreakInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub mode: OutbreakMode,
    pub master_seed: u64,
    pub n_streams: usize,
    /// Outbreaks whose target has one condition.
    pub single_condition: usize,
    /// Outbreaks whose target has two conditions.
    pub pair_condition: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_quota: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rare: Option<usize>,
    /// Which slots the injected size's standard deviation is computed on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_std_source: Option<String>,
    pub streams: Vec<StreamEntry>,
}

impl CorpusManifest {
    fn new(mode: OutbreakMode, master_seed: u64, streams: Vec<StreamEntry>) -> Self {
        let count = |o: usize| streams.iter().filter(|s| s.outbreak.order == o).count();
        CorpusManifest {
            mode,
            master_seed,
            n_streams: streams.len(),
            single_condition: count(1),
            pair_condition: count(2),
            rare_quota: None,
            n_rare: None,
            size_std_source: None,
            streams,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    pub streams: Vec<DataStream>,
}

pub fn stream_dir_name(i: usize) -> String {
    format!("stream_{i}")
}

impl Corpus {
    /// Writes every stream, then the manifest.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (entry, stream) in self.manifest.streams.iter().zip(&self.streams) {
            write_stream_dir(stream, &dir.join(&entry.dir))?;
        }
        write_json(&dir.join(MANIFEST_FILE), &self.manifest)
    }
}

/// Generates `n` streams from `spec` (master seed `spec.rng_seed`) and adds
/// one outbreak to each. Stream `i` uses seed `derive(master, i)`.
pub fn generate_corpus(spec: &GeneratorSpec, n: usize, outbreak: &OutbreakSpec) -> Result<Corpus> {
    if n == 0 {
        return Err(Error::InvalidArgument("a corpus needs at least one stream".into()));
    }
    outbreak.validate()?;
    let generator = Generator::new(spec.clone())?;
    let master = spec.rng_seed;
    let seeds: Vec<u64> = (0..n).map(|i| derive_seed(master, &[i as u64])).collect();
    match outbreak.mode {
        OutbreakMode::Boost => {
            let made: Vec<(DataStream, StreamEntry)> = seeds
                .par_iter()
                .enumerate()
                .map(|(i, &seed)| {
                    let base = generator.generate(seed)?;
                    let spec = OutbreakSpec {
                        rng_seed: derive_seed(seed, &[2]),
                        ..outbreak.clone()
                    };
                    let (stream, info) = simulate_outbreak_boost(&base, &spec, &generator)?;
                    let entry = StreamEntry {
                        index: i,
                        dir: stream_dir_name(i),
                        seed,
                        train_len: stream.train_len(),
                        outbreak: info,
                    };
                    Ok((stream, entry))
                })
                .collect::<Result<_>>()?;
            let (streams, entries): (Vec<_>, Vec<_>) = made.into_iter().unzip();
            Ok(Corpus {
                manifest: CorpusManifest::new(OutbreakMode::Boost, master, entries),
                streams,
            })
        }
        OutbreakMode::Inject => {
            let bases = seeds
                .par_iter()
                .map(|&s| generator.generate(s))
                .collect::<Result<Vec<_>>>()?;
            inject_streams(&bases, master, outbreak, None, |i| seeds[i])
        }
    }
}

/// Injects one outbreak into each of `bases`. At most `rare_quota` targets
/// may be rare.
pub fn inject_corpus(
    bases: &[DataStream],
    master_seed: u64,
    outbreak: &OutbreakSpec,
    rare_quota: Option<usize>,
) -> Result<Corpus> {
    inject_streams(bases, master_seed, outbreak, rare_quota, |i| {
        derive_seed(master_seed, &[i as u64])
    })
}

/// Injects into `n` replicas of one stream; the replicas share unmodified slots.
pub fn replicate_and_inject(
    base: &DataStream,
    n: usize,
    master_seed: u64,
    outbreak: &OutbreakSpec,
    rare_quota: Option<usize>,
) -> Result<Corpus> {
    let bases = vec![base.clone(); n];
    inject_corpus(&bases, master_seed, outbreak, rare_quota)
}

fn inject_streams(
    bases: &[DataStream],
    master_seed: u64,
    outbreak: &OutbreakSpec,
    rare_quota: Option<usize>,
    seed_of: impl Fn(usize) -> u64,
) -> Result<Corpus> {
    if bases.is_empty() {
        return Err(Error::InvalidArgument("a corpus needs at least one stream".into()));
    }
    outbreak.validate()?;
    let mut quota = RareQuota::new(rare_quota);
    let mut streams = Vec::with_capacity(bases.len());
    let mut entries = Vec::with_capacity(bases.len());
    // replicas share their slots, so candidates are computed once per distinct base
    let mut candidates = Vec::new();
    for (i, base) in bases.iter().enumerate() {
        if i == 0 || !same_slots(&bases[i - 1], base) {
            candidates = injection_candidates(base)?;
        }
        let seed = seed_of(i);
        let spec = OutbreakSpec {
            rng_seed: derive_seed(seed, &[3]),
            ..outbreak.clone()
        };
        let (stream, info) = crate::simulation::inject_with_candidates(base, &spec, &mut quota, &candidates)
            .map_err(|e| Error::Outbreak(format!("stream {i}: {e}")))?;
        entries.push(StreamEntry {
            index: i,
            dir: stream_dir_name(i),
            seed,
            train_len: stream.train_len(),
            outbreak: info,
        });
        streams.push(stream);
    }
    let mut manifest = CorpusManifest::new(OutbreakMode::Inject, master_seed, entries);
    manifest.rare_quota = rare_quota;
    manifest.n_rare = Some(quota.used());
    manifest.size_std_source = Some(
        if outbreak.magnitude.is_some() {
            "fixed"
        } else {
            "training"
        }
        .to_string(),
    );
    Ok(Corpus { manifest, streams })
}

fn same_slots(a: &DataStream, b: &DataStream) -> bool {
    a.len() == b.len() && a.train_len() == b.train_len() && a.slots().zip(b.slots()).all(|(x, y)| std::ptr::eq(x, y))
}

pub fn read_manifest(dir: &Path) -> Result<Option<CorpusManifest>> {
    let path = dir.join(MANIFEST_FILE);
    if path.exists() {
        read_json(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// A corpus on disk, loaded one stream at a time.
#[derive(Debug, Clone)]
pub struct CorpusDir {
    pub root: PathBuf,
    pub manifest: Option<CorpusManifest>,
    /// `(index, directory, training length)` per stream.
    pub entries: Vec<(usize, PathBuf, Option<usize>)>,
}

impl CorpusDir {
    /// Opens `root`, listing streams from the manifest or, without one, every
    /// `stream_<i>` subdirectory.
    pub fn open(root: &Path) -> Result<Self> {
        let manifest = read_manifest(root)?;
        let entries = match &manifest {
            Some(m) => m
                .streams
                .iter()
                .map(|s| (s.index, root.join(&s.dir), Some(s.train_len)))
                .collect(),
            None => {
                let mut found = Vec::new();
                for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
                    let entry = entry.map_err(|e| Error::io(root, e))?;
                    let name = entry.file_name().to_string_lossy().into_owned();
                    if let Some(i) = name.strip_prefix("stream_").and_then(|s| s.parse::<usize>().ok()) {
                        if entry.path().join(SCHEMA_FILE).exists() {
                            found.push((i, entry.path(), None));
                        }
                    }
                }
                found.sort_by_key(|e| e.0);
                found
            }
        };
        if entries.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} contains no streams",
                root.display()
            )));
        }
        Ok(CorpusDir {
            root: root.to_path_buf(),
            manifest,
            entries,
        })
    }

    pub fn name(&self) -> String {
        self.root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.root.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads the `k`-th listed stream.
    pub fn load(&self, k: usize) -> Result<DataStream> {
        let (_, dir, train_len) = &self.entries[k];
        load_stream_dir(dir, LoadOptions { train_len: *train_len })
    }
}
