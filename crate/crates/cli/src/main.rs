//! `nss`: generate corpora, inject outbreaks, score streams and run experiments.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nss_core::corpus::{generate_corpus, inject_corpus, replicate_and_inject, CorpusDir};
use nss_core::detectors::{run_detector, Aggregation, DetectorConfig, DetectorKind};
use nss_core::experiment::{format_summary, run_experiment, ExperimentConfig, GenerateSource};
use nss_core::io::{load_stream_dir, write_atomic, LoadOptions, SCHEMA_FILE};
use nss_core::simulation::{GeneratorSpec, OutbreakSpec};
use nss_core::syndrome::EnumerationMode;

#[derive(Parser)]
#[command(name = "nss", version, about = "Non-specific syndromic surveillance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of streams with one simulated outbreak each.
    Generate(GenerateArgs),
    /// Inject one outbreak per stream into existing data.
    Inject(InjectArgs),
    /// Run an experiment from a JSON config.
    Run(RunArgs),
    /// Score one stream with one detector and write the score series CSV.
    Score(ScoreArgs),
    /// Print a built-in generator spec as JSON.
    DefaultSpec {
        #[arg(value_enum, default_value = "synthetic")]
        which: BuiltinSpec,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinSpec {
    Synthetic,
    Emergency,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Boost,
    Inject,
}

#[derive(Args)]
struct OutbreakArgs {
    /// Target syndrome, e.g. `symptom=rash` or `mts=vomiting&age=child`.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    duration: Option<usize>,
    /// Mean extra records per outbreak slot.
    #[arg(long)]
    magnitude: Option<f64>,
    /// Boost: largest training share of a randomly drawn target.
    #[arg(long)]
    max_target_share: Option<f64>,
}

impl OutbreakArgs {
    fn apply(&self, mut spec: OutbreakSpec) -> OutbreakSpec {
        spec.target = self.target.clone();
        spec.duration = self.duration;
        spec.magnitude = self.magnitude;
        spec.max_target_share = self.max_target_share;
        spec
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec JSON, or `synthetic` / `emergency`.
    #[arg(long, default_value = "synthetic")]
    spec: String,
    /// Number of streams.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "boost")]
    mode: ModeArg,
    #[command(flatten)]
    outbreak: OutbreakArgs,
}

#[derive(Args)]
struct InjectArgs {
    /// A stream directory (replicated) or a corpus directory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Most outbreaks allowed on rare syndromes.
    #[arg(long)]
    rare_quota: Option<usize>,
    /// Replicas of a single input stream.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    replicate: u64,
    /// Training slots of the input stream(s); half of each stream by default.
    #[arg(long)]
    train_len: Option<usize>,
    #[command(flatten)]
    outbreak: OutbreakArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, env = "NSS_JOBS")]
    jobs: Option<usize>,
    /// Write one AMOC curve CSV per cell and stream.
    #[arg(long)]
    curves: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumerationArg {
    Full,
    Observed,
}

#[derive(Args)]
struct ScoreArgs {
    /// Stream directory with schema.json and records.csv.
    #[arg(long)]
    stream: PathBuf,
    /// Detector name, e.g. `stat_negbinomial` or `wsare25`.
    #[arg(long)]
    detector: String,
    #[arg(long, default_value_t = 2)]
    max_order: usize,
    #[arg(long, value_enum, default_value = "full")]
    enumeration: EnumerationArg,
    /// Use permutation-corrected aggregation (WSARE only).
    #[arg(long)]
    permutation: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_len: Option<usize>,
    /// Output CSV; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn load_spec(r: &str) -> Result<GeneratorSpec> {
    let source = GenerateSource {
        spec: r.to_string(),
        n: 1,
        outbreak: OutbreakSpec::boost(),
    };
    source
        .load_spec()
        .with_context(|| format!("loading generator spec '{r}'"))
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = load_spec(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.rng_seed = seed;
    }
    let base = match a.mode {
        ModeArg::Boost => OutbreakSpec::boost(),
        ModeArg::Inject => OutbreakSpec::inject(),
    };
    let corpus = generate_corpus(&spec, a.n as usize, &a.outbreak.apply(base))?;
    corpus.write_dir(&a.out)?;
    log::info!("wrote {} streams to {}", corpus.streams.len(), a.out.display());
    Ok(())
}

fn cmd_inject(a: InjectArgs) -> Result<()> {
    let opts = LoadOptions { train_len: a.train_len };
    let outbreak = a.outbreak.apply(OutbreakSpec::inject());
    let corpus = if a.input.join(SCHEMA_FILE).exists() {
        let base = load_stream_dir(&a.input, opts)?;
        replicate_and_inject(&base, a.replicate as usize, a.seed, &outbreak, a.rare_quota)?
    } else {
        let dir = CorpusDir::open(&a.input)?;
        let bases = (0..dir.len())
            .map(|k| {
                let (_, path, train) = &dir.entries[k];
                load_stream_dir(
                    path,
                    LoadOptions {
                        train_len: a.train_len.or(*train),
                    },
                )
            })
            .collect::<nss_core::Result<Vec<_>>>()?;
        inject_corpus(&bases, a.seed, &outbreak, a.rare_quota)?
    };
    corpus.write_dir(&a.out)?;
    let m = &corpus.manifest;
    log::info!(
        "wrote {} streams to {} ({} pair targets, {} rare)",
        m.n_streams,
        a.out.display(),
        m.pair_condition,
        m.n_rare.unwrap_or(0)
    );
    Ok(())
}

/// Returns whether at least one cell produced a result.
fn cmd_run(a: RunArgs) -> Result<bool> {
    let mut config = ExperimentConfig::from_file(&a.config)?;
    if let Some(j) = a.jobs {
        config.jobs = Some(j);
    }
    if a.curves {
        config.curves = true;
    }
    if let Some(d) = a.output_dir {
        config.output_dir = d;
    }
    if let Some(s) = a.seed {
        config.master_seed = s;
    }
    let outcome = run_experiment(&config)?;
    if outcome.resumed > 0 {
        log::info!("{} streams taken from earlier progress", outcome.resumed);
    }
    print!("{}", format_summary(&outcome.results));
    Ok(!outcome.all_failed())
}

fn cmd_score(a: ScoreArgs) -> Result<()> {
    let kind: DetectorKind = a.detector.parse()?;
    let mut config = DetectorConfig::new(kind).with_max_order(a.max_order).with_seed(a.seed);
    config.enumeration = match a.enumeration {
        EnumerationArg::Full => EnumerationMode::Full,
        EnumerationArg::Observed => EnumerationMode::Observed,
    };
    if a.permutation {
        config = config.with_aggregation(Aggregation::Permutation);
    }
    let stream = load_stream_dir(&a.stream, LoadOptions { train_len: a.train_len })?;
    let scores = run_detector(&config, &stream)?;
    let csv = scores.to_csv()?;
    if a.out == Path::new("-") {
        std::io::stdout().write_all(&csv)?;
    } else {
        if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        write_atomic(&a.out, &csv)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| true),
        Command::Inject(a) => cmd_inject(a).map(|_| true),
        Command::Run(a) => cmd_run(a),
        Command::Score(a) => cmd_score(a).map(|_| true),
        Command::DefaultSpec { which } => (|| {
            let spec = match which {
                BuiltinSpec::Synthetic => GeneratorSpec::synthetic_default(),
                BuiltinSpec::Emergency => GeneratorSpec::emergency_default(),
            };
            println!("{}", serde_json::to_string_pretty(&spec)?);
            Ok(true)
        })(),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: every cell failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
