use nss_core::corpus::{generate_corpus, replicate_and_inject, stream_dir_name, CorpusDir};
use nss_core::detectors::{run_detector, DetectorConfig, DetectorKind};
use nss_core::evaluation::{evaluate_corpus, evaluate_scores};
use nss_core::experiment::{run_experiment, CorpusSource, ExperimentConfig};
use nss_core::io::{load_stream_dir, records_csv, write_stream_dir, LoadOptions};
use nss_core::simulation::{Generator, GeneratorSpec, OutbreakMode, OutbreakSpec};
use nss_core::syndrome::EnumerationMode;

fn small(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        stream_len: 150,
        train_len: 75,
        rng_seed: seed,
        ..GeneratorSpec::synthetic_default()
    }
}

#[test]
fn corpus_survives_a_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_corpus(&small(3), 3, &OutbreakSpec::boost()).unwrap();
    corpus.write_dir(dir.path()).unwrap();
    let back = CorpusDir::open(dir.path()).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back.manifest.as_ref(), Some(&corpus.manifest));
    for (k, original) in corpus.streams.iter().enumerate() {
        let loaded = back.load(k).unwrap();
        assert_eq!(loaded.train_len(), 75);
        assert_eq!(loaded.outbreaks(), original.outbreaks());
        assert_eq!(records_csv(&loaded).unwrap(), records_csv(original).unwrap());
        let cfg = DetectorConfig::new(DetectorKind::StatPoisson).with_max_order(1);
        assert_eq!(
            run_detector(&cfg, &loaded).unwrap(),
            run_detector(&cfg, original).unwrap()
        );
    }
}

#[test]
fn boosted_records_match_their_target() {
    let corpus = generate_corpus(&small(4), 4, &OutbreakSpec::boost()).unwrap();
    for (stream, entry) in corpus.streams.iter().zip(&corpus.manifest.streams) {
        let target = nss_core::Syndrome::parse(stream.schema(), &entry.outbreak.syndrome).unwrap();
        let label = stream.outbreaks()[0];
        assert_eq!(label.start, entry.outbreak.start);
        assert!(label.start >= stream.train_len());
        let injected: Vec<_> = stream
            .slots()
            .flat_map(|s| s.records.iter().map(move |r| (s.index, r)))
            .filter(|(_, r)| r.origin() == nss_core::RecordOrigin::Injected)
            .collect();
        assert_eq!(injected.len(), entry.outbreak.size);
        for (t, r) in injected {
            assert!(label.contains(t));
            assert!(target.matches(r).unwrap());
        }
    }
}

#[test]
fn injected_corpus_marks_rare_targets_within_quota() {
    let base = Generator::new(GeneratorSpec {
        stream_len: 120,
        train_len: 60,
        ..GeneratorSpec::emergency_default()
    })
    .unwrap()
    .generate(8)
    .unwrap();
    let corpus = replicate_and_inject(&base, 30, 9, &OutbreakSpec::inject(), Some(3)).unwrap();
    let m = &corpus.manifest;
    assert_eq!(m.mode, OutbreakMode::Inject);
    assert_eq!(m.single_condition + m.pair_condition, 30);
    assert!(m.n_rare.unwrap() <= 3);
    for s in &corpus.streams {
        let label = s.outbreaks()[0];
        assert_eq!(label.length, 1);
        // untouched slots are shared with the base
        for t in (0..s.len()).filter(|&t| t != label.start) {
            assert_eq!(s.slot(t), base.slot(t));
        }
        assert!(s.slot(label.start).len() >= base.slot(label.start).len());
    }
    let mut cfg = DetectorConfig::new(DetectorKind::StatNegbinomial);
    cfg.enumeration = EnumerationMode::Observed;
    let results = evaluate_corpus("inj", &corpus.streams, &[cfg], 0.05);
    assert_eq!(results[0].n_streams, 30);
    assert!((0.0..=1.0).contains(&results[0].mean_aauc));
}

#[test]
fn experiment_over_a_directory_without_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_corpus(&small(5), 2, &OutbreakSpec::boost()).unwrap();
    let root = dir.path().join("plain");
    for (i, s) in corpus.streams.iter().enumerate() {
        write_stream_dir(s, &root.join(stream_dir_name(i))).unwrap();
    }
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "corpus": root,
        "detectors": ["stat_gaussian", "moving_average"],
        "max_orders": [1],
        "output_dir": dir.path().join("out"),
    }))
    .unwrap();
    assert!(matches!(config.corpus, CorpusSource::Path(_)));
    let out = run_experiment(&config).unwrap();
    assert_eq!(out.results.len(), 2);
    assert_eq!(out.resumed, 0);
    // without a manifest the training part is half of each stream, as for the generator
    let s = load_stream_dir(&root.join("stream_0"), LoadOptions::default()).unwrap();
    assert_eq!(s.train_len(), 75);
    for r in &out.results {
        assert_eq!(r.n_streams, 2);
        assert_eq!(r.corpus, "plain");
    }
    let again = run_experiment(&config).unwrap();
    assert_eq!(again.resumed, 2);
    assert_eq!(
        again.results.iter().map(|r| r.mean_aauc).collect::<Vec<_>>(),
        out.results.iter().map(|r| r.mean_aauc).collect::<Vec<_>>()
    );
}

#[test]
fn stronger_outbreaks_are_found_sooner() {
    let weak = OutbreakSpec {
        magnitude: Some(1.0),
        ..OutbreakSpec::boost()
    };
    let strong = OutbreakSpec {
        magnitude: Some(40.0),
        ..OutbreakSpec::boost()
    };
    let cfg = DetectorConfig::new(DetectorKind::StatGaussian).with_max_order(1);
    let mean = |spec: &OutbreakSpec| {
        let c = generate_corpus(&small(6), 6, spec).unwrap();
        let total: f64 = c
            .streams
            .iter()
            .map(|s| {
                evaluate_scores(&run_detector(&cfg, s).unwrap(), s.outbreaks(), 0.05)
                    .unwrap()
                    .aauc
            })
            .sum();
        total / 6.0
    };
    let (w, s) = (mean(&weak), mean(&strong));
    assert!(s < w, "strong {s} vs weak {w}");
    assert!(s < 1.0, "strong outbreaks should be caught on the first day or so: {s}");
}
