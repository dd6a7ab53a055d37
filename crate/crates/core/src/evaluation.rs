//! AMOC curves and the partial area below them.
//!
//! For a threshold θ a slot alarms iff its score is ≥ θ. The false alarm
//! rate is the fraction of non-outbreak test slots that alarm; the detection
//! delay of an outbreak is the offset of its first alarmed slot, or its
//! length when none alarms. Thresholds range over the distinct scores plus
//! +∞, and for each false alarm rate the smallest delay is kept.
//!
//! AAUC(cap) integrates the delay as a right-continuous step function of the
//! false alarm rate over `[0, cap]` and divides by `cap`, so it is a delay in
//! slots: 0 for a perfect detector, the outbreak length for a useless one.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::detectors::{run_detector_with, BackendRegistry, DetectorConfig, ScoreSeries};
use crate::error::{Error, Result};
use crate::model::{DataStream, OutbreakLabel, Syndrome};

pub const DEFAULT_FAR_CAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmocPoint {
    pub far: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmocCurve {
    /// Sorted by strictly increasing FAR, starting at FAR 0.
    pub points: Vec<AmocPoint>,
    /// Delay when nothing is detected: the mean outbreak length.
    pub max_delay: f64,
}

impl AmocCurve {
    /// `far,delay` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["far", "delay"])?;
        for p in &self.points {
            w.write_record([p.far.to_string(), p.delay.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<curve>", e))?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

/// A curve together with its partial area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmocResult {
    pub curve: AmocCurve,
    pub aauc: f64,
}

/// AMOC curve of the test-part `scores` (slot `offset + i` has score `scores[i]`).
pub fn amoc_curve(scores: &[f64], labels: &[OutbreakLabel], offset: usize) -> Result<AmocCurve> {
    if labels.is_empty() {
        return Err(Error::Evaluation("no outbreak labels".into()));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Evaluation(format!("score {s} is not a number")));
    }
    let n = scores.len();
    let mut in_outbreak = vec![false; n];
    for l in labels {
        if l.start < offset || l.start + l.length > offset + n {
            return Err(Error::Evaluation(format!(
                "outbreak [{}, {}) lies outside the scored slots [{offset}, {})",
                l.start,
                l.start + l.length,
                offset + n
            )));
        }
        for t in l.range() {
            in_outbreak[t - offset] = true;
        }
    }
    let n_neg = in_outbreak.iter().filter(|&&o| !o).count();
    if n_neg == 0 {
        return Err(Error::Evaluation("every scored slot is inside an outbreak".into()));
    }
    let max_delay = labels.iter().map(|l| l.length as f64).sum::<f64>() / labels.len() as f64;
    // slots by descending score; lowering θ past each distinct score adds a group of alarms
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut first_alarm: Vec<usize> = labels.iter().map(|l| l.length).collect();
    let mut points = vec![AmocPoint {
        far: 0.0,
        delay: max_delay,
    }];
    let mut alarms = 0;
    let mut i = 0;
    while i < n {
        let theta = scores[order[i]];
        while i < n && scores[order[i]] == theta {
            let t = order[i];
            if in_outbreak[t] {
                for (l, first) in labels.iter().zip(first_alarm.iter_mut()) {
                    if l.contains(t + offset) {
                        *first = (*first).min(t + offset - l.start);
                    }
                }
            } else {
                alarms += 1;
            }
            i += 1;
        }
        let far = alarms as f64 / n_neg as f64;
        let delay = first_alarm.iter().sum::<usize>() as f64 / labels.len() as f64;
        let last = points.last_mut().expect("non-empty");
        // thresholds descend, so FAR never decreases and delay never increases
        if last.far == far {
            last.delay = last.delay.min(delay);
        } else {
            points.push(AmocPoint { far, delay });
        }
    }
    Ok(AmocCurve { points, max_delay })
}

/// Partial area under `curve` for FAR ∈ [0, `far_cap`], divided by `far_cap`.
pub fn aauc(curve: &AmocCurve, far_cap: f64) -> Result<f64> {
    if !(far_cap > 0.0 && far_cap <= 1.0) {
        return Err(Error::Evaluation(format!("far_cap must lie in (0, 1], got {far_cap}")));
    }
    let pts = &curve.points;
    let mut area = 0.0;
    // a curve not starting at FAR 0 is at the maximum delay before its first point
    let first = pts.first().map_or(far_cap, |p| p.far.min(far_cap));
    area += curve.max_delay * first;
    for (i, p) in pts.iter().enumerate() {
        if p.far >= far_cap {
            break;
        }
        let next = pts.get(i + 1).map_or(far_cap, |q| q.far.min(far_cap));
        area += p.delay * (next - p.far);
    }
    Ok(area / far_cap)
}

pub fn evaluate_scores(scores: &ScoreSeries, labels: &[OutbreakLabel], far_cap: f64) -> Result<AmocResult> {
    let curve = amoc_curve(&scores.scores, labels, scores.offset)?;
    let aauc = aauc(&curve, far_cap)?;
    Ok(AmocResult { curve, aauc })
}

/// Runs one detector on one stream and evaluates it against the stream's labels.
pub fn evaluate_stream(
    config: &DetectorConfig,
    stream: &DataStream,
    syndromes: &[Syndrome],
    registry: &BackendRegistry,
    far_cap: f64,
) -> Result<(ScoreSeries, AmocResult)> {
    if stream.outbreaks().is_empty() {
        return Err(Error::Evaluation("stream has no outbreak labels".into()));
    }
    let scores = run_detector_with(config, stream, syndromes, registry)?;
    let result = evaluate_scores(&scores, stream.outbreaks(), far_cap)?;
    Ok((scores, result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamOutcome {
    pub stream: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aauc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Mean AAUC of one detector cell over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub detector: String,
    /// `None` for detectors that do not monitor syndromes.
    pub max_order: Option<usize>,
    pub corpus: String,
    /// NaN when every stream failed.
    pub mean_aauc: f64,
    pub n_streams: usize,
    pub n_failures: usize,
    pub per_stream: Vec<StreamOutcome>,
}

impl CellResult {
    pub fn from_outcomes(
        detector: String,
        max_order: Option<usize>,
        corpus: String,
        mut per_stream: Vec<StreamOutcome>,
    ) -> Self {
        per_stream.sort_by_key(|o| o.stream);
        let ok: Vec<f64> = per_stream.iter().filter_map(|o| o.aauc).collect();
        let mean_aauc = if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        };
        CellResult {
            detector,
            max_order,
            corpus,
            mean_aauc,
            n_streams: ok.len(),
            n_failures: per_stream.len() - ok.len(),
            per_stream,
        }
    }

    pub fn order_label(&self) -> String {
        self.max_order.map_or_else(|| "none".to_string(), |o| o.to_string())
    }
}

/// Ascending by mean AAUC (failed cells last), then by name and order.
pub fn sort_results(results: &mut [CellResult]) {
    results.sort_by(|a, b| {
        let key = |r: &CellResult| {
            if r.mean_aauc.is_nan() {
                f64::INFINITY
            } else {
                r.mean_aauc
            }
        };
        key(a)
            .total_cmp(&key(b))
            .then_with(|| a.detector.cmp(&b.detector))
            .then_with(|| a.max_order.cmp(&b.max_order))
    });
}

/// Results CSV: `detector,max_order,corpus,mean_aauc5,n_streams,n_failures`.
pub fn write_results_csv<W: Write>(results: &[CellResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "detector",
        "max_order",
        "corpus",
        "mean_aauc5",
        "n_streams",
        "n_failures",
    ])?;
    for r in results {
        w.write_record([
            r.detector.clone(),
            r.order_label(),
            r.corpus.clone(),
            r.mean_aauc.to_string(),
            r.n_streams.to_string(),
            r.n_failures.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

/// Per-stream CSV: `detector,max_order,corpus,stream,aauc5,error`.
pub fn write_per_stream_csv<W: Write>(results: &[CellResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["detector", "max_order", "corpus", "stream", "aauc5", "error"])?;
    for r in results {
        for o in &r.per_stream {
            w.write_record([
                r.detector.clone(),
                r.order_label(),
                r.corpus.clone(),
                o.stream.to_string(),
                o.aauc.map(|a| a.to_string()).unwrap_or_default(),
                o.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<per-stream results>", e))?;
    Ok(())
}

/// Evaluates every detector on every in-memory stream. Syndromes are
/// enumerated per stream and per config. A failing stream is recorded and
/// left out of that cell's mean.
pub fn evaluate_corpus(
    corpus_name: &str,
    streams: &[DataStream],
    configs: &[DetectorConfig],
    far_cap: f64,
) -> Vec<CellResult> {
    use rayon::prelude::*;
    let registry = BackendRegistry::default();
    let mut results: Vec<CellResult> = configs
        .iter()
        .map(|config| {
            let outcomes: Vec<StreamOutcome> = streams
                .par_iter()
                .enumerate()
                .map(|(i, stream)| {
                    let res = crate::syndrome::enumerate_for_stream(stream, config.max_order, config.enumeration)
                        .and_then(|syn| {
                            let syn = if config.kind.uses_syndromes() { syn } else { Vec::new() };
                            evaluate_stream(config, stream, &syn, &registry, far_cap)
                        });
                    match res {
                        Ok((_, r)) => StreamOutcome {
                            stream: i,
                            aauc: Some(r.aauc),
                            error: None,
                        },
                        Err(e) => {
                            log::warn!("{} on stream {i}: {e}", config.label());
                            StreamOutcome {
                                stream: i,
                                aauc: None,
                                error: Some(e.to_string()),
                            }
                        }
                    }
                })
                .collect();
            let order = config.kind.uses_syndromes().then_some(config.max_order);
            CellResult::from_outcomes(config.label(), order, corpus_name.to_string(), outcomes)
        })
        .collect();
    sort_results(&mut results);
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(start: usize, length: usize) -> OutbreakLabel {
        OutbreakLabel { start, length }
    }

    fn pts(c: &AmocCurve) -> Vec<(f64, f64)> {
        c.points.iter().map(|p| (p.far, p.delay)).collect()
    }

    #[test]
    fn four_slot_example() {
        let c = amoc_curve(&[0.1, 0.9, 0.5, 0.2], &[label(2, 1)], 0).unwrap();
        assert_eq!(
            pts(&c),
            vec![(0.0, 1.0), (1.0 / 3.0, 0.0), (2.0 / 3.0, 0.0), (1.0, 0.0)]
        );
        assert_eq!(aauc(&c, 0.05).unwrap(), 1.0);
        // with an offset
        let c2 = amoc_curve(&[0.1, 0.9, 0.5, 0.2], &[label(102, 1)], 100).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn worst_and_perfect_cases() {
        let mut scores = vec![0.5; 40];
        scores[10..24].iter_mut().for_each(|s| *s = 0.0);
        let c = amoc_curve(&scores, &[label(10, 14)], 0).unwrap();
        assert_eq!(aauc(&c, 0.05).unwrap(), 14.0);

        let mut scores = vec![0.0; 40];
        scores[10] = 1.0;
        let c = amoc_curve(&scores, &[label(10, 14)], 0).unwrap();
        // the +∞ point (0, 14) is dominated at FAR 0
        assert_eq!(pts(&c), vec![(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(aauc(&c, 0.05).unwrap(), 0.0);
        let constant = amoc_curve(&[0.3; 10], &[label(4, 1)], 0).unwrap();
        assert_eq!(pts(&constant), vec![(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(aauc(&constant, 0.05).unwrap(), 1.0);
    }

    #[test]
    fn delay_counts_from_outbreak_start() {
        // outbreak slots 5..8, only slot 7 stands out
        let mut scores = vec![0.0; 20];
        scores[7] = 1.0;
        let c = amoc_curve(&scores, &[label(5, 3)], 0).unwrap();
        assert_eq!(pts(&c), vec![(0.0, 2.0), (1.0, 0.0)]);
        // two outbreaks average their delays
        let mut scores = vec![0.0; 30];
        scores[5] = 1.0;
        let c = amoc_curve(&scores, &[label(5, 2), label(20, 2)], 0).unwrap();
        assert_eq!(pts(&c), vec![(0.0, 1.0), (1.0, 0.0)]);
    }

    #[test]
    fn monotone_transform_invariance() {
        let scores = [0.3, 0.1, 0.7, 0.7, 0.2, 0.9, 0.4, 0.05, 0.6, 0.8];
        let labels = [label(4, 3)];
        let a = amoc_curve(&scores, &labels, 0).unwrap();
        let t: Vec<f64> = scores.iter().map(|s| (10.0 * s).exp() - 3.0).collect();
        let b = amoc_curve(&t, &labels, 0).unwrap();
        assert_eq!(a, b);
        for cap in [0.05, 0.2, 0.5, 1.0] {
            assert_eq!(aauc(&a, cap).unwrap(), aauc(&b, cap).unwrap());
        }
    }

    #[test]
    fn errors() {
        assert!(amoc_curve(&[0.1, 0.2], &[], 0).is_err());
        assert!(amoc_curve(&[0.1, 0.2], &[label(0, 2)], 0).is_err());
        assert!(amoc_curve(&[0.1, 0.2], &[label(5, 1)], 0).is_err());
        let c = amoc_curve(&[0.1, 0.2], &[label(1, 1)], 0).unwrap();
        assert!(aauc(&c, 0.0).is_err());
        assert!(aauc(&c, 1.5).is_err());
    }

    #[test]
    fn cell_means_and_ordering() {
        let outcomes = vec![
            StreamOutcome {
                stream: 1,
                aauc: Some(14.0),
                error: None,
            },
            StreamOutcome {
                stream: 0,
                aauc: Some(0.0),
                error: None,
            },
            StreamOutcome {
                stream: 2,
                aauc: None,
                error: Some("boom".into()),
            },
        ];
        let a = CellResult::from_outcomes("a".into(), Some(1), "c".into(), outcomes);
        assert_eq!(a.mean_aauc, 7.0);
        assert_eq!((a.n_streams, a.n_failures), (2, 1));
        let b = CellResult::from_outcomes(
            "b".into(),
            None,
            "c".into(),
            vec![StreamOutcome {
                stream: 0,
                aauc: Some(3.0),
                error: None,
            }],
        );
        let f = CellResult::from_outcomes(
            "f".into(),
            None,
            "c".into(),
            vec![StreamOutcome {
                stream: 0,
                aauc: None,
                error: Some("x".into()),
            }],
        );
        let mut all = vec![f, a, b];
        sort_results(&mut all);
        let names: Vec<&str> = all.iter().map(|r| r.detector.as_str()).collect();
        assert_eq!(names, vec!["b", "a", "f"]);
        let mut csv = Vec::new();
        write_results_csv(&all, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(
            csv,
            "detector,max_order,corpus,mean_aauc5,n_streams,n_failures\nb,none,c,3,1,0\na,1,c,7,2,1\nf,none,c,NaN,0,1\n"
        );
    }
}
