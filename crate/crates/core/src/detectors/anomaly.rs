//! Point anomaly detectors applied to syndrome-count vectors.
//!
//! Each slot of the history becomes one row of features (the count of every
//! monitored syndrome); a backend is fitted on those rows and scores the
//! current slot's row. Backends are looked up by name in a
//! [`BackendRegistry`], so external detectors can be plugged in.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::ScoringContext;
use crate::error::{Error, Result};

/// A fitted detector.
pub trait AnomalyModel: Send + Sync {
    /// Outlier score of one feature vector; higher is more anomalous.
    fn score(&self, x: &[f64]) -> f64;
}

/// Fits an [`AnomalyModel`] to a set of rows.
pub trait AnomalyBackend: Send + Sync {
    fn name(&self) -> &str;
    fn fit(&self, rows: &[Vec<f64>]) -> Result<Box<dyn AnomalyModel>>;
}

/// Single gaussian with diagonal covariance, variances floored at 1. The
/// score is the squared Mahalanobis distance, so a decrease scores like an
/// equal increase.
#[derive(Debug, Clone, Copy, Default)]
pub struct MahalanobisDiag;

impl MahalanobisDiag {
    pub const NAME: &'static str = "mahalanobis_diag";
}

struct DiagGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl AnomalyModel for DiagGaussian {
    fn score(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((x, m), v)| (x - m) * (x - m) / v)
            .sum()
    }
}

impl AnomalyBackend for MahalanobisDiag {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn fit(&self, rows: &[Vec<f64>]) -> Result<Box<dyn AnomalyModel>> {
        if rows.len() < 2 {
            return Err(Error::InsufficientHistory(format!(
                "{} rows, need at least 2",
                rows.len()
            )));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("rows have different lengths".into()));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).max(1.0));
        Ok(Box::new(DiagGaussian { mean, var }))
    }
}

/// Backends by name.
#[derive(Clone)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn AnomalyBackend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry {
            backends: BTreeMap::new(),
        }
    }

    /// Registers `backend` under its own name, replacing any previous entry.
    pub fn register(&mut self, backend: Arc<dyn AnomalyBackend>) {
        self.backends.insert(backend.name().to_string(), backend);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn AnomalyBackend>> {
        self.backends.get(name).ok_or_else(|| Error::Backend {
            backend: name.to_string(),
            message: format!("not registered (known: {})", self.names().join(", ")),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(MahalanobisDiag));
        r
    }
}

impl fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.backends.keys()).finish()
    }
}

impl ScoringContext<'_> {
    pub fn adapted_anomaly(&self, t: usize, backend: &str) -> Result<f64> {
        self.check_slot(t)?;
        let backend = self.registry.get(backend)?;
        let to_row = |i: usize| self.matrix.row(i).iter().map(|&c| c as f64).collect::<Vec<f64>>();
        let rows: Vec<Vec<f64>> = (0..t).map(to_row).collect();
        let model = backend.fit(&rows).map_err(|e| Error::Backend {
            backend: backend.name().to_string(),
            message: e.to_string(),
        })?;
        Ok(model.score(&to_row(t)))
    }
}
