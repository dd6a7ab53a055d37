//! Global benchmarks on the total number of records per slot.
//!
//! - control chart: z-score of n_t under N(μ, max(σ², 1)) fitted on the whole history.
//! - moving average: as the control chart, with μ the mean of the trailing window.
//! - linear regression: OLS of n_i on an intercept, a linear trend and one-hot
//!   environmental values; z-score of the residual at t under the residual
//!   variance (floored at 1).
//!
//! The score is Φ(z), one minus the upper-tail p-value.

use super::{DetectorConfig, DetectorKind, ScoringContext};
use crate::error::{Error, Result};
use crate::stats::tail::{mean_variance, normal_sf};

impl ScoringContext<'_> {
    pub fn global(&self, kind: DetectorKind, t: usize, config: &DetectorConfig) -> Result<f64> {
        self.check_slot(t)?;
        let totals = &self.matrix.slot_totals()[..t];
        let current = self.matrix.slot_totals()[t] as f64;
        let z = match kind {
            DetectorKind::ControlChart => {
                let (mean, var) = mean_variance(totals)?;
                (current - mean) / var.max(1.0).sqrt()
            }
            DetectorKind::MovingAverage => {
                let (_, var) = mean_variance(totals)?;
                let w = config.moving_average_window.min(t);
                let window = &totals[t - w..];
                let mean = window.iter().map(|&x| x as f64).sum::<f64>() / w as f64;
                (current - mean) / var.max(1.0).sqrt()
            }
            DetectorKind::LinearRegression => self.regression_z(t)?,
            other => {
                return Err(Error::InvalidArgument(format!("{other} is not a global benchmark")));
            }
        };
        Ok(1.0 - normal_sf(z))
    }

    fn design_row(&self, i: usize, scale: f64) -> Vec<f64> {
        let schema = self.stream.schema();
        let env = &self.stream.slot(i).env;
        let mut row = vec![1.0, i as f64 / scale];
        for (attr, &v) in schema.environmental().iter().zip(env) {
            // first level is the baseline
            for level in 1..attr.cardinality() {
                row.push(if v as usize == level { 1.0 } else { 0.0 });
            }
        }
        row
    }

    fn regression_z(&self, t: usize) -> Result<f64> {
        let scale = t as f64;
        let x: Vec<Vec<f64>> = (0..t).map(|i| self.design_row(i, scale)).collect();
        let y: Vec<f64> = self.matrix.slot_totals()[..t].iter().map(|&v| v as f64).collect();
        let fit = OlsFit::new(&x, &y)?;
        if !fit.dropped.is_empty() {
            log::warn!("slot {t}: regression dropped collinear columns {:?}", fit.dropped);
        }
        let dof = t.saturating_sub(fit.rank());
        if dof == 0 {
            return Err(Error::InsufficientHistory(format!(
                "regression at slot {t} has no residual degrees of freedom"
            )));
        }
        let var = (fit.rss / dof as f64).max(1.0);
        let pred = fit.predict(&self.design_row(t, scale));
        let current = self.matrix.slot_totals()[t] as f64;
        Ok((current - pred) / var.sqrt())
    }
}

/// Least squares by modified Gram–Schmidt; columns that are (numerically)
/// linear combinations of earlier ones are dropped.
pub(crate) struct OlsFit {
    kept: Vec<usize>,
    dropped: Vec<usize>,
    coef: Vec<f64>,
    rss: f64,
}

impl OlsFit {
    pub(crate) fn new(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let n = x.len();
        let p = x.first().map_or(0, Vec::len);
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument("empty regression design".into()));
        }
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new(); // r[k][l]: coefficient of q_l in kept column k
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for col in 0..p {
            let mut v: Vec<f64> = x.iter().map(|row| row[col]).collect();
            let norm0 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let mut coeffs = vec![0.0; q.len()];
            // two passes for numerical orthogonality
            for _ in 0..2 {
                for (l, ql) in q.iter().enumerate() {
                    let d: f64 = ql.iter().zip(&v).map(|(a, b)| a * b).sum();
                    coeffs[l] += d;
                    for (vi, qi) in v.iter_mut().zip(ql) {
                        *vi -= d * qi;
                    }
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm0 == 0.0 || norm <= 1e-9 * norm0 {
                dropped.push(col);
                continue;
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            coeffs.push(norm);
            q.push(v);
            r.push(coeffs);
            kept.push(col);
        }
        // Qᵀy, then back-substitution on the upper-triangular R
        let qty: Vec<f64> = q.iter().map(|ql| ql.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        let k = kept.len();
        let mut coef = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in i + 1..k {
                s -= r[j][i] * coef[j];
            }
            coef[i] = s / r[i][i];
        }
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &yi)| {
                let pred: f64 = kept.iter().zip(&coef).map(|(&c, b)| row[c] * b).sum();
                (yi - pred) * (yi - pred)
            })
            .sum();
        Ok(OlsFit {
            kept,
            dropped,
            coef,
            rss,
        })
    }

    pub(crate) fn rank(&self) -> usize {
        self.kept.len()
    }

    pub(crate) fn predict(&self, row: &[f64]) -> f64 {
        self.kept.iter().zip(&self.coef).map(|(&c, b)| row[c] * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_line_and_drops_duplicate_column() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 3.0 + 0.5 * i as f64).collect();
        let fit = OlsFit::new(&x, &y).unwrap();
        assert_eq!(fit.kept, vec![0, 1]);
        assert_eq!(fit.dropped, vec![2]);
        assert!((fit.predict(&[1.0, 20.0, 40.0]) - 13.0).abs() < 1e-9);
        assert!(fit.rss < 1e-18);
    }

    #[test]
    fn ols_matches_normal_equations_on_noisy_data() {
        // y = 1 + 2x + noise with fixed residuals; slope/intercept from closed form
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 2.9, 5.2, 6.8, 9.1];
        let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![1.0, v]).collect();
        let fit = OlsFit::new(&x, &ys).unwrap();
        let n = 5.0;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        assert!((fit.predict(&[1.0, 10.0]) - (intercept + 10.0 * slope)).abs() < 1e-12);
    }
}
