//! Syndrome-based statistical benchmarks: fit a tail model per syndrome on
//! its count history, test the current count, report one minus the smallest
//! p-value.

use super::{ScoringContext, SlotScore};
use crate::error::Result;
use crate::stats::tail::{fit_from_moments, TailKind};

impl ScoringContext<'_> {
    pub fn stat_benchmark(&self, kind: TailKind, t: usize) -> Result<SlotScore> {
        self.check_slot(t)?;
        let m = &self.matrix;
        let n_cols = m.n_cols();
        let mut sum = vec![0u64; n_cols];
        let mut sum_sq = vec![0u64; n_cols];
        for i in 0..t {
            for (j, &x) in m.row(i).iter().enumerate() {
                let x = x as u64;
                sum[j] += x;
                sum_sq[j] += x * x;
            }
        }
        let n = t as f64;
        let current = m.row(t);
        let mut best = (1.0f64, None);
        for j in 0..n_cols {
            let mean = sum[j] as f64 / n;
            // exact integer numerator: n·Σx² − (Σx)²
            let num = (t as i128) * (sum_sq[j] as i128) - (sum[j] as i128) * (sum[j] as i128);
            let var = num as f64 / (n * (n - 1.0));
            let p = fit_from_moments(kind, mean, var).tail(current[j]);
            if p < best.0 || best.1.is_none() {
                best = (p, Some(j));
            }
        }
        Ok(SlotScore {
            score: 1.0 - best.0,
            syndrome: best.1,
        })
    }
}
