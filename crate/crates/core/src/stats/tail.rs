//! One-tailed upper tail probabilities for fitted count models.
//!
//! Models are fitted from the empirical mean and (n−1)-denominator variance of
//! a count history. Floors keep rare syndromes from alarming on single cases:
//! the Gaussian variance is at least 1, the Poisson and negative binomial
//! means are at least 1, and the negative binomial variance is never altered.
//! Discrete tails are inclusive: `P(X ≥ observed)`.

use libm::erfc;
use libm::lgamma as ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Gaussian,
    Poisson,
    NegBinomial,
}

/// Distribution parameters after flooring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailParams {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    Poisson {
        lambda: f64,
    },
    /// `pmf(k) = C(k+r−1, k) (1−p)^k p^r`, mean `r(1−p)/p`.
    NegBinomial {
        r: f64,
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedTailModel {
    /// The requested kind; `params` may be Poisson for an underdispersed
    /// negative binomial fit.
    pub kind: TailKind,
    /// Mean after flooring (Poisson / negative binomial) or raw (Gaussian).
    pub mu: f64,
    /// Variance after flooring (Gaussian) or raw (Poisson / negative binomial).
    pub sigma2: f64,
    pub params: TailParams,
}

/// Sample mean and (n−1)-denominator variance.
pub fn mean_variance(history: &[u32]) -> Result<(f64, f64)> {
    if history.len() < 2 {
        return Err(Error::InsufficientHistory(format!(
            "variance needs at least 2 slots, got {}",
            history.len()
        )));
    }
    let n = history.len() as f64;
    let mean = history.iter().map(|&x| x as f64).sum::<f64>() / n;
    let ss = history
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d * d
        })
        .sum::<f64>();
    Ok((mean, ss / (n - 1.0)))
}

pub fn fit_tail_model(kind: TailKind, history: &[u32]) -> Result<FittedTailModel> {
    let (mean, var) = mean_variance(history)?;
    Ok(fit_from_moments(kind, mean, var))
}

/// Applies the floors and derives distribution parameters from raw moments.
pub fn fit_from_moments(kind: TailKind, mean: f64, variance: f64) -> FittedTailModel {
    match kind {
        TailKind::Gaussian => {
            let v = variance.max(1.0);
            FittedTailModel {
                kind,
                mu: mean,
                sigma2: v,
                params: TailParams::Gaussian { mean, variance: v },
            }
        }
        TailKind::Poisson => {
            let mu = mean.max(1.0);
            FittedTailModel {
                kind,
                mu,
                sigma2: variance,
                params: TailParams::Poisson { lambda: mu },
            }
        }
        TailKind::NegBinomial => {
            let mu = mean.max(1.0);
            let params = if variance > mu {
                let r = mu * mu / (variance - mu);
                TailParams::NegBinomial { r, p: r / (r + mu) }
            } else {
                TailParams::Poisson { lambda: mu }
            };
            FittedTailModel {
                kind,
                mu,
                sigma2: variance,
                params,
            }
        }
    }
}

/// Standard normal survival function `1 − Φ(z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

impl FittedTailModel {
    /// Probability of observing `observed` or more.
    pub fn tail(&self, observed: u32) -> f64 {
        tail_probability(self, observed)
    }
}

pub fn tail_probability(model: &FittedTailModel, observed: u32) -> f64 {
    let p = match model.params {
        TailParams::Gaussian { mean, variance } => normal_sf((observed as f64 - mean) / variance.sqrt()),
        TailParams::Poisson { lambda } => poisson_sf(lambda, observed),
        TailParams::NegBinomial { r, p } => negbin_sf(r, p, observed),
    };
    p.clamp(0.0, 1.0)
}

const REL_EPS: f64 = 1e-17;
const MAX_TERMS: usize = 2_000_000;

/// Sums a discrete upper or lower tail from the log-pmf at `k` and a
/// term-ratio recurrence. Terms past the mode decay monotonically, so the
/// upper sum stops once a term no longer moves the total.
fn discrete_sf(
    k: u32,
    mean: f64,
    ln_pmf: impl Fn(f64) -> f64,
    up: impl Fn(f64) -> f64,
    down: impl Fn(f64) -> f64,
) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    if kf <= mean {
        // 1 − Σ_{j<k} pmf(j), summed downward from k−1
        let mut term = ln_pmf(kf - 1.0).exp();
        let mut lower = term;
        let mut j = kf - 1.0;
        while j > 0.0 {
            term *= down(j);
            lower += term;
            j -= 1.0;
        }
        1.0 - lower
    } else {
        let mut term = ln_pmf(kf).exp();
        let mut upper = term;
        let mut j = kf;
        for _ in 0..MAX_TERMS {
            term *= up(j);
            upper += term;
            j += 1.0;
            if term <= upper * REL_EPS {
                break;
            }
        }
        upper
    }
}

/// `P(X ≥ k)` for `X ~ Poisson(lambda)`.
pub fn poisson_sf(lambda: f64, k: u32) -> f64 {
    discrete_sf(
        k,
        lambda,
        |j| j * lambda.ln() - lambda - ln_gamma(j + 1.0),
        |j| lambda / (j + 1.0),
        |j| j / lambda,
    )
}

/// `P(X ≥ k)` for `X ~ NB(r, p)` counting failures before the r-th success.
pub fn negbin_sf(r: f64, p: f64, k: u32) -> f64 {
    let q = 1.0 - p;
    let mean = r * q / p;
    discrete_sf(
        k,
        mean,
        |j| ln_gamma(j + r) - ln_gamma(r) - ln_gamma(j + 1.0) + r * p.ln() + j * q.ln(),
        |j| (j + r) / (j + 1.0) * q,
        |j| j / ((j - 1.0 + r) * q),
    )
}
