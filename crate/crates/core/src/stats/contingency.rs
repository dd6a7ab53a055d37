//! 2×2 contingency tests for "did this syndrome's share increase in the
//! current slot relative to the reference set".
//!
//! Table layout:
//!
//! |           | syndrome | other |
//! |-----------|----------|-------|
//! | current   | a        | b     |
//! | reference | c        | d     |

use libm::lgamma as ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::tail::normal_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b == 0 || c + d == 0 {
            return Err(Error::InvalidArgument(format!(
                "2x2 table [[{a},{b}],[{c},{d}]] has an empty row"
            )));
        }
        Ok(ContingencyTable2x2 { a, b, c, d })
    }

    /// Table for a syndrome with `current_count` of `current_total` records
    /// against `reference_count` of `reference_total`.
    pub fn from_counts(
        current_count: u64,
        current_total: u64,
        reference_count: u64,
        reference_total: u64,
    ) -> Result<Self> {
        if current_count > current_total || reference_count > reference_total {
            return Err(Error::InvalidArgument("syndrome count exceeds its total".into()));
        }
        Self::new(
            current_count,
            current_total - current_count,
            reference_count,
            reference_total - reference_count,
        )
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    fn has_empty_margin(&self) -> bool {
        self.a + self.b == 0 || self.c + self.d == 0 || self.a + self.c == 0 || self.b + self.d == 0
    }

    /// Smallest expected cell count under independence.
    pub fn min_expected(&self) -> f64 {
        let n = self.total() as f64;
        let rows = [(self.a + self.b) as f64, (self.c + self.d) as f64];
        let cols = [(self.a + self.c) as f64, (self.b + self.d) as f64];
        rows.iter()
            .flat_map(|r| cols.iter().map(move |c| r * c / n))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which test the per-syndrome comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TestChoice {
    /// Fisher when any expected count is below 5, χ² otherwise.
    #[default]
    Auto,
    ChiSquare,
    Fisher,
}

/// Pearson χ² statistic without continuity correction.
pub fn chi_square_statistic(t: &ContingencyTable2x2) -> f64 {
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let n = a + b + c + d;
    let diff = a * d - b * c;
    n * diff * diff / ((a + b) * (c + d) * (a + c) * (b + d))
}

/// χ²₁ survival function: `P(χ²₁ ≥ x) = 2·(1 − Φ(√x))`.
pub fn chi_square_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (2.0 * normal_sf(x.sqrt())).min(1.0)
}

/// Pearson χ² p-value.
///
/// Two-tailed unless `one_tailed_increase`, in which case the two-tailed p is
/// halved when the current proportion exceeds the reference proportion and
/// complemented (`1 − p/2`) otherwise. Identical proportions give 1. A table
/// with an empty margin falls through to [`fisher_exact_p`].
pub fn chi_square_p(t: &ContingencyTable2x2, one_tailed_increase: bool) -> f64 {
    if t.has_empty_margin() {
        return fisher_exact_p(t);
    }
    let stat = chi_square_statistic(t);
    if stat == 0.0 {
        return 1.0;
    }
    let p = chi_square_1_sf(stat);
    if !one_tailed_increase {
        return p;
    }
    // a/(a+b) > c/(c+d) without division
    let increased = (t.a as u128) * ((t.c + t.d) as u128) > (t.c as u128) * ((t.a + t.b) as u128);
    if increased {
        p / 2.0
    } else {
        1.0 - p / 2.0
    }
}

fn ln_fact(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// One-tailed (greater) Fisher exact p: probability under fixed margins of a
/// table whose top-left cell is at least `a`.
pub fn fisher_exact_p(t: &ContingencyTable2x2) -> f64 {
    fisher_with(t, ln_fact)
}

fn fisher_with(t: &ContingencyTable2x2, lf: impl Fn(u64) -> f64) -> f64 {
    let n = t.total();
    let k = t.a + t.c; // syndrome total
    let m = t.a + t.b; // current total
    let x_min = (m + k).saturating_sub(n);
    let x_max = k.min(m);
    if t.a <= x_min {
        return 1.0;
    }
    // ln P(X = a) for X ~ Hypergeometric(n, k, m)
    let ln_first =
        lf(k) - lf(t.a) - lf(k - t.a) + lf(n - k) - lf(m - t.a) - lf(n + t.a - k - m) - (lf(n) - lf(m) - lf(n - m));
    let mut term = ln_first.exp();
    let mut sum = term;
    let mut x = t.a;
    while x < x_max {
        // P(x+1)/P(x) = (k−x)(m−x) / ((x+1)(n−k−m+x+1))
        let num = ((k - x) * (m - x)) as f64;
        let den = ((x + 1) * (n + x + 1 - k - m)) as f64;
        term *= num / den;
        sum += term;
        x += 1;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum.min(1.0)
}

/// One-tailed "increase" p-value for a syndrome, dispatching per [`TestChoice`].
pub fn increase_p(t: &ContingencyTable2x2, choice: TestChoice) -> f64 {
    match choice {
        TestChoice::Fisher => fisher_exact_p(t),
        TestChoice::ChiSquare => chi_square_p(t, true),
        TestChoice::Auto => {
            if t.has_empty_margin() || t.min_expected() < 5.0 {
                fisher_exact_p(t)
            } else {
                chi_square_p(t, true)
            }
        }
    }
}

/// Per-syndrome increase test with a precomputed ln-factorial table, for the
/// many repeated tests of a permutation loop over a fixed pool.
pub struct IncreaseTester {
    ln_fact: Vec<f64>,
    choice: TestChoice,
}

impl IncreaseTester {
    /// Supports tables whose grand total is at most `max_total`.
    pub fn new(max_total: usize, choice: TestChoice) -> Self {
        let ln_fact = (0..=max_total).map(|i| ln_fact(i as u64)).collect();
        IncreaseTester { ln_fact, choice }
    }

    pub fn p(&self, t: &ContingencyTable2x2) -> f64 {
        let fisher = || fisher_with(t, |n| self.ln_fact[n as usize]);
        match self.choice {
            TestChoice::Fisher => fisher(),
            TestChoice::ChiSquare => chi_square_p(t, true),
            TestChoice::Auto => {
                if t.has_empty_margin() || t.min_expected() < 5.0 {
                    fisher()
                } else {
                    chi_square_p(t, true)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(a: u64, b: u64, c: u64, d: u64) -> ContingencyTable2x2 {
        ContingencyTable2x2::new(a, b, c, d).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn identical_proportions_give_one() {
        let t = table(10, 10, 10, 10);
        assert_eq!(chi_square_statistic(&t), 0.0);
        assert_eq!(chi_square_p(&t, true), 1.0);
        assert_eq!(chi_square_p(&t, false), 1.0);
    }

    #[test]
    fn chi_square_reference_values() {
        // χ² = 3.921568..., two-tailed p = 0.0476703806561614 (mpmath)
        let t = table(20, 80, 10, 90);
        close(chi_square_statistic(&t), 3.921_568_627_450_98, 1e-12);
        close(chi_square_p(&t, false), 0.047_670_380_656_161_45, 1e-12);
        close(chi_square_p(&t, true), 0.023_835_190_328_080_72, 1e-12);
        // decrease direction reports the complement side
        let dec = table(10, 90, 20, 80);
        assert!(chi_square_p(&dec, true) > 0.5);
    }

    #[test]
    fn fisher_reference_values() {
        // P(X ≥ 3), N = 20, K = 3, n = 10: C(17,7)/C(20,10) = 2/19
        close(fisher_exact_p(&table(3, 7, 0, 10)), 2.0 / 19.0, 1e-13);
        // [[1,1],[1,1]]: P(X ≥ 1) = 5/6
        close(fisher_exact_p(&table(1, 1, 1, 1)), 5.0 / 6.0, 1e-13);
        assert_eq!(fisher_exact_p(&table(0, 5, 0, 7)), 1.0);
        // rash-in-the-north example: 9 of 30 vs 2 of 120
        let p = fisher_exact_p(&table(9, 21, 2, 118));
        close(p, 7.108_592_459_227_309e-6, 1e-15);
    }

    #[test]
    fn fisher_when_margins_exceed_total() {
        // k + m > n: P(X ≥ 6), N = 10, K = 9, n = 6 is C(9,6)C(1,0)/C(10,6)
        close(fisher_exact_p(&table(6, 0, 3, 1)), 84.0 / 210.0, 1e-14);
        let tester = IncreaseTester::new(100, TestChoice::Fisher);
        close(tester.p(&table(6, 0, 3, 1)), 0.4, 1e-14);
    }

    #[test]
    fn empty_rows_are_rejected_and_empty_columns_fall_back() {
        assert!(ContingencyTable2x2::new(0, 0, 1, 1).is_err());
        assert!(ContingencyTable2x2::from_counts(3, 2, 0, 1).is_err());
        let no_syndrome = table(0, 4, 0, 9);
        assert_eq!(chi_square_p(&no_syndrome, true), 1.0);
    }

    #[test]
    fn auto_switch_uses_fisher_for_small_expectations() {
        let small = table(3, 7, 0, 10);
        assert_eq!(increase_p(&small, TestChoice::Auto), fisher_exact_p(&small));
        let big = table(20, 80, 10, 90);
        assert_eq!(increase_p(&big, TestChoice::Auto), chi_square_p(&big, true));
    }

    #[test]
    fn table_tester_agrees_with_direct_fisher() {
        let tester = IncreaseTester::new(2000, TestChoice::Fisher);
        for &(a, b, c, d) in &[(3, 7, 0, 10), (9, 21, 2, 118), (40, 300, 120, 1500), (0, 30, 5, 900)] {
            let t = table(a, b, c, d);
            let want = fisher_exact_p(&t);
            let got = tester.p(&t);
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15, "{got} {want}");
        }
    }
}
