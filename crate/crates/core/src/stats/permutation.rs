//! Minimum p-value over syndromes, and its permutation-test correction.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::model::{PatientRecord, StreamSchema, Syndrome};
use crate::seed::derived_rng;
use crate::stats::contingency::{ContingencyTable2x2, IncreaseTester, TestChoice};
use crate::syndrome::SyndromeCounter;

/// Minimum per-syndrome increase p-value and the first column attaining it.
///
/// `current[j]` / `reference[j]` are the syndrome counts in C(t) and R. With an
/// empty current or reference set there is no evidence and the result is 1.
pub fn min_p(
    current: &[u32],
    current_total: u64,
    reference: &[u32],
    reference_total: u64,
    tester: &IncreaseTester,
) -> (f64, Option<usize>) {
    if current_total == 0 || reference_total == 0 {
        return (1.0, None);
    }
    let mut best = (f64::INFINITY, None);
    for (j, (&a, &c)) in current.iter().zip(reference).enumerate() {
        let t = ContingencyTable2x2 {
            a: a as u64,
            b: current_total - a as u64,
            c: c as u64,
            d: reference_total - c as u64,
        };
        let p = tester.p(&t);
        if p < best.0 {
            best = (p, Some(j));
        }
    }
    if best.1.is_none() {
        best.0 = 1.0;
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationOutcome {
    /// Minimum p-value of the observed split.
    pub observed_min_p: f64,
    /// Number of permutations whose minimum p-value was ≤ the observed one.
    pub at_least_as_extreme: usize,
    pub reps: usize,
    /// `(1 + at_least_as_extreme) / (1 + reps)`.
    pub p: f64,
}

/// Permutation-corrected minimum p-value.
///
/// The current and reference records are pooled and re-split `reps` times
/// into sets of the original sizes; repetition `i` draws from its own RNG
/// stream derived from `(seed, i)`.
pub fn permutation_min_p(
    schema: &StreamSchema,
    current: &[PatientRecord],
    reference: &[PatientRecord],
    syndromes: &[Syndrome],
    reps: usize,
    seed: u64,
    choice: TestChoice,
) -> Result<PermutationOutcome> {
    if reps == 0 {
        return Err(Error::InvalidArgument(
            "permutation test needs at least one repetition".into(),
        ));
    }
    let pool_len = current.len() + reference.len();
    if pool_len == 0 {
        return Err(Error::InvalidArgument("permutation test on an empty pool".into()));
    }
    let counter = SyndromeCounter::new(schema, syndromes)?;
    let n_cols = syndromes.len();

    // matched columns of every pool record, flattened
    let mut offsets = Vec::with_capacity(pool_len + 1);
    let mut cols: Vec<u32> = Vec::new();
    offsets.push(0usize);
    for r in current.iter().chain(reference) {
        counter.for_each_match(r, |c| cols.push(c as u32));
        offsets.push(cols.len());
    }
    let mut totals = vec![0u32; n_cols];
    for &c in &cols {
        totals[c as usize] += 1;
    }

    let tester = IncreaseTester::new(pool_len, choice);
    let n_cur = current.len();
    let n_ref = reference.len() as u64;
    let mut a = vec![0u32; n_cols];
    let mut c = vec![0u32; n_cols];

    let mut split_min_p = |chosen: &mut dyn Iterator<Item = usize>| {
        a.fill(0);
        for i in chosen {
            for &col in &cols[offsets[i]..offsets[i + 1]] {
                a[col as usize] += 1;
            }
        }
        for j in 0..n_cols {
            c[j] = totals[j] - a[j];
        }
        min_p(&a, n_cur as u64, &c, n_ref, &tester).0
    };

    let observed = split_min_p(&mut (0..n_cur));
    let mut extreme = 0usize;
    for rep in 0..reps {
        let mut rng = derived_rng(seed, &[rep as u64]);
        let idx = sample(&mut rng, pool_len, n_cur);
        if split_min_p(&mut idx.into_iter()) <= observed {
            extreme += 1;
        }
    }
    Ok(PermutationOutcome {
        observed_min_p: observed,
        at_least_as_extreme: extreme,
        reps,
        p: (1 + extreme) as f64 / (1 + reps) as f64,
    })
}
