//! Numerical primitives: tail probabilities, 2×2 contingency tests and the
//! permutation-corrected minimum p-value.

pub mod contingency;
pub mod permutation;
pub mod tail;

pub use contingency::{chi_square_p, fisher_exact_p, increase_p, ContingencyTable2x2, IncreaseTester, TestChoice};
pub use permutation::{min_p, permutation_min_p, PermutationOutcome};
pub use tail::{fit_tail_model, normal_sf, tail_probability, FittedTailModel, TailKind, TailParams};
