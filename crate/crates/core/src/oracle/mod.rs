//! Exact enumeration oracle for Rademacher sums.
//!
//! Probabilities are returned as dyadic rationals computed from all `2^n`
//! sign vectors; nothing here rounds.

mod eliminate;
mod highdim;
mod tail;
mod weights;

pub use eliminate::{eliminate, Elimination, Scenario};
pub use highdim::{
    dimension_free_bound, high_dim_exact_tail, high_dim_exact_tail_capped, NormDirection,
    VectorWeightSet,
};
pub use tail::{
    exact_tail, exact_tail_capped, exact_tail_gt_f64, exact_tails, TailMode, TailQuery,
    DEFAULT_ENUMERATION_CAP, HARD_ENUMERATION_CAP,
};
pub use weights::{normalize_weights, ExactWeights, WeightVector};
