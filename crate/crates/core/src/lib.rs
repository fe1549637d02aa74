//! Balanced partitions of vector sequences.
//!
//! Given vectors `v_1, v_2, ...` in the unit ball `B` of a norm on `R^d`,
//! this crate splits them into `r` classes so that, for every prefix length
//! `k` and every class `j`, the class's share of the first `k` vectors stays
//! close to the fair share `(1/r) * sum_{i<=k} v_i`:
//!
//! * [`two_partition`]: weighted two-way splits with deviation at most `d`,
//!   built by a floating-coefficient walk that works on unbounded streams.
//! * [`r_partition`]: recursive `r`-way partitions with deviation at most
//!   `C(r) * d <= 2.0005 * d`, plus the [`CTable`] of recursion constants.
//! * [`selection`]: iterative rounding of fractional `k`-subsets of vector
//!   sets (deviation `2d`) and `r`-selections with discrepancy at most `5d`.
//! * [`oracle`]: exhaustive optimizers used as ground truth in tests.
//!
//! Bounds hold for every supported [`NormKind`].

pub mod error;
pub mod generate;
pub mod linalg;
pub mod norms;
pub mod oracle;
pub mod r_partition;
pub mod selection;
pub mod sum;
pub mod two_partition;

pub use error::{Error, Result};
pub use norms::{in_unit_ball, norm, NormKind};
pub use r_partition::{
    balanced_partition, c_table, verify_partition, CTable, DiscrepancyReport, RPartition,
};
pub use selection::{
    disc, k_subset_rounding, r_selection, zero_sum_selection, Selection, SetSequence,
};
pub use two_partition::{
    weighted_two_partition, FloatingState, TwoPartition, VectorSequence, WeightedSplit,
};

/// Numerical tolerances shared by the algorithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative rank threshold for declaring a column dependent
    /// (scaled by the largest initial column magnitude).
    pub rank: f64,
    /// Coefficients this close to an endpoint are snapped onto it.
    pub boundary: f64,
    /// Slack allowed when checking unit-ball membership of inputs.
    pub ball: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            boundary: 1e-9,
            ball: 1e-9,
        }
    }
}

/// Relative slack applied when comparing an achieved deviation to a bound.
pub const BOUND_SLACK: f64 = 1e-6;
