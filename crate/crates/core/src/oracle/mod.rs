//! Brute-force cross-check: finite sections of `uC_φ` as exact sparse
//! matrices, with zero-column counts, rank deficiencies and window
//! stabilization.

mod elim;
mod matrix;
mod window;

pub use elim::{column_rank, column_rank_in_order};
pub use matrix::{build_matrix, TruncationMatrix};
pub use window::{
    stabilized_check, windowed_kernel_count, windowed_range_deficiency, Check, Mismatch, WindowCounts, WindowReport,
};
