//! Symbolic weights, vectors and self-maps.

mod map;
mod ops;
mod seq;

pub use map::{MapTail, SelfMap};
pub use ops::{check_support_invariant, seq_compose, seq_pointwise_mul};
pub use seq::{dominance_bound, Eventual, FormulaValue, PowerSeq, SeqExpr, Term, Trend, Weight, SCAN_CAP};
