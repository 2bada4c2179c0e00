//! Exact analysis of weighted composition operators `f ↦ u·(f∘φ)` on the
//! sequence spaces ℓp, 1 ≤ p < ∞.
//!
//! The weight `u` and the self-map `φ` are given by finite symbolic
//! descriptions ([`symbols`]); every structural quantity (boundedness and
//! norm, kernels of all powers, range co-dimension, closed range, Fredholm
//! index) is then decided exactly over the representable set algebra in
//! [`natset`]. The [`oracle`] module re-derives the finite quantities from
//! truncation matrices over exact rationals, independently of the
//! set-theoretic route.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod natset;
pub mod oracle;
pub mod rational;
pub mod sample;
pub mod symbols;

pub use analysis::{AnalysisReport, NormValue, OperatorSpec, Tolerance};
pub use error::{Error, Hypothesis, Result};
pub use exec::Exec;
pub use natset::{CardinalityClass, ExtNat, Nat, NatSet};
pub use rational::{Interval, Rational};
pub use symbols::{MapTail, PowerSeq, SelfMap, SeqExpr, Term, Weight};
