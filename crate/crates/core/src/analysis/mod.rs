//! Structural analysis of `uC_φ : f ↦ u·(f∘φ)` on ℓp.

mod fredholm;
mod kernel;
mod norm;
mod power;
mod range;

use std::fmt;

use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rational::{self, ratio, Interval, Rational};
use crate::symbols::{SelfMap, Weight};

pub use fredholm::{analyze, analyze_with, fredholm, AnalysisReport, HypothesisFlag};
pub use kernel::{
    images_stabilize, kernel_basis, kernel_codim, kernel_dim, kernel_finite_transfer_check, kernel_split,
    kernel_stabilizes,
};
pub use norm::{boundedness, boundedness_with, closed_range, fiber_weight_sum, fiber_weight_sum_with, Boundedness};
pub use power::{apply, apply_at, apply_power, power_spec, PowerSpec};
pub use range::{
    multi_fiber_set, range_codim, range_codim_formula, range_dim_is_infinite, range_membership,
    weighted_fiber_size,
};

/// `uC_φ` acting on ℓp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSpec {
    pub u: Weight,
    pub phi: SelfMap,
    pub p: Rational,
}

impl OperatorSpec {
    pub fn new(u: Weight, phi: SelfMap, p: Rational) -> Result<Self> {
        if p < Rational::one() {
            return Err(Error::invalid(format!("p = {p} must be at least 1")));
        }
        if p.numer().bits() > 32 || p.denom().bits() > 32 {
            return Err(Error::invalid(format!("p = {p} has an oversized numerator or denominator")));
        }
        Ok(OperatorSpec { u, phi, p })
    }

    /// `p` as an integer, when it is one.
    pub fn integer_p(&self) -> Option<u32> {
        if self.p.is_integer() {
            self.p.to_integer().to_u32()
        } else {
            None
        }
    }

    /// The same symbol map with weight `1`, i.e. the plain composition operator.
    pub fn unweighted(&self) -> OperatorSpec {
        OperatorSpec { u: Weight::constant(Rational::one()), phi: self.phi.clone(), p: self.p.clone() }
    }
}

/// Absolute width target for enclosures, plus the execution policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tolerance {
    pub width: Rational,
    pub exec: Exec,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { width: ratio(1, 1_000_000), exec: Exec::default() }
    }
}

impl Tolerance {
    pub fn new(width: Rational) -> Self {
        Tolerance { width, ..Default::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

/// An exact value, a certified enclosure, or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormValue {
    Exact {
        #[serde(with = "rational::as_string")]
        value: Rational,
    },
    Enclosure {
        #[serde(with = "rational::as_string")]
        lo: Rational,
        #[serde(with = "rational::as_string")]
        hi: Rational,
    },
    Divergent,
}

impl NormValue {
    pub fn from_interval(i: Interval) -> Self {
        match i.as_point() {
            Some(v) => NormValue::Exact { value: v.clone() },
            None => {
                let (lo, hi) = i.into_bounds();
                NormValue::Enclosure { lo, hi }
            }
        }
    }

    pub fn interval(&self) -> Option<Interval> {
        match self {
            NormValue::Exact { value } => Some(Interval::point(value.clone())),
            NormValue::Enclosure { lo, hi } => Some(Interval::new(lo.clone(), hi.clone())),
            NormValue::Divergent => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, NormValue::Divergent)
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            NormValue::Exact { value } => Some(value),
            _ => None,
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.interval().is_some_and(|i| i.contains(q))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            NormValue::Exact { value } => value.is_positive(),
            NormValue::Enclosure { lo, .. } => lo.is_positive(),
            NormValue::Divergent => true,
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Exact { value } => write!(f, "{value}"),
            NormValue::Enclosure { lo, hi } => {
                let (a, b) = (lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN));
                write!(f, "{:.12} ± {:.1e}", (a + b) / 2.0, (b - a) / 2.0)
            }
            NormValue::Divergent => f.write_str("divergent"),
        }
    }
}
