use std::fmt;

use crate::natset::Nat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Hypotheses that gate individual analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// `φ(S(u)) ⊆ S(u)` fails.
    SupportNotInvariant,
    /// `inf |u| = 0` over ℕ.
    NotBoundedAwayFromZero,
    /// The weighted operator is unbounded.
    Unbounded,
    /// The unweighted composition operator is unbounded.
    CompositionUnbounded,
    /// The range is not closed.
    RangeNotClosed,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::SupportNotInvariant => "support_not_invariant",
            Hypothesis::NotBoundedAwayFromZero => "not_bounded_away_from_zero",
            Hypothesis::Unbounded => "unbounded",
            Hypothesis::CompositionUnbounded => "composition_unbounded",
            Hypothesis::RangeNotClosed => "range_not_closed",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unsupported set form: {0}")]
    UnsupportedSetForm(String),
    #[error("value at n = {n} is irrational; use an enclosure")]
    IrrationalValue { n: Nat },
    #[error("composition is not representable: {0}")]
    UnrepresentableComposition(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
}

impl Error {
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedSetForm(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSymbol(msg.into())
    }
}
