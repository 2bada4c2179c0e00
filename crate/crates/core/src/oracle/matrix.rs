use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::analysis::OperatorSpec;
use crate::natset::{ExtNat, Nat};
use crate::rational::{int, Rational};

/// Rows `1..=R`, columns `1..=W`; entry `u(m)` at `(m, φ(m))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationMatrix {
    pub rows: Nat,
    pub cols: Nat,
    /// Nonzero entries by column, each keyed by row.
    pub columns: BTreeMap<Nat, BTreeMap<Nat, Rational>>,
    /// Rows whose `u(m)` is irrational; their entry is a rational of the same
    /// sign, which is all that rank and zero tests look at.
    pub surrogate_rows: BTreeSet<Nat>,
    /// Columns whose fiber is infinite and only partly covered by the rows.
    pub fiber_truncated: BTreeSet<Nat>,
}

impl TruncationMatrix {
    pub fn entry(&self, m: Nat, n: Nat) -> Rational {
        self.columns.get(&n).and_then(|c| c.get(&m)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn column_nnz(&self, n: Nat) -> u64 {
        self.columns.get(&n).map_or(0, |c| c.len() as u64)
    }

    pub fn nnz(&self) -> u64 {
        self.columns.values().map(|c| c.len() as u64).sum()
    }

    /// `M x` on rows `1..=R`, for `x` indexed by column.
    pub fn apply(&self, x: &BTreeMap<Nat, Rational>) -> BTreeMap<Nat, Rational> {
        let mut out = BTreeMap::new();
        for (n, xn) in x.iter().filter(|(n, v)| **n <= self.cols && !v.is_zero()) {
            for (&m, v) in self.columns.get(n).into_iter().flatten() {
                out.insert(m, v * xn);
            }
        }
        out
    }
}

/// A rational with the sign of the irrational `u(m)`.
fn surrogate(op: &OperatorSpec, m: Nat) -> Rational {
    let mut tol = Rational::new(1.into(), 1024.into());
    loop {
        let e = op.u.enclosure_at(m, &tol);
        if !e.contains_zero() {
            return e.midpoint();
        }
        tol = tol / int(1024);
    }
}

/// The section on columns `1..=W`. `R` is large enough to hold every finite
/// fiber of a column, and the first `W` points of an infinite one.
pub fn build_matrix(op: &OperatorSpec, w: Nat) -> TruncationMatrix {
    let w = w.max(1);
    let mut rows = w.max(op.phi.tail_start() + 2).max(op.u.tail_start() + 2);
    let mut fiber_truncated = BTreeSet::new();
    for n in 1..=w {
        let fiber = op.phi.fiber(n);
        match fiber.cardinality() {
            ExtNat::Finite(_) => rows = rows.max(fiber.max_element().unwrap_or(0)),
            ExtNat::Infinite => {
                fiber_truncated.insert(n);
                rows = rows.max(fiber.enumerate(w as usize).last().copied().unwrap_or(0));
            }
        }
    }
    let mut columns: BTreeMap<Nat, BTreeMap<Nat, Rational>> = BTreeMap::new();
    let mut surrogate_rows = BTreeSet::new();
    for m in 1..=rows {
        let Ok(n) = op.phi.map_at_checked(m) else { continue };
        if n > w || op.u.is_zero_at(m) {
            continue;
        }
        let v = op.u.value_at(m).unwrap_or_else(|_| {
            surrogate_rows.insert(m);
            surrogate(op, m)
        });
        columns.entry(n).or_default().insert(m, v);
    }
    TruncationMatrix { rows, cols: w, columns, surrogate_rows, fiber_truncated }
}
