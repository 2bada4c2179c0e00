use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{build_matrix, column_rank, TruncationMatrix};
use crate::analysis::{kernel_dim, range_codim_formula, OperatorSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::natset::{ExtNat, Nat, NatSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Kernel,
    Range,
    #[default]
    All,
}

impl Check {
    fn kernel(self) -> bool {
        self != Check::Range
    }

    fn range(self) -> bool {
        self != Check::Kernel
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Check::Kernel),
            "range" => Ok(Check::Range),
            "all" => Ok(Check::All),
            _ => Err(Error::invalid(format!("unknown check '{s}' (expected kernel, range or all)"))),
        }
    }
}

fn zero_column(op: &OperatorSpec, m: &TruncationMatrix, n: Nat) -> bool {
    if m.fiber_truncated.contains(&n) {
        // the rows hold only part of the fiber; ask the support directly
        op.phi.fiber(n).intersect(&op.u.support()).expect("dense intersection").is_empty()
    } else {
        m.column_nnz(n) == 0
    }
}

fn kernel_count(op: &OperatorSpec, m: &TruncationMatrix) -> u64 {
    (1..=m.cols).filter(|&n| zero_column(op, m, n)).count() as u64
}

fn deficiency(m: &TruncationMatrix) -> u64 {
    (1..=m.cols).map(|n| m.column_nnz(n).saturating_sub(1)).sum()
}

/// Columns `n ≤ W` that vanish on the rows.
pub fn windowed_kernel_count(op: &OperatorSpec, w: Nat) -> u64 {
    kernel_count(op, &build_matrix(op, w))
}

/// Codimension of the column span inside the joint row support of the
/// nonzero columns: `Σ_n max(0, nnz(n) − 1)`.
pub fn windowed_range_deficiency(op: &OperatorSpec, w: Nat) -> u64 {
    deficiency(&build_matrix(op, w))
}

/// Counts for one window, with the closed-form values restricted to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub w: Nat,
    pub r: Nat,
    pub zero_column_count: u64,
    pub column_rank_deficiency: u64,
    /// Exact rank of the nonzero columns.
    pub rank: u64,
    /// `nnz(n)` for `n = 1..=W`.
    pub per_column_fiber_sizes: Vec<u64>,
    pub fiber_truncated: Vec<Nat>,
    pub predicted_kernel: u64,
    pub predicted_deficiency: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub w: Nat,
    pub quantity: String,
    pub column: Option<Nat>,
    pub expected: u64,
    pub observed: u64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W={} {}", self.w, self.quantity)?;
        if let Some(n) = self.column {
            write!(f, " column {n}")?;
        }
        write!(f, ": expected {}, observed {}", self.expected, self.observed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    pub check: Check,
    pub windows: Vec<WindowCounts>,
    /// The last three windows agree with each other and with the closed
    /// form restricted to each window.
    pub stabilized: bool,
    pub kernel_dim: ExtNat,
    pub range_codim: ExtNat,
    pub mismatches: Vec<Mismatch>,
}

impl WindowReport {
    pub fn last(&self) -> &WindowCounts {
        self.windows.last().expect("at least three windows")
    }

    /// No column disagrees, and every finite closed-form value is the
    /// stabilized count.
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

struct Prediction {
    image: NatSet,
    support: NatSet,
    special: NatSet,
}

impl Prediction {
    fn fiber_size(&self, op: &OperatorSpec, n: Nat, rows: Nat) -> u64 {
        if self.special.member(n) {
            op.phi.fiber(n).intersect(&self.support).expect("dense intersection").count_upto(rows)
        } else {
            self.image.member(n) as u64
        }
    }
}

fn run_window(op: &OperatorSpec, pred: &Prediction, check: Check, w: Nat) -> (WindowCounts, Vec<Mismatch>) {
    let m = build_matrix(op, w);
    let sizes: Vec<u64> = (1..=w).map(|n| m.column_nnz(n)).collect();
    let rank = column_rank(&m) as u64;
    let counts = WindowCounts {
        w,
        r: m.rows,
        zero_column_count: kernel_count(op, &m),
        column_rank_deficiency: deficiency(&m),
        rank,
        per_column_fiber_sizes: sizes.clone(),
        fiber_truncated: m.fiber_truncated.iter().copied().collect(),
        predicted_kernel: w - pred.image.count_upto(w),
        predicted_deficiency: (1..=w).map(|n| pred.fiber_size(op, n, m.rows).saturating_sub(1)).sum(),
    };
    let mut bad = Vec::new();
    let mut flag = |quantity: &str, column, expected, observed| {
        if expected != observed {
            bad.push(Mismatch { w, quantity: quantity.to_string(), column, expected, observed });
        }
    };
    for n in 1..=w {
        if check.kernel() {
            flag("kernel", Some(n), !pred.image.member(n) as u64, zero_column(op, &m, n) as u64);
        }
        if check.range() {
            flag("fiber size", Some(n), pred.fiber_size(op, n, m.rows), sizes[n as usize - 1]);
        }
    }
    if check.range() {
        let nonzero = sizes.iter().filter(|&&s| s > 0).count() as u64;
        flag("rank", None, nonzero, rank);
        flag("rank deficiency", None, m.nnz() - rank, counts.column_rank_deficiency);
    }
    (counts, bad)
}

/// Runs the windows (possibly concurrently) and compares with the closed form.
pub fn stabilized_check(op: &OperatorSpec, check: Check, windows: &[Nat], exec: Exec) -> Result<WindowReport> {
    if windows.len() < 3 || windows.windows(2).any(|p| p[0] >= p[1]) || windows[0] == 0 {
        return Err(Error::invalid("need at least three increasing positive windows"));
    }
    let support = op.u.support();
    let pred = Prediction { image: op.phi.image(&support)?, support, special: op.phi.special_values() };
    let kernel = kernel_dim(op, 1)?;
    let range = range_codim_formula(op)?;
    let runs = exec.map(windows, |&w| run_window(op, &pred, check, w));
    let mut mismatches: Vec<Mismatch> = runs.iter().flat_map(|(_, b)| b.clone()).collect();
    let windows: Vec<WindowCounts> = runs.into_iter().map(|(c, _)| c).collect();

    let tail = &windows[windows.len() - 3..];
    let same = |f: fn(&WindowCounts) -> u64| tail.iter().all(|c| f(c) == f(&tail[0]));
    let clean = mismatches.is_empty();
    let kernel_stable = clean && same(|c| c.zero_column_count);
    let range_stable = clean && same(|c| c.column_rank_deficiency);
    let stabilized = (!check.kernel() || kernel_stable) && (!check.range() || range_stable);

    let last = windows.last().expect("nonempty");
    let mut versus = |quantity: &str, closed: ExtNat, stable: bool, observed: u64| {
        if let ExtNat::Finite(k) = closed {
            if !stable || k != observed {
                mismatches.push(Mismatch { w: last.w, quantity: quantity.to_string(), column: None, expected: k, observed });
            }
        }
    };
    if check.kernel() {
        versus("kernel dim", kernel, kernel_stable, last.zero_column_count);
    }
    if check.range() {
        versus("range codim", range, range_stable, last.column_rank_deficiency);
    }
    Ok(WindowReport { check, windows, stabilized, kernel_dim: kernel, range_codim: range, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse, Rational};
    use crate::symbols::{MapTail, PowerSeq, SelfMap, Term};

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn one_plus_inv(zero_upto: Nat) -> PowerSeq {
        PowerSeq::new((1..=zero_upto).map(|n| (n, q("0"))), [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap()
    }

    fn op(u: PowerSeq, phi: SelfMap) -> OperatorSpec {
        OperatorSpec::new(u, phi, q("2")).unwrap()
    }

    fn collapse(upto: Nat, tail: MapTail) -> SelfMap {
        SelfMap::new((1..=upto).map(|n| (n, 1)), tail).unwrap()
    }

    const W: [Nat; 3] = [16, 32, 64];

    #[test]
    fn collapsing_identity() {
        let o = op(one_plus_inv(3), collapse(5, MapTail::Identity));
        assert_eq!(windowed_kernel_count(&o, 16), 4);
        let r = stabilized_check(&o, Check::All, &W, Exec::Parallel).unwrap();
        assert!(r.stabilized && r.agrees(), "{:?}", r.mismatches);
        assert_eq!(r.last().zero_column_count, 4);
    }

    #[test]
    fn deficiencies() {
        let o = op(one_plus_inv(5), collapse(7, MapTail::Affine { a: 1, b: 1 }));
        assert_eq!(windowed_range_deficiency(&o, 16), 1);
        let r = stabilized_check(&o, Check::Range, &W, Exec::Sequential).unwrap();
        assert!(r.stabilized && r.agrees());
        let o = op(one_plus_inv(2), collapse(5, MapTail::Affine { a: 1, b: -2 }));
        assert_eq!(windowed_range_deficiency(&o, 16), 2);
        assert_eq!(windowed_range_deficiency(&op(one_plus_inv(0), SelfMap::identity()), 16), 0);
        assert_eq!(windowed_kernel_count(&op(one_plus_inv(0), SelfMap::identity()), 16), 0);
    }

    #[test]
    fn constant_map() {
        let u = PowerSeq::new([], [Term::new(q("1"), q("2"))]).unwrap();
        let o = op(u, SelfMap::constant(1));
        assert_eq!(windowed_kernel_count(&o, 32), 31);
        let r = stabilized_check(&o, Check::Kernel, &W, Exec::Parallel).unwrap();
        assert!(!r.stabilized && r.agrees());
        // the one nonzero column keeps growing with the rows
        let r = stabilized_check(&o, Check::Range, &W, Exec::Parallel).unwrap();
        assert!(!r.stabilized && r.agrees());
    }

    #[test]
    fn growing_kernel() {
        let u = PowerSeq::new((1..=10).map(|n| (n, q("0"))), [Term::new(q("1"), q("1"))]).unwrap();
        let o = op(u, SelfMap::new([], MapTail::Power(2)).unwrap());
        let r = stabilized_check(&o, Check::Kernel, &W, Exec::Parallel).unwrap();
        assert!(!r.stabilized && r.agrees());
        assert_eq!(r.kernel_dim, ExtNat::Infinite);
        assert!(r.windows.windows(2).all(|p| p[0].zero_column_count < p[1].zero_column_count));
    }

    #[test]
    fn zero_operator() {
        let o = op(PowerSeq::zero(), SelfMap::identity());
        let r = stabilized_check(&o, Check::All, &W, Exec::Parallel).unwrap();
        for c in &r.windows {
            assert_eq!(c.zero_column_count, c.w);
        }
        assert!(r.agrees() && !r.stabilized);
    }

    #[test]
    fn policy_independent() {
        let o = op(one_plus_inv(2), collapse(5, MapTail::Affine { a: 1, b: -3 }));
        let a = stabilized_check(&o, Check::All, &W, Exec::Sequential).unwrap();
        let b = stabilized_check(&o, Check::All, &W, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(stabilized_check(&o, Check::All, &[16, 32], Exec::Sequential).is_err());
    }
}
