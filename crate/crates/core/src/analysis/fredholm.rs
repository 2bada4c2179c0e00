//! Fredholm index and the aggregated report.

use serde::{Deserialize, Serialize};

use super::kernel::{kernel_codim, kernel_dim};
use super::norm::{boundedness, boundedness_with, closed_range_unchecked};
use super::range::{multi_fiber_set, range_codim_formula};
use super::{NormValue, OperatorSpec, Tolerance};
use crate::error::{Error, Hypothesis, Result};
use crate::natset::{ExtNat, NatSet};
use crate::symbols::check_support_invariant;

/// Outcome of one hypothesis check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlag {
    pub name: String,
    pub holds: bool,
}

impl HypothesisFlag {
    fn new(name: &str, holds: bool) -> Self {
        HypothesisFlag { name: name.to_string(), holds }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub bounded: bool,
    pub fiber_sum_sup: NormValue,
    pub norm: Option<NormValue>,
    pub kernel_dim: ExtNat,
    pub kernel_codim: ExtNat,
    pub multi_fiber_set: NatSet,
    pub range_codim: ExtNat,
    pub closed_range: bool,
    pub fredholm_index: Option<i64>,
    pub hypothesis_flags: Vec<HypothesisFlag>,
}

impl AnalysisReport {
    pub fn flag(&self, name: &str) -> Option<bool> {
        self.hypothesis_flags.iter().find(|f| f.name == name).map(|f| f.holds)
    }
}

fn index(kernel: ExtNat, codim: ExtNat) -> Option<i64> {
    match (kernel, codim) {
        (ExtNat::Finite(k), ExtNat::Finite(c)) => Some(k as i64 - c as i64),
        _ => None,
    }
}

/// `ind(uC_φ) = |ℕ − φ(S(u))| − Σ_{n ∈ A} (|M_n| − 1)` when both terms are
/// finite; `None` when the operator is not Fredholm.
pub fn fredholm(op: &OperatorSpec) -> Result<Option<i64>> {
    if !boundedness(op)?.bounded {
        return Err(Error::HypothesisViolated(Hypothesis::Unbounded));
    }
    if !closed_range_unchecked(op) {
        return Err(Error::HypothesisViolated(Hypothesis::RangeNotClosed));
    }
    Ok(index(kernel_dim(op, 1)?, range_codim_formula(op)?))
}

pub fn analyze(op: &OperatorSpec) -> Result<AnalysisReport> {
    analyze_with(op, &Tolerance::default())
}

struct Structure {
    kernel_dim: ExtNat,
    kernel_codim: ExtNat,
    multi_fiber_set: NatSet,
    range_codim: ExtNat,
    invariant: bool,
    composition_bounded: bool,
}

fn structure(op: &OperatorSpec) -> Result<Structure> {
    Ok(Structure {
        kernel_dim: kernel_dim(op, 1)?,
        kernel_codim: kernel_codim(op)?,
        multi_fiber_set: multi_fiber_set(op)?,
        range_codim: range_codim_formula(op)?,
        invariant: check_support_invariant(&op.u, &op.phi)?,
        composition_bounded: boundedness(&op.unweighted())?.bounded,
    })
}

/// Every report field; hypothesis failures become flags. The norm and the
/// set-theoretic quantities are independent and may run concurrently.
pub fn analyze_with(op: &OperatorSpec, tol: &Tolerance) -> Result<AnalysisReport> {
    let (b, s) = tol.exec.join(|| boundedness_with(op, tol), || structure(op));
    let (b, s) = (b?, s?);
    let closed = b.bounded && closed_range_unchecked(op);
    let fredholm_index = if closed { index(s.kernel_dim, s.range_codim) } else { None };
    let hypothesis_flags = vec![
        HypothesisFlag::new("bounded", b.bounded),
        HypothesisFlag::new("composition_bounded", s.composition_bounded),
        HypothesisFlag::new("support_invariant", s.invariant),
        HypothesisFlag::new("bounded_away_from_zero", op.u.is_bounded_away_from_zero()),
        HypothesisFlag::new("closed_range", closed),
    ];
    Ok(AnalysisReport {
        bounded: b.bounded,
        fiber_sum_sup: b.fiber_sum_sup,
        norm: b.norm,
        kernel_dim: s.kernel_dim,
        kernel_codim: s.kernel_codim,
        multi_fiber_set: s.multi_fiber_set,
        range_codim: s.range_codim,
        closed_range: closed,
        fredholm_index,
        hypothesis_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse, Rational};
    use crate::symbols::{MapTail, PowerSeq, SelfMap, Term};

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn fixture(zero_upto: u64, collapse_upto: u64, b: i64) -> OperatorSpec {
        let u = PowerSeq::new((1..=zero_upto).map(|n| (n, q("0"))), [Term::constant(q("1")), Term::new(q("1"), q("1"))])
            .unwrap();
        let phi = SelfMap::new((1..=collapse_upto).map(|n| (n, 1)), MapTail::Affine { a: 1, b }).unwrap();
        OperatorSpec::new(u, phi, q("2")).unwrap()
    }

    #[test]
    fn indices() {
        assert_eq!(fredholm(&fixture(3, 5, 0)).unwrap(), Some(3));
        assert_eq!(fredholm(&fixture(2, 5, -2)).unwrap(), Some(0));
        assert_eq!(fredholm(&fixture(2, 5, -3)).unwrap(), Some(-1));
    }

    #[test]
    fn report() {
        let r = analyze(&fixture(3, 5, 0)).unwrap();
        assert_eq!(r.kernel_dim, ExtNat::Finite(4));
        assert_eq!(r.range_codim, ExtNat::Finite(1));
        assert!(r.closed_range && r.bounded);
        assert_eq!(r.fredholm_index, Some(3));
        assert_eq!(r.flag("support_invariant"), Some(false));
        // σ²(1) = (5/4)² + (6/5)² dominates the identity tail
        assert_eq!(r.fiber_sum_sup, NormValue::Exact { value: q("1201/400") });
        let (lo, hi) = r.norm.unwrap().interval().unwrap().to_f64();
        assert!(lo <= 1201f64.sqrt() / 20.0 && 1201f64.sqrt() / 20.0 <= hi);
    }

    #[test]
    fn zero_operator() {
        let z = OperatorSpec::new(PowerSeq::zero(), SelfMap::identity(), q("2")).unwrap();
        let r = analyze(&z).unwrap();
        assert!(r.bounded);
        assert_eq!(r.norm, Some(NormValue::Exact { value: q("0") }));
        assert_eq!((r.kernel_dim, r.kernel_codim, r.fredholm_index), (ExtNat::Infinite, ExtNat::Finite(0), None));
    }

    #[test]
    fn vanishing_weight() {
        let u = PowerSeq::new([], [Term::new(q("1"), q("1"))]).unwrap();
        let o = OperatorSpec::new(u, SelfMap::identity(), q("2")).unwrap();
        let r = analyze(&o).unwrap();
        assert!(r.bounded && !r.closed_range);
        assert_eq!(r.fredholm_index, None);
        assert_eq!(r.flag("closed_range"), Some(false));
        assert_eq!(fredholm(&o), Err(Error::HypothesisViolated(Hypothesis::RangeNotClosed)));
    }

    #[test]
    fn report_is_policy_independent() {
        use crate::exec::Exec;
        let o = fixture(2, 5, -2);
        let seq = analyze_with(&o, &Tolerance::default().with_exec(Exec::Sequential)).unwrap();
        let par = analyze_with(&o, &Tolerance::default().with_exec(Exec::Parallel)).unwrap();
        assert_eq!(seq, par);
    }
}
