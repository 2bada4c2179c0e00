//! Range of `uC_φ`: weighted fibers `M_k = φ⁻¹(k) ∩ S(u)`, the multi-fiber
//! set `A = {k : |M_k| > 1}`, co-dimension and membership.

use num_traits::{One, Zero};

use super::norm::boundedness;
use super::OperatorSpec;
use crate::error::{Error, Hypothesis, Result};
use crate::natset::{ExtNat, Nat, NatSet};
use crate::rational::Rational;
use crate::symbols::SeqExpr;

/// `|M_n| = |φ⁻¹(n) ∩ S(u)|`.
pub fn weighted_fiber_size(op: &OperatorSpec, n: Nat) -> ExtNat {
    op.phi.fiber(n).intersect(&op.u.support()).expect("dense intersection").cardinality()
}

/// Sufficient condition for an infinite-dimensional range: infinitely many
/// nonempty weighted fibers, i.e. `φ(S(u))` infinite.
pub fn range_dim_is_infinite(op: &OperatorSpec) -> Result<bool> {
    Ok(op.phi.image(&op.u.support())?.cardinality() == ExtNat::Infinite)
}

/// `A = {n : |M_n| ≥ 2}`; only special values of `φ` can have fibers with
/// more than one element.
pub fn multi_fiber_set(op: &OperatorSpec) -> Result<NatSet> {
    let special = op.phi.special_values();
    let members = special
        .as_finite()
        .expect("finite")
        .iter()
        .copied()
        .filter(|&n| weighted_fiber_size(op, n) >= ExtNat::Finite(2));
    Ok(NatSet::finite(members))
}

/// `Σ_{n ∈ A} (|M_n| − 1)`, infinite if some `M_n` is. No hypotheses checked.
pub fn range_codim_formula(op: &OperatorSpec) -> Result<ExtNat> {
    let a = multi_fiber_set(op)?;
    let mut total = 0u64;
    for &n in a.as_finite().expect("finite") {
        match weighted_fiber_size(op, n) {
            ExtNat::Finite(k) => total += k - 1,
            ExtNat::Infinite => return Ok(ExtNat::Infinite),
        }
    }
    Ok(ExtNat::Finite(total))
}

/// `dim(ℓp / R(uC_φ))`, requiring both `uC_φ` and `C_φ` bounded.
pub fn range_codim(op: &OperatorSpec) -> Result<ExtNat> {
    if !boundedness(op)?.bounded {
        return Err(Error::HypothesisViolated(Hypothesis::Unbounded));
    }
    if !boundedness(&op.unweighted())?.bounded {
        return Err(Error::HypothesisViolated(Hypothesis::CompositionUnbounded));
    }
    range_codim_formula(op)
}

/// `f ∈ R(uC_φ)`: `f = u·(h∘φ)` forces `f = 0` off `S(u)`, `f/u` constant
/// (`= h(k)`) on each `M_k`, and `Σ_k |h(k)|ᵖ < ∞`.
pub fn range_membership(op: &OperatorSpec, f: &SeqExpr) -> Result<bool> {
    if !boundedness(op)?.bounded {
        return Err(Error::HypothesisViolated(Hypothesis::Unbounded));
    }
    let u = &op.u;
    let support = u.support();
    let f_at = |m: Nat| -> Result<Rational> { if f.is_zero_at(m) { Ok(Rational::zero()) } else { f.value_at(m) } };
    let ratio = |m: Nat| -> Result<Rational> { Ok(f_at(m)? / u.value_at(m)?) };

    if u.has_zero_formula() {
        if !f.has_zero_formula() {
            return Ok(false);
        }
        if f.overrides().iter().any(|(&k, v)| !v.is_zero() && !support.member(k)) {
            return Ok(false);
        }
    } else {
        let outside = support.complement()?;
        if outside.as_finite().expect("cofinite support").iter().any(|&m| !f.is_zero_at(m)) {
            return Ok(false);
        }
    }

    let special = op.phi.special_values();
    for &k in special.as_finite().expect("finite") {
        let m_k = op.phi.fiber(k).intersect(&support)?;
        match m_k.as_finite() {
            Some(points) => {
                let mut values = points.iter().map(|&m| ratio(m));
                if let Some(first) = values.next() {
                    let first = first?;
                    for v in values {
                        if v? != first {
                            return Ok(false);
                        }
                    }
                }
            }
            None => {
                // constant tail: f/u must be one constant c on a cofinite set,
                // so the formulas are proportional
                let c = match (f.leading(), u.leading()) {
                    (None, _) => Rational::zero(),
                    (Some(a), Some(b)) => &a.coeff / &b.coeff,
                    (Some(_), None) => return Ok(false),
                };
                let scaled: Vec<_> = u.terms().iter().map(|t| (&t.coeff * &c, t.alpha.clone())).collect();
                let f_terms: Vec<_> = f.terms().iter().map(|t| (t.coeff.clone(), t.alpha.clone())).collect();
                if !c.is_zero() && scaled != f_terms || c.is_zero() && !f.has_zero_formula() {
                    return Ok(false);
                }
                let bound = f
                    .tail_start()
                    .max(u.tail_start())
                    .max(op.phi.tail_start())
                    .max(u.formula_support_from().unwrap_or(1));
                for m in (1..bound).filter(|&m| m_k.member(m)) {
                    if ratio(m)? != c {
                        return Ok(false);
                    }
                }
            }
        }
    }

    // singleton fibers of an injective tail: h(φ(m)) = f(m)/u(m) along the tail
    if op.phi.tail().is_injective() && !f.has_zero_formula() {
        let (Some(fl), Some(ul)) = (f.leading(), u.leading()) else {
            return Ok(false);
        };
        let decay = &fl.alpha - &ul.alpha;
        if decay * &op.p <= Rational::one() {
            return Ok(false);
        }
    }
    Ok(true)
}
