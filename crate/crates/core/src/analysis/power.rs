//! The action `f ↦ u·(f∘φ)` and its powers
//! `(uC_φ)ᵐ f = u·(u∘φ)⋯(u∘φₘ₋₁)·(f∘φₘ)`.

use num_traits::Zero;

use super::OperatorSpec;
use crate::error::{Error, Result};
use crate::natset::{Nat, NatSet};
use crate::rational::{Interval, Rational};
use crate::symbols::{seq_compose, seq_pointwise_mul, SelfMap, SeqExpr};

/// `u·(f∘φ)` as a symbolic sequence.
pub fn apply(op: &OperatorSpec, f: &SeqExpr) -> Result<SeqExpr> {
    seq_pointwise_mul(&op.u, &seq_compose(f, &op.phi)?)
}

/// `(u·(f∘φ))(n)`, exactly.
pub fn apply_at(op: &OperatorSpec, f: &SeqExpr, n: Nat) -> Result<Rational> {
    if op.u.is_zero_at(n) {
        return Ok(Rational::zero());
    }
    let m = op.phi.map_at_checked(n)?;
    if f.is_zero_at(m) {
        return Ok(Rational::zero());
    }
    Ok(op.u.value_at(n)? * f.value_at(m)?)
}

/// `(uC_φ)ᵐ f` by repeated application.
pub fn apply_power(op: &OperatorSpec, f: &SeqExpr, m: u32) -> Result<SeqExpr> {
    (0..m).try_fold(f.clone(), |g, _| apply(op, &g))
}

/// `(uC_φ)ᵐ = w_m C_{φₘ}` with `w_m = u·(u∘φ)⋯(u∘φₘ₋₁)`.
#[derive(Clone, Debug)]
pub struct PowerSpec {
    pub op: OperatorSpec,
    pub power: u32,
    /// `φₘ`.
    pub map: SelfMap,
    /// `S(w_m)`: the `n` whose first `m` orbit points all lie in `S(u)`.
    pub support: NatSet,
}

impl PowerSpec {
    pub fn weight_at(&self, n: Nat) -> Result<Rational> {
        if !self.support.member(n) {
            return Ok(Rational::zero());
        }
        let mut x = n;
        let mut acc = Rational::from_integer(1.into());
        for _ in 0..self.power {
            acc *= self.op.u.value_at(x)?;
            x = self.op.phi.map_at_checked(x)?;
        }
        Ok(acc)
    }

    pub fn weight_enclosure_at(&self, n: Nat, tol: &Rational) -> Result<Interval> {
        if !self.support.member(n) {
            return Ok(Interval::zero());
        }
        let each = tol / Rational::from_integer((4 * self.power as i64 + 4).into());
        let mut x = n;
        let mut acc = Interval::point(Rational::from_integer(1.into()));
        for _ in 0..self.power {
            acc = acc.mul(&self.op.u.enclosure_at(x, &each));
            x = self.op.phi.map_at_checked(x)?;
        }
        Ok(acc)
    }
}

pub fn power_spec(op: &OperatorSpec, m: u32) -> Result<PowerSpec> {
    if m == 0 {
        return Err(Error::invalid("power must be positive"));
    }
    let su = op.u.support();
    let mut support = su.clone();
    for _ in 1..m {
        support = su.intersect(&op.phi.preimage(&support)?)?;
    }
    Ok(PowerSpec { op: op.clone(), power: m, map: op.phi.iterate(m)?, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;
    use crate::symbols::{MapTail, PowerSeq, Term};

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn shifted() -> OperatorSpec {
        let u = PowerSeq::new((1..=5).map(|n| (n, q("0"))), [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap();
        let phi = SelfMap::new((1..=7).map(|n| (n, 1)), MapTail::Affine { a: 1, b: 1 }).unwrap();
        OperatorSpec::new(u, phi, q("2")).unwrap()
    }

    #[test]
    fn apply_unit() {
        let o = shifted();
        let g = apply(&o, &PowerSeq::unit(1)).unwrap();
        assert_eq!(g, PowerSeq::finite([(6, q("7/6")), (7, q("8/7"))]).unwrap());
        assert!(apply(&o, &PowerSeq::zero()).unwrap().is_zero());
        let z = OperatorSpec::new(PowerSeq::zero(), o.phi.clone(), q("2")).unwrap();
        assert!(apply(&z, &PowerSeq::unit(3)).unwrap().is_zero());
        for n in 1..30 {
            assert_eq!(apply_at(&o, &PowerSeq::unit(1), n).unwrap(), g.value_at(n).unwrap());
        }
    }

    #[test]
    fn power_weights() {
        let u = PowerSeq::new((1..=3).map(|n| (n, q("0"))), [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap();
        let phi = SelfMap::new((1..=5).map(|n| (n, 1)), MapTail::Identity).unwrap();
        let o = OperatorSpec::new(u, phi, q("2")).unwrap();
        let ps = power_spec(&o, 2).unwrap();
        assert_eq!(ps.weight_at(9).unwrap(), q("100/81"));
        assert_eq!(ps.weight_at(2).unwrap(), q("0"));
        // 4 ↦ 1 ∉ S(u)
        assert!(!ps.support.member(4));
        assert_eq!(ps.support, NatSet::from_threshold(6));
        let one = power_spec(&o, 1).unwrap();
        assert_eq!((one.map, one.support), (o.phi.clone(), o.u.support()));
    }
}
