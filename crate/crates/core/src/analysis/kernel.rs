//! Kernels of `(uC_φ)ᵐ`: spanned by the `χₙ` with `n ∉ φₘ(S(u))`.

use num_traits::Zero;

use super::OperatorSpec;
use crate::error::{Error, Hypothesis, Result};
use crate::natset::{ExtNat, Nat, NatSet};
use crate::rational::Rational;
use crate::symbols::{check_support_invariant, PowerSeq, SeqExpr};

fn require_invariant(op: &OperatorSpec) -> Result<()> {
    if check_support_invariant(&op.u, &op.phi)? {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(Hypothesis::SupportNotInvariant))
    }
}

/// `φₘ(S(u))`. For `m ≥ 2` this describes the kernel only when `S(u)` is
/// invariant, which is checked.
fn power_image(op: &OperatorSpec, power: u32) -> Result<NatSet> {
    if power == 0 {
        return Err(Error::invalid("power must be positive"));
    }
    if power > 1 {
        require_invariant(op)?;
    }
    op.phi.iterate(power)?.image(&op.u.support())
}

/// `dim N((uC_φ)ᵐ) = |ℕ − φₘ(S(u))|`.
pub fn kernel_dim(op: &OperatorSpec, power: u32) -> Result<ExtNat> {
    Ok(power_image(op, power)?.cardinality_of_complement())
}

/// The first `limit` indices `n` with `χₙ ∈ N((uC_φ)ᵐ)`.
pub fn kernel_basis(op: &OperatorSpec, power: u32, limit: usize) -> Result<Vec<Nat>> {
    Ok(power_image(op, power)?.enumerate_complement(limit))
}

/// `dim(ℓp / N(uC_φ)) = |φ(S(u))|`.
pub fn kernel_codim(op: &OperatorSpec) -> Result<ExtNat> {
    Ok(op.phi.image(&op.u.support())?.cardinality())
}

/// Splits `f = g + h` with `g ∈ N(uC_φ)` (supported off `φ(S(u))`) and `h`
/// supported on `φ(S(u))`.
pub fn kernel_split(op: &OperatorSpec, f: &SeqExpr) -> Result<(SeqExpr, SeqExpr)> {
    let image = op.phi.image(&op.u.support())?;
    let value = |n: Nat| -> Result<Rational> {
        if f.is_zero_at(n) {
            Ok(Rational::zero())
        } else {
            f.value_at(n)
        }
    };
    let restrict = |points: &[Nat]| -> Result<SeqExpr> {
        PowerSeq::finite(points.iter().map(|&n| Ok((n, value(n)?))).collect::<Result<Vec<_>>>()?)
    };
    let erase = |points: &[Nat]| -> Result<SeqExpr> { f.with_overrides(points.iter().map(|&n| (n, Rational::zero()))) };
    if f.is_finitely_supported() {
        let (h, g): (Vec<_>, Vec<_>) =
            f.overrides().iter().map(|(&n, v)| (n, v.clone())).partition(|(n, _)| image.member(*n));
        return Ok((PowerSeq::finite(g)?, PowerSeq::finite(h)?));
    }
    if let Some(points) = image.as_finite() {
        return Ok((erase(points)?, restrict(points)?));
    }
    if image.cardinality_of_complement().is_finite() {
        let outside = image.complement()?;
        let points = outside.as_finite().expect("finite complement");
        return Ok((restrict(points)?, erase(points)?));
    }
    Err(Error::unsupported(format!("restricting a power-sum tail to {image}")))
}

/// `N(uC_φ) = N((uC_φ)²)` iff `φ₂(S(u)) = φ(S(u))`, under invariance.
pub fn kernel_stabilizes(op: &OperatorSpec) -> Result<bool> {
    require_invariant(op)?;
    images_stabilize(op)
}

/// The raw comparison `φ₂(S(u)) = φ(S(u))`, without the invariance gate.
pub fn images_stabilize(op: &OperatorSpec) -> Result<bool> {
    let support = op.u.support();
    let once = op.phi.image(&support)?;
    let twice = op.phi.iterate(2)?.image(&support)?;
    Ok(once.set_equal(&twice))
}

/// Self-check: for `u` bounded away from zero, the kernel of `uC_φ` is
/// finite-dimensional iff the kernels of all its powers are.
pub fn kernel_finite_transfer_check(op: &OperatorSpec, max_power: u32) -> Result<bool> {
    if !op.u.is_bounded_away_from_zero() {
        return Err(Error::HypothesisViolated(Hypothesis::NotBoundedAwayFromZero));
    }
    let first = kernel_dim(op, 1)?.is_finite();
    for m in 2..=max_power {
        if kernel_dim(op, m)?.is_finite() != first {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;
    use crate::symbols::{MapTail, SelfMap, Term};

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn one_plus_inv(zero_upto: Nat) -> PowerSeq {
        PowerSeq::new((1..=zero_upto).map(|n| (n, q("0"))), [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap()
    }

    fn collapse_then(upto: Nat, tail: MapTail) -> SelfMap {
        SelfMap::new((1..=upto).map(|n| (n, 1)), tail).unwrap()
    }

    fn op(u: PowerSeq, phi: SelfMap) -> OperatorSpec {
        OperatorSpec::new(u, phi, q("2")).unwrap()
    }

    #[test]
    fn collapsing_identity() {
        let o = op(one_plus_inv(3), collapse_then(5, MapTail::Identity));
        assert_eq!(kernel_dim(&o, 1).unwrap(), ExtNat::Finite(4));
        assert_eq!(kernel_basis(&o, 1, 10).unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(kernel_codim(&o).unwrap(), ExtNat::Infinite);
        // S(u) = {n ≥ 4} is not invariant: 4 ↦ 1
        assert_eq!(kernel_dim(&o, 2), Err(Error::HypothesisViolated(Hypothesis::SupportNotInvariant)));
        assert!(images_stabilize(&o).unwrap());
        assert!(kernel_stabilizes(&o).is_err());
    }

    #[test]
    fn infinite_kernel_for_power_tail() {
        let u = PowerSeq::new((1..=10).map(|n| (n, q("0"))), [Term::new(q("1"), q("1"))]).unwrap();
        let o = op(u, SelfMap::new([], MapTail::Power(2)).unwrap());
        assert_eq!(kernel_dim(&o, 1).unwrap(), ExtNat::Infinite);
        assert_eq!(kernel_dim(&o, 3).unwrap(), ExtNat::Infinite);
        assert_eq!(kernel_codim(&o).unwrap(), ExtNat::Infinite);
        assert_eq!(kernel_basis(&o, 1, 3).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn constant_map_kernel() {
        let u = PowerSeq::new([], [Term::new(q("1"), q("2"))]).unwrap();
        let o = op(u, SelfMap::constant(1));
        assert_eq!(kernel_codim(&o).unwrap(), ExtNat::Finite(1));
        assert_eq!(kernel_basis(&o, 1, 4).unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(kernel_codim(&op(PowerSeq::zero(), SelfMap::identity())).unwrap(), ExtNat::Finite(0));
    }

    #[test]
    fn identity_kernels() {
        let o = op(one_plus_inv(0), SelfMap::identity());
        for m in 1..5 {
            assert_eq!(kernel_dim(&o, m).unwrap(), ExtNat::Finite(0));
        }
        assert!(kernel_basis(&o, 1, 5).unwrap().is_empty());
        assert!(kernel_stabilizes(&o).unwrap());
        let shift = op(one_plus_inv(0), SelfMap::new([], MapTail::Affine { a: 1, b: 1 }).unwrap());
        assert!(!kernel_stabilizes(&shift).unwrap());
        assert!(kernel_finite_transfer_check(&shift, 4).unwrap());
        assert_eq!(kernel_dim(&shift, 3).unwrap(), ExtNat::Finite(3));
    }

    #[test]
    fn splits() {
        let o = op(one_plus_inv(3), collapse_then(5, MapTail::Identity));
        let f = PowerSeq::finite([(2, q("1")), (6, q("1"))]).unwrap();
        let (g, h) = kernel_split(&o, &f).unwrap();
        assert_eq!((g, h), (PowerSeq::unit(2), PowerSeq::unit(6)));
        let (g, h) = kernel_split(&o, &PowerSeq::zero()).unwrap();
        assert!(g.is_zero() && h.is_zero());
        // a tail vector: the image {1} ∪ {n ≥ 6} is cofinite
        let f = PowerSeq::new([], [Term::new(q("1"), q("1"))]).unwrap();
        let (g, h) = kernel_split(&o, &f).unwrap();
        assert_eq!(g, PowerSeq::finite([(2, q("1/2")), (3, q("1/3")), (4, q("1/4")), (5, q("1/5"))]).unwrap());
        for n in 1..50 {
            let sum = g.value_at(n).unwrap() + h.value_at(n).unwrap();
            assert_eq!(sum, f.value_at(n).unwrap());
        }
    }
}
