use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::natset::{affine_eval, Nat, NatSet};
use crate::rational::exact_iroot;

/// Closed-form rule of a self-map away from its overrides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapTail {
    Identity,
    Const(Nat),
    /// `n ↦ a·n + b`, `a ≥ 1`.
    Affine { a: u64, b: i64 },
    /// `n ↦ nᵉ`, `e ≥ 2`.
    Power(u32),
}

impl MapTail {
    pub fn eval(self, n: Nat) -> Option<Nat> {
        match self {
            MapTail::Identity => Some(n),
            MapTail::Const(k) => Some(k),
            MapTail::Affine { a, b } => affine_eval(a, b, n),
            MapTail::Power(e) => n.checked_pow(e),
        }
    }

    pub fn is_injective(self) -> bool {
        !matches!(self, MapTail::Const(_))
    }

    /// Tail solutions of `rule(m) = n`.
    pub(crate) fn solve(self, n: Nat) -> Option<Nat> {
        match self {
            MapTail::Identity => Some(n),
            MapTail::Const(_) => None,
            MapTail::Affine { a, b } => {
                let num = n as i128 - b as i128;
                (num >= a as i128 && num % a as i128 == 0).then(|| (num / a as i128) as Nat)
            }
            MapTail::Power(e) => exact_iroot(n, e),
        }
    }

    fn normalized(self) -> Result<MapTail> {
        Ok(match self {
            MapTail::Affine { a: 0, .. } => return Err(Error::invalid("affine slope must be positive")),
            MapTail::Affine { a: 1, b: 0 } | MapTail::Power(1) => MapTail::Identity,
            MapTail::Power(0) => return Err(Error::invalid("power exponent must be at least 2")),
            MapTail::Const(0) => return Err(Error::invalid("constant value must be positive")),
            t => t,
        })
    }

    /// Closed form of the `m`-fold composition of the rule with itself;
    /// `Const` needs the full map and is handled by the caller.
    fn iterate(self, m: u32) -> Result<MapTail> {
        let overflow = || Error::Overflow(format!("{m}-fold iterate of {self}"));
        match self {
            MapTail::Identity | MapTail::Const(_) => Ok(self),
            MapTail::Affine { a, b } => {
                let am = a.checked_pow(m).ok_or_else(overflow)?;
                // b·(aᵐ⁻¹ + … + a + 1)
                let geometric: i128 = if a == 1 { m as i128 } else { (am as i128 - 1) / (a as i128 - 1) };
                let bm = (b as i128).checked_mul(geometric).filter(|v| i64::try_from(*v).is_ok()).ok_or_else(overflow)?;
                Ok(MapTail::Affine { a: am, b: bm as i64 })
            }
            MapTail::Power(e) => Ok(MapTail::Power(e.checked_pow(m).ok_or_else(overflow)?)),
        }
    }
}

impl fmt::Display for MapTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MapTail::Identity => f.write_str("identity"),
            MapTail::Const(k) => write!(f, "const {k}"),
            MapTail::Affine { a, b } => {
                let lead = if a == 1 { "n".to_string() } else { format!("{a}*n") };
                match b.cmp(&0) {
                    std::cmp::Ordering::Less => write!(f, "{lead} - {}", b.unsigned_abs()),
                    std::cmp::Ordering::Equal => f.write_str(&lead),
                    std::cmp::Ordering::Greater => write!(f, "{lead} + {b}"),
                }
            }
            MapTail::Power(e) => write!(f, "n^{e}"),
        }
    }
}

/// A self-map of ℕ: finitely many overrides on top of a tail rule that
/// applies everywhere else. Canonical: overrides agreeing with the rule are
/// dropped, so the first position governed by the rule from there on is one
/// past the largest override key.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SelfMap {
    overrides: BTreeMap<Nat, Nat>,
    tail: MapTail,
}

impl SelfMap {
    pub fn new(overrides: impl IntoIterator<Item = (Nat, Nat)>, tail: MapTail) -> Result<Self> {
        let tail = tail.normalized()?;
        let mut map = BTreeMap::new();
        for (k, v) in overrides {
            if k == 0 || v == 0 {
                return Err(Error::invalid("self-maps act on positive integers"));
            }
            if tail.eval(k) != Some(v) {
                map.insert(k, v);
            } else {
                map.remove(&k);
            }
        }
        let out = SelfMap { overrides: map, tail };
        if let MapTail::Affine { a, b } = tail {
            // the rule is increasing, so its smallest unoverridden argument decides
            let first = (1..).find(|n| !out.overrides.contains_key(n)).expect("finite overrides");
            if affine_eval(a, b, first).is_none() {
                return Err(Error::invalid(format!("tail {tail} maps {first} outside ℕ")));
            }
        }
        Ok(out)
    }

    pub fn identity() -> Self {
        SelfMap { overrides: BTreeMap::new(), tail: MapTail::Identity }
    }

    pub fn constant(k: Nat) -> Self {
        Self::new([], MapTail::Const(k)).expect("positive constant")
    }

    pub fn overrides(&self) -> &BTreeMap<Nat, Nat> {
        &self.overrides
    }

    pub fn tail(&self) -> MapTail {
        self.tail
    }

    /// One past the largest override key.
    pub fn tail_start(&self) -> Nat {
        self.overrides.keys().next_back().map_or(1, |&k| k + 1)
    }

    pub fn override_keys(&self) -> NatSet {
        NatSet::finite(self.overrides.keys().copied())
    }

    /// `φ(n)`, or `Overflow` when it does not fit in 64 bits.
    pub fn map_at_checked(&self, n: Nat) -> Result<Nat> {
        match self.overrides.get(&n) {
            Some(&v) => Ok(v),
            None => self.tail.eval(n).ok_or_else(|| Error::Overflow(format!("φ({n}) under {}", self.tail))),
        }
    }

    /// `φ(n)`; panics if the value overflows 64 bits (power tails only).
    pub fn map_at(&self, n: Nat) -> Nat {
        self.map_at_checked(n).expect("φ(n) fits in 64 bits")
    }

    /// `φᵐ(n)` by direct iteration.
    pub fn orbit_at(&self, n: Nat, m: u32) -> Result<Nat> {
        (0..m).try_fold(n, |x, _| self.map_at_checked(x))
    }

    /// `φ⁻¹(n)`; finite, or cofinite for the value of a constant tail.
    pub fn fiber(&self, n: Nat) -> NatSet {
        let keys = self.override_keys();
        let exceptional = self.overrides.iter().filter(|&(_, &v)| v == n).map(|(&k, _)| k);
        let exceptional = NatSet::finite(exceptional);
        let tail = match self.tail {
            MapTail::Const(k) if k == n => NatSet::naturals().difference(&keys).expect("dense"),
            t => NatSet::finite(t.solve(n).filter(|m| !self.overrides.contains_key(m))),
        };
        exceptional.union(&tail).expect("dense union")
    }

    /// Values taken by the overrides, plus the constant of a constant tail:
    /// outside this set every fiber is tail-only and has at most one element.
    pub fn special_values(&self) -> NatSet {
        let mut v: Vec<Nat> = self.overrides.values().copied().collect();
        if let MapTail::Const(k) = self.tail {
            v.push(k);
        }
        NatSet::finite(v)
    }

    /// `φ(S)`.
    pub fn image(&self, set: &NatSet) -> Result<NatSet> {
        let keys = self.override_keys();
        let on_keys = set.intersect(&keys)?;
        let pointwise = NatSet::finite(
            on_keys.as_finite().expect("finite").iter().map(|k| self.overrides[k]),
        );
        let rest = set.difference(&keys)?;
        let tail = match self.tail {
            MapTail::Identity => rest,
            MapTail::Const(_) if rest.is_empty() => NatSet::empty(),
            MapTail::Const(k) => NatSet::finite([k]),
            MapTail::Affine { a, b } => rest.affine_image(a, b)?,
            MapTail::Power(e) => NatSet::power_image(e, &rest)?,
        };
        tail.union(&pointwise)
    }

    /// `φ⁻¹(T)` for finite or ultimately periodic `T`.
    pub fn preimage(&self, target: &NatSet) -> Result<NatSet> {
        let keys = self.override_keys();
        let pointwise = NatSet::finite(self.overrides.iter().filter(|&(_, v)| target.member(*v)).map(|(&k, _)| k));
        let tail = match self.tail {
            MapTail::Identity => target.clone(),
            MapTail::Const(k) if target.member(k) => NatSet::naturals(),
            MapTail::Const(_) => NatSet::empty(),
            MapTail::Affine { a, b } => target.affine_preimage(a, b)?,
            MapTail::Power(e) => target.root_preimage(e)?,
        };
        tail.difference(&keys)?.union(&pointwise)
    }

    /// `φₘ = φ ∘ … ∘ φ` (`m` times) as a canonical self-map.
    pub fn iterate(&self, m: u32) -> Result<SelfMap> {
        if m == 0 {
            return Err(Error::invalid("iterate count must be positive"));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let tail = match self.tail {
            MapTail::Const(k) => MapTail::Const(self.orbit_at(k, m - 1)?),
            t => t.iterate(m)?,
        };
        let start = self.tail_region(m)?;
        let overrides = (1..start).map(|n| Ok((n, self.orbit_at(n, m)?))).collect::<Result<Vec<_>>>()?;
        SelfMap::new(overrides, tail)
    }

    /// Least `t ≥ tail_start` such that for every `n ≥ t` the first `m`
    /// steps of the orbit are all governed by the tail rule.
    pub fn tail_region(&self, m: u32) -> Result<Nat> {
        let start = self.tail_start();
        let MapTail::Affine { a, b } = self.tail else {
            // identity and powers never move below their argument; a constant
            // tail sends everything to one point, which the closed form handles
            return Ok(start);
        };
        if b >= 0 {
            return Ok(start);
        }
        // orbit points are increasing in n, so the condition is monotone
        let stays = |n: Nat| -> bool {
            let mut x = n;
            for _ in 1..m {
                match affine_eval(a, b, x) {
                    Some(y) if y >= start => x = y,
                    _ => return false,
                }
            }
            true
        };
        let mut hi = start;
        while !stays(hi) {
            hi = hi.checked_mul(2).ok_or_else(|| Error::Overflow("iterate threshold".into()))?;
        }
        let mut lo = start;
        if stays(lo) {
            return Ok(lo);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if stays(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.overrides {
            write!(f, "{k}↦{v}, ")?;
        }
        write!(f, "else {}", self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex42_map() -> SelfMap {
        SelfMap::new((1..=5).map(|n| (n, 1)), MapTail::Identity).unwrap()
    }

    fn shift_down(b: i64, from: Nat) -> SelfMap {
        SelfMap::new((1..from).map(|n| (n, 1)), MapTail::Affine { a: 1, b }).unwrap()
    }

    #[test]
    fn evaluation() {
        assert_eq!(ex42_map().map_at(9), 9);
        assert_eq!(shift_down(-3, 6).map_at(9), 6);
        assert_eq!(SelfMap::constant(1).map_at(100), 1);
    }

    #[test]
    fn fibers() {
        assert_eq!(ex42_map().fiber(1), NatSet::range(1, 5));
        let c = SelfMap::new([], MapTail::Const(3)).unwrap();
        assert!(c.fiber(5).is_empty());
        let s = SelfMap::new((1..8).map(|n| (n, 1)), MapTail::Affine { a: 1, b: 1 }).unwrap();
        assert_eq!(s.fiber(10), NatSet::finite([9]));
        assert_eq!(s.fiber(1), NatSet::range(1, 7));
    }

    #[test]
    fn images() {
        let img = ex42_map().image(&NatSet::from_threshold(3)).unwrap();
        assert_eq!(img, NatSet::finite([1]).union(&NatSet::from_threshold(6)).unwrap());
        assert_eq!(SelfMap::identity().image(&NatSet::progression(2, 3)).unwrap(), NatSet::progression(2, 3));
        assert_eq!(SelfMap::constant(1).image(&NatSet::naturals()).unwrap(), NatSet::finite([1]));
        let sq = SelfMap::new([], MapTail::Power(2)).unwrap();
        let img = sq.image(&NatSet::from_threshold(11)).unwrap();
        assert!(img.is_power_image() && img.member(121) && !img.member(100));
    }

    #[test]
    fn iterates() {
        assert_eq!(SelfMap::identity().iterate(5).unwrap(), SelfMap::identity());
        let phi = shift_down(-2, 6);
        let phi2 = phi.iterate(2).unwrap();
        assert_eq!(phi2.tail(), MapTail::Affine { a: 1, b: -4 });
        assert_eq!(phi2.tail_start(), 8);
        for n in 1..200 {
            assert_eq!(phi2.map_at(n), phi.map_at(phi.map_at(n)));
        }
        let sq = SelfMap::new([(1, 2)], MapTail::Power(2)).unwrap();
        assert_eq!(sq.iterate(2).unwrap().tail(), MapTail::Power(4));
        let c = SelfMap::new([(3, 7)], MapTail::Const(3)).unwrap();
        let c3 = c.iterate(3).unwrap();
        for n in 1..20 {
            assert_eq!(c3.map_at(n), c.orbit_at(n, 3).unwrap());
        }
    }

    #[test]
    fn preimages() {
        let phi = shift_down(-2, 6);
        let pre = phi.preimage(&NatSet::from_threshold(4)).unwrap();
        assert_eq!(pre, NatSet::from_threshold(6));
        let pre = phi.preimage(&NatSet::finite([1])).unwrap();
        assert_eq!(pre, NatSet::range(1, 5));
    }

    #[test]
    fn rejects_invalid_tails() {
        assert!(SelfMap::new([], MapTail::Affine { a: 1, b: -1 }).is_err());
        assert!(SelfMap::new([(1, 1)], MapTail::Affine { a: 1, b: -1 }).is_ok());
        assert!(SelfMap::new([], MapTail::Const(0)).is_err());
    }
}
