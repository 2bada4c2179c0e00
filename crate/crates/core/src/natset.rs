//! Exact subsets of ℕ = {1, 2, 3, …}.
//!
//! Three canonical forms are representable:
//!
//! * finite sets (strictly sorted element lists);
//! * ultimately periodic sets: below a threshold `T` an explicit exception
//!   list, from `T` on membership depends only on `n mod m`;
//! * power images `{bᵉ : b ∈ B} ∪ X` with `B` an infinite ultimately
//!   periodic base and `X` a finite list of elements that are not `e`-th
//!   powers.
//!
//! Every constructor canonicalizes, so semantic equality is structural
//! equality (`==`). Finite and ultimately periodic sets form a Boolean
//! algebra; power images support membership, enumeration, certified
//! cardinality, intersection with the other forms, and subset tests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{exact_iroot, iroot_ceil, lcm};

pub type Nat = u64;

/// Cardinal of a subset of ℕ, or a dimension that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Finite(u64),
    Infinite,
}

pub type CardinalityClass = ExtNat;

impl ExtNat {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Finite(k) => Some(k),
            ExtNat::Infinite => None,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(k) => write!(f, "{k}"),
            ExtNat::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(k) => s.serialize_u64(*k),
            ExtNat::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => Ok(ExtNat::Finite(k)),
            Raw::Str(s) if s == "infinite" => Ok(ExtNat::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected \"infinite\", got {s:?}"))),
        }
    }
}

/// Ultimately periodic set in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Periodic {
    threshold: Nat,
    modulus: u64,
    residues: Vec<u64>,
    exceptions: Vec<Nat>,
}

impl Periodic {
    pub fn threshold(&self) -> Nat {
        self.threshold
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn exceptions(&self) -> &[Nat] {
        &self.exceptions
    }

    fn member(&self, n: Nat) -> bool {
        if n < self.threshold {
            self.exceptions.binary_search(&n).is_ok()
        } else {
            self.residues.binary_search(&(n % self.modulus)).is_ok()
        }
    }
}

/// `{bᵉ : b ∈ base} ∪ extras` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerImage {
    exponent: u32,
    base: Periodic,
    extras: Vec<Nat>,
}

impl PowerImage {
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn base(&self) -> NatSet {
        NatSet(Repr::Periodic(self.base.clone()))
    }

    pub fn extras(&self) -> &[Nat] {
        &self.extras
    }

    fn member(&self, n: Nat) -> bool {
        if self.extras.binary_search(&n).is_ok() {
            return true;
        }
        exact_iroot(n, self.exponent).is_some_and(|r| self.base.member(r))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Finite(Vec<Nat>),
    Periodic(Periodic),
    PowerImage(PowerImage),
}

/// A canonical subset of ℕ.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct NatSet(Repr);

/// Borrowed view of the canonical form.
#[derive(Clone, Copy, Debug)]
pub enum SetView<'a> {
    Finite(&'a [Nat]),
    Periodic(&'a Periodic),
    PowerImage(&'a PowerImage),
}

impl NatSet {
    pub fn empty() -> Self {
        NatSet(Repr::Finite(Vec::new()))
    }

    /// ℕ itself.
    pub fn naturals() -> Self {
        Self::from_threshold(1)
    }

    /// `{n : n ≥ t}`.
    pub fn from_threshold(t: Nat) -> Self {
        let t = t.max(1);
        Dense { threshold: t, below: vec![false; (t - 1) as usize], pattern: vec![true] }.into_set()
    }

    /// `{n : lo ≤ n ≤ hi}`.
    pub fn range(lo: Nat, hi: Nat) -> Self {
        Self::finite((lo.max(1)..=hi).collect::<Vec<_>>())
    }

    /// Finite set from arbitrary elements; panics on `0`.
    pub fn finite(elements: impl IntoIterator<Item = Nat>) -> Self {
        let mut v: Vec<Nat> = elements.into_iter().collect();
        assert!(v.iter().all(|&n| n >= 1), "natural numbers start at 1");
        v.sort_unstable();
        v.dedup();
        NatSet(Repr::Finite(v))
    }

    /// `{n < threshold : n ∈ exceptions} ∪ {n ≥ threshold : n mod modulus ∈ residues}`.
    pub fn periodic(
        threshold: Nat,
        modulus: u64,
        residues: impl IntoIterator<Item = u64>,
        exceptions: impl IntoIterator<Item = Nat>,
    ) -> Result<Self> {
        if threshold == 0 || modulus == 0 {
            return Err(Error::invalid("threshold and modulus must be positive"));
        }
        let mut pattern = vec![false; modulus as usize];
        for r in residues {
            if r >= modulus {
                return Err(Error::invalid(format!("residue {r} not below modulus {modulus}")));
            }
            pattern[r as usize] = true;
        }
        let mut below = vec![false; (threshold - 1) as usize];
        for e in exceptions {
            if e == 0 || e >= threshold {
                return Err(Error::invalid(format!("exception {e} outside [1, {threshold})")));
            }
            below[(e - 1) as usize] = true;
        }
        Ok(Dense { threshold, below, pattern }.into_set())
    }

    /// `{n ≥ start : n ≡ start mod step}`.
    pub fn progression(start: Nat, step: u64) -> Self {
        let residue = start % step;
        Self::periodic(start, step, [residue], []).expect("valid progression")
    }

    /// `{bᵉ : b ∈ base}`; folds nested power images.
    pub fn power_image(exponent: u32, base: &NatSet) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::invalid("exponent must be positive"));
        }
        match &base.0 {
            Repr::PowerImage(inner) => {
                let e = inner
                    .exponent
                    .checked_mul(exponent)
                    .ok_or_else(|| Error::Overflow("exponent tower".into()))?;
                let extras = inner
                    .extras
                    .iter()
                    .map(|&x| x.checked_pow(exponent).ok_or_else(|| overflow(x, exponent)))
                    .collect::<Result<Vec<_>>>()?;
                power_from_parts(e, inner.base(), extras)
            }
            _ => power_from_parts(exponent, base.clone(), Vec::new()),
        }
    }

    pub fn view(&self) -> SetView<'_> {
        match &self.0 {
            Repr::Finite(v) => SetView::Finite(v),
            Repr::Periodic(p) => SetView::Periodic(p),
            Repr::PowerImage(p) => SetView::PowerImage(p),
        }
    }

    pub fn is_power_image(&self) -> bool {
        matches!(self.0, Repr::PowerImage(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(&self.0, Repr::Finite(v) if v.is_empty())
    }

    pub fn as_finite(&self) -> Option<&[Nat]> {
        match &self.0 {
            Repr::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Characteristic function.
    pub fn member(&self, n: Nat) -> bool {
        match &self.0 {
            Repr::Finite(v) => v.binary_search(&n).is_ok(),
            Repr::Periodic(p) => p.member(n),
            Repr::PowerImage(p) => p.member(n),
        }
    }

    pub fn cardinality(&self) -> ExtNat {
        match &self.0 {
            Repr::Finite(v) => ExtNat::Finite(v.len() as u64),
            // canonical periodic and power-image sets are infinite
            _ => ExtNat::Infinite,
        }
    }

    pub fn cardinality_of_complement(&self) -> ExtNat {
        match &self.0 {
            Repr::Finite(_) => ExtNat::Infinite,
            Repr::Periodic(p) if p.modulus == 1 => {
                ExtNat::Finite(p.threshold - 1 - p.exceptions.len() as u64)
            }
            // a proper residue pattern, or gaps between consecutive powers
            _ => ExtNat::Infinite,
        }
    }

    pub fn complement(&self) -> Result<NatSet> {
        let d = self.dense("complement")?;
        Ok(d.map(|b| !b).into_set())
    }

    pub fn intersect(&self, other: &NatSet) -> Result<NatSet> {
        match (&self.0, &other.0) {
            (Repr::PowerImage(_), Repr::PowerImage(_)) => {
                Err(Error::unsupported("intersection of two power images"))
            }
            (Repr::PowerImage(p), _) => pi_intersect(p, other),
            (_, Repr::PowerImage(p)) => pi_intersect(p, self),
            (Repr::Finite(v), _) => Ok(NatSet::finite(v.iter().copied().filter(|&n| other.member(n)))),
            (_, Repr::Finite(v)) => Ok(NatSet::finite(v.iter().copied().filter(|&n| self.member(n)))),
            _ => Ok(Dense::zip(&self.dense("")?, &other.dense("")?, |a, b| a && b).into_set()),
        }
    }

    pub fn union(&self, other: &NatSet) -> Result<NatSet> {
        match (&self.0, &other.0) {
            (Repr::PowerImage(_), Repr::PowerImage(_)) => {
                Err(Error::unsupported("union of two power images"))
            }
            (Repr::PowerImage(p), _) => pi_union(p, other),
            (_, Repr::PowerImage(p)) => pi_union(p, self),
            _ => Ok(Dense::zip(&self.dense("")?, &other.dense("")?, |a, b| a || b).into_set()),
        }
    }

    pub fn difference(&self, other: &NatSet) -> Result<NatSet> {
        match (&self.0, &other.0) {
            (Repr::PowerImage(_), Repr::PowerImage(_)) => {
                Err(Error::unsupported("difference of two power images"))
            }
            (Repr::PowerImage(p), _) => {
                let keep = other.complement()?;
                pi_intersect(p, &keep)
            }
            (Repr::Finite(v), _) => Ok(NatSet::finite(v.iter().copied().filter(|&n| !other.member(n)))),
            (Repr::Periodic(_), Repr::PowerImage(p)) => {
                let overlap = pi_intersect(p, self)?;
                if overlap.cardinality().is_finite() {
                    self.difference(&overlap)
                } else {
                    Err(Error::unsupported("periodic set minus an infinite power image"))
                }
            }
            _ => Ok(Dense::zip(&self.dense("")?, &other.dense("")?, |a, b| a && !b).into_set()),
        }
    }

    /// Exact subset decision, including the power-image cases.
    pub fn is_subset(&self, other: &NatSet) -> Result<bool> {
        match (&self.0, &other.0) {
            (Repr::Finite(v), _) => Ok(v.iter().all(|&n| other.member(n))),
            // an infinite periodic set has positive density, power images do not
            (Repr::Periodic(_), Repr::PowerImage(_)) => Ok(false),
            (Repr::PowerImage(_), Repr::Finite(_)) => Ok(false),
            (Repr::PowerImage(p), Repr::Periodic(_)) => {
                if !p.extras.iter().all(|&x| other.member(x)) {
                    return Ok(false);
                }
                let roots = pow_preimage(p.exponent, other)?;
                p.base().is_subset(&roots)
            }
            (Repr::PowerImage(a), Repr::PowerImage(b)) => {
                if !a.extras.iter().all(|&x| other.member(x)) {
                    return Ok(false);
                }
                if a.exponent % b.exponent != 0 {
                    // infinitely many bases are not perfect (e_b/g)-th powers
                    return Ok(false);
                }
                let q = a.exponent / b.exponent;
                let target = b.base();
                let roots = if q == 1 { target } else { pow_preimage(q, &target)? };
                a.base().is_subset(&roots)
            }
            _ => Ok(self.difference(other)?.is_empty()),
        }
    }

    /// Canonical forms are unique, so equality is structural.
    pub fn set_equal(&self, other: &NatSet) -> bool {
        self == other
    }

    /// The first `limit` elements in increasing order.
    pub fn enumerate(&self, limit: usize) -> Vec<Nat> {
        match &self.0 {
            Repr::Finite(v) => v.iter().copied().take(limit).collect(),
            Repr::Periodic(p) => {
                let mut out = Vec::with_capacity(limit);
                let mut n = 1;
                while out.len() < limit {
                    if p.member(n) {
                        out.push(n);
                    }
                    n += 1;
                }
                out
            }
            Repr::PowerImage(p) => {
                let mut out = Vec::with_capacity(limit);
                let mut extras = p.extras.iter().copied().peekable();
                let mut b = 1u64;
                while out.len() < limit {
                    while !p.base.member(b) {
                        b += 1;
                    }
                    let Some(power) = b.checked_pow(p.exponent) else {
                        out.extend(extras.by_ref().take(limit - out.len()));
                        break;
                    };
                    while out.len() < limit && extras.peek().is_some_and(|&x| x < power) {
                        out.push(extras.next().unwrap());
                    }
                    if out.len() < limit {
                        out.push(power);
                    }
                    b += 1;
                }
                out
            }
        }
    }

    /// The first `limit` elements of ℕ not in the set (fewer only if the
    /// complement is finite).
    pub fn enumerate_complement(&self, limit: usize) -> Vec<Nat> {
        if let ExtNat::Finite(k) = self.cardinality_of_complement() {
            let limit = limit.min(k as usize);
            return self.complement().expect("finite complement").enumerate(limit);
        }
        let mut out = Vec::with_capacity(limit);
        let mut n = 1;
        while out.len() < limit {
            if !self.member(n) {
                out.push(n);
            }
            n += 1;
        }
        out
    }

    /// Elements `≤ bound`, increasing.
    pub fn elements_upto(&self, bound: Nat) -> Vec<Nat> {
        match &self.0 {
            Repr::Finite(v) => v.iter().copied().take_while(|&n| n <= bound).collect(),
            _ => (1..=bound).filter(|&n| self.member(n)).collect(),
        }
    }

    pub fn count_upto(&self, bound: Nat) -> u64 {
        match &self.0 {
            Repr::Finite(v) => v.iter().take_while(|&&n| n <= bound).count() as u64,
            _ => (1..=bound).filter(|&n| self.member(n)).count() as u64,
        }
    }

    pub fn min_element(&self) -> Option<Nat> {
        self.enumerate(1).first().copied()
    }

    /// Largest element of a finite set.
    pub fn max_element(&self) -> Option<Nat> {
        self.as_finite().and_then(|v| v.last().copied())
    }

    /// `{n ∈ self : n ≥ t}`.
    pub fn restrict_from(&self, t: Nat) -> Result<NatSet> {
        self.intersect(&NatSet::from_threshold(t))
    }

    /// `{b : bᵉ ∈ self}` for finite or ultimately periodic sets.
    pub fn root_preimage(&self, exponent: u32) -> Result<NatSet> {
        pow_preimage(exponent, self)
    }

    /// `{a·n + b : n ∈ self}`; every image must be positive.
    pub fn affine_image(&self, a: u64, b: i64) -> Result<NatSet> {
        if a == 0 {
            return Err(Error::invalid("affine slope must be positive"));
        }
        let apply = |n: Nat| -> Result<Nat> { affine_eval(a, b, n).ok_or_else(|| Error::Overflow(format!("{a}*{n}{b:+}"))) };
        match &self.0 {
            Repr::Finite(v) => Ok(NatSet::finite(v.iter().map(|&n| apply(n)).collect::<Result<Vec<_>>>()?)),
            Repr::Periodic(p) => {
                let threshold = apply(p.threshold)?;
                let modulus = a.checked_mul(p.modulus).ok_or_else(|| Error::Overflow("modulus".into()))?;
                let mut pattern = vec![false; modulus as usize];
                for &r in &p.residues {
                    let v = (a as i128 * r as i128 + b as i128).rem_euclid(modulus as i128);
                    pattern[v as usize] = true;
                }
                let mut below = vec![false; (threshold - 1) as usize];
                for &e in &p.exceptions {
                    below[(apply(e)? - 1) as usize] = true;
                }
                Ok(Dense { threshold, below, pattern }.into_set())
            }
            Repr::PowerImage(_) => Err(Error::unsupported("affine image of a power image")),
        }
    }

    /// `{n ≥ 1 : a·n + b ∈ self}` for finite or ultimately periodic sets.
    pub fn affine_preimage(&self, a: u64, b: i64) -> Result<NatSet> {
        if a == 0 {
            return Err(Error::invalid("affine slope must be positive"));
        }
        let invert = |v: Nat| -> Option<Nat> {
            let num = v as i128 - b as i128;
            (num >= a as i128 && num % a as i128 == 0).then(|| (num / a as i128) as Nat)
        };
        match &self.0 {
            Repr::Finite(v) => Ok(NatSet::finite(v.iter().filter_map(|&x| invert(x)))),
            Repr::Periodic(p) => {
                // smallest n ≥ 1 with a·n + b ≥ threshold
                let need = p.threshold as i128 - b as i128;
                let start = if need <= a as i128 { 1 } else { ((need + a as i128 - 1) / a as i128) as Nat };
                let modulus = p.modulus;
                let pattern: Vec<bool> = (0..modulus)
                    .map(|r| {
                        let v = (a as i128 * r as i128 + b as i128).rem_euclid(modulus as i128) as u64;
                        p.residues.binary_search(&v).is_ok()
                    })
                    .collect();
                let below: Vec<bool> = (1..start)
                    .map(|n| affine_eval(a, b, n).is_some_and(|v| p.member(v)))
                    .collect();
                Ok(Dense { threshold: start, below, pattern }.into_set())
            }
            Repr::PowerImage(_) => Err(Error::unsupported("affine preimage of a power image")),
        }
    }

    fn dense(&self, what: &str) -> Result<Dense> {
        Dense::of(self).ok_or_else(|| Error::unsupported(format!("{what} of a power image")))
    }
}

pub(crate) fn affine_eval(a: u64, b: i64, n: Nat) -> Option<Nat> {
    let v = a as i128 * n as i128 + b as i128;
    (v >= 1 && v <= u64::MAX as i128).then_some(v as Nat)
}

fn overflow(x: Nat, e: u32) -> Error {
    Error::Overflow(format!("{x}^{e} exceeds 64 bits"))
}

/// `{b ≥ 1 : bᵉ ∈ set}`.
fn pow_preimage(exponent: u32, set: &NatSet) -> Result<NatSet> {
    match &set.0 {
        Repr::Finite(v) => Ok(NatSet::finite(v.iter().filter_map(|&x| exact_iroot(x, exponent)))),
        Repr::Periodic(p) => {
            let start = iroot_ceil(p.threshold, exponent);
            let m = p.modulus;
            let pattern: Vec<bool> = (0..m)
                .map(|r| p.residues.binary_search(&mod_pow(r, exponent, m)).is_ok())
                .collect();
            let below: Vec<bool> = (1..start)
                .map(|b| b.checked_pow(exponent).is_some_and(|x| p.member(x)))
                .collect();
            Ok(Dense { threshold: start, below, pattern }.into_set())
        }
        Repr::PowerImage(_) => Err(Error::unsupported("root preimage of a power image")),
    }
}

fn mod_pow(base: u64, exp: u32, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

fn power_from_parts(exponent: u32, base: NatSet, extras: Vec<Nat>) -> Result<NatSet> {
    if exponent == 1 {
        return base.union(&NatSet::finite(extras));
    }
    let mut roots = Vec::new();
    let mut plain = Vec::new();
    for x in extras {
        match exact_iroot(x, exponent) {
            Some(r) => roots.push(r),
            None => plain.push(x),
        }
    }
    let base = base.union(&NatSet::finite(roots))?;
    match base.0 {
        Repr::Finite(v) => {
            let powers = v
                .iter()
                .map(|&b| b.checked_pow(exponent).ok_or_else(|| overflow(b, exponent)))
                .collect::<Result<Vec<_>>>()?;
            Ok(NatSet::finite(powers.into_iter().chain(plain)))
        }
        Repr::Periodic(p) => {
            plain.sort_unstable();
            plain.dedup();
            Ok(NatSet(Repr::PowerImage(PowerImage { exponent, base: p, extras: plain })))
        }
        Repr::PowerImage(_) => unreachable!("union of dense sets is dense"),
    }
}

fn pi_intersect(p: &PowerImage, other: &NatSet) -> Result<NatSet> {
    let extras: Vec<Nat> = p.extras.iter().copied().filter(|&x| other.member(x)).collect();
    let roots = pow_preimage(p.exponent, other)?;
    let base = p.base().intersect(&roots)?;
    power_from_parts(p.exponent, base, extras)
}

fn pi_union(p: &PowerImage, other: &NatSet) -> Result<NatSet> {
    match &other.0 {
        Repr::Finite(v) => {
            let mut extras = p.extras.clone();
            extras.extend(v.iter().copied().filter(|&x| !p.member(x)));
            power_from_parts(p.exponent, p.base(), extras)
        }
        _ => {
            let pi = NatSet(Repr::PowerImage(p.clone()));
            if pi.is_subset(other)? {
                Ok(other.clone())
            } else {
                Err(Error::unsupported("union of a power image with an infinite periodic set"))
            }
        }
    }
}

/// Bit-level form of a finite or ultimately periodic set: `below[i]` is
/// membership of `i + 1` for `i + 1 < threshold`, `pattern[r]` of residues
/// from the threshold on.
#[derive(Clone, Debug)]
struct Dense {
    threshold: Nat,
    below: Vec<bool>,
    pattern: Vec<bool>,
}

impl Dense {
    fn of(set: &NatSet) -> Option<Dense> {
        match &set.0 {
            Repr::Finite(v) => {
                let threshold = v.last().map_or(1, |&m| m + 1);
                let mut below = vec![false; (threshold - 1) as usize];
                for &n in v {
                    below[(n - 1) as usize] = true;
                }
                Some(Dense { threshold, below, pattern: vec![false] })
            }
            Repr::Periodic(p) => {
                let mut below = vec![false; (p.threshold - 1) as usize];
                for &n in &p.exceptions {
                    below[(n - 1) as usize] = true;
                }
                let mut pattern = vec![false; p.modulus as usize];
                for &r in &p.residues {
                    pattern[r as usize] = true;
                }
                Some(Dense { threshold: p.threshold, below, pattern })
            }
            Repr::PowerImage(_) => None,
        }
    }

    fn modulus(&self) -> u64 {
        self.pattern.len() as u64
    }

    fn member(&self, n: Nat) -> bool {
        if n < self.threshold {
            self.below[(n - 1) as usize]
        } else {
            self.pattern[(n % self.modulus()) as usize]
        }
    }

    fn realign(&self, threshold: Nat, modulus: u64) -> Dense {
        debug_assert!(threshold >= self.threshold && modulus % self.modulus() == 0);
        let below = (1..threshold).map(|n| self.member(n)).collect();
        let m = self.modulus();
        let pattern = (0..modulus).map(|r| self.pattern[(r % m) as usize]).collect();
        Dense { threshold, below, pattern }
    }

    fn zip(a: &Dense, b: &Dense, f: impl Fn(bool, bool) -> bool) -> Dense {
        let t = a.threshold.max(b.threshold);
        let m = lcm(a.modulus(), b.modulus());
        let a = a.realign(t, m);
        let b = b.realign(t, m);
        Dense {
            threshold: t,
            below: a.below.iter().zip(&b.below).map(|(&x, &y)| f(x, y)).collect(),
            pattern: a.pattern.iter().zip(&b.pattern).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    fn map(mut self, f: impl Fn(bool) -> bool) -> Dense {
        self.below.iter_mut().for_each(|b| *b = f(*b));
        self.pattern.iter_mut().for_each(|b| *b = f(*b));
        self
    }

    fn into_set(self) -> NatSet {
        let Dense { mut threshold, mut below, pattern } = self;
        let m = pattern.len() as u64;
        let period = (1..=m)
            .filter(|d| m % d == 0)
            .find(|&d| (0..m).all(|r| pattern[r as usize] == pattern[(r % d) as usize]))
            .unwrap_or(m);
        let pattern: Vec<bool> = pattern[..period as usize].to_vec();
        if pattern.iter().all(|&b| !b) {
            return NatSet(Repr::Finite(
                below.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Nat + 1).collect(),
            ));
        }
        while threshold > 1 && below[(threshold - 2) as usize] == pattern[((threshold - 1) % period) as usize] {
            threshold -= 1;
            below.pop();
        }
        NatSet(Repr::Periodic(Periodic {
            threshold,
            modulus: period,
            residues: (0..period).filter(|&r| pattern[r as usize]).collect(),
            exceptions: below.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Nat + 1).collect(),
        }))
    }
}

impl fmt::Debug for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(v: &[Nat]) -> String {
            v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
        }
        fn periodic(p: &Periodic) -> String {
            let tail = if p.modulus == 1 {
                format!("{{n ≥ {}}}", p.threshold)
            } else {
                let res = p.residues.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
                format!("{{n ≥ {} : n mod {} ∈ {{{}}}}}", p.threshold, p.modulus, res)
            };
            if p.exceptions.is_empty() {
                tail
            } else {
                format!("{{{}}} ∪ {}", list(&p.exceptions), tail)
            }
        }
        match &self.0 {
            Repr::Finite(v) if v.is_empty() => f.write_str("∅"),
            Repr::Finite(v) => write!(f, "{{{}}}", list(v)),
            Repr::Periodic(p) => f.write_str(&periodic(p)),
            Repr::PowerImage(p) => {
                write!(f, "{{b^{} : b ∈ {}}}", p.exponent, periodic(&p.base))?;
                if !p.extras.is_empty() {
                    write!(f, " ∪ {{{}}}", list(&p.extras))?;
                }
                Ok(())
            }
        }
    }
}

/// Serialized form of a [`NatSet`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RawSet {
    Finite { elements: Vec<Nat> },
    Periodic { threshold: Nat, modulus: u64, residues: Vec<u64>, exceptions: Vec<Nat> },
    PowerImage { exponent: u32, base: Box<RawSet>, extras: Vec<Nat> },
}

impl From<NatSet> for RawSet {
    fn from(s: NatSet) -> RawSet {
        fn periodic(p: Periodic) -> RawSet {
            RawSet::Periodic {
                threshold: p.threshold,
                modulus: p.modulus,
                residues: p.residues,
                exceptions: p.exceptions,
            }
        }
        match s.0 {
            Repr::Finite(elements) => RawSet::Finite { elements },
            Repr::Periodic(p) => periodic(p),
            Repr::PowerImage(p) => RawSet::PowerImage {
                exponent: p.exponent,
                base: Box::new(periodic(p.base)),
                extras: p.extras,
            },
        }
    }
}

impl TryFrom<RawSet> for NatSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<NatSet> {
        match raw {
            RawSet::Finite { elements } => {
                if elements.contains(&0) {
                    return Err(Error::invalid("0 is not a natural number here"));
                }
                Ok(NatSet::finite(elements))
            }
            RawSet::Periodic { threshold, modulus, residues, exceptions } => {
                NatSet::periodic(threshold, modulus, residues, exceptions)
            }
            RawSet::PowerImage { exponent, base, extras } => {
                let base = NatSet::try_from(*base)?;
                let image = NatSet::power_image(exponent, &base)?;
                if extras.contains(&0) {
                    return Err(Error::invalid("0 is not a natural number here"));
                }
                image.union(&NatSet::finite(extras))
            }
        }
    }
}
