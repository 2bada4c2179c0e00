use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::natset::{Nat, NatSet};
use crate::rational::{self, floor, int, inv_pow_enclosure, nat, perfect_power, powi, Interval, Rational};

/// Largest dominance bound for which the zeros of a tail formula are
/// enumerated explicitly.
pub const SCAN_CAP: Nat = 1 << 20;

/// One power-decay term `coeff · n^(−alpha)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Rational,
    pub alpha: Rational,
}

impl Term {
    pub fn new(coeff: Rational, alpha: Rational) -> Self {
        Term { coeff, alpha }
    }

    pub fn constant(c: Rational) -> Self {
        Term::new(c, Rational::zero())
    }
}

/// A sequence given by finitely many overrides on top of a closed-form
/// formula `Σ cᵢ·n^(−αᵢ)` that applies at every other position.
///
/// Canonical: terms have distinct exponents sorted ascending and nonzero
/// coefficients; overrides that agree with the formula are dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PowerSeq {
    overrides: BTreeMap<Nat, Rational>,
    terms: Vec<Term>,
    /// Zeros of the formula, all below `support_from`.
    zeros: Vec<Nat>,
    /// Least `N` with the formula nonzero on `[N, ∞)`; `None` for the zero formula.
    support_from: Option<Nat>,
}

pub type Weight = PowerSeq;
pub type SeqExpr = PowerSeq;

/// Outcome of evaluating the formula at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaValue {
    Exact(Rational),
    /// Provably irrational (hence nonzero).
    Irrational,
}

/// Behaviour of `|formula(n)|` for `n ≥ from`: nonzero, of constant sign,
/// and constant or strictly monotone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Constant,
    Decreasing,
    Increasing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eventual {
    pub from: Nat,
    pub trend: Trend,
    /// Sign of the formula for `n ≥ from`; `0` only for the zero formula.
    pub sign: i8,
}

impl PowerSeq {
    pub fn new(
        overrides: impl IntoIterator<Item = (Nat, Rational)>,
        terms: impl IntoIterator<Item = Term>,
    ) -> Result<Self> {
        let terms = normalize_terms(terms)?;
        let (zeros, support_from) = formula_zeros(&terms)?;
        let mut seq = PowerSeq { overrides: BTreeMap::new(), terms, zeros, support_from };
        for (n, v) in overrides {
            if n == 0 {
                return Err(Error::invalid("positions start at 1"));
            }
            if seq.formula_value(n) != FormulaValue::Exact(v.clone()) {
                seq.overrides.insert(n, v);
            }
        }
        Ok(seq)
    }

    pub fn zero() -> Self {
        PowerSeq { overrides: BTreeMap::new(), terms: Vec::new(), zeros: Vec::new(), support_from: None }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new([], [Term::constant(c)]).expect("constant formula")
    }

    /// Finitely supported sequence `Σ v·χₙ`.
    pub fn finite(entries: impl IntoIterator<Item = (Nat, Rational)>) -> Result<Self> {
        Self::new(entries, [])
    }

    /// The coordinate vector `χₙ`.
    pub fn unit(n: Nat) -> Self {
        Self::finite([(n, Rational::one())]).expect("positive index")
    }

    pub fn overrides(&self) -> &BTreeMap<Nat, Rational> {
        &self.overrides
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// One past the largest override key.
    pub fn tail_start(&self) -> Nat {
        self.overrides.keys().next_back().map_or(1, |&k| k + 1)
    }

    pub fn has_zero_formula(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finitely_supported(&self) -> bool {
        self.terms.is_empty()
    }

    /// `true` when the formula is a constant (possibly zero).
    pub fn has_constant_formula(&self) -> bool {
        self.terms.iter().all(|t| t.alpha.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.overrides.values().all(Zero::is_zero)
    }

    /// The `α = 0` coefficient, i.e. `lim u(n)`.
    pub fn limit(&self) -> Rational {
        self.terms.first().filter(|t| t.alpha.is_zero()).map_or_else(Rational::zero, |t| t.coeff.clone())
    }

    /// The term of smallest exponent.
    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Least `N` such that the formula is nonzero at every `n ≥ N`.
    pub fn formula_support_from(&self) -> Option<Nat> {
        self.support_from
    }

    /// Least `N ≥ tail_start` with `u(n) ≠ 0` for all `n ≥ N`; `None` when
    /// the formula is zero.
    pub fn tail_support_from(&self) -> Option<Nat> {
        self.support_from.map(|s| s.max(self.tail_start()))
    }

    pub fn formula_is_zero_at(&self, n: Nat) -> bool {
        match self.support_from {
            None => true,
            Some(s) => n < s && self.zeros.binary_search(&n).is_ok(),
        }
    }

    /// Exact value of the formula at `n ≥ 1`.
    ///
    /// With `n = sᵗ`, `s` not a perfect power, each term is a rational
    /// multiple of `s^(−f)` for `f` the fractional part of `t·α`. Distinct
    /// `f ∈ [0, 1)` give `ℚ`-linearly independent `s^(−f)` (the polynomial
    /// `x^D − s` is irreducible), so the value is rational iff every group
    /// with `f ≠ 0` cancels.
    pub fn formula_value(&self, n: Nat) -> FormulaValue {
        let (rational_part, irrational) = self.grouped(n);
        if irrational.is_empty() {
            FormulaValue::Exact(rational_part)
        } else {
            FormulaValue::Irrational
        }
    }

    /// `(Σ of terms with rational value, {f ↦ coefficient of s^(−f)})`.
    fn grouped(&self, n: Nat) -> (Rational, Vec<(Rational, Rational, Nat)>) {
        if n == 1 {
            return (self.terms.iter().map(|t| t.coeff.clone()).sum(), Vec::new());
        }
        let (s, t) = perfect_power(n);
        let mut groups: BTreeMap<Rational, Rational> = BTreeMap::new();
        for term in &self.terms {
            let e = &term.alpha * int(t as i64);
            let q = floor(&e);
            let f = &e - Rational::from_integer(q.clone());
            let q = q.to_i64().expect("exponent fits in i64");
            *groups.entry(f).or_insert_with(Rational::zero) += &term.coeff * powi(&nat(s), -q);
        }
        let rational_part = groups.remove(&Rational::zero()).unwrap_or_else(Rational::zero);
        let irrational = groups.into_iter().filter(|(_, g)| !g.is_zero()).map(|(f, g)| (f, g, s)).collect();
        (rational_part, irrational)
    }

    fn formula_enclosure(&self, n: Nat, tol: &Rational) -> Interval {
        let (rational_part, irrational) = self.grouped(n);
        if irrational.is_empty() {
            return Interval::point(rational_part);
        }
        let total: Rational = irrational.iter().map(|(_, g, _)| g.abs()).sum();
        let each = tol / (total * int(irrational.len() as i64 + 1));
        irrational.iter().fold(Interval::point(rational_part), |acc, (f, g, s)| {
            acc.add(&inv_pow_enclosure(*s, f, &each).scale(g))
        })
    }

    /// Exact value at `n`, or `IrrationalValue`.
    pub fn value_at(&self, n: Nat) -> Result<Rational> {
        if let Some(v) = self.overrides.get(&n) {
            return Ok(v.clone());
        }
        match self.formula_value(n) {
            FormulaValue::Exact(v) => Ok(v),
            FormulaValue::Irrational => Err(Error::IrrationalValue { n }),
        }
    }

    /// Certified enclosure of the value at `n`, width at most `tol`.
    pub fn enclosure_at(&self, n: Nat, tol: &Rational) -> Interval {
        match self.overrides.get(&n) {
            Some(v) => Interval::point(v.clone()),
            None => self.formula_enclosure(n, tol),
        }
    }

    pub fn is_zero_at(&self, n: Nat) -> bool {
        match self.overrides.get(&n) {
            Some(v) => v.is_zero(),
            None => self.formula_is_zero_at(n),
        }
    }

    /// `S(u) = {n : u(n) ≠ 0}`; always finite or cofinite.
    pub fn support(&self) -> NatSet {
        let mut members: Vec<Nat> = Vec::new();
        let mut excluded: Vec<Nat> = Vec::new();
        for (&k, v) in &self.overrides {
            if !v.is_zero() {
                members.push(k);
            } else {
                excluded.push(k);
            }
        }
        if self.support_from.is_none() {
            return NatSet::finite(members);
        }
        let zeros = NatSet::finite(self.zeros.iter().copied().chain(excluded));
        NatSet::naturals()
            .difference(&zeros)
            .and_then(|s| s.union(&NatSet::finite(members)))
            .expect("dense set algebra")
    }

    /// `inf |u| > 0` over all of ℕ.
    pub fn is_bounded_away_from_zero(&self) -> bool {
        !self.limit().is_zero()
            && self.overrides.values().all(|v| !v.is_zero())
            && (1..self.support_from.unwrap_or(1)).all(|n| self.overrides.contains_key(&n) || !self.formula_is_zero_at(n))
    }

    /// Where `|formula|` settles into a fixed sign and monotone trend.
    pub fn eventual(&self) -> Result<Eventual> {
        let Some(lead) = self.terms.first() else {
            return Ok(Eventual { from: 1, trend: Trend::Constant, sign: 0 });
        };
        let sign = rational::sign_of(&lead.coeff);
        let decay: Vec<Term> = self
            .terms
            .iter()
            .filter(|t| t.alpha.is_positive())
            .map(|t| Term::new(-(&t.coeff * &t.alpha), &t.alpha + Rational::one()))
            .collect();
        let Some(dlead) = decay.first() else {
            return Ok(Eventual { from: 1, trend: Trend::Constant, sign });
        };
        let from = dominance_bound(&self.terms)?.max(dominance_bound(&decay)?);
        let trend = if sign * rational::sign_of(&dlead.coeff) > 0 { Trend::Increasing } else { Trend::Decreasing };
        Ok(Eventual { from, trend, sign })
    }

    /// The formula alone, as a sequence without overrides.
    pub fn formula(&self) -> PowerSeq {
        PowerSeq { overrides: BTreeMap::new(), ..self.clone() }
    }

    /// Sequence with the same formula and the given overrides.
    pub fn with_overrides(&self, overrides: impl IntoIterator<Item = (Nat, Rational)>) -> Result<PowerSeq> {
        Self::new(self.overrides.clone().into_iter().chain(overrides), self.terms.clone())
    }

    /// Human-readable formula, e.g. `1 + 1/n`, `-3/2/n^(1/2)`, `0`.
    pub fn formula_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let mag = t.coeff.abs();
            if i == 0 {
                if t.coeff.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if t.coeff.is_negative() { " - " } else { " + " });
            }
            out.push_str(&rational::format(&mag));
            if t.alpha.is_one() {
                out.push_str("/n");
            } else if t.alpha.is_integer() && !t.alpha.is_zero() {
                out.push_str(&format!("/n^{}", t.alpha));
            } else if !t.alpha.is_zero() {
                out.push_str(&format!("/n^({})", t.alpha));
            }
        }
        out
    }
}

impl fmt::Debug for PowerSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PowerSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.overrides {
            write!(f, "{k}↦{v}, ")?;
        }
        write!(f, "else {}", self.formula_string())
    }
}

pub(crate) fn normalize_terms(terms: impl IntoIterator<Item = Term>) -> Result<Vec<Term>> {
    let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
    for t in terms {
        if t.alpha.is_negative() {
            return Err(Error::invalid(format!("negative exponent {}", t.alpha)));
        }
        if t.alpha.numer().bits() > 32 || t.alpha.denom().bits() > 32 {
            return Err(Error::invalid(format!("exponent {} too large", t.alpha)));
        }
        *merged.entry(t.alpha).or_insert_with(Rational::zero) += t.coeff;
    }
    Ok(merged.into_iter().filter(|(_, c)| !c.is_zero()).map(|(alpha, coeff)| Term { coeff, alpha }).collect())
}

/// Certified `x ≥ 1` with `|c₀| > Σᵢ₌₁ |cᵢ|·y^(α₀−αᵢ)` for every real
/// `y ≥ x`, where terms are sorted by ascending exponent and `c₀ ≠ 0`. For
/// such `y` the leading term fixes the sign of the whole sum.
pub fn dominance_bound(terms: &[Term]) -> Result<Nat> {
    let Some((lead, rest)) = terms.split_first() else {
        return Ok(1);
    };
    if rest.is_empty() {
        return Ok(1);
    }
    let c0 = lead.coeff.abs();
    let tol = Rational::new(1.into(), num_bigint::BigInt::one() << 48u32);
    let certified = |x: Nat| -> bool {
        let bound: Rational = rest
            .iter()
            .map(|t| t.coeff.abs() * inv_pow_enclosure(x, &(&t.alpha - &lead.alpha), &tol).hi().clone())
            .sum();
        c0 > bound
    };
    let mut hi: Nat = 1;
    while !certified(hi) {
        hi = hi.checked_mul(2).filter(|&h| h <= 1 << 62).ok_or_else(|| {
            Error::Overflow("dominance bound of the tail formula exceeds 2^62".into())
        })?;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    // invariant: certified(hi), and hi is a valid bound; shrink while possible
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if certified(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn formula_zeros(terms: &[Term]) -> Result<(Vec<Nat>, Option<Nat>)> {
    if terms.is_empty() {
        return Ok((Vec::new(), None));
    }
    let bound = dominance_bound(terms)?;
    if bound > SCAN_CAP {
        return Err(Error::Overflow(format!(
            "tail formula needs a zero scan up to {bound} (cap {SCAN_CAP})"
        )));
    }
    let probe = PowerSeq { overrides: BTreeMap::new(), terms: terms.to_vec(), zeros: Vec::new(), support_from: Some(1) };
    let zeros: Vec<Nat> =
        (1..bound).filter(|&n| probe.formula_value(n) == FormulaValue::Exact(Rational::zero())).collect();
    let from = zeros.last().map_or(1, |&z| z + 1);
    Ok((zeros, Some(from)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse, ratio};

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn one_plus_inv_n(zero_upto: Nat) -> PowerSeq {
        PowerSeq::new(
            (1..=zero_upto).map(|n| (n, Rational::zero())),
            [Term::constant(q("1")), Term::new(q("1"), q("1"))],
        )
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let u = one_plus_inv_n(2);
        assert_eq!(u.value_at(6).unwrap(), q("7/6"));
        assert_eq!(u.value_at(2).unwrap(), q("0"));
        assert!(PowerSeq::zero().value_at(10).unwrap().is_zero());
        let inv_sq = PowerSeq::new([], [Term::new(q("1"), q("2"))]).unwrap();
        assert_eq!(inv_sq.value_at(7).unwrap(), q("1/49"));
    }

    #[test]
    fn irrational_detection() {
        let root = PowerSeq::new([], [Term::new(q("1"), q("1/2"))]).unwrap();
        assert_eq!(root.value_at(4).unwrap(), q("1/2"));
        assert_eq!(root.value_at(2), Err(Error::IrrationalValue { n: 2 }));
        // 1/√n − 1/n^(1/2) cancels; n^(−1/2)·... mixes: 8^(−2/3) = 1/4
        let mixed = PowerSeq::new([], [Term::new(q("1"), q("2/3")), Term::new(q("1"), q("1/2"))]).unwrap();
        assert_eq!(mixed.formula_value(64), FormulaValue::Exact(q("1/16") + q("1/8")));
        assert_eq!(mixed.formula_value(8), FormulaValue::Irrational);
        let e = root.enclosure_at(2, &ratio(1, 1_000_000));
        assert!(e.width() <= ratio(1, 1_000_000));
        let (lo, hi) = e.to_f64();
        assert!(lo <= 0.5f64.sqrt() && 0.5f64.sqrt() <= hi);
    }

    #[test]
    fn supports() {
        let u = one_plus_inv_n(2);
        assert_eq!(u.support(), NatSet::from_threshold(3));
        assert_eq!(u.tail_support_from(), Some(3));
        assert!(PowerSeq::zero().support().is_empty());
        let f = PowerSeq::finite([(2, q("1/8"))]).unwrap();
        assert_eq!(f.support(), NatSet::finite([2]));
        // 1 − 4/n vanishes at 4 only
        let g = PowerSeq::new([], [Term::constant(q("1")), Term::new(q("-4"), q("1"))]).unwrap();
        assert_eq!(g.formula_support_from(), Some(5));
        assert!(!g.support().member(4));
        assert!(g.support().member(3));
        // 1/n − 1/n^2 − 2/n^3 = (n−2)(n+1)/n³ vanishes at 2
        let h = PowerSeq::new([], [Term::new(q("1"), q("1")), Term::new(q("-1"), q("2")), Term::new(q("-2"), q("3"))])
            .unwrap();
        assert_eq!(h.support(), NatSet::naturals().difference(&NatSet::finite([2])).unwrap());
    }

    #[test]
    fn bounded_away_from_zero() {
        let full = PowerSeq::new([], [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap();
        assert!(full.is_bounded_away_from_zero());
        assert!(!one_plus_inv_n(2).is_bounded_away_from_zero());
        assert!(!PowerSeq::new([], [Term::new(q("1"), q("1"))]).unwrap().is_bounded_away_from_zero());
        assert!(!PowerSeq::zero().is_bounded_away_from_zero());
    }

    #[test]
    fn canonical_drops_redundant_overrides() {
        let a = PowerSeq::new([(3, q("4/3"))], [Term::constant(q("1")), Term::new(q("1"), q("1"))]).unwrap();
        assert!(a.overrides().is_empty());
        assert_eq!(a.tail_start(), 1);
        let b = PowerSeq::new([], [Term::new(q("1"), q("1")), Term::constant(q("1")), Term::new(q("0"), q("5"))]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.formula_string(), "1 + 1/n");
    }

    #[test]
    fn eventual_trend() {
        let u = one_plus_inv_n(0);
        let ev = u.eventual().unwrap();
        assert_eq!((ev.trend, ev.sign), (Trend::Decreasing, 1));
        let v = PowerSeq::new([], [Term::constant(q("1")), Term::new(q("-1"), q("1"))]).unwrap();
        assert_eq!(v.eventual().unwrap().trend, Trend::Increasing);
        let w = PowerSeq::new([], [Term::new(q("-2"), q("1"))]).unwrap();
        assert_eq!(w.eventual().unwrap(), Eventual { from: 1, trend: Trend::Decreasing, sign: -1 });
    }

    #[test]
    fn dominance_is_certified() {
        let terms = normalize_terms([Term::constant(q("1")), Term::new(q("-1000"), q("1"))]).unwrap();
        let d = dominance_bound(&terms).unwrap();
        assert!(d > 1000 && d <= 1002, "{d}");
    }
}
