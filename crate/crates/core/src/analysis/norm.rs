//! Fiber sums `σᵖ(n) = Σ_{m ∈ φ⁻¹(n)} |u(m)|ᵖ`, the boundedness criterion
//! `sup σᵖ < ∞`, the norm `(sup σᵖ)^(1/p)`, and closed range.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{NormValue, OperatorSpec, Tolerance};
use crate::error::{Error, Hypothesis, Result};
use crate::natset::{Nat, NatSet};
use crate::rational::{bits_for, dyadic, int, nat, pow_enclosure, Interval, Rational};
use crate::symbols::{Term, Trend, Weight};

/// Largest truncation point for partial sums of a series.
const SERIES_CAP: Nat = 1 << 22;
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundedness {
    pub bounded: bool,
    /// `sup_n σᵖ(n)`.
    pub fiber_sum_sup: NormValue,
    /// `‖uC_φ‖ = (sup_n σᵖ(n))^(1/p)`, when bounded.
    pub norm: Option<NormValue>,
}

/// `|u(m)|ᵖ`, exact when possible, else enclosed to width `tol`.
pub(crate) fn abs_pow_at(u: &Weight, m: Nat, p: &Rational, tol: &Rational) -> Interval {
    if u.is_zero_at(m) {
        return Interval::zero();
    }
    if let (Ok(v), true) = (u.value_at(m), p.is_integer()) {
        return Interval::point(num_traits::Pow::pow(v.abs(), p.to_integer().to_u32().expect("small p")));
    }
    let mut t = tol.clone();
    let mut best = None;
    for _ in 0..8 {
        let r = u.enclosure_at(m, &t).abs().pow_rational(p, &t);
        if r.width() <= *tol {
            return r;
        }
        best = Some(r);
        t = t / int(16);
    }
    best.expect("at least one refinement")
}

fn sum_finite(u: &Weight, set: &[Nat], p: &Rational, tol: &Rational) -> Interval {
    let each = tol / int(set.len().max(1) as i64);
    set.iter().fold(Interval::zero(), |acc, &m| acc.add(&abs_pow_at(u, m, p, &each)))
}

pub fn fiber_weight_sum(op: &OperatorSpec, n: Nat) -> NormValue {
    fiber_weight_sum_with(op, n, &Tolerance::default()).unwrap_or(NormValue::Divergent)
}

/// `σᵖ(n)`; a cofinite fiber (constant tail) gives a series that is either
/// divergent or enclosed by a partial sum plus integral-test tail bounds.
pub fn fiber_weight_sum_with(op: &OperatorSpec, n: Nat, tol: &Tolerance) -> Result<NormValue> {
    let fiber = op.phi.fiber(n);
    if let Some(f) = fiber.as_finite() {
        return Ok(NormValue::from_interval(sum_finite(&op.u, f, &op.p, &tol.width)));
    }
    let excluded = fiber.complement()?;
    Ok(match series_excluding(&op.u, excluded.as_finite().expect("cofinite fiber"), &op.p, tol)? {
        Some(i) => NormValue::from_interval(i),
        None => NormValue::Divergent,
    })
}

/// `Σ_{m ∉ excluded} |u(m)|ᵖ`, or `None` when the series diverges.
fn series_excluding(u: &Weight, excluded: &[Nat], p: &Rational, tol: &Tolerance) -> Result<Option<Interval>> {
    let Some(lead) = u.leading().cloned() else {
        let keys: Vec<Nat> = u.overrides().keys().copied().filter(|k| excluded.binary_search(k).is_err()).collect();
        return Ok(Some(sum_finite(u, &keys, p, &tol.width)));
    };
    if lead.alpha.is_zero() || &lead.alpha * p <= Rational::one() {
        return Ok(None);
    }
    let ev = u.eventual()?;
    let n0 = ev.from.max(u.tail_start()).max(excluded.last().map_or(1, |&k| k + 1)).max(2);
    let half = &tol.width / int(2);
    let (cut, tail) = series_tail(u, p, n0, &half)?;
    let bits = bits_for(&(&half / nat(cut)));
    let exec = tol.exec;
    let chunks = exec.chunked(1, cut, CHUNK, |lo, hi| {
        (lo..hi).filter(|m| excluded.binary_search(m).is_err()).fold(Interval::zero(), |acc, m| {
            acc.add(&abs_pow_at(u, m, p, &dyadic(bits + 1)).round_outward(bits))
        })
    });
    let partial = chunks.iter().fold(Interval::zero(), |acc, c| acc.add(c));
    Ok(Some(partial.add(&tail)))
}

/// `Σ_{m ≥ N} m^(−β)` enclosed between `∫_N^∞` and `N^(−β) + ∫_N^∞`.
fn zeta_tail(n: Nat, beta: &Rational, tol: &Rational) -> Interval {
    let one = Rational::one();
    let gap = beta - &one;
    let integral = pow_enclosure(&nat(n), &(&one - beta), tol);
    let head = pow_enclosure(&nat(n), &-beta, tol);
    Interval::new(integral.lo() / &gap, integral.hi() / &gap + head.hi())
}

/// Chooses a cut `N ≥ n0` and encloses `Σ_{m ≥ N} |f(m)|ᵖ` for the formula
/// `f`, which has constant sign on `[n0, ∞)`.
fn series_tail(u: &Weight, p: &Rational, n0: Nat, target: &Rational) -> Result<(Nat, Interval)> {
    let inner = target / int(64);
    let enclose = |cut: Nat| -> Interval {
        match p.to_integer().to_u32().filter(|_| p.is_integer()) {
            Some(k) => integer_power_tail(u.terms(), k, cut, &inner),
            None => real_power_tail(u.terms(), p, cut, &inner),
        }
    };
    let lead = u.leading().expect("nonzero formula");
    let beta = (&lead.alpha * p).to_f64().unwrap_or(2.0);
    let scale = u.terms().iter().map(|t| t.coeff.abs().to_f64().unwrap_or(1.0)).sum::<f64>().powf(p.to_f64().unwrap_or(1.0));
    let guess = (4.0 * scale / target.to_f64().unwrap_or(1e-6)).powf(1.0 / beta).ceil();
    let mut cut = if guess.is_finite() { (guess as Nat).clamp(n0, SERIES_CAP) } else { SERIES_CAP };
    loop {
        let tail = enclose(cut);
        if tail.width() <= *target || cut >= SERIES_CAP {
            return Ok((cut, tail));
        }
        cut = (cut * 2).min(SERIES_CAP);
    }
}

/// Integer `p`: `|f|ᵖ = (±f)ᵖ` expands into a power sum with exponents `> 1`.
fn integer_power_tail(terms: &[Term], k: u32, cut: Nat, tol: &Rational) -> Interval {
    let sign = if terms[0].coeff.is_negative() && k % 2 == 1 { -Rational::one() } else { Rational::one() };
    let mut acc: BTreeMap<Rational, Rational> = BTreeMap::from([(Rational::zero(), sign)]);
    for _ in 0..k {
        let mut next = BTreeMap::new();
        for (a, c) in &acc {
            for t in terms {
                *next.entry(a + &t.alpha).or_insert_with(Rational::zero) += c * &t.coeff;
            }
        }
        acc = next;
    }
    let each = tol / int(acc.len() as i64 + 1);
    acc.iter()
        .filter(|(_, d)| !d.is_zero())
        .fold(Interval::zero(), |sum, (beta, d)| sum.add(&zeta_tail(cut, beta, &each).scale(d)))
}

/// Real `p`: `|f(m)|ᵖ = |c₀|ᵖ m^(−α₀p) (1 + r(m))ᵖ` with `|r(m)| ≤ ε(N)`.
fn real_power_tail(terms: &[Term], p: &Rational, cut: Nat, tol: &Rational) -> Interval {
    let (lead, rest) = terms.split_first().expect("nonzero formula");
    let c0 = lead.coeff.abs();
    let eps: Rational = rest
        .iter()
        .map(|t| (&t.coeff / &c0).abs() * pow_enclosure(&nat(cut), &(&lead.alpha - &t.alpha), tol).hi())
        .sum();
    let one = Rational::one();
    let factor = Interval::new(&one - &eps, &one + &eps).pow_rational(p, tol);
    let base = pow_enclosure(&c0, p, tol);
    base.mul(&factor).mul(&zeta_tail(cut, &(&lead.alpha * p), tol))
}

/// `sup_{m ∉ excluded} |u(m)|ᵖ` using eventual monotonicity of `|u|`.
fn sup_excluding(u: &Weight, excluded: &NatSet, p: &Rational, tol: &Tolerance) -> Result<Interval> {
    let ev = u.eventual()?;
    let start = ev.from.max(u.tail_start()).max(excluded.max_element().map_or(1, |k| k + 1));
    let tail = match ev.trend {
        _ if u.has_zero_formula() => Interval::zero(),
        Trend::Decreasing => abs_pow_at(&u.formula(), start, p, &tol.width),
        Trend::Constant | Trend::Increasing => pow_enclosure(&u.limit().abs(), p, &tol.width),
    };
    let head = tol.exec.chunked(1, start, CHUNK, |lo, hi| {
        (lo..hi)
            .filter(|&m| !excluded.member(m))
            .map(|m| abs_pow_at(u, m, p, &tol.width))
            .reduce(|a, b| a.max(&b))
    });
    Ok(head.into_iter().flatten().fold(tail, |a, b| a.max(&b)))
}

pub fn boundedness(op: &OperatorSpec) -> Result<Boundedness> {
    boundedness_with(op, &Tolerance::default())
}

/// Boundedness, `sup σᵖ`, and the norm. Outside the special values of `φ`
/// every fiber has at most one element, so the supremum splits into
/// finitely many fiber sums plus a supremum of `|u|ᵖ` over a cofinite set.
pub fn boundedness_with(op: &OperatorSpec, tol: &Tolerance) -> Result<Boundedness> {
    let special = op.phi.special_values();
    let special = special.as_finite().expect("finite");
    let sums = special.iter().map(|&n| fiber_weight_sum_with(op, n, tol)).collect::<Result<Vec<_>>>()?;
    if sums.iter().any(|s| !s.is_finite()) {
        return Ok(Boundedness { bounded: false, fiber_sum_sup: NormValue::Divergent, norm: None });
    }
    let inv_p = Rational::one() / &op.p;
    let root = |i: &Interval| match i.as_point() {
        Some(s) => pow_enclosure(s, &inv_p, &tol.width),
        None => i.pow_rational(&inv_p, &tol.width),
    };
    let mut sup: Option<Interval> = None;
    let mut norm: Option<Interval> = None;
    for s in sums.iter().filter_map(NormValue::interval) {
        norm = Some(norm.map_or_else(|| root(&s), |n| n.max(&root(&s))));
        sup = Some(sup.map_or_else(|| s.clone(), |x| x.max(&s)));
    }
    let tail = op.phi.tail();
    if tail.is_injective() {
        // singleton fibers: σ(n) = |u(m)|, so take the sup of |u| and raise it
        let mut excluded: Vec<Nat> = op.phi.overrides().keys().copied().collect();
        excluded.extend(special.iter().filter_map(|&v| tail.solve(v)));
        let rest = sup_excluding(&op.u, &NatSet::finite(excluded), &Rational::one(), tol)?;
        let rest_p = rest.pow_rational(&op.p, &tol.width);
        norm = Some(norm.map_or_else(|| rest.clone(), |n| n.max(&rest)));
        sup = Some(sup.map_or_else(|| rest_p.clone(), |x| x.max(&rest_p)));
    }
    Ok(Boundedness {
        bounded: true,
        fiber_sum_sup: NormValue::from_interval(sup.unwrap_or_else(Interval::zero)),
        norm: Some(NormValue::from_interval(norm.unwrap_or_else(Interval::zero))),
    })
}

/// Closed range of a bounded `uC_φ`: by `‖uC_φ f‖ₚᵖ = Σ σᵖ(n)|f(n)|ᵖ` the
/// range is closed iff the positive values of `σ` are bounded below. Only an
/// injective tail produces infinitely many positive `σ(n) = |u(m)|`, and
/// those accumulate only at `|lim u|`.
pub fn closed_range(op: &OperatorSpec) -> Result<bool> {
    if !boundedness(op)?.bounded {
        return Err(Error::HypothesisViolated(Hypothesis::Unbounded));
    }
    Ok(closed_range_unchecked(op))
}

pub(crate) fn closed_range_unchecked(op: &OperatorSpec) -> bool {
    !(op.phi.tail().is_injective() && !op.u.has_zero_formula() && op.u.limit().is_zero())
}
