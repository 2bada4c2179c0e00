//! Exact rationals, certified rational intervals, and integer root helpers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn nat(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `"7/6"`, `"-3"`, or `"0"`.
pub fn format(q: &Rational) -> String {
    q.to_string()
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// `q^k` for a (possibly negative) integer exponent; `q` must be nonzero
/// when `k < 0`.
pub fn powi(q: &Rational, k: i64) -> Rational {
    if k >= 0 {
        Pow::pow(q, k as u64)
    } else {
        Pow::pow(q.recip(), k.unsigned_abs())
    }
}

/// Exact `k`-th root of a non-negative rational, if it is rational.
pub fn exact_root(q: &Rational, k: u32) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    if k == 1 || q.is_zero() {
        return Some(q.clone());
    }
    let n = q.numer().to_biguint()?;
    let d = q.denom().to_biguint()?;
    let rn = n.nth_root(k);
    let rd = d.nth_root(k);
    if Pow::pow(&rn, k) == n && Pow::pow(&rd, k) == d {
        Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// Largest `r` with `r^k ≤ n`.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n <= 1 {
        return n;
    }
    if k >= 64 {
        return 1;
    }
    n.nth_root(k)
}

/// Exact integer `k`-th root of `n`, if any.
pub fn exact_iroot(n: u64, k: u32) -> Option<u64> {
    let r = iroot(n, k);
    (r.checked_pow(k) == Some(n)).then_some(r)
}

/// Smallest `r ≥ 1` with `r^k ≥ n`.
pub fn iroot_ceil(n: u64, k: u32) -> u64 {
    if n <= 1 {
        return 1;
    }
    let r = iroot(n, k);
    if r.checked_pow(k) == Some(n) {
        r
    } else {
        r + 1
    }
}

/// Writes `n = s^t` with `s` not a perfect power (`t` maximal). `n ≥ 2`.
pub fn perfect_power(n: u64) -> (u64, u32) {
    debug_assert!(n >= 2);
    for t in (2..=63).rev() {
        if let Some(s) = exact_iroot(n, t) {
            if s >= 2 {
                return (s, t);
            }
        }
    }
    (n, 1)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn floor(q: &Rational) -> BigInt {
    q.floor().to_integer()
}

pub fn ceil(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

/// `2^-bits` as a rational.
pub fn dyadic(bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << bits)
}

/// Bits needed so that `2^-bits ≤ tol`.
pub fn bits_for(tol: &Rational) -> u32 {
    if !tol.is_positive() {
        return 256;
    }
    let mut bits = 0u32;
    while dyadic(bits) > *tol && bits < 4096 {
        bits += 1;
    }
    bits
}

fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// A closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn as_point(&self) -> Option<&Rational> {
        self.is_point().then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo <= *q && *q <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().cloned().unwrap();
        let hi = c.iter().max().cloned().unwrap();
        Interval { lo, hi }
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let hi = (-&self.lo).max(self.hi.clone());
            Interval { lo: Rational::zero(), hi }
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(Rational::one());
        }
        let base = if k % 2 == 0 { self.abs() } else { self.clone() };
        Interval { lo: Pow::pow(&base.lo, k), hi: Pow::pow(&base.hi, k) }
    }

    /// Outward rounding onto the grid `2^-bits ℤ`.
    pub fn round_outward(&self, bits: u32) -> Interval {
        let scale = Rational::from_integer(BigInt::one() << bits);
        let lo = Rational::new(floor(&(&self.lo * &scale)), scale.to_integer());
        let hi = Rational::new(ceil(&(&self.hi * &scale)), scale.to_integer());
        Interval { lo, hi }
    }

    /// `x^p` for a non-negative interval and rational `p ≥ 0`, each
    /// endpoint enclosed to width `tol`.
    pub fn pow_rational(&self, p: &Rational, tol: &Rational) -> Interval {
        assert!(!self.lo.is_negative(), "pow_rational needs a non-negative base");
        if p.is_integer() {
            let k = p.to_integer().to_u32().expect("small exponent");
            return self.powi(k);
        }
        let lo = pow_enclosure(&self.lo, p, tol).lo;
        let hi = pow_enclosure(&self.hi, p, tol).hi;
        Interval { lo, hi }
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.lo.to_f64().unwrap_or(f64::NAN), self.hi.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Enclosure of the positive `k`-th root of `x ≥ 0` with width at most `tol`.
pub fn root_enclosure(x: &Rational, k: u32, tol: &Rational) -> Interval {
    assert!(!x.is_negative());
    if let Some(r) = exact_root(x, k) {
        return Interval::point(r);
    }
    let pow_k = |q: &Rational| -> Rational { Pow::pow(q, k) };
    let (mut lo, mut hi) = initial_root_bracket(x, k);
    debug_assert!(pow_k(&lo) <= *x && *x <= pow_k(&hi));
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / int(2);
        match pow_k(&mid).cmp(x) {
            Ordering::Greater => hi = mid,
            Ordering::Less => lo = mid,
            Ordering::Equal => return Interval::point(mid),
        }
    }
    Interval { lo, hi }
}

fn initial_root_bracket(x: &Rational, k: u32) -> (Rational, Rational) {
    let pow_k = |q: &Rational| -> Rational { Pow::pow(q, k) };
    if let Some(xf) = x.to_f64().filter(|v| v.is_normal()) {
        let g = xf.powf(1.0 / k as f64);
        for slack in [1e-12, 1e-9, 1e-6, 1e-3] {
            let lo = from_f64(g * (1.0 - slack));
            let hi = from_f64(g * (1.0 + slack));
            if pow_k(&lo) <= *x && *x <= pow_k(&hi) {
                return (lo, hi);
            }
        }
    }
    // Bit-length bracket: 2^(e-1) ≤ x < 2^(e+1) with e = bits(num) - bits(den).
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let lo_exp = Integer::div_floor(&(e - 1), &(k as i64)) - 1;
    let hi_exp = Integer::div_ceil(&(e + 1), &(k as i64)) + 1;
    (powi(&int(2), lo_exp), powi(&int(2), hi_exp))
}

/// Enclosure of `x^p` for rational `x > 0` (or `x = 0`, `p > 0`) and
/// rational `p`, width at most `tol`.
pub fn pow_enclosure(x: &Rational, p: &Rational, tol: &Rational) -> Interval {
    if x.is_zero() {
        assert!(p.is_positive(), "0^p needs p > 0");
        return Interval::zero();
    }
    let num = p.numer().to_i64().expect("small exponent numerator");
    let den = p.denom().to_u32().expect("small exponent denominator");
    let base = powi(x, num);
    if den == 1 {
        return Interval::point(base);
    }
    root_enclosure(&base, den, tol)
}

/// `n^-alpha` for a positive integer `n`.
pub fn inv_pow_enclosure(n: u64, alpha: &Rational, tol: &Rational) -> Interval {
    pow_enclosure(&nat(n), &-alpha, tol)
}

pub fn biguint_to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

pub fn sign_of(q: &Rational) -> i8 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Serde adapter writing rationals as `"a/b"` strings.
pub mod as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("not a rational: {raw:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("7/6"), Some(ratio(7, 6)));
        assert_eq!(parse("-14/12"), Some(ratio(-7, 6)));
        assert_eq!(parse("3"), Some(int(3)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(format(&ratio(7, 6)), "7/6");
        assert_eq!(format(&int(-3)), "-3");
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root(&ratio(4, 9), 2), Some(ratio(2, 3)));
        assert_eq!(exact_root(&int(2), 2), None);
        assert_eq!(exact_iroot(16, 2), Some(4));
        assert_eq!(exact_iroot(17, 2), None);
        assert_eq!(iroot_ceil(17, 2), 5);
        assert_eq!(iroot_ceil(16, 2), 4);
        assert_eq!(perfect_power(64), (2, 6));
        assert_eq!(perfect_power(36), (6, 2));
        assert_eq!(perfect_power(12), (12, 1));
    }

    #[test]
    fn root_enclosure_is_certified() {
        let tol = ratio(1, 1_000_000_000);
        let r = root_enclosure(&int(2), 2, &tol);
        assert!(r.width() <= tol);
        assert!(Pow::pow(r.lo(), 2u32) <= int(2));
        assert!(Pow::pow(r.hi(), 2u32) >= int(2));
        let huge = powi(&int(10), 400) + int(1);
        let r = root_enclosure(&huge, 3, &int(1));
        assert!(Pow::pow(r.lo(), 3u32) <= huge && Pow::pow(r.hi(), 3u32) >= huge);
    }

    #[test]
    fn interval_arithmetic() {
        let a = Interval::new(int(-1), int(2));
        let b = Interval::new(int(3), int(4));
        assert_eq!(a.mul(&b), Interval::new(int(-4), int(8)));
        assert_eq!(a.abs(), Interval::new(int(0), int(2)));
        assert_eq!(a.powi(2), Interval::new(int(0), int(4)));
        let r = Interval::new(ratio(1, 3), ratio(2, 3)).round_outward(4);
        assert_eq!(r, Interval::new(ratio(5, 16), ratio(11, 16)));
    }
}
