//! Seeded random fixtures for property tests and benchmarks.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::analysis::OperatorSpec;
use crate::natset::Nat;
use crate::rational::{int, ratio, Rational};
use crate::symbols::{MapTail, PowerSeq, SelfMap, SeqExpr, Term, Weight};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A rational `a/b` with `|a/b| ≤ bound`, `b ≤ 6`.
pub fn rational(rng: &mut StdRng, bound: i64) -> Rational {
    let d = rng.gen_range(1..=6);
    ratio(rng.gen_range(-bound * d..=bound * d), d)
}

fn nonzero(rng: &mut StdRng, bound: i64) -> Rational {
    loop {
        let q = rational(rng, bound);
        if q != int(0) {
            return q;
        }
    }
}

/// Which shapes the generators may produce.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    /// Overrides live on `1..=head`.
    pub head: Nat,
    /// Only integer exponents, so every value is rational.
    pub rational_values: bool,
    pub allow_const_tail: bool,
    pub allow_power_tail: bool,
    /// Probability that an override of the weight is zero.
    pub zero_rate: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { head: 8, rational_values: true, allow_const_tail: true, allow_power_tail: true, zero_rate: 0.3 }
    }
}

pub fn weight(rng: &mut StdRng, shape: &Shape) -> Weight {
    let alphas: &[(i64, i64)] =
        if shape.rational_values { &[(1, 1), (2, 1), (3, 1)] } else { &[(1, 2), (1, 1), (3, 2), (2, 1)] };
    let mut terms = Vec::new();
    match rng.gen_range(0..6) {
        0 => {}
        1 => terms.push(Term::constant(nonzero(rng, 3))),
        2 | 3 => {
            terms.push(Term::constant(nonzero(rng, 3)));
            let &(a, b) = alphas.choose(rng).expect("nonempty");
            terms.push(Term::new(nonzero(rng, 3), ratio(a, b)));
        }
        _ => {
            let &(a, b) = alphas.choose(rng).expect("nonempty");
            terms.push(Term::new(nonzero(rng, 3), ratio(a, b)));
        }
    }
    let mut overrides: Vec<(Nat, Rational)> = Vec::new();
    for n in 1..=shape.head {
        if rng.gen_bool(0.5) {
            overrides.push((n, if rng.gen_bool(shape.zero_rate) { int(0) } else { nonzero(rng, 4) }));
        }
    }
    PowerSeq::new(overrides, terms).expect("valid weight")
}

pub fn map_tail(rng: &mut StdRng, shape: &Shape) -> MapTail {
    loop {
        match rng.gen_range(0..8) {
            0 | 1 => return MapTail::Identity,
            2 if shape.allow_const_tail => return MapTail::Const(rng.gen_range(1..=shape.head + 2)),
            3 if shape.allow_power_tail => return MapTail::Power(rng.gen_range(2..=3)),
            4 => return MapTail::Affine { a: rng.gen_range(2..=3), b: rng.gen_range(-3..=3) },
            5..=7 => return MapTail::Affine { a: 1, b: rng.gen_range(-4..=4) },
            _ => {}
        }
    }
}

pub fn self_map(rng: &mut StdRng, shape: &Shape) -> SelfMap {
    loop {
        let tail = map_tail(rng, shape);
        let mut overrides: Vec<(Nat, Nat)> = Vec::new();
        for n in 1..=shape.head {
            if rng.gen_bool(0.4) {
                overrides.push((n, rng.gen_range(1..=shape.head + 2)));
            }
        }
        if let Ok(phi) = SelfMap::new(overrides, tail) {
            return phi;
        }
    }
}

pub fn operator(rng: &mut StdRng, shape: &Shape, p: Rational) -> OperatorSpec {
    OperatorSpec::new(weight(rng, shape), self_map(rng, shape), p).expect("valid p")
}

/// `Σ v·χₙ` with at most `max_support` entries in `1..=span`, values in
/// `[−bound, bound]`.
pub fn sparse_vector(rng: &mut StdRng, max_support: usize, span: Nat, bound: i64) -> SeqExpr {
    let k = rng.gen_range(0..=max_support);
    let entries: Vec<(Nat, Rational)> = (0..k).map(|_| (rng.gen_range(1..=span), rational(rng, bound))).collect();
    PowerSeq::finite(entries).expect("positive indices")
}

/// Draws until `keep` accepts, up to `tries` attempts.
pub fn find<T>(rng: &mut StdRng, tries: usize, mut draw: impl FnMut(&mut StdRng) -> T, keep: impl Fn(&T) -> bool) -> Option<T> {
    (0..tries).map(|_| draw(rng)).find(|x| keep(x))
}
