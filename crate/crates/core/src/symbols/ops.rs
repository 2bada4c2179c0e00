use std::collections::BTreeMap;

use num_traits::Zero;

use super::map::{MapTail, SelfMap};
use super::seq::{PowerSeq, SeqExpr, Term, Weight};
use crate::error::{Error, Result};
use crate::natset::Nat;
use crate::rational::Rational;

/// `φ(S(u)) ⊆ S(u)`.
pub fn check_support_invariant(u: &Weight, phi: &SelfMap) -> Result<bool> {
    let support = u.support();
    phi.image(&support)?.is_subset(&support)
}

/// Pointwise product; formulas multiply termwise.
pub fn seq_pointwise_mul(f: &SeqExpr, g: &SeqExpr) -> Result<SeqExpr> {
    let terms: Vec<Term> = f
        .terms()
        .iter()
        .flat_map(|s| g.terms().iter().map(move |t| Term::new(&s.coeff * &t.coeff, &s.alpha + &t.alpha)))
        .collect();
    let keys: Vec<Nat> = f.overrides().keys().chain(g.overrides().keys()).copied().collect();
    let overrides = keys
        .into_iter()
        .map(|n| Ok((n, product_at(f, g, n)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    PowerSeq::new(overrides, terms)
}

fn product_at(f: &SeqExpr, g: &SeqExpr, n: Nat) -> Result<Rational> {
    if f.is_zero_at(n) || g.is_zero_at(n) {
        return Ok(Rational::zero());
    }
    Ok(f.value_at(n)? * g.value_at(n)?)
}

/// `f ∘ φ`. Closed for identity and constant tails; for affine and power
/// tails `f` must have a constant (e.g. zero) formula.
pub fn seq_compose(f: &SeqExpr, phi: &SelfMap) -> Result<SeqExpr> {
    let at = |m: Nat| -> Result<Rational> {
        if f.is_zero_at(m) {
            Ok(Rational::zero())
        } else {
            f.value_at(m)
        }
    };
    let mut overrides: BTreeMap<Nat, Rational> = BTreeMap::new();
    for (&k, &v) in phi.overrides() {
        overrides.insert(k, at(v)?);
    }
    let terms: Vec<Term> = match phi.tail() {
        MapTail::Identity => {
            for (&j, v) in f.overrides() {
                if !phi.overrides().contains_key(&j) {
                    overrides.insert(j, v.clone());
                }
            }
            f.terms().to_vec()
        }
        MapTail::Const(c) => vec![Term::constant(at(c)?)],
        tail if f.has_constant_formula() => {
            for (&j, v) in f.overrides() {
                if let Some(m) = tail.solve(j).filter(|m| !phi.overrides().contains_key(m)) {
                    overrides.insert(m, v.clone());
                }
            }
            f.terms().to_vec()
        }
        tail => {
            return Err(Error::UnrepresentableComposition(format!(
                "formula {} composed with tail {tail}",
                f.formula_string()
            )))
        }
    };
    PowerSeq::new(overrides, terms)
}
