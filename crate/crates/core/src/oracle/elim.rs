//! Exact column rank by fraction-free sparse elimination.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::TruncationMatrix;
use crate::natset::Nat;
use crate::rational::Rational;

type IntColumn = BTreeMap<Nat, BigInt>;

/// Clears denominators (column scaling keeps the rank) and divides out content.
fn integral(col: &BTreeMap<Nat, Rational>) -> IntColumn {
    let l = col.values().fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    primitive(col.iter().map(|(&m, v)| (m, v.numer() * (&l / v.denom()))).collect())
}

fn primitive(mut col: IntColumn) -> IntColumn {
    let g = col.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && g != BigInt::from(1) {
        for v in col.values_mut() {
            *v /= &g;
        }
    }
    col
}

/// `a·x − b·y`, dropping zeros.
fn combine(x: &IntColumn, a: &BigInt, y: &IntColumn, b: &BigInt) -> IntColumn {
    let mut out = IntColumn::new();
    for (&m, v) in x {
        out.insert(m, v * a);
    }
    for (&m, v) in y {
        let e = out.entry(m).or_insert_with(BigInt::zero);
        *e -= v * b;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Rank of the columns taken in `order`.
pub fn column_rank_in_order(m: &TruncationMatrix, order: &[Nat]) -> usize {
    let mut pivots: BTreeMap<Nat, IntColumn> = BTreeMap::new();
    for n in order {
        let Some(col) = m.columns.get(n) else { continue };
        let mut v = integral(col);
        while let Some((&row, lead)) = v.iter().next() {
            let Some(p) = pivots.get(&row) else {
                pivots.insert(row, v);
                break;
            };
            let (a, b) = (p[&row].clone(), lead.clone());
            let g = a.gcd(&b);
            let (a, b) = (&a / &g, &b / &g);
            v = primitive(combine(&v, &a, p, &b));
        }
    }
    pivots.len()
}

pub fn column_rank(m: &TruncationMatrix) -> usize {
    let order: Vec<Nat> = m.columns.keys().copied().collect();
    column_rank_in_order(m, &order)
}
