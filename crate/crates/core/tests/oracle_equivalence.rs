use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use wco_core::analysis::{apply, kernel_dim, range_codim_formula};
use wco_core::oracle::{build_matrix, column_rank, column_rank_in_order, stabilized_check, Check};
use wco_core::rational::int;
use wco_core::sample::{self, Shape};
use wco_core::{Exec, ExtNat, OperatorSpec};

fn finite_fixtures(count: usize, seed: u64, rational_values: bool) -> Vec<OperatorSpec> {
    let mut rng = sample::rng(seed);
    let shape = Shape { rational_values, ..Shape::default() };
    let mut out = Vec::new();
    while out.len() < count {
        let op = sample::operator(&mut rng, &shape, int(2));
        if kernel_dim(&op, 1).unwrap().is_finite() && range_codim_formula(&op).unwrap().is_finite() {
            out.push(op);
        }
    }
    out
}

#[test]
fn stabilized_counts_equal_closed_forms() {
    for (seed, rational_values) in [(41, true), (42, false)] {
        for op in finite_fixtures(100, seed, rational_values) {
            let r = stabilized_check(&op, Check::All, &[16, 32, 64], Exec::Parallel).unwrap();
            assert!(r.agrees() && r.stabilized, "{op:?}: {:?}", r.mismatches);
            assert_eq!(ExtNat::Finite(r.last().zero_column_count), r.kernel_dim);
            assert_eq!(ExtNat::Finite(r.last().column_rank_deficiency), r.range_codim);
        }
    }
}

#[test]
fn infinite_predictions_never_disagree_columnwise() {
    let mut rng = sample::rng(43);
    let shape = Shape::default();
    for _ in 0..100 {
        let op = sample::operator(&mut rng, &shape, int(2));
        let r = stabilized_check(&op, Check::All, &[16, 32, 64], Exec::Sequential).unwrap();
        assert!(r.agrees(), "{op:?}: {:?}", r.mismatches);
    }
}

#[test]
fn matrix_acts_like_the_operator() {
    let mut rng = sample::rng(44);
    let shape = Shape { allow_const_tail: false, ..Shape::default() };
    for _ in 0..100 {
        let op = sample::operator(&mut rng, &shape, int(2));
        let f = sample::sparse_vector(&mut rng, 12, 30, 5);
        let m = build_matrix(&op, 30);
        let x: BTreeMap<_, _> = f.overrides().clone();
        let got = m.apply(&x);
        let g = apply(&op, &f).unwrap();
        for row in 1..=m.rows {
            let want = if g.is_zero_at(row) { int(0) } else { g.value_at(row).unwrap() };
            assert_eq!(got.get(&row).cloned().unwrap_or_else(|| int(0)), want, "{op:?}, f = {f:?}, row {row}");
        }
    }
}

#[test]
fn rank_ignores_column_order() {
    let mut rng = sample::rng(45);
    let shape = Shape { rational_values: false, ..Shape::default() };
    for _ in 0..50 {
        let op = sample::operator(&mut rng, &shape, int(2));
        let m = build_matrix(&op, 40);
        let base = column_rank(&m);
        let mut order: Vec<u64> = (1..=40).collect();
        for _ in 0..3 {
            order.shuffle(&mut rng);
            assert_eq!(column_rank_in_order(&m, &order), base);
        }
    }
}
