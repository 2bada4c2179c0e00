use num_traits::{Pow, Signed, Zero};
use wco_core::analysis::{apply, apply_at, boundedness, fiber_weight_sum};
use wco_core::rational::int;
use wco_core::sample::{self, Shape};
use wco_core::{NormValue, Rational};

fn abs_pow(q: &Rational, p: u32) -> Rational {
    Pow::pow(q.abs(), p)
}

#[test]
fn weighted_fiber_sums_give_the_norm_identity() {
    let mut rng = sample::rng(21);
    let shape = Shape { allow_const_tail: false, ..Shape::default() };
    for case in 0..200 {
        let p = [1u32, 2, 3][case % 3];
        let op = sample::operator(&mut rng, &shape, int(p as i64));
        assert!(boundedness(&op).unwrap().bounded);
        let f = sample::sparse_vector(&mut rng, 12, 30, 5);

        let mut rhs = Rational::zero();
        let mut rows = 1;
        for (&n, v) in f.overrides() {
            let sigma = match fiber_weight_sum(&op, n) {
                NormValue::Exact { value } => value,
                other => panic!("σ({n}) = {other} is not exact"),
            };
            rhs += sigma * abs_pow(v, p);
            rows = rows.max(op.phi.fiber(n).max_element().unwrap_or(1));
        }

        // brute force over the fiber-closed window
        let lhs: Rational = (1..=rows).map(|m| abs_pow(&apply_at(&op, &f, m).unwrap(), p)).sum();
        assert_eq!(lhs, rhs, "op = {op:?}, f = {f:?}");

        // and through the symbolic image
        let g = apply(&op, &f).unwrap();
        assert!(g.is_finitely_supported());
        let symbolic: Rational = g.overrides().values().map(|v| abs_pow(v, p)).sum();
        assert_eq!(symbolic, rhs);
    }
}
