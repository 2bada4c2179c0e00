use wco_core::analysis::{apply_power, kernel_basis, kernel_dim, kernel_stabilizes, images_stabilize};
use wco_core::rational::int;
use wco_core::sample::{self, Shape};
use wco_core::symbols::check_support_invariant;
use wco_core::{ExtNat, OperatorSpec, PowerSeq};

fn invariant_fixtures(count: usize, seed: u64) -> Vec<OperatorSpec> {
    let mut rng = sample::rng(seed);
    let shape = Shape { zero_rate: 0.5, ..Shape::default() };
    let mut out = Vec::new();
    while out.len() < count {
        let op = sample::operator(&mut rng, &shape, int(2));
        // φ₄ must fit in 64 bits for the fourth power to be representable
        if check_support_invariant(&op.u, &op.phi).unwrap() && op.phi.iterate(4).is_ok() {
            out.push(op);
        }
    }
    out
}

#[test]
fn kernels_grow_with_powers_and_basis_vectors_vanish() {
    for op in invariant_fixtures(50, 31) {
        let dims: Vec<ExtNat> = (1..=4).map(|m| kernel_dim(&op, m).unwrap()).collect();
        assert!(dims.windows(2).all(|d| d[0] <= d[1]), "{op:?}: {dims:?}");
        for m in 1..=4 {
            for n in kernel_basis(&op, m, 12).unwrap() {
                let image = apply_power(&op, &PowerSeq::unit(n), m).unwrap();
                assert!(image.is_zero(), "{op:?}: (uC_φ)^{m} χ_{n} = {image:?}");
            }
        }
        assert_eq!(kernel_stabilizes(&op).unwrap(), images_stabilize(&op).unwrap());
        if kernel_stabilizes(&op).unwrap() {
            assert_eq!(dims[0], dims[1]);
        }
    }
}

#[test]
fn non_kernel_vectors_survive() {
    // a coordinate outside the kernel basis is not annihilated
    for op in invariant_fixtures(30, 32) {
        let basis = kernel_basis(&op, 1, 64).unwrap();
        for n in (1..=40).filter(|n| !basis.contains(n)) {
            if basis.len() < 64 {
                assert!(!apply_power(&op, &PowerSeq::unit(n), 1).unwrap().is_zero(), "{op:?}, n = {n}");
            }
        }
    }
}
