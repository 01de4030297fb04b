mod common;

use abl::bounds::{gl_bound, sp_bound};
use abl::groups::{AmbientGroup, DEFAULT_CLOSURE_CAP};
use abl::matmod::{commutes_on, is_symplectic, MatrixMod};
use abl::modring::{crt_combine, crt_split, factorize, mul_mod, valuation, PrimePower};
use abl::search::{certified_ratio, ratio_at_least};
use abl::submodules::{Submodule, SubmoduleShape};
use num_bigint::BigUint;
use proptest::prelude::*;

fn prime_power() -> impl Strategy<Value = PrimePower> {
    prop_oneof![
        (1u32..=5).prop_map(|e| PrimePower::new(2, e).unwrap()),
        (1u32..=3).prop_map(|e| PrimePower::new(3, e).unwrap()),
        (1u32..=2).prop_map(|e| PrimePower::new(5, e).unwrap()),
        Just(PrimePower::new(7, 1).unwrap()),
    ]
}

fn matrix(n: u64, dim: usize) -> impl Strategy<Value = MatrixMod> {
    proptest::collection::vec(0..n, dim * dim).prop_map(move |e| MatrixMod::new(n, dim, e).unwrap())
}

fn shape_and_matrices() -> impl Strategy<Value = (SubmoduleShape, MatrixMod, MatrixMod)> {
    (prime_power(), 1usize..=3).prop_flat_map(|(pp, rank)| {
        let shapes = SubmoduleShape::all(pp, rank);
        let q = pp.modulus();
        (proptest::sample::select(shapes), matrix(q, rank), matrix(q, rank))
    })
}

proptest! {
    #[test]
    fn crt_is_a_ring_isomorphism(n in 2u64..5_000_000, x in any::<u64>(), y in any::<u64>()) {
        let spec = factorize(n).unwrap();
        let (x, y) = (x % n, y % n);
        prop_assert_eq!(crt_combine(&crt_split(x, &spec), &spec).unwrap(), x);
        let (sx, sy) = (crt_split(x, &spec), crt_split(y, &spec));
        let prod: Vec<u64> = sx.iter().zip(&sy).zip(spec.factors())
            .map(|((a, b), pp)| mul_mod(*a, *b, pp.modulus()))
            .collect();
        prop_assert_eq!(crt_combine(&prod, &spec).unwrap(), mul_mod(x, y, n));
    }

    #[test]
    fn factorization_multiplies_back(n in 2u64..1 << 40) {
        let spec = factorize(n).unwrap();
        let product: u128 = spec.factors().iter().map(|pp| pp.modulus() as u128).product();
        prop_assert_eq!(product, n as u128);
    }

    #[test]
    fn mul_mod_matches_wide_arithmetic(a in any::<u64>(), b in any::<u64>(), n in 1u64..) {
        prop_assert_eq!(mul_mod(a % n, b % n, n) as u128, (a % n) as u128 * (b % n) as u128 % n as u128);
    }

    #[test]
    fn valuation_counts_divisibility(pp in prime_power(), x in any::<u64>()) {
        let q = pp.modulus();
        let x = x % q;
        let v = valuation(pp.l, pp.e, x);
        for t in 0..=pp.e {
            prop_assert_eq!(x % pp.l.pow(t) == 0, t <= v);
        }
    }

    #[test]
    fn commutes_on_is_symmetric_and_exact_on_full_module((shape, a, b) in shape_and_matrices()) {
        prop_assert_eq!(commutes_on(&a, &b, &shape).unwrap(), commutes_on(&b, &a, &shape).unwrap());
        let full = SubmoduleShape::full(shape.prime_power(), shape.rank());
        prop_assert_eq!(commutes_on(&a, &b, &full).unwrap(), a.mul(&b).unwrap() == b.mul(&a).unwrap());
        prop_assert!(commutes_on(&a, &b, &SubmoduleShape::zero(shape.prime_power(), shape.rank())).unwrap());
    }

    #[test]
    fn commutes_on_matches_span_oracle((shape, a, b) in shape_and_matrices()) {
        let q = shape.prime_power().modulus();
        let span = common::span(&shape.basis(), shape.rank(), q);
        prop_assert_eq!(
            commutes_on(&a, &b, &shape).unwrap(),
            common::commute_on(a.entries(), b.entries(), &span, shape.rank(), q)
        );
    }

    #[test]
    fn pattern_matches_invariance((shape, a, _b) in shape_and_matrices()) {
        prop_assert_eq!(shape.pattern_admits(&a).unwrap(), shape.to_submodule().is_invariant(&a).unwrap());
    }

    #[test]
    fn canonical_shape_is_idempotent(
        pp in prime_power(),
        rank in 1usize..=4,
        raw in proptest::collection::vec(any::<u64>(), 0..20),
    ) {
        let q = pp.modulus();
        let gens: Vec<Vec<u64>> = raw.chunks(rank).filter(|c| c.len() == rank)
            .map(|c| c.iter().map(|x| x % q).collect())
            .collect();
        let w = Submodule::new(q, rank, gens).unwrap();
        let shape = w.canonical_shape().unwrap();
        prop_assert_eq!(&shape.to_submodule().canonical_shape().unwrap(), &shape);
        prop_assert_eq!(&w.reduced().unwrap().canonical_shape().unwrap(), &shape);
        prop_assert_eq!(w.order().unwrap(), shape.order());
    }

    #[test]
    fn order_is_multiplicative_over_primary_parts(
        n in prop::sample::select(vec![6u64, 10, 12, 15, 30, 36, 60, 100]),
        raw in proptest::collection::vec(any::<u64>(), 0..9),
    ) {
        let gens: Vec<Vec<u64>> = raw.chunks(3).filter(|c| c.len() == 3)
            .map(|c| c.iter().map(|x| x % n).collect())
            .collect();
        let w = Submodule::new(n, 3, gens.clone()).unwrap();
        let parts: BigUint = w.l_primary_parts().iter().map(|(_, p)| p.order().unwrap()).product();
        prop_assert_eq!(w.order().unwrap(), parts);
        if n <= 15 {
            prop_assert_eq!(w.order().unwrap(), BigUint::from(common::span(&gens, 3, n).len()));
        }
    }

    #[test]
    fn bounds_grow_with_the_index(i in 1u64..1_000_000, m in 1usize..5) {
        let (a, b) = (BigUint::from(i), BigUint::from(i + 1));
        prop_assert!(sp_bound(&a, m).unwrap() <= sp_bound(&b, m).unwrap());
        if m >= 2 {
            prop_assert!(gl_bound(&a, m).unwrap() <= gl_bound(&b, m).unwrap());
        }
    }

    #[test]
    fn certified_ratio_is_sound(w in 2u64..1_000_000, i in 2u64..1_000_000) {
        let (wb, ib) = (BigUint::from(w), BigUint::from(i));
        if let Some(r) = certified_ratio(&wb, &ib, 64) {
            prop_assert!(ratio_at_least(&wb, &ib, r));
            prop_assert!(r.value() <= (w as f64).ln() / (i as f64).ln() + 1e-12);
        }
    }
}

#[test]
fn symplectic_groups_are_closed_under_products() {
    for ambient in [AmbientGroup::sp(2, 2).unwrap(), AmbientGroup::sp(1, 4).unwrap(), AmbientGroup::sp(1, 6).unwrap()] {
        let elements = ambient.elements(DEFAULT_CLOSURE_CAP).unwrap();
        for (k, a) in elements.iter().enumerate().step_by(7) {
            for b in elements.iter().skip(k % 5).step_by(11) {
                let c = a.mul(b).unwrap();
                assert!(is_symplectic(&c).unwrap(), "{a} * {b}");
                assert!(c.is_invertible());
            }
        }
    }
}

proptest! {
    #[test]
    fn determinant_is_multiplicative((a, b) in (2u64..50).prop_flat_map(|n| (matrix(n, 3), matrix(n, 3)))) {
        let n = a.modulus();
        prop_assert_eq!(a.mul(&b).unwrap().determinant(), mul_mod(a.determinant(), b.determinant(), n));
    }
}
