//! Library results checked against brute-force oracles.

mod common;

use std::collections::{BTreeSet, HashSet};

use abl::bounds::{acts_abelianly, gl_bound, sp_bound, zeta2_bounds, ZETA2_TERMS};
use abl::groups::{gl_order, AmbientGroup, GroupHandle, DEFAULT_CLOSURE_CAP};
use abl::matmod::{block_relations, is_symplectic, MatrixMod};
use abl::modring::factorize;
use abl::search::{enumerate_invariant_submodules, enumerate_subgroups, exhaustive_verify, SearchConfig};
use abl::submodules::Submodule;
use num_bigint::BigUint;
use num_traits::ToPrimitive;

fn handle(ambient: &AmbientGroup, gens: Vec<MatrixMod>) -> GroupHandle {
    GroupHandle::new(ambient.clone(), gens).unwrap().close(DEFAULT_CLOSURE_CAP).unwrap()
}

fn element_set(g: &GroupHandle) -> BTreeSet<Vec<u64>> {
    g.elements().unwrap().iter().map(|m| m.entries().to_vec()).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Generators and their span.
type Spanned = (Vec<Vec<u64>>, HashSet<Vec<u64>>);

/// Every submodule of `(Z/n)^d`, as the distinct spans of `d`-element lists.
fn all_spans(d: usize, n: u64) -> Vec<Spanned> {
    let vectors: Vec<Vec<u64>> = common::all_matrices(1, n.pow(d as u32))
        .map(|x| {
            let mut v = vec![0; d];
            let mut x = x[0];
            for slot in v.iter_mut() {
                *slot = x % n;
                x /= n;
            }
            v
        })
        .collect();
    let mut seen: BTreeSet<Vec<Vec<u64>>> = BTreeSet::new();
    let mut out = vec![];
    let mut lists: Vec<Vec<Vec<u64>>> = vec![vec![]];
    for _ in 0..d {
        lists = lists
            .into_iter()
            .flat_map(|l| vectors.iter().map(move |v| [l.clone(), vec![v.clone()]].concat()))
            .collect();
    }
    for gens in lists {
        let s = common::span(&gens, d, n);
        let mut key: Vec<Vec<u64>> = s.iter().cloned().collect();
        key.sort();
        if seen.insert(key) {
            out.push((gens, s));
        }
    }
    out
}

#[test]
fn invertibility_matches_inverse_search() {
    for (d, n) in [(2, 2), (2, 3), (2, 4), (2, 6), (3, 2)] {
        let oracle: BTreeSet<_> = common::invertible_by_search(d, n).into_iter().collect();
        let library: BTreeSet<_> = common::all_matrices(d, n)
            .filter(|e| MatrixMod::new(n, d, e.clone()).unwrap().is_invertible())
            .collect();
        assert_eq!(oracle, library, "GL_{d}(Z/{n})");
        assert_eq!(BigUint::from(oracle.len()), gl_order(d, &factorize(n).unwrap()), "GL_{d}(Z/{n})");
    }
}

#[test]
fn gl1_order_is_euler_phi() {
    for n in 2..300u64 {
        let phi = (1..n).filter(|&a| gcd(a, n) == 1).count();
        assert_eq!(gl_order(1, &factorize(n).unwrap()), BigUint::from(phi), "n = {n}");
    }
}

#[test]
fn symplectic_test_matches_definition_and_blocks() {
    for (m, n) in [(1, 2), (1, 3), (1, 4), (1, 6), (2, 2)] {
        for entries in common::all_matrices(2 * m, n) {
            let mat = MatrixMod::new(n, 2 * m, entries.clone()).unwrap();
            let oracle = common::preserves_omega(&entries, m, n);
            assert_eq!(is_symplectic(&mat).unwrap(), oracle, "{mat}");
            assert_eq!(block_relations(&mat).unwrap().all(), oracle, "{mat}");
        }
    }
}

#[test]
fn ambient_listing_matches_scan() {
    for (m, n) in [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 2)] {
        let sp = AmbientGroup::sp(m, n).unwrap();
        let listed: BTreeSet<_> =
            sp.elements(DEFAULT_CLOSURE_CAP).unwrap().into_iter().map(|x| x.entries().to_vec()).collect();
        let scanned: BTreeSet<_> = common::symplectic_by_scan(m, n).into_iter().collect();
        assert_eq!(listed, scanned, "{sp}");
        assert_eq!(BigUint::from(listed.len()), sp.order());
    }
}

#[test]
fn canonical_shape_order_matches_span_size_rank_2() {
    for n in [2u64, 3, 4, 5, 7, 8, 9] {
        let vectors: Vec<Vec<u64>> = (0..n * n).map(|x| vec![x % n, x / n]).collect();
        for a in &vectors {
            for b in &vectors {
                let gens = vec![a.clone(), b.clone()];
                let w = Submodule::new(n, 2, gens.clone()).unwrap();
                let span = common::span(&gens, 2, n);
                assert_eq!(w.order().unwrap(), BigUint::from(span.len()), "{gens:?} mod {n}");
                let reduced = w.reduced().unwrap();
                assert_eq!(common::span(reduced.generators(), 2, n), span, "{gens:?} mod {n}");
                assert!(span.iter().all(|v| w.contains(v).unwrap()));
            }
        }
    }
}

#[test]
fn canonical_shape_order_matches_span_size_rank_3() {
    for n in [2u64, 3, 4] {
        let vectors: Vec<Vec<u64>> = (0..n.pow(3)).map(|x| vec![x % n, x / n % n, x / (n * n)]).collect();
        for (ia, a) in vectors.iter().enumerate() {
            for (ib, b) in vectors.iter().enumerate().skip(ia) {
                for c in vectors.iter().skip(ib) {
                    let gens = vec![a.clone(), b.clone(), c.clone()];
                    let w = Submodule::new(n, 3, gens.clone()).unwrap();
                    let span = common::span(&gens, 3, n);
                    assert_eq!(w.order().unwrap(), BigUint::from(span.len()), "{gens:?} mod {n}");
                    let shape = w.canonical_shape().unwrap();
                    assert_eq!(shape.to_submodule().canonical_shape().unwrap(), shape);
                }
            }
        }
    }
}

#[test]
fn composite_submodule_orders_and_invariance() {
    let n = 6;
    let spans = all_spans(2, n);
    assert_eq!(spans.len(), 30, "submodules of (Z/6)^2");
    let matrices: Vec<_> = common::all_matrices(2, n).collect();
    for (gens, span) in &spans {
        let w = Submodule::new(n, 2, gens.clone()).unwrap();
        assert_eq!(w.order().unwrap(), BigUint::from(span.len()));
        let parts: BigUint = w.l_primary_parts().iter().map(|(_, p)| p.order().unwrap()).product();
        assert_eq!(parts, BigUint::from(span.len()));
        for entries in matrices.iter().step_by(5) {
            let mat = MatrixMod::new(n, 2, entries.clone()).unwrap();
            assert_eq!(w.is_invariant(&mat).unwrap(), common::invariant(entries, span, n), "{gens:?}, {mat}");
        }
    }
}

#[test]
fn acts_abelianly_matches_elementwise_commutators() {
    for n in [3u64, 4] {
        let ambient = AmbientGroup::gl(2, n).unwrap();
        let subgroups = enumerate_subgroups(&SearchConfig::new(ambient)).unwrap();
        let spans = all_spans(2, n);
        let mut compared = 0;
        for gamma in subgroups.iter().filter(|g| g.elements().unwrap().len() <= 24) {
            let elements: Vec<Vec<u64>> = element_set(gamma).into_iter().collect();
            for (gens, span) in &spans {
                if !elements.iter().all(|a| common::invariant(a, span, n)) {
                    continue;
                }
                let w = Submodule::new(n, 2, gens.clone()).unwrap();
                let oracle = elements.iter().all(|a| elements.iter().all(|b| common::commute_on(a, b, span, 2, n)));
                assert_eq!(acts_abelianly(gamma, &w).unwrap(), oracle, "{:?} on {gens:?}", gamma.generators());
                compared += 1;
            }
        }
        assert!(compared > 100);
    }
}

#[test]
fn subgroup_lattice_of_s3_matches_subset_scan() {
    let ambient = AmbientGroup::gl(2, 2).unwrap();
    let elements: Vec<Vec<u64>> =
        ambient.elements(DEFAULT_CLOSURE_CAP).unwrap().into_iter().map(|m| m.entries().to_vec()).collect();
    let mut closed = BTreeSet::new();
    for mask in 1u32..(1 << elements.len()) {
        let subset: BTreeSet<Vec<u64>> =
            (0..elements.len()).filter(|k| mask >> k & 1 == 1).map(|k| elements[k].clone()).collect();
        let is_group = subset.contains(&common::identity(2))
            && subset.iter().all(|a| subset.iter().all(|b| subset.contains(&common::mat_mul(a, b, 2, 2))));
        if is_group {
            closed.insert(subset);
        }
    }
    let found: BTreeSet<_> =
        enumerate_subgroups(&SearchConfig::new(ambient)).unwrap().iter().map(element_set).collect();
    assert_eq!(found, closed);
    assert_eq!(found.len(), 6);
}

#[test]
fn two_generator_subgroups_match_pairwise_closure() {
    for ambient in [AmbientGroup::gl(2, 3).unwrap(), AmbientGroup::sp(1, 4).unwrap()] {
        let n = ambient.n();
        let elements: Vec<Vec<u64>> =
            ambient.elements(DEFAULT_CLOSURE_CAP).unwrap().into_iter().map(|m| m.entries().to_vec()).collect();
        let mut oracle = BTreeSet::new();
        for a in &elements {
            for b in &elements {
                oracle.insert(common::generated(&[a.clone(), b.clone()], 2, n));
            }
        }
        let mut config = SearchConfig::new(ambient.clone());
        config.max_generators = Some(2);
        let found: BTreeSet<_> = enumerate_subgroups(&config).unwrap().iter().map(element_set).collect();
        assert_eq!(found, oracle, "{ambient}");
        let all: BTreeSet<_> =
            enumerate_subgroups(&SearchConfig::new(ambient.clone())).unwrap().iter().map(element_set).collect();
        assert!(found.is_subset(&all));
        for g in &all {
            assert_eq!(ambient.order().to_usize().unwrap() % g.len(), 0, "Lagrange in {ambient}");
        }
    }
}

#[test]
fn invariant_submodules_match_span_filter() {
    let n = 4;
    let ambient = AmbientGroup::gl(2, n).unwrap();
    let spans = all_spans(2, n);
    assert_eq!(spans.len(), 15, "subgroups of (Z/4)^2");
    for gamma in enumerate_subgroups(&SearchConfig::new(ambient)).unwrap() {
        let gens: Vec<Vec<u64>> = gamma.generators().iter().map(|m| m.entries().to_vec()).collect();
        let mut oracle: Vec<Vec<Vec<u64>>> = spans
            .iter()
            .filter(|(_, s)| gens.iter().all(|g| common::invariant(g, s, n)))
            .map(|(_, s)| {
                let mut v: Vec<_> = s.iter().cloned().collect();
                v.sort();
                v
            })
            .collect();
        oracle.sort();
        let mut found: Vec<Vec<Vec<u64>>> = enumerate_invariant_submodules(&gamma, 1 << 16)
            .unwrap()
            .iter()
            .map(|w| {
                let mut v: Vec<_> = common::span(w.generators(), 2, n).into_iter().collect();
                v.sort();
                v
            })
            .collect();
        found.sort();
        assert_eq!(found, oracle, "{:?}", gamma.generators());
    }
}

#[test]
fn main_bounds_are_safe_roundings() {
    let zeta = std::f64::consts::PI.powi(2) / 6.0;
    let (lo, hi) = zeta2_bounds(ZETA2_TERMS);
    assert!(lo.to_f64().unwrap() <= zeta && zeta <= hi.to_f64().unwrap());
    for m in 1..=4usize {
        for index in [1u64, 2, 3, 7, 24, 1000, 123_456_789] {
            let i = BigUint::from(index);
            let mf = m as f64;
            let targets = [
                (m >= 2).then(|| (gl_bound(&i, m).unwrap(), (1.0 + mf / 2.0, (mf - 1.0) * (mf + 2.0) / 2.0))),
                Some((sp_bound(&i, m).unwrap(), (2.0 + 2.0 * mf, 2.0 + 2.0 * mf))),
            ];
            for (bound, (a, b)) in targets.into_iter().flatten() {
                let exact = a * (index as f64).ln() + b * zeta.ln();
                let got = bound.to_f64().unwrap().ln();
                assert!(got <= exact + 1e-12, "m = {m}, I = {index}: {got} above {exact}");
                assert!(got >= exact - 1e-9, "m = {m}, I = {index}: {got} far below {exact}");
            }
        }
    }
}

#[test]
fn search_results_do_not_depend_on_thread_count() {
    let run = |threads| {
        let mut config = SearchConfig::new(AmbientGroup::gl(2, 3).unwrap());
        config.parallelism = threads;
        let outcome = exhaustive_verify(&config).unwrap();
        let reports: Vec<_> = outcome.instances.iter().map(|i| serde_json::to_string(&i.report).unwrap()).collect();
        (serde_json::to_string(&outcome.summary).unwrap(), reports)
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(0));
}

#[test]
fn closing_an_element_list_is_idempotent() {
    let ambient = AmbientGroup::gl(2, 4).unwrap();
    for gamma in enumerate_subgroups(&SearchConfig::new(ambient.clone())).unwrap().iter().step_by(9) {
        let again = handle(&ambient, gamma.elements().unwrap().to_vec());
        assert_eq!(element_set(&again), element_set(gamma));
        assert_eq!(ambient.order() % again.order().unwrap(), BigUint::from(0u32));
    }
}
