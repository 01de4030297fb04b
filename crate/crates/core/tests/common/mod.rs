//! Brute-force oracles written against plain row-major `Vec<u64>` matrices,
//! sharing no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

pub type Mat = Vec<u64>;

pub fn mat_mul(a: &[u64], b: &[u64], d: usize, n: u64) -> Mat {
    let mut out = vec![0; d * d];
    for r in 0..d {
        for c in 0..d {
            let mut s = 0u128;
            for k in 0..d {
                s += a[r * d + k] as u128 * b[k * d + c] as u128;
            }
            out[r * d + c] = (s % n as u128) as u64;
        }
    }
    out
}

pub fn identity(d: usize) -> Mat {
    (0..d * d).map(|k| u64::from(k / d == k % d)).collect()
}

pub fn transpose(a: &[u64], d: usize) -> Mat {
    (0..d * d).map(|k| a[(k % d) * d + k / d]).collect()
}

/// Every `d x d` matrix over `Z/n`, in odometer order.
pub fn all_matrices(d: usize, n: u64) -> impl Iterator<Item = Mat> {
    let total = n.pow((d * d) as u32);
    (0..total).map(move |mut x| {
        let mut m = vec![0; d * d];
        for slot in m.iter_mut() {
            *slot = x % n;
            x /= n;
        }
        m
    })
}

/// Invertible matrices found by searching for a two-sided inverse.
pub fn invertible_by_search(d: usize, n: u64) -> Vec<Mat> {
    let all: Vec<Mat> = all_matrices(d, n).collect();
    let id = identity(d);
    all.iter()
        .filter(|a| all.iter().any(|b| mat_mul(a, b, d, n) == id))
        .cloned()
        .collect()
}

/// The form `[[0, I], [-I, 0]]` in dimension `2m`.
pub fn omega(m: usize, n: u64) -> Mat {
    let d = 2 * m;
    let mut w = vec![0; d * d];
    for k in 0..m {
        w[k * d + m + k] = 1;
        w[(m + k) * d + k] = n - 1;
    }
    w
}

pub fn preserves_omega(a: &[u64], m: usize, n: u64) -> bool {
    let d = 2 * m;
    let w = omega(m, n);
    mat_mul(&mat_mul(&transpose(a, d), &w, d, n), a, d, n) == w
}

pub fn symplectic_by_scan(m: usize, n: u64) -> Vec<Mat> {
    all_matrices(2 * m, n).filter(|a| preserves_omega(a, m, n)).collect()
}

pub fn apply(a: &[u64], v: &[u64], n: u64) -> Vec<u64> {
    let d = v.len();
    (0..d)
        .map(|r| ((0..d).map(|k| a[r * d + k] as u128 * v[k] as u128).sum::<u128>() % n as u128) as u64)
        .collect()
}

/// All `Z`-linear combinations of `gens` in `(Z/n)^d`.
pub fn span(gens: &[Vec<u64>], d: usize, n: u64) -> HashSet<Vec<u64>> {
    let zero = vec![0; d];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(v) = queue.pop_front() {
        for g in gens {
            let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % n).collect();
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn invariant(a: &[u64], w: &HashSet<Vec<u64>>, n: u64) -> bool {
    w.iter().all(|v| w.contains(&apply(a, v, n)))
}

/// `(AB - BA) w = 0` for every `w` in the set.
pub fn commute_on(a: &[u64], b: &[u64], w: &HashSet<Vec<u64>>, d: usize, n: u64) -> bool {
    let ab = mat_mul(a, b, d, n);
    let ba = mat_mul(b, a, d, n);
    w.iter().all(|v| apply(&ab, v, n) == apply(&ba, v, n))
}

/// Closure of `gens` under multiplication.
pub fn generated(gens: &[Mat], d: usize, n: u64) -> BTreeSet<Mat> {
    let mut seen = BTreeSet::from([identity(d)]);
    let mut queue = VecDeque::from([identity(d)]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = mat_mul(&x, g, d, n);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}
