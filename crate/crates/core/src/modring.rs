//! Arithmetic in `Z/nZ`: factorization of the modulus, `l`-adic valuations
//! and the Chinese remainder split `Z/nZ ≅ ∏ Z/l^e Z`.
//!
//! Residues are stored as `u64` in `[0, n)`. Every product is formed in
//! `u128` and reduced immediately, so arithmetic is exact for any modulus
//! that fits in a machine word. Quantities that outgrow a word (group orders,
//! submodule sizes) are [`BigUint`]s.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor `l^e` of a modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePower {
    pub l: u64,
    pub e: u32,
}

impl PrimePower {
    pub fn new(l: u64, e: u32) -> Result<Self> {
        if l < 2 || !is_prime(l) {
            return Err(Error::Domain(format!("{l} is not a prime")));
        }
        if e == 0 {
            return Err(Error::Domain("prime-power exponent must be at least 1".into()));
        }
        l.checked_pow(e)
            .ok_or_else(|| Error::Domain(format!("{l}^{e} does not fit in 64 bits")))?;
        Ok(PrimePower { l, e })
    }

    /// `l^e`.
    pub fn modulus(&self) -> u64 {
        self.l.pow(self.e)
    }

    /// `l^t` for `t <= e`.
    pub fn power(&self, t: u32) -> u64 {
        debug_assert!(t <= self.e);
        self.l.pow(t)
    }

    /// `ord_l(x)` for a residue modulo `l^e`; the zero residue has valuation `e`.
    pub fn valuation(&self, x: u64) -> u32 {
        valuation(self.l, self.e, x)
    }
}

/// The modulus `n` together with its factorization into prime powers,
/// primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSpec {
    n: u64,
    factors: Vec<PrimePower>,
}

impl RingSpec {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }

    /// The single factor, when `n` is a prime power.
    pub fn as_prime_power(&self) -> Option<PrimePower> {
        match self.factors.as_slice() {
            [pp] => Some(*pp),
            _ => None,
        }
    }

    pub fn from_prime_power(pp: PrimePower) -> Self {
        RingSpec {
            n: pp.modulus(),
            factors: vec![pp],
        }
    }
}

/// Factor `n >= 2` by trial division.
pub fn factorize(n: u64) -> Result<RingSpec> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "modulus must be at least 2 (n and m are required to exceed 1), got {n}"
        )));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut l = 2u64;
    while l.saturating_mul(l) <= rest {
        if rest % l == 0 {
            let mut e = 0;
            while rest % l == 0 {
                rest /= l;
                e += 1;
            }
            factors.push(PrimePower { l, e });
        }
        l += if l == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push(PrimePower { l: rest, e: 1 });
    }
    Ok(RingSpec { n, factors })
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest `t <= e` with `l^t | x`; returns `e` for `x ≡ 0 (mod l^e)`.
pub fn valuation(l: u64, e: u32, x: u64) -> u32 {
    let q = l.pow(e);
    let mut x = x % q;
    if x == 0 {
        return e;
    }
    let mut t = 0;
    while x % l == 0 {
        x /= l;
        t += 1;
    }
    t
}

#[inline]
pub fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 + b as u128) % n as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    add_mod(a, n - b % n, n)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

#[inline]
pub fn neg_mod(a: u64, n: u64) -> u64 {
    (n - a % n) % n
}

/// Inverse of `a` modulo `n`, if `gcd(a, n) = 1`.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(n as i128) as u64)
}

/// Reduce `x mod n` into one residue per prime-power factor of `spec`.
pub fn crt_split(x: u64, spec: &RingSpec) -> Vec<u64> {
    spec.factors.iter().map(|pp| x % pp.modulus()).collect()
}

/// Inverse of [`crt_split`].
pub fn crt_combine(parts: &[u64], spec: &RingSpec) -> Result<u64> {
    if parts.len() != spec.factors.len() {
        return Err(Error::Structural(format!(
            "expected {} CRT components for n = {}, got {}",
            spec.factors.len(),
            spec.n,
            parts.len()
        )));
    }
    let n = spec.n;
    let mut acc = 0u64;
    for (&r, pp) in parts.iter().zip(&spec.factors) {
        let q = pp.modulus();
        if r >= q {
            return Err(Error::Structural(format!("component {r} is not reduced mod {q}")));
        }
        let cofactor = n / q;
        let inv = inv_mod(cofactor % q, q)
            .ok_or_else(|| Error::Internal(format!("{cofactor} not invertible mod {q}")))?;
        let term = mul_mod(mul_mod(r, inv, n), cofactor, n);
        acc = add_mod(acc, term, n);
    }
    Ok(acc)
}

pub fn big_pow(base: u64, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}
