//! The inequalities relating `|W|` to the index `I(Γ)` of a subgroup acting
//! abelianly on `W`, their intermediate index lower bounds, and the
//! per-instance verifier.
//!
//! Both main bounds carry a power of `ζ(2) = π²/6`, which is irrational. All
//! right-hand sides are therefore computed as rationals rounded *down*: a
//! check `|W| <= rhs_low` that passes certifies the real inequality.
//!
//! `ζ(2)` itself comes from the positive series
//! `ζ(2) = 3 Σ_{k≥1} 1 / (k² C(2k, k))`, whose partial sums are lower bounds
//! and whose terms shrink by more than a factor of four, giving a cheap
//! rigorous enclosure.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{rational_pow, AmbientKind, GroupHandle, DEFAULT_CLOSURE_CAP};
use crate::matmod::{commutes_on, MatrixMod};
use crate::modring::PrimePower;
use crate::report::{biguint_string, rational};
use crate::submodules::{Submodule, SubmoduleShape};

/// Series terms used for the cached `ζ(2)` lower bound (error below `4^{-40}`).
pub const ZETA2_TERMS: usize = 40;

/// Scale used when rounding `sqrt(I)` down to a rational.
const SQRT_SCALE_DIGITS: u32 = 18;

/// Rigorous enclosure `lower <= ζ(2) <= upper` from `terms` series terms.
pub fn zeta2_bounds(terms: usize) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut central = BigInt::one(); // C(2k, k), updated incrementally
    let mut next_term = BigRational::zero();
    for k in 1..=terms as u64 + 1 {
        central = central * BigInt::from(2 * (2 * k - 1)) / BigInt::from(k);
        let term = BigRational::new(BigInt::from(3), BigInt::from(k * k) * &central);
        if k as usize <= terms {
            sum += term;
        } else {
            next_term = term;
        }
    }
    let upper = &sum + next_term * BigRational::new(4.into(), 3.into());
    (sum, upper)
}

/// Cached rational lower bound on `ζ(2)`.
pub fn zeta2_lower() -> &'static BigRational {
    static ZETA2: OnceLock<BigRational> = OnceLock::new();
    ZETA2.get_or_init(|| zeta2_bounds(ZETA2_TERMS).0)
}

fn int(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// A rational lower bound on `base^{half_exp / 2}`, exact when `half_exp` is even.
fn half_power_lower(base: &BigUint, half_exp: u32) -> BigRational {
    let whole = int(&num_traits::pow(base.clone(), (half_exp / 2) as usize));
    if half_exp % 2 == 0 {
        return whole;
    }
    let scale = num_traits::pow(BigUint::from(10u32), SQRT_SCALE_DIGITS as usize);
    let root = (base * &scale * &scale).sqrt();
    whole * BigRational::new(BigInt::from(root), BigInt::from(scale))
}

/// Lower rational estimate of `I^{1+m/2} · ζ(2)^{(m-1)(1+m/2)}`.
pub fn gl_bound(index: &BigUint, m: usize) -> Result<BigRational> {
    if m < 2 {
        return Err(Error::Domain(format!("the GL bound needs m >= 2, got {m}")));
    }
    if index.is_zero() {
        return Err(Error::Domain("index must be at least 1".into()));
    }
    // (m-1)(1+m/2) = (m-1)(m+2)/2 is always an integer.
    let zeta_exp = (m - 1) * (m + 2) / 2;
    let zeta = num_traits::pow(zeta2_lower().clone(), zeta_exp);
    Ok(half_power_lower(index, (m + 2) as u32) * zeta)
}

/// Lower rational estimate of `I^{2+2m} · ζ(2)^{2+2m}`.
pub fn sp_bound(index: &BigUint, m: usize) -> Result<BigRational> {
    if m < 1 {
        return Err(Error::Domain(format!("the Sp bound needs m >= 1, got {m}")));
    }
    if index.is_zero() {
        return Err(Error::Domain("index must be at least 1".into()));
    }
    let exp = 2 + 2 * m;
    Ok(int(&num_traits::pow(index.clone(), exp)) * num_traits::pow(zeta2_lower().clone(), exp))
}

/// The main bound for the given setting (`m` is the half-dimension for `Sp`).
pub fn main_bound(kind: AmbientKind, index: &BigUint, m: usize) -> Result<BigRational> {
    match kind {
        AmbientKind::Gl => gl_bound(index, m),
        AmbientKind::Sp => sp_bound(index, m),
    }
}

fn one_minus_inverse_power(l: u64, k: i64) -> BigRational {
    BigRational::one() - rational_pow(l, -k)
}

/// The per-prime version of the main bound, before aggregating over primes:
/// `I_l^{1+m/2} (1 - l^{-2})^{-(m-1)(1+m/2)}` for `GL`,
/// `I_l^{2+2m} ∏_{t=1..m} (1 - l^{-2t})^{-(2+2m)}` for `Sp`.
/// The product over `l` of these constants is at most the `ζ(2)` power.
pub fn local_bound(kind: AmbientKind, index: &BigUint, m: usize, l: u64) -> Result<BigRational> {
    match kind {
        AmbientKind::Gl => {
            if m < 2 {
                return Err(Error::Domain(format!("the GL bound needs m >= 2, got {m}")));
            }
            let c = num_traits::pow(one_minus_inverse_power(l, 2).recip(), (m - 1) * (m + 2) / 2);
            Ok(half_power_lower(index, (m + 2) as u32) * c)
        }
        AmbientKind::Sp => {
            let exp = 2 + 2 * m;
            let c = (1..=m as i64).fold(BigRational::one(), |acc, t| {
                acc * num_traits::pow(one_minus_inverse_power(l, 2 * t).recip(), exp)
            });
            Ok(int(&num_traits::pow(index.clone(), exp)) * c)
        }
    }
}

/// Proven lower bound on `I(Γ)` in `GL_m(Z/l^e)`:
/// `l^{m(e-i-J)} ∏_{k=1..m} (1 - l^{-k})`.
pub fn gl_index_lower_bound(pp: PrimePower, m: usize, i: u32, j_stat: u32) -> BigRational {
    let exp = m as i64 * (pp.e as i64 - i as i64 - j_stat as i64);
    (1..=m as i64).fold(rational_pow(pp.l, exp), |acc, k| acc * one_minus_inverse_power(pp.l, k))
}

/// Proven lower bound on `I(Γ)` in `Sp(2m, Z/l^e)`:
/// `l^{me - m(i+J)} ∏_{j=1..m} (1 - l^{-2j})`.
pub fn sp_index_lower_bound(pp: PrimePower, m: usize, i: u32, j_stat: u32) -> BigRational {
    let exp = m as i64 * pp.e as i64 - m as i64 * (i as i64 + j_stat as i64);
    (1..=m as i64)
        .fold(rational_pow(pp.l, exp), |acc, j| acc * one_minus_inverse_power(pp.l, 2 * j))
}

pub fn index_lower_bound(kind: AmbientKind, pp: PrimePower, m: usize, i: u32, j: u32) -> BigRational {
    match kind {
        AmbientKind::Gl => gl_index_lower_bound(pp, m, i, j),
        AmbientKind::Sp => sp_index_lower_bound(pp, m, i, j),
    }
}

/// The existential exponent `1 + 1/(m+1)` for `GL_m`, as `(p, q)`; `4/3` at `m = 2`.
pub fn lower_target(m: usize) -> Result<(u64, u64)> {
    if m < 2 {
        return Err(Error::Domain(format!("target exponent needs m >= 2, got {m}")));
    }
    Ok((m as u64 + 2, m as u64 + 1))
}

/// A one-based matrix position `(row, col)`, as in `a_{21}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }
}

/// `min ord_l(a_{row,col})` over `elements`, with `e` when the entry vanishes
/// throughout. The elements must be written in a basis adapted to `W`.
pub fn j_statistic(elements: &[MatrixMod], position: Position, pp: PrimePower) -> Result<u32> {
    let mut best = pp.e;
    for x in elements {
        if x.modulus() != pp.modulus() {
            return Err(Error::Structural(format!(
                "element mod {} in a J computation over Z/{}",
                x.modulus(),
                pp.modulus()
            )));
        }
        if position.row == 0 || position.col == 0 || position.row > x.dim() || position.col > x.dim() {
            return Err(Error::Structural(format!(
                "position ({}, {}) outside a {}×{} matrix",
                position.row,
                position.col,
                x.dim(),
                x.dim()
            )));
        }
        best = best.min(pp.valuation(x.get(position.row - 1, position.col - 1)));
    }
    Ok(best)
}

/// [`j_statistic`] over the cached elements of `gamma`, taken as they are.
pub fn compute_j(gamma: &GroupHandle, position: Position) -> Result<u32> {
    let pp = gamma.ambient().ring().as_prime_power().ok_or_else(|| {
        Error::Structural("J is defined over a prime-power ring; reduce Γ first".into())
    })?;
    j_statistic(gamma.require_elements()?, position, pp)
}

/// Index of the first generator of `gamma` that does not preserve `w`.
pub fn first_non_invariant(gamma: &GroupHandle, w: &Submodule) -> Result<Option<usize>> {
    for (k, g) in gamma.generators().iter().enumerate() {
        if !w.is_invariant(g)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// First generator pair whose commutator does not annihilate `w`.
///
/// Checking generators suffices: restriction to `W` is a homomorphism
/// `Γ → Aut(W)`, and a group generated by pairwise commuting elements is
/// abelian. Each `l`-primary part is tested in its own adapted basis.
fn first_noncommuting_pair(gamma: &GroupHandle, w: &Submodule) -> Result<Option<(usize, usize)>> {
    let gens = gamma.generators();
    for (pp, part) in w.l_primary_parts() {
        let basis = part.adapted_basis()?;
        let local: Vec<MatrixMod> = gens
            .iter()
            .map(|g| basis.conjugate(&g.reduce(pp.modulus())?))
            .collect::<Result<_>>()?;
        for a in 0..local.len() {
            for b in a + 1..local.len() {
                if !commutes_on(&local[a], &local[b], &basis.shape)? {
                    return Ok(Some((a, b)));
                }
            }
        }
    }
    Ok(None)
}

/// Does `Γ` act abelianly on `W`? `W` must be `Γ`-invariant.
pub fn acts_abelianly(gamma: &GroupHandle, w: &Submodule) -> Result<bool> {
    check_compatible(gamma, w)?;
    if let Some(k) = first_non_invariant(gamma, w)? {
        return Err(Error::Hypothesis(format!(
            "generator {k} does not preserve W: {}",
            gamma.generators()[k]
        )));
    }
    Ok(first_noncommuting_pair(gamma, w)?.is_none())
}

fn check_compatible(gamma: &GroupHandle, w: &Submodule) -> Result<()> {
    let amb = gamma.ambient();
    if amb.n() != w.modulus() || amb.rank() != w.rank() {
        return Err(Error::Structural(format!(
            "Γ lives in {amb}, W in (Z/{})^{}",
            w.modulus(),
            w.rank()
        )));
    }
    Ok(())
}

/// Knobs for [`verify_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Position of the entry whose valuation defines `J` for `GL`.
    pub gl_position: Position,
    /// Row `k` of the entry `a_{k1}` defining `J` for `Sp`.
    pub sp_row: usize,
    /// Closure cap, used when `Γ` is not closed yet.
    pub closure_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { gl_position: Position::new(2, 1), sp_row: 2, closure_cap: DEFAULT_CLOSURE_CAP }
    }
}

/// Why an instance was not verified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Diagnosis {
    /// A generator does not map `W` into itself.
    NotInvariant { generator: usize, matrix: String },
    /// Two generators do not commute on `W`.
    NotAbelian { first: usize, second: usize },
}

/// Data for one `l`-primary part of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimePartReport {
    pub l: u64,
    pub e: u32,
    pub shape: SubmoduleShape,
    pub i: u32,
    #[serde(with = "biguint_string")]
    pub w_order: BigUint,
    #[serde(with = "biguint_string")]
    pub gamma_order: BigUint,
    #[serde(with = "biguint_string")]
    pub index: BigUint,
    pub j_position: Position,
    #[serde(rename = "J")]
    pub j: u32,
    /// `J` at `(r, 1)` for every row `r >= 2`.
    pub j_profile: Vec<u32>,
    #[serde(with = "rational")]
    pub intermediate_bound: BigRational,
    pub intermediate_holds: bool,
    #[serde(with = "rational")]
    pub local_bound_low: BigRational,
    pub verdict_local: bool,
}

/// One verified instance `(Γ, W)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub setting: AmbientKind,
    pub m: usize,
    pub n: u64,
    #[serde(with = "biguint_string")]
    pub w_order: BigUint,
    #[serde(with = "biguint_string")]
    pub gamma_order: BigUint,
    #[serde(with = "biguint_string")]
    pub ambient_order: BigUint,
    #[serde(with = "biguint_string")]
    pub index: BigUint,
    #[serde(with = "rational")]
    pub main_bound_low: BigRational,
    pub verdict_main: bool,
    pub verdict_local: bool,
    pub verdict_intermediate: bool,
    pub parts: Vec<PrimePartReport>,
}

impl BoundReport {
    /// All inequalities hold.
    pub fn all_hold(&self) -> bool {
        self.verdict_main && self.verdict_local && self.verdict_intermediate
    }

    pub const CSV_HEADER: &'static str = "setting,n,m,gamma_order,index,w_order,i,J,bound,verdict";

    /// `i` and `J` are joined with `;` across prime parts.
    pub fn csv_row(&self) -> String {
        let join = |f: fn(&PrimePartReport) -> u32| {
            self.parts.iter().map(|p| f(p).to_string()).collect::<Vec<_>>().join(";")
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.setting,
            self.n,
            self.m,
            self.gamma_order,
            self.index,
            self.w_order,
            join(|p| p.i),
            join(|p| p.j),
            decimal_floor(&self.main_bound_low, 6),
            self.verdict_main
        )
    }
}

/// `q` rounded down to `digits` decimals, as text.
pub fn decimal_floor(q: &BigRational, digits: u32) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let scaled = (q * BigRational::from_integer(scale.clone())).floor().to_integer();
    let (whole, frac) = scaled.div_mod_floor(&scale);
    if digits == 0 {
        return whole.to_string();
    }
    format!("{whole}.{:0>width$}", frac.to_string(), width = digits as usize)
}

/// Result of [`verify_instance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verification {
    Verified(BoundReport),
    HypothesisViolation(Diagnosis),
}

impl Verification {
    pub fn report(&self) -> Option<&BoundReport> {
        match self {
            Verification::Verified(r) => Some(r),
            Verification::HypothesisViolation(_) => None,
        }
    }
}

/// Check every inequality on one instance.
///
/// Hypothesis failures come back as [`Verification::HypothesisViolation`].
/// For composite `n` each `l`-primary part `(Γ_l, W_l)` gets its own local
/// bound and intermediate bound; the main bound is checked directly at `n`.
pub fn verify_instance(gamma: &GroupHandle, w: &Submodule, options: &VerifyOptions) -> Result<Verification> {
    check_compatible(gamma, w)?;
    let closed;
    let gamma = if gamma.elements().is_some() {
        gamma
    } else {
        closed = gamma.clone().close(options.closure_cap)?;
        &closed
    };
    if let Some(k) = first_non_invariant(gamma, w)? {
        return Ok(Verification::HypothesisViolation(Diagnosis::NotInvariant {
            generator: k,
            matrix: gamma.generators()[k].to_string(),
        }));
    }
    if let Some((first, second)) = first_noncommuting_pair(gamma, w)? {
        return Ok(Verification::HypothesisViolation(Diagnosis::NotAbelian { first, second }));
    }

    let ambient = gamma.ambient();
    let kind = ambient.kind();
    let m = ambient.m();
    let index = gamma.index()?;
    let w_order = w.order()?;
    let main_bound_low = main_bound(kind, &index, m)?;
    let verdict_main = int(&w_order) <= main_bound_low;

    let single_prime = ambient.ring().is_prime_power();
    let mut parts = Vec::new();
    for (pp, w_l) in w.l_primary_parts() {
        let gamma_l = if single_prime { gamma.clone() } else { gamma.reduce(pp)? };
        parts.push(verify_part(&gamma_l, &w_l, pp, options)?);
    }

    Ok(Verification::Verified(BoundReport {
        setting: kind,
        m,
        n: ambient.n(),
        verdict_local: parts.iter().all(|p| p.verdict_local),
        verdict_intermediate: parts.iter().all(|p| p.intermediate_holds),
        w_order,
        gamma_order: gamma.order().expect("closed above"),
        ambient_order: ambient.order(),
        index,
        main_bound_low,
        verdict_main,
        parts,
    }))
}

fn verify_part(
    gamma: &GroupHandle,
    w: &Submodule,
    pp: PrimePower,
    options: &VerifyOptions,
) -> Result<PrimePartReport> {
    let ambient = gamma.ambient();
    let kind = ambient.kind();
    let m = ambient.m();
    let basis = w.adapted_basis()?;
    let adapted: Vec<MatrixMod> =
        gamma.require_elements()?.iter().map(|x| basis.conjugate(x)).collect::<Result<_>>()?;
    let position = match kind {
        AmbientKind::Gl => options.gl_position,
        AmbientKind::Sp => Position::new(options.sp_row, 1),
    };
    let j = j_statistic(&adapted, position, pp)?;
    let j_profile = (2..=ambient.rank())
        .map(|r| j_statistic(&adapted, Position::new(r, 1), pp))
        .collect::<Result<Vec<_>>>()?;
    let index = gamma.index()?;
    let shape = basis.shape;
    let w_order = shape.order();
    let intermediate_bound = index_lower_bound(kind, pp, m, shape.i(), j);
    let local_bound_low = local_bound(kind, &index, m, pp.l)?;
    Ok(PrimePartReport {
        l: pp.l,
        e: pp.e,
        i: shape.i(),
        intermediate_holds: int(&index) >= intermediate_bound,
        verdict_local: int(&w_order) <= local_bound_low,
        shape,
        w_order,
        gamma_order: gamma.order().expect("closed by caller"),
        index,
        j_position: position,
        j,
        j_profile,
        intermediate_bound,
        local_bound_low,
    })
}

/// `ln a / ln b` from big integers, for ordering only.
pub fn log_ratio(a: &BigUint, b: &BigUint) -> f64 {
    ln_big(a) / ln_big(b)
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::MAX).ln() + shift as f64 * std::f64::consts::LN_2
}
