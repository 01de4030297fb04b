//! Ambient groups `GL_m(Z/nZ)` and `Sp(2m, Z/nZ)`, their orders, subgroups
//! given by generators, and the reduction maps `Sp(Z/p^{k+1}) → Sp(Z/p^k)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matmod::{is_symplectic, MatrixJson, MatrixMod};
use crate::modring::{factorize, PrimePower, RingSpec};

/// Closure cap used when callers do not configure one.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// Largest candidate space `n^{dim²}` that brute-force enumeration will scan.
pub const MAX_BRUTE_FORCE_CANDIDATES: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AmbientKind {
    #[serde(rename = "GL")]
    Gl,
    #[serde(rename = "Sp")]
    Sp,
}

impl fmt::Display for AmbientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmbientKind::Gl => "GL",
            AmbientKind::Sp => "Sp",
        })
    }
}

impl FromStr for AmbientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(AmbientKind::Gl),
            "sp" => Ok(AmbientKind::Sp),
            other => Err(Error::Input(format!("unknown group kind {other:?}, expected gl or sp"))),
        }
    }
}

/// `GL_rank(Z/nZ)` or `Sp(rank, Z/nZ)`; `rank` is always the matrix size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmbientGroup {
    kind: AmbientKind,
    rank: usize,
    ring: RingSpec,
}

impl AmbientGroup {
    pub fn new(kind: AmbientKind, rank: usize, n: u64) -> Result<Self> {
        let ring = factorize(n)?;
        Self::over(kind, rank, ring)
    }

    pub fn over(kind: AmbientKind, rank: usize, ring: RingSpec) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Domain("matrix dimension must be positive".into()));
        }
        if kind == AmbientKind::Sp && rank % 2 != 0 {
            return Err(Error::Structural(format!("Sp needs an even matrix size, got {rank}")));
        }
        Ok(AmbientGroup { kind, rank, ring })
    }

    /// `GL_m(Z/nZ)`.
    pub fn gl(m: usize, n: u64) -> Result<Self> {
        Self::new(AmbientKind::Gl, m, n)
    }

    /// `Sp(2m, Z/nZ)`.
    pub fn sp(m: usize, n: u64) -> Result<Self> {
        Self::new(AmbientKind::Sp, 2 * m, n)
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn n(&self) -> u64 {
        self.ring.n()
    }

    /// The `m` of the bounds: matrix size for `GL`, half of it for `Sp`.
    pub fn m(&self) -> usize {
        match self.kind {
            AmbientKind::Gl => self.rank,
            AmbientKind::Sp => self.rank / 2,
        }
    }

    pub fn identity(&self) -> MatrixMod {
        MatrixMod::identity(self.n(), self.rank)
    }

    /// The same kind of group over `Z/l^e` for one factor of `n`.
    pub fn local(&self, pp: PrimePower) -> AmbientGroup {
        AmbientGroup { kind: self.kind, rank: self.rank, ring: RingSpec::from_prime_power(pp) }
    }

    pub fn order(&self) -> BigUint {
        match self.kind {
            AmbientKind::Gl => gl_order(self.rank, &self.ring),
            AmbientKind::Sp => sp_order(self.rank / 2, &self.ring),
        }
    }

    pub fn contains(&self, mat: &MatrixMod) -> Result<bool> {
        if mat.modulus() != self.n() || mat.dim() != self.rank {
            return Ok(false);
        }
        match self.kind {
            AmbientKind::Gl => Ok(mat.is_invertible()),
            AmbientKind::Sp => is_symplectic(mat),
        }
    }

    /// Every element, by scanning all `n^{rank²}` matrices. Sorted.
    pub fn elements(&self, cap: usize) -> Result<Vec<MatrixMod>> {
        let n = self.n();
        let cells = (self.rank * self.rank) as u32;
        let candidates = n.checked_pow(cells).filter(|&c| c <= MAX_BRUTE_FORCE_CANDIDATES);
        let Some(candidates) = candidates else {
            return Err(Error::Capacity {
                what: format!("brute-force scan of {}×{} matrices mod {n}", self.rank, self.rank),
                cap: MAX_BRUTE_FORCE_CANDIDATES as usize,
            });
        };
        let mut out = Vec::new();
        let mut entries = vec![0u64; cells as usize];
        for _ in 0..candidates {
            let mat = MatrixMod::new(n, self.rank, entries.clone())?;
            if self.contains(&mat)? {
                out.push(mat);
                if out.len() > cap {
                    return Err(Error::Capacity { what: format!("elements of {self}"), cap });
                }
            }
            // Odometer increment, last entry fastest.
            for x in entries.iter_mut().rev() {
                *x += 1;
                if *x < n {
                    break;
                }
                *x = 0;
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn to_json(&self) -> AmbientJson {
        AmbientJson { kind: self.kind, rank: self.rank, n: self.n() }
    }
}

impl fmt::Display for AmbientGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}(Z/{})", self.kind, self.rank, self.n())
    }
}

fn product_over_primes(ring: &RingSpec, local: impl Fn(PrimePower) -> BigRational) -> BigUint {
    let total = ring.factors().iter().fold(BigRational::one(), |acc, &pp| acc * local(pp));
    assert!(total.is_integer(), "group order formula produced a non-integer");
    total.to_integer().to_biguint().expect("group orders are positive")
}

pub(crate) fn rational_pow(l: u64, exp: i64) -> BigRational {
    let p = num_traits::pow(BigRational::from_integer(BigInt::from(l)), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// `|GL_m(Z/l^e)| = l^{m²e} ∏_{k=1..m} (1 - l^{-k})`, multiplied over `l | n`.
pub fn gl_order(m: usize, ring: &RingSpec) -> BigUint {
    product_over_primes(ring, |pp| {
        let mut acc = rational_pow(pp.l, (m * m) as i64 * pp.e as i64);
        for k in 1..=m as i64 {
            acc *= BigRational::one() - rational_pow(pp.l, -k);
        }
        acc
    })
}

/// `|Sp(2m, Z/l^e)| = l^{e(2m²+m)} ∏_{j=1..m} (1 - l^{-2j})`, multiplied over `l | n`.
pub fn sp_order(m: usize, ring: &RingSpec) -> BigUint {
    product_over_primes(ring, |pp| {
        let mut acc = rational_pow(pp.l, pp.e as i64 * (2 * m * m + m) as i64);
        for j in 1..=m as i64 {
            acc *= BigRational::one() - rational_pow(pp.l, -2 * j);
        }
        acc
    })
}

/// Breadth-first closure of `generators` under multiplication, starting at
/// the identity. Elements come out in discovery order, which depends only on
/// the generator order.
///
/// For matrices over a finite ring this is the generated monoid; it is a
/// group exactly when every generator is invertible, which
/// [`GroupHandle::close`] certifies.
pub fn closure(generators: &[MatrixMod], cap: usize) -> Result<Vec<MatrixMod>> {
    let Some(first) = generators.first() else {
        return Err(Error::Structural(
            "closure needs at least one generator to fix the dimension and modulus; \
             pass the identity for the trivial group"
                .into(),
        ));
    };
    for g in generators {
        if g.modulus() != first.modulus() || g.dim() != first.dim() {
            return Err(Error::Structural("generators must share dimension and modulus".into()));
        }
    }
    let identity = MatrixMod::identity(first.modulus(), first.dim());
    let mut seen: HashSet<MatrixMod> = HashSet::from([identity.clone()]);
    let mut order = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x.mul_unchecked(g);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::Capacity { what: "subgroup closure".into(), cap });
                }
                seen.insert(y.clone());
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}

/// A subgroup `Γ` of an ambient group, given by generators, optionally with
/// its element set.
#[derive(Debug, Clone)]
pub struct GroupHandle {
    ambient: AmbientGroup,
    generators: Vec<MatrixMod>,
    elements: Option<Arc<Vec<MatrixMod>>>,
}

/// Wire form of a subgroup: `{"ambient": {..}, "generators": [<matrix>, ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupJson {
    pub ambient: AmbientJson,
    pub generators: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientJson {
    pub kind: AmbientKind,
    pub rank: usize,
    pub n: u64,
}

impl TryFrom<AmbientJson> for AmbientGroup {
    type Error = Error;

    fn try_from(json: AmbientJson) -> Result<Self> {
        AmbientGroup::new(json.kind, json.rank, json.n)
    }
}

impl TryFrom<GroupJson> for GroupHandle {
    type Error = Error;

    fn try_from(json: GroupJson) -> Result<Self> {
        let ambient = AmbientGroup::try_from(json.ambient)?;
        let generators =
            json.generators.into_iter().map(MatrixMod::try_from).collect::<Result<Vec<_>>>()?;
        GroupHandle::new(ambient, generators)
    }
}

impl GroupHandle {
    /// Check generator shapes, and symplecticity for `Sp`. Invertibility in
    /// `GL` is certified later by [`close`](Self::close).
    pub fn new(ambient: AmbientGroup, generators: Vec<MatrixMod>) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if g.modulus() != ambient.n() || g.dim() != ambient.rank() {
                return Err(Error::Structural(format!(
                    "generator {k} is {}×{} mod {}, ambient is {ambient}",
                    g.dim(),
                    g.dim(),
                    g.modulus()
                )));
            }
            if ambient.kind() == AmbientKind::Sp && !is_symplectic(g)? {
                return Err(Error::Domain(format!("generator {k} is not symplectic: {g}")));
            }
        }
        Ok(GroupHandle { ambient, generators, elements: None })
    }

    /// The whole ambient group, with its elements supplied by the caller.
    pub(crate) fn from_parts(
        ambient: AmbientGroup,
        generators: Vec<MatrixMod>,
        elements: Arc<Vec<MatrixMod>>,
    ) -> Self {
        GroupHandle { ambient, generators, elements: Some(elements) }
    }

    /// Compute and cache the element set, certifying that every generator has
    /// an inverse inside it.
    pub fn close(mut self, cap: usize) -> Result<Self> {
        let mut gens = self.generators.clone();
        if gens.is_empty() {
            gens.push(self.ambient.identity());
        }
        let elements = closure(&gens, cap)?;
        let set: HashSet<&MatrixMod> = elements.iter().collect();
        let identity = self.ambient.identity();
        for (k, g) in self.generators.iter().enumerate() {
            let has_inverse = elements.iter().any(|h| g.mul_unchecked(h) == identity);
            if !has_inverse {
                return Err(Error::Domain(format!(
                    "generator {k} is not invertible over Z/{}: {g}",
                    self.ambient.n()
                )));
            }
        }
        debug_assert!(set.contains(&identity));
        self.elements = Some(Arc::new(elements));
        Ok(self)
    }

    pub fn ambient(&self) -> &AmbientGroup {
        &self.ambient
    }

    pub fn generators(&self) -> &[MatrixMod] {
        &self.generators
    }

    pub fn elements(&self) -> Option<&[MatrixMod]> {
        self.elements.as_deref().map(Vec::as_slice)
    }

    pub(crate) fn require_elements(&self) -> Result<&[MatrixMod]> {
        self.elements().ok_or_else(|| {
            Error::Structural("group elements are not cached; call close() first".into())
        })
    }

    pub fn order(&self) -> Option<BigUint> {
        self.elements().map(|e| BigUint::from(e.len()))
    }

    /// `(ambient : Γ)`. A non-integral quotient means the closure is wrong.
    pub fn index(&self) -> Result<BigUint> {
        let order = BigUint::from(self.require_elements()?.len());
        let (q, r) = self.ambient.order().div_rem(&order);
        if !r.is_zero() {
            return Err(Error::Internal(format!(
                "|Γ| = {order} does not divide |{}| = {}",
                self.ambient,
                self.ambient.order()
            )));
        }
        Ok(q)
    }

    /// `Γ_l`: the image of `Γ` under entrywise reduction mod `l^e`.
    pub fn reduce(&self, pp: PrimePower) -> Result<GroupHandle> {
        let q = pp.modulus();
        let elements = self.require_elements()?;
        let mut image: Vec<MatrixMod> =
            elements.iter().map(|x| x.reduce(q)).collect::<Result<HashSet<_>>>()?.into_iter().collect();
        image.sort();
        let generators = self.generators.iter().map(|g| g.reduce(q)).collect::<Result<_>>()?;
        Ok(GroupHandle {
            ambient: self.ambient.local(pp),
            generators,
            elements: Some(Arc::new(image)),
        })
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            ambient: self.ambient.to_json(),
            generators: self.generators.iter().map(MatrixMod::to_json).collect(),
        }
    }
}

/// Outcome of comparing `Sp(2m, Z/p^{k+1})` with `Sp(2m, Z/p^k)` elementwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub m: usize,
    pub p: u64,
    pub k: u32,
    pub surjective: bool,
    #[serde(with = "crate::report::biguint_string")]
    pub kernel_size: BigUint,
    #[serde(with = "crate::report::biguint_string")]
    pub expected_kernel_size: BigUint,
    #[serde(with = "crate::report::biguint_string")]
    pub source_order: BigUint,
    #[serde(with = "crate::report::biguint_string")]
    pub target_order: BigUint,
}

/// Enumerate both groups, reduce every element of the larger one, and count
/// the fibre over the identity. The expected kernel size is `p^{2m²+m}`.
pub fn reduction_check(m: usize, p: u64, k: u32, cap: usize) -> Result<ReductionReport> {
    if m == 0 || k == 0 {
        return Err(Error::Domain("reduction check needs m >= 1 and k >= 1".into()));
    }
    let lower = PrimePower::new(p, k)?;
    let upper = PrimePower::new(p, k + 1)?;
    let source = AmbientGroup::sp(m, upper.modulus())?.elements(cap)?;
    let target = AmbientGroup::sp(m, lower.modulus())?.elements(cap)?;
    let q = lower.modulus();
    let identity = MatrixMod::identity(q, 2 * m);
    let mut fibres: HashMap<MatrixMod, usize> = HashMap::new();
    for x in &source {
        *fibres.entry(x.reduce(q)?).or_default() += 1;
    }
    let surjective = target.iter().all(|t| fibres.contains_key(t)) && fibres.len() == target.len();
    let kernel = fibres.get(&identity).copied().unwrap_or(0);
    Ok(ReductionReport {
        m,
        p,
        k,
        surjective,
        kernel_size: BigUint::from(kernel),
        expected_kernel_size: crate::modring::big_pow(p, (2 * m * m + m) as u32),
        source_order: BigUint::from(source.len()),
        target_order: BigUint::from(target.len()),
    })
}
