//! Submodules `W ⊆ (Z/nZ)^rank`: canonical shapes, orders, invariance and
//! the `l`-primary split.
//!
//! Over a prime-power ring `Z/l^e` every submodule can be brought into the
//! diagonal form
//!
//! ```text
//! W ≅ l^i Z/l^e ⊕ l^{i+j_1} Z/l^e ⊕ … ⊕ l^{i+j_1+…+j_{rank-1}} Z/l^e
//! ```
//!
//! by a change of basis of the ambient module. The exponents are the
//! elementary-divisor valuations of any generator matrix (Smith normal form
//! over the local ring `Z/l^e`), sorted ascending, so `(i, j)` is unique.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matmod::MatrixMod;
use crate::modring::{
    add_mod, big_pow, factorize, inv_mod, mul_mod, sub_mod, valuation, PrimePower, RingSpec,
};

/// Canonical data `(l, e, i, j_1..j_{rank-1})` of a submodule of `(Z/l^e)^rank`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubmoduleShape {
    l: u64,
    e: u32,
    rank: usize,
    i: u32,
    j: Vec<u32>,
}

impl SubmoduleShape {
    pub fn new(pp: PrimePower, rank: usize, i: u32, j: Vec<u32>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Structural("ambient rank must be positive".into()));
        }
        if j.len() + 1 != rank {
            return Err(Error::Structural(format!(
                "a rank-{rank} shape needs {} gaps, got {}",
                rank - 1,
                j.len()
            )));
        }
        let top = i as u64 + j.iter().map(|&x| x as u64).sum::<u64>();
        if top > pp.e as u64 {
            return Err(Error::Domain(format!(
                "valuations reach {top}, beyond the exponent e = {}",
                pp.e
            )));
        }
        Ok(SubmoduleShape { l: pp.l, e: pp.e, rank, i, j })
    }

    /// Shape with the given ascending diagonal valuations.
    pub fn from_valuations(pp: PrimePower, valuations: &[u32]) -> Result<Self> {
        let Some(&i) = valuations.first() else {
            return Err(Error::Structural("ambient rank must be positive".into()));
        };
        let mut j = Vec::with_capacity(valuations.len() - 1);
        for w in valuations.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Structural(format!("valuations {valuations:?} are not ascending")));
            }
            j.push(w[1] - w[0]);
        }
        Self::new(pp, valuations.len(), i, j)
    }

    pub fn full(pp: PrimePower, rank: usize) -> Self {
        SubmoduleShape { l: pp.l, e: pp.e, rank, i: 0, j: vec![0; rank.saturating_sub(1)] }
    }

    /// The zero module, recorded as `i = e`, all gaps `0`.
    pub fn zero(pp: PrimePower, rank: usize) -> Self {
        SubmoduleShape { l: pp.l, e: pp.e, rank, i: pp.e, j: vec![0; rank.saturating_sub(1)] }
    }

    /// Every shape of a submodule of `(Z/l^e)^rank`.
    pub fn all(pp: PrimePower, rank: usize) -> Vec<Self> {
        fn extend(pp: PrimePower, rank: usize, acc: &mut Vec<u32>, out: &mut Vec<SubmoduleShape>) {
            if acc.len() == rank {
                out.push(SubmoduleShape::from_valuations(pp, acc).expect("ascending by construction"));
                return;
            }
            let lo = acc.last().copied().unwrap_or(0);
            for v in lo..=pp.e {
                acc.push(v);
                extend(pp, rank, acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        extend(pp, rank, &mut Vec::new(), &mut out);
        out
    }

    pub fn prime_power(&self) -> PrimePower {
        PrimePower { l: self.l, e: self.e }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    pub fn j(&self) -> &[u32] {
        &self.j
    }

    pub fn is_zero(&self) -> bool {
        self.i == self.e
    }

    /// Diagonal valuations `v_k = i + j_1 + … + j_{k-1}`.
    pub fn valuations(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.rank);
        let mut acc = self.i;
        v.push(acc);
        for &g in &self.j {
            acc += g;
            v.push(acc);
        }
        v
    }

    /// `|W| = ∏_k l^{e - v_k}`.
    pub fn order(&self) -> BigUint {
        let exp: u32 = self.valuations().iter().map(|v| self.e - v).sum();
        big_pow(self.l, exp)
    }

    /// Nonzero diagonal generators `l^{v_k} e_k`.
    pub fn basis(&self) -> Vec<Vec<u64>> {
        let pp = self.prime_power();
        self.valuations()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < self.e)
            .map(|(k, &v)| {
                let mut g = vec![0; self.rank];
                g[k] = pp.power(v);
                g
            })
            .collect()
    }

    pub fn to_submodule(&self) -> Submodule {
        Submodule {
            n: self.prime_power().modulus(),
            rank: self.rank,
            generators: self.basis(),
        }
    }

    /// Minimum valuations `d_rs` an entry of a `W`-preserving matrix must
    /// have: `d_rs = j_s + … + j_{r-1}` below the diagonal, `0` elsewhere.
    pub fn stabilizer_pattern(&self) -> Vec<Vec<u32>> {
        let v = self.valuations();
        (0..self.rank)
            .map(|r| (0..self.rank).map(|s| if r > s { v[r] - v[s] } else { 0 }).collect())
            .collect()
    }

    /// Does every entry of `mat` meet the stabilizer pattern?
    pub fn pattern_admits(&self, mat: &MatrixMod) -> Result<bool> {
        let pp = self.prime_power();
        if mat.modulus() != pp.modulus() || mat.dim() != self.rank {
            return Err(Error::Structural(format!(
                "{}×{} matrix mod {} checked against a shape in (Z/{})^{}",
                mat.dim(),
                mat.dim(),
                mat.modulus(),
                pp.modulus(),
                self.rank
            )));
        }
        let pattern = self.stabilizer_pattern();
        for (r, row) in pattern.iter().enumerate() {
            for (s, &d) in row.iter().enumerate() {
                if pp.valuation(mat.get(r, s)) < d.min(self.e) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// A submodule of `(Z/nZ)^rank` given by generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Submodule {
    n: u64,
    rank: usize,
    generators: Vec<Vec<u64>>,
}

/// Wire form: `{"n": .., "rank": .., "generators": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmoduleJson {
    pub n: u64,
    pub rank: usize,
    pub generators: Vec<Vec<u64>>,
}

impl TryFrom<SubmoduleJson> for Submodule {
    type Error = Error;

    fn try_from(json: SubmoduleJson) -> Result<Self> {
        Submodule::new(json.n, json.rank, json.generators)
    }
}

/// A basis of the ambient module in which `W` is diagonal.
///
/// `to_adapted · W` is the diagonal module of `shape`, and `from_adapted` is
/// the inverse change of basis.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    pub shape: SubmoduleShape,
    pub to_adapted: MatrixMod,
    pub from_adapted: MatrixMod,
}

impl AdaptedBasis {
    /// `P M P^{-1}`: the matrix `mat` written in the adapted basis.
    pub fn conjugate(&self, mat: &MatrixMod) -> Result<MatrixMod> {
        self.to_adapted.mul(mat)?.mul(&self.from_adapted)
    }

    fn contains(&self, v: &[u64]) -> Result<bool> {
        let y = self.to_adapted.apply(v)?;
        let pp = self.shape.prime_power();
        Ok(y.iter().zip(self.shape.valuations()).all(|(&x, t)| pp.valuation(x) >= t))
    }
}

impl Submodule {
    pub fn new(n: u64, rank: usize, generators: Vec<Vec<u64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("modulus must be at least 2, got {n}")));
        }
        if rank == 0 {
            return Err(Error::Structural("ambient rank must be positive".into()));
        }
        for g in &generators {
            if g.len() != rank {
                return Err(Error::Structural(format!(
                    "generator of length {} in a rank-{rank} module",
                    g.len()
                )));
            }
            if let Some(bad) = g.iter().find(|&&x| x >= n) {
                return Err(Error::Input(format!("generator entry {bad} is not reduced mod {n}")));
            }
        }
        Ok(Submodule { n, rank, generators })
    }

    pub fn zero(n: u64, rank: usize) -> Result<Self> {
        Self::new(n, rank, Vec::new())
    }

    pub fn full(n: u64, rank: usize) -> Result<Self> {
        let gens = (0..rank)
            .map(|k| (0..rank).map(|c| u64::from(c == k)).collect())
            .collect();
        Self::new(n, rank, gens)
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn ring(&self) -> RingSpec {
        factorize(self.n).expect("modulus validated at construction")
    }

    pub fn to_json(&self) -> SubmoduleJson {
        SubmoduleJson { n: self.n, rank: self.rank, generators: self.generators.clone() }
    }

    fn prime_power(&self) -> Result<PrimePower> {
        self.ring().as_prime_power().ok_or_else(|| {
            Error::Structural(format!(
                "operation needs a prime-power modulus, got n = {}; split into l-primary parts first",
                self.n
            ))
        })
    }

    /// Smith normal form of the generator matrix over `Z/l^e`, keeping the
    /// row transform.
    pub fn adapted_basis(&self) -> Result<AdaptedBasis> {
        let pp = self.prime_power()?;
        let (valuations, to_adapted, from_adapted) = local_snf(pp, self.rank, &self.generators);
        Ok(AdaptedBasis {
            shape: SubmoduleShape::from_valuations(pp, &valuations)?,
            to_adapted,
            from_adapted,
        })
    }

    pub fn canonical_shape(&self) -> Result<SubmoduleShape> {
        Ok(self.adapted_basis()?.shape)
    }

    /// The same module, generated by its adapted basis (at most `rank`
    /// generators, none of them zero).
    pub fn reduced(&self) -> Result<Submodule> {
        let basis = self.adapted_basis()?;
        let pp = basis.shape.prime_power();
        let q = pp.modulus();
        let generators = basis
            .shape
            .valuations()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < pp.e)
            .map(|(k, &v)| {
                let scale = pp.power(v);
                (0..self.rank)
                    .map(|r| mul_mod(basis.from_adapted.get(r, k), scale, q))
                    .collect()
            })
            .collect();
        Submodule::new(q, self.rank, generators)
    }

    /// `|W|`, multiplied over the `l`-primary parts.
    pub fn order(&self) -> Result<BigUint> {
        let mut total = BigUint::one();
        for (_, part) in self.l_primary_parts() {
            total *= part.canonical_shape()?.order();
        }
        Ok(total)
    }

    /// `W ⊗ Z_l` for every `l | n`, obtained by reducing the generators.
    pub fn l_primary_parts(&self) -> Vec<(PrimePower, Submodule)> {
        self.ring()
            .factors()
            .iter()
            .map(|&pp| {
                let q = pp.modulus();
                let generators =
                    self.generators.iter().map(|g| g.iter().map(|&x| x % q).collect()).collect();
                (pp, Submodule { n: q, rank: self.rank, generators })
            })
            .collect()
    }

    pub fn contains(&self, v: &[u64]) -> Result<bool> {
        if v.len() != self.rank {
            return Err(Error::Structural(format!(
                "vector of length {} tested against a rank-{} module",
                v.len(),
                self.rank
            )));
        }
        for (pp, part) in self.l_primary_parts() {
            let q = pp.modulus();
            let reduced: Vec<u64> = v.iter().map(|&x| x % q).collect();
            if !part.adapted_basis()?.contains(&reduced)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `M W ⊆ W`, checked generator by generator against the adapted basis.
    pub fn is_invariant(&self, mat: &MatrixMod) -> Result<bool> {
        if mat.modulus() != self.n || mat.dim() != self.rank {
            return Err(Error::Structural(format!(
                "{}×{} matrix mod {} acting on (Z/{})^{}",
                mat.dim(),
                mat.dim(),
                mat.modulus(),
                self.n,
                self.rank
            )));
        }
        let parts: Vec<_> = self
            .l_primary_parts()
            .into_iter()
            .map(|(pp, part)| Ok((pp, part.adapted_basis()?)))
            .collect::<Result<_>>()?;
        for g in &self.generators {
            let image = mat.apply(g)?;
            for (pp, basis) in &parts {
                let q = pp.modulus();
                let reduced: Vec<u64> = image.iter().map(|&x| x % q).collect();
                if !basis.contains(&reduced)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All elements of `W` by brute-force span enumeration. Exponential in
    /// the number of generators; meant for checking the structural routes on
    /// tiny modules.
    pub fn span_elements(&self, cap: usize) -> Result<HashSet<Vec<u64>>> {
        let n = self.n;
        let mut span: HashSet<Vec<u64>> = HashSet::from([vec![0; self.rank]]);
        for g in &self.generators {
            let mut next = HashSet::new();
            for s in &span {
                let mut cur = s.clone();
                for _ in 0..n {
                    if !next.insert(cur.clone()) {
                        break;
                    }
                    if next.len() > cap {
                        return Err(Error::Capacity { what: "span enumeration".into(), cap });
                    }
                    cur = cur.iter().zip(g).map(|(&a, &b)| add_mod(a, b, n)).collect();
                }
            }
            span = next;
        }
        Ok(span)
    }
}

/// Smith normal form over the local ring `Z/l^e` of the `rank × k` matrix
/// whose columns are `gens`. Returns the ascending diagonal valuations
/// (padded with `e`), the row transform `P` and its inverse.
fn local_snf(pp: PrimePower, rank: usize, gens: &[Vec<u64>]) -> (Vec<u32>, MatrixMod, MatrixMod) {
    let q = pp.modulus();
    let k = gens.len();
    let mut g: Vec<Vec<u64>> = (0..rank).map(|r| gens.iter().map(|v| v[r] % q).collect()).collect();
    let mut p = MatrixMod::identity(q, rank);
    let mut pinv = MatrixMod::identity(q, rank);
    let mut valuations = Vec::with_capacity(rank);

    for t in 0..rank.min(k) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (r, row) in g.iter().enumerate().skip(t) {
            for (c, &x) in row.iter().enumerate().skip(t) {
                let v = valuation(pp.l, pp.e, x);
                if v < pp.e && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                }
            }
        }
        let Some((v, pr, pc)) = best else { break };

        g.swap(t, pr);
        swap_rows(&mut p, t, pr);
        swap_cols(&mut pinv, t, pr);
        for row in g.iter_mut() {
            row.swap(t, pc);
        }

        let lv = pp.power(v);
        let unit = g[t][t] / lv;
        let unit_inv = inv_mod(unit, q).expect("pivot cofactor is prime to l");
        for x in g[t].iter_mut() {
            *x = mul_mod(*x, unit_inv, q);
        }
        for c in 0..rank {
            p.set(t, c, mul_mod(p.get(t, c), unit_inv, q));
            pinv.set(c, t, mul_mod(pinv.get(c, t), unit, q));
        }

        for r in t + 1..rank {
            let f = g[r][t] / lv;
            if f == 0 {
                continue;
            }
            for c in 0..k {
                g[r][c] = sub_mod(g[r][c], mul_mod(f, g[t][c], q), q);
            }
            for c in 0..rank {
                p.set(r, c, sub_mod(p.get(r, c), mul_mod(f, p.get(t, c), q), q));
                pinv.set(c, t, add_mod(pinv.get(c, t), mul_mod(f, pinv.get(c, r), q), q));
            }
        }
        // Column operations only touch the pivot row now; they leave P alone.
        for c in t + 1..k {
            g[t][c] = 0;
        }
        valuations.push(v);
    }
    valuations.resize(rank, pp.e);
    (valuations, p, pinv)
}

fn swap_rows(m: &mut MatrixMod, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..m.dim() {
        let (x, y) = (m.get(a, c), m.get(b, c));
        m.set(a, c, y);
        m.set(b, c, x);
    }
}

fn swap_cols(m: &mut MatrixMod, a: usize, b: usize) {
    if a == b {
        return;
    }
    for r in 0..m.dim() {
        let (x, y) = (m.get(r, a), m.get(r, b));
        m.set(r, a, y);
        m.set(r, b, x);
    }
}
