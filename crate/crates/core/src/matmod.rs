//! Square matrices over `Z/nZ`, the commutator-annihilation predicate and
//! the standard symplectic form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{add_mod, mul_mod, neg_mod, sub_mod, valuation};
use crate::submodules::SubmoduleShape;

/// A `dim × dim` matrix with entries reduced into `[0, n)`, stored row-major.
///
/// The derived ordering compares `(n, dim, entries)` lexicographically, which
/// doubles as the canonical key for element sets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixMod {
    n: u64,
    dim: usize,
    entries: Vec<u64>,
}

impl MatrixMod {
    /// Build from row-major entries, which must already be reduced.
    pub fn new(n: u64, dim: usize, entries: Vec<u64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("modulus must be at least 2, got {n}")));
        }
        if dim == 0 {
            return Err(Error::Structural("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Structural(format!(
                "{} entries given for a {dim}×{dim} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&x| x >= n) {
            return Err(Error::Input(format!("entry {bad} is not reduced mod {n}")));
        }
        Ok(MatrixMod { n, dim, entries })
    }

    /// Build from row-major entries, reducing them mod `n` first.
    pub fn from_entries_reduced(n: u64, dim: usize, entries: &[i64]) -> Result<Self> {
        let reduced = entries.iter().map(|&x| x.rem_euclid(n as i64) as u64).collect();
        Self::new(n, dim, reduced)
    }

    pub fn from_rows(n: u64, rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Structural("matrix rows must all have length dim".into()));
        }
        Self::new(n, dim, rows.concat())
    }

    pub fn identity(n: u64, dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = 1 % n;
        }
        MatrixMod { n, dim, entries }
    }

    pub fn zero(n: u64, dim: usize) -> Self {
        MatrixMod { n, dim, entries: vec![0; dim * dim] }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Entry at zero-based `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: u64) {
        self.entries[row * self.dim + col] = value % self.n;
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.dim).map(<[u64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.dim)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.dim != other.dim {
            return Err(Error::Structural(format!(
                "cannot combine a {}×{} matrix mod {} with a {}×{} matrix mod {}",
                self.dim, self.dim, self.n, other.dim, other.dim, other.n
            )));
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    /// Product without the compatibility check; callers guarantee matching
    /// modulus and dimension.
    pub fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, d) = (self.n, self.dim);
        let mut entries = vec![0u64; d * d];
        if n < (1 << 24) {
            // Products stay below 2^48, so a u64 accumulator cannot overflow
            // for any dimension this library will see.
            for r in 0..d {
                for c in 0..d {
                    let acc: u64 = (0..d)
                        .map(|k| self.entries[r * d + k] * rhs.entries[k * d + c])
                        .sum();
                    entries[r * d + c] = acc % n;
                }
            }
        } else {
            for r in 0..d {
                for c in 0..d {
                    entries[r * d + c] = (0..d).fold(0u64, |acc, k| {
                        add_mod(acc, mul_mod(self.entries[r * d + k], rhs.entries[k * d + c], n), n)
                    });
                }
            }
        }
        MatrixMod { n, dim: d, entries }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(self.zip_with(rhs, add_mod))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(self.zip_with(rhs, sub_mod))
    }

    fn zip_with(&self, rhs: &Self, f: fn(u64, u64, u64) -> u64) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f(a, b, self.n))
            .collect();
        MatrixMod { n: self.n, dim: self.dim, entries }
    }

    pub fn neg(&self) -> Self {
        let entries = self.entries.iter().map(|&a| neg_mod(a, self.n)).collect();
        MatrixMod { n: self.n, dim: self.dim, entries }
    }

    pub fn scale(&self, k: u64) -> Self {
        let entries = self.entries.iter().map(|&a| mul_mod(a, k, self.n)).collect();
        MatrixMod { n: self.n, dim: self.dim, entries }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c];
            }
        }
        MatrixMod { n: self.n, dim: d, entries }
    }

    /// `AB - BA`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// Entrywise reduction to a modulus `q` dividing `n`.
    pub fn reduce(&self, q: u64) -> Result<Self> {
        if q < 2 || self.n % q != 0 {
            return Err(Error::Structural(format!("{q} does not divide {}", self.n)));
        }
        let entries = self.entries.iter().map(|&a| a % q).collect();
        Ok(MatrixMod { n: q, dim: self.dim, entries })
    }

    /// `M v` for a column vector `v`.
    pub fn apply(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.dim {
            return Err(Error::Structural(format!(
                "vector of length {} applied to a {}×{} matrix",
                v.len(),
                self.dim,
                self.dim
            )));
        }
        let (n, d) = (self.n, self.dim);
        Ok((0..d)
            .map(|r| {
                (0..d).fold(0u64, |acc, k| {
                    add_mod(acc, mul_mod(self.entries[r * d + k], v[k] % n, n), n)
                })
            })
            .collect())
    }

    /// Determinant mod `n` by cofactor expansion. Only used to recognise
    /// `GL` when enumerating ambient groups by brute force, where `dim` is tiny.
    pub fn determinant(&self) -> u64 {
        let idx: Vec<usize> = (0..self.dim).collect();
        self.minor_det(0, &idx)
    }

    fn minor_det(&self, row: usize, cols: &[usize]) -> u64 {
        let n = self.n;
        if cols.len() == 1 {
            return self.get(row, cols[0]);
        }
        let mut acc = 0u64;
        for (pos, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a == 0 {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = mul_mod(a, self.minor_det(row + 1, &rest), n);
            acc = if pos % 2 == 0 { add_mod(acc, term, n) } else { sub_mod(acc, term, n) };
        }
        acc
    }

    /// `det M` is a unit mod `n`, i.e. `M ∈ GL_dim(Z/nZ)`.
    pub fn is_invertible(&self) -> bool {
        num_integer::gcd(self.determinant(), self.n) == 1
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson { n: self.n, dim: self.dim, rows: self.rows() }
    }
}

impl fmt::Debug for MatrixMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}", self.rows(), self.n)
    }
}

impl fmt::Display for MatrixMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}] mod {}", rows.join("; "), self.n)
    }
}

/// Wire form of a matrix: `{"n": .., "dim": .., "rows": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: u64,
    pub dim: usize,
    pub rows: Vec<Vec<u64>>,
}

impl TryFrom<MatrixJson> for MatrixMod {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        if json.rows.len() != json.dim {
            return Err(Error::Input(format!(
                "matrix declares dim {} but has {} rows",
                json.dim,
                json.rows.len()
            )));
        }
        if json.rows.iter().any(|r| r.len() != json.dim) {
            return Err(Error::Input(format!("every row must have {} entries", json.dim)));
        }
        MatrixMod::new(json.n, json.dim, json.rows.concat())
    }
}

impl From<&MatrixMod> for MatrixJson {
    fn from(m: &MatrixMod) -> Self {
        m.to_json()
    }
}

/// Does `AB - BA` annihilate the diagonal module `W` described by `shape`?
///
/// With `W = l^{v_1} Z/l^e ⊕ … ⊕ l^{v_m} Z/l^e`, column `s` of the commutator
/// is multiplied by `l^{v_s}`, so the test is `ord_l(C_rs) + v_s >= e` for
/// every entry. `A` and `B` must already be written in the basis in which
/// `W` is diagonal.
pub fn commutes_on(a: &MatrixMod, b: &MatrixMod, shape: &SubmoduleShape) -> Result<bool> {
    a.check_compatible(b)?;
    let q = shape.prime_power().modulus();
    if a.n != q || a.dim != shape.rank() {
        return Err(Error::Structural(format!(
            "matrices are {}×{} mod {}, module shape lives in (Z/{q})^{}",
            a.dim,
            a.dim,
            a.n,
            shape.rank()
        )));
    }
    let (l, e) = (shape.prime_power().l, shape.prime_power().e);
    let c = a.commutator(b)?;
    let v = shape.valuations();
    for r in 0..a.dim {
        for s in 0..a.dim {
            if valuation(l, e, c.get(r, s)) + v[s] < e {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The standard alternating form `Ω = [[0, I_m], [-I_m, 0]]` on `(Z/nZ)^{2m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticForm {
    m: usize,
    omega: MatrixMod,
}

impl SymplecticForm {
    pub fn new(m: usize, n: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("symplectic half-dimension must be positive".into()));
        }
        if n < 2 {
            return Err(Error::Domain(format!("modulus must be at least 2, got {n}")));
        }
        let d = 2 * m;
        let mut omega = MatrixMod::zero(n, d);
        for k in 0..m {
            omega.set(k, m + k, 1);
            omega.set(m + k, k, n - 1);
        }
        Ok(SymplecticForm { m, omega })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> &MatrixMod {
        &self.omega
    }

    /// `Mᵀ Ω M = Ω`.
    pub fn preserves(&self, mat: &MatrixMod) -> Result<bool> {
        let lhs = mat.transpose().mul(&self.omega)?.mul(mat)?;
        Ok(lhs == self.omega)
    }
}

fn half_dim(mat: &MatrixMod) -> Result<usize> {
    if mat.dim % 2 != 0 {
        return Err(Error::Structural(format!(
            "symplectic tests need an even dimension, got {}",
            mat.dim
        )));
    }
    Ok(mat.dim / 2)
}

pub fn is_symplectic(mat: &MatrixMod) -> Result<bool> {
    let m = half_dim(mat)?;
    SymplecticForm::new(m, mat.n)?.preserves(mat)
}

/// The `m × m` blocks `(A, B, C, D)` of `[[A, B], [C, D]]`.
pub fn blocks(mat: &MatrixMod) -> Result<[MatrixMod; 4]> {
    let m = half_dim(mat)?;
    let block = |r0: usize, c0: usize| {
        let mut out = MatrixMod::zero(mat.n, m);
        for r in 0..m {
            for c in 0..m {
                out.set(r, c, mat.get(r0 + r, c0 + c));
            }
        }
        out
    };
    Ok([block(0, 0), block(0, m), block(m, 0), block(m, m)])
}

/// Outcome of the three block identities characterising `Sp(2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockRelations {
    /// `AᵀD − CᵀB = I`
    pub r1: bool,
    /// `AᵀC = CᵀA`
    pub r2: bool,
    /// `DᵀB = BᵀD`
    pub r3: bool,
}

impl BlockRelations {
    pub fn all(&self) -> bool {
        self.r1 && self.r2 && self.r3
    }
}

pub fn block_relations(mat: &MatrixMod) -> Result<BlockRelations> {
    let [a, b, c, d] = blocks(mat)?;
    let (at, bt, ct, dt) = (a.transpose(), b.transpose(), c.transpose(), d.transpose());
    let ident = MatrixMod::identity(mat.n, a.dim);
    Ok(BlockRelations {
        r1: at.mul(&d)?.sub(&ct.mul(&b)?)? == ident,
        r2: at.mul(&c)? == ct.mul(&a)?,
        r3: dt.mul(&b)? == bt.mul(&d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::PrimePower;

    fn m(n: u64, rows: &[&[u64]]) -> MatrixMod {
        MatrixMod::from_rows(n, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn products() {
        let a = m(2, &[&[1, 1], &[0, 1]]);
        let b = m(2, &[&[1, 0], &[1, 1]]);
        assert_eq!(a.mul(&b).unwrap(), m(2, &[&[0, 1], &[1, 1]]));
        let s = m(4, &[&[1, 1], &[0, 1]]);
        assert_eq!(s.mul(&s).unwrap(), m(4, &[&[1, 2], &[0, 1]]));
        let r = m(8, &[&[3, 7], &[5, 2]]);
        assert_eq!(MatrixMod::identity(8, 2).mul(&r).unwrap(), r);
    }

    #[test]
    fn mismatches_are_structural() {
        let a = MatrixMod::identity(4, 2);
        assert!(matches!(a.mul(&MatrixMod::identity(4, 3)), Err(Error::Structural(_))));
        assert!(matches!(a.mul(&MatrixMod::identity(8, 2)), Err(Error::Structural(_))));
        assert!(matches!(MatrixMod::new(4, 2, vec![0, 1, 4, 0]), Err(Error::Input(_))));
    }

    #[test]
    fn json_rejects_unreduced_entries() {
        let json: MatrixJson = serde_json::from_str(r#"{"n":4,"dim":2,"rows":[[1,5],[0,1]]}"#).unwrap();
        assert!(MatrixMod::try_from(json).is_err());
        let json: MatrixJson = serde_json::from_str(r#"{"n":4,"dim":2,"rows":[[1,3],[0,1]]}"#).unwrap();
        assert_eq!(MatrixMod::try_from(json).unwrap(), m(4, &[&[1, 3], &[0, 1]]));
    }

    #[test]
    fn commutator_predicate() {
        let pp = PrimePower { l: 2, e: 1 };
        let full = SubmoduleShape::full(pp, 2);
        let zero = SubmoduleShape::zero(pp, 2);
        let a = m(2, &[&[1, 1], &[0, 1]]);
        let b = m(2, &[&[1, 0], &[1, 1]]);
        assert!(commutes_on(&MatrixMod::identity(2, 2), &b, &full).unwrap());
        assert!(!commutes_on(&a, &b, &full).unwrap());
        assert!(commutes_on(&a, &b, &zero).unwrap());
        let wrong = SubmoduleShape::full(PrimePower { l: 2, e: 2 }, 2);
        assert!(commutes_on(&a, &b, &wrong).is_err());
    }

    #[test]
    fn symplectic_examples() {
        let omega = SymplecticForm::new(2, 5).unwrap().omega().clone();
        assert_eq!(omega.mul(&omega).unwrap(), MatrixMod::identity(5, 4).neg());
        assert!(is_symplectic(&omega).unwrap());
        assert!(is_symplectic(&MatrixMod::identity(7, 4)).unwrap());
        let d = m(4, &[&[1, 0], &[0, 2]]);
        assert!(!is_symplectic(&d).unwrap());
        assert!(!block_relations(&d).unwrap().r1);
        assert!(block_relations(&omega).unwrap().all());
        assert!(block_relations(&MatrixMod::identity(3, 2)).unwrap().all());
        assert!(matches!(is_symplectic(&MatrixMod::identity(3, 3)), Err(Error::Structural(_))));
    }

    #[test]
    fn determinants() {
        assert_eq!(m(7, &[&[2, 3], &[1, 4]]).determinant(), 5);
        assert!(!m(4, &[&[2, 0], &[0, 1]]).is_invertible());
        assert!(m(4, &[&[3, 0], &[2, 1]]).is_invertible());
        let p = m(2, &[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        assert_eq!(p.determinant(), 1);
    }
}
