//! Exhaustive desk-scale exploration: every subgroup of a small ambient
//! group, every invariant submodule of each, the verifier run over all of
//! them, and a ranking of instances by `log |W| / log I(Γ)`.
//!
//! Subgroups are found by a generator-extension fixpoint over an indexed
//! multiplication table of the ambient group: start from the cyclic
//! subgroups, then repeatedly adjoin one more cyclic generator, deduplicating
//! by element set. Every finite group is generated by cyclic subgroups, so
//! the fixpoint is the whole lattice; stopping after `k` rounds yields the
//! subgroups with at most `k` generators.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{log_ratio, lower_target, verify_instance, BoundReport, Verification, VerifyOptions};
use crate::error::{Error, Result};
use crate::groups::{AmbientGroup, AmbientKind, GroupHandle, GroupJson};
use crate::matmod::MatrixMod;
use crate::modring::add_mod;
use crate::submodules::{Submodule, SubmoduleJson};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub ambient: AmbientGroup,
    /// Runs on ambient groups larger than this are refused.
    pub max_ambient_order: usize,
    pub max_subgroups: usize,
    /// Keep only subgroups generated by at most this many elements.
    pub max_generators: Option<usize>,
    /// Largest ambient module `(Z/l^e)^rank` whose submodules are enumerated.
    pub max_module_size: usize,
    /// Worker threads; `0` lets rayon decide. Output does not depend on it.
    pub parallelism: usize,
    pub report_top_k: usize,
    pub verify: VerifyOptions,
}

impl SearchConfig {
    pub fn new(ambient: AmbientGroup) -> Self {
        SearchConfig {
            ambient,
            max_ambient_order: 100_000,
            max_subgroups: 100_000,
            max_generators: None,
            max_module_size: 1 << 16,
            parallelism: 0,
            report_top_k: 10,
            verify: VerifyOptions::default(),
        }
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Fixed-width set of ambient element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ElementSet(Vec<u64>);

impl ElementSet {
    fn new(size: usize) -> Self {
        ElementSet(vec![0; size.div_ceil(64)])
    }

    #[inline]
    fn contains(&self, x: u32) -> bool {
        self.0[x as usize / 64] >> (x % 64) & 1 == 1
    }

    /// Returns `true` if `x` was not present.
    #[inline]
    fn insert(&mut self, x: u32) -> bool {
        let (w, b) = (x as usize / 64, x % 64);
        let fresh = self.0[w] >> b & 1 == 0;
        self.0[w] |= 1 << b;
        fresh
    }
}

/// The ambient group with elements numbered in sorted order and a full
/// multiplication table.
struct ElementTable {
    elements: Vec<MatrixMod>,
    product: Vec<u32>,
    identity: u32,
}

impl ElementTable {
    fn build(ambient: &AmbientGroup, cap: usize) -> Result<Self> {
        let elements = ambient.elements(cap)?;
        let size = elements.len();
        let index: HashMap<&MatrixMod, u32> =
            elements.iter().enumerate().map(|(k, x)| (x, k as u32)).collect();
        let product = elements
            .par_iter()
            .flat_map_iter(|a| {
                elements.iter().map(|b| {
                    *index.get(&a.mul_unchecked(b)).expect("ambient group is closed")
                })
            })
            .collect();
        let identity = index[&ambient.identity()];
        debug_assert_eq!(size * size, elements.len() * elements.len());
        Ok(ElementTable { elements, product, identity })
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.product[a as usize * self.elements.len() + b as usize]
    }

    /// Closure of `start` (already a group or `{identity}`) under right
    /// multiplication by `gens`.
    fn close(&self, start: &[u32], gens: &[u32]) -> (ElementSet, Vec<u32>) {
        let mut set = ElementSet::new(self.elements.len());
        let mut list = Vec::with_capacity(start.len() * 2);
        for &x in start {
            if set.insert(x) {
                list.push(x);
            }
        }
        let mut cursor = 0;
        while cursor < list.len() {
            let x = list[cursor];
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    list.push(y);
                }
            }
            cursor += 1;
        }
        list.sort_unstable();
        (set, list)
    }
}

struct Found {
    members: ElementSet,
    elements: Vec<u32>,
    gens: Vec<u32>,
}

/// Every subgroup of `config.ambient` (or those with at most
/// `config.max_generators` generators), each once, ordered by
/// `(order, element set)`. Element sets are cached on the handles.
pub fn enumerate_subgroups(config: &SearchConfig) -> Result<Vec<GroupHandle>> {
    let ambient = &config.ambient;
    let order = ambient.order();
    if order > BigUint::from(config.max_ambient_order) {
        return Err(Error::Capacity {
            what: format!("|{ambient}| = {order} exceeds the ambient-order cap"),
            cap: config.max_ambient_order,
        });
    }
    config.run(|| enumerate_subgroups_in_pool(config))?
}

fn enumerate_subgroups_in_pool(config: &SearchConfig) -> Result<Vec<GroupHandle>> {
    let table = ElementTable::build(&config.ambient, config.max_ambient_order)?;
    let size = table.elements.len();
    let id = table.identity;

    let mut seen: HashMap<ElementSet, usize> = HashMap::new();
    let mut found: Vec<Found> = Vec::new();
    let (members, elements) = table.close(&[id], &[]);
    push(config, &mut found, &mut seen, Found { members, elements, gens: vec![] })?;

    // Cyclic subgroups, each remembered with its first generator.
    let mut cyclic: Vec<u32> = Vec::new();
    let cyclic_sets: Vec<(ElementSet, Vec<u32>)> =
        (0..size as u32).into_par_iter().map(|g| table.close(&[id], &[g])).collect();
    let mut frontier = Vec::new();
    for (g, (members, elements)) in cyclic_sets.into_iter().enumerate() {
        if let Some(k) = push(config, &mut found, &mut seen, Found { members, elements, gens: vec![g as u32] })? {
            cyclic.push(g as u32);
            frontier.push(k);
        }
    }

    let mut rounds = 1;
    while !frontier.is_empty() && config.max_generators.is_none_or(|k| rounds < k) {
        let extensions: Vec<Vec<Found>> = frontier
            .par_iter()
            .map(|&h| {
                let base = &found[h];
                let mut local: HashMap<ElementSet, ()> = HashMap::new();
                let mut out = Vec::new();
                for &g in &cyclic {
                    if base.members.contains(g) {
                        continue;
                    }
                    let mut gens = base.gens.clone();
                    gens.push(g);
                    let (members, elements) = table.close(&base.elements, &gens);
                    if !seen.contains_key(&members) && local.insert(members.clone(), ()).is_none() {
                        out.push(Found { members, elements, gens });
                    }
                }
                out
            })
            .collect();
        let mut next = Vec::new();
        for f in extensions.into_iter().flatten() {
            if let Some(k) = push(config, &mut found, &mut seen, f)? {
                next.push(k);
            }
        }
        frontier = next;
        rounds += 1;
    }

    found.sort_by(|a, b| a.elements.len().cmp(&b.elements.len()).then_with(|| a.elements.cmp(&b.elements)));
    Ok(found
        .into_iter()
        .map(|f| {
            let generators = f.gens.iter().map(|&g| table.elements[g as usize].clone()).collect();
            let elements = f.elements.iter().map(|&x| table.elements[x as usize].clone()).collect();
            GroupHandle::from_parts(config.ambient.clone(), generators, Arc::new(elements))
        })
        .collect())
}

fn push(
    config: &SearchConfig,
    found: &mut Vec<Found>,
    seen: &mut HashMap<ElementSet, usize>,
    f: Found,
) -> Result<Option<usize>> {
    if seen.contains_key(&f.members) {
        return Ok(None);
    }
    if found.len() >= config.max_subgroups {
        return Err(Error::Capacity {
            what: format!("subgroups of {} ({} found so far)", config.ambient, found.len()),
            cap: config.max_subgroups,
        });
    }
    seen.insert(f.members.clone(), found.len());
    found.push(f);
    Ok(Some(found.len() - 1))
}

/// Vectors of `(Z/q)^rank` numbered in base `q`, first coordinate most significant.
struct VectorSpace {
    q: u64,
    rank: usize,
    size: usize,
}

impl VectorSpace {
    fn encode(&self, v: &[u64]) -> usize {
        v.iter().fold(0usize, |acc, &x| acc * self.q as usize + x as usize)
    }

    fn decode(&self, mut code: usize) -> Vec<u64> {
        let mut v = vec![0; self.rank];
        for x in v.iter_mut().rev() {
            *x = (code % self.q as usize) as u64;
            code /= self.q as usize;
        }
        v
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(&p, &r)| add_mod(p, r, self.q)).collect();
        self.encode(&s)
    }

    /// Members of `span + <w>`.
    fn extend_span(&self, span: &[usize], w: usize) -> Vec<usize> {
        let mut mark = vec![false; self.size];
        let mut out = Vec::new();
        for &s in span {
            let mut cur = s;
            while !mark[cur] {
                mark[cur] = true;
                out.push(cur);
                cur = self.add(cur, w);
            }
        }
        out.sort_unstable();
        out
    }

    fn sum(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut mark = vec![false; self.size];
        let mut out = Vec::new();
        for &x in a {
            for &y in b {
                let z = self.add(x, y);
                if !mark[z] {
                    mark[z] = true;
                    out.push(z);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Every `Γ`-invariant submodule of `(Z/l^e)^rank`, each once, generated by
/// its adapted basis, ordered by `(|W|, element set)`. Includes `0` and `V`.
///
/// The invariant submodules are exactly the sums of the cyclic `Γ`-modules
/// `span(Γ v)`, so the lattice is the closure of those under `+`.
pub fn enumerate_invariant_submodules(gamma: &GroupHandle, max_module_size: usize) -> Result<Vec<Submodule>> {
    let ambient = gamma.ambient();
    let pp = ambient.ring().as_prime_power().ok_or_else(|| {
        Error::Structural(format!("invariant submodules are enumerated over prime powers, got n = {}", ambient.n()))
    })?;
    let q = pp.modulus();
    let rank = ambient.rank();
    let size = (q as usize).checked_pow(rank as u32).filter(|&s| s <= max_module_size).ok_or_else(|| {
        Error::Capacity { what: format!("ambient module (Z/{q})^{rank}"), cap: max_module_size }
    })?;
    let space = VectorSpace { q, rank, size };
    let elements = gamma.require_elements()?;

    // span(Γ v) for every v, deduplicated.
    let mut cyclic: Vec<(Vec<usize>, Vec<usize>)> = Vec::new(); // (members, module generators)
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    for v in 0..size {
        let vec_v = space.decode(v);
        let mut orbit: Vec<usize> = elements
            .iter()
            .map(|g| g.apply(&vec_v).map(|w| space.encode(&w)))
            .collect::<Result<_>>()?;
        orbit.sort_unstable();
        orbit.dedup();
        let mut members = vec![0usize];
        let mut gens = Vec::new();
        for &w in &orbit {
            if members.binary_search(&w).is_err() {
                members = space.extend_span(&members, w);
                gens.push(w);
            }
        }
        if seen.insert(members.clone(), ()).is_none() {
            cyclic.push((members, gens));
        }
    }

    let mut lattice: Vec<(Vec<usize>, Vec<usize>)> = cyclic.clone();
    let mut cursor = 0;
    while cursor < lattice.len() {
        for (c_members, c_gens) in &cyclic {
            let members = space.sum(&lattice[cursor].0, c_members);
            if !seen.contains_key(&members) {
                seen.insert(members.clone(), ());
                let mut gens = lattice[cursor].1.clone();
                gens.extend(c_gens);
                lattice.push((members, gens));
            }
        }
        cursor += 1;
    }

    lattice.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    lattice
        .into_iter()
        .map(|(_, gens)| {
            Submodule::new(q, rank, gens.iter().map(|&g| space.decode(g)).collect())?.reduced()
        })
        .collect()
}

/// One verified `(Γ, W)` pair from a search.
#[derive(Debug, Clone)]
pub struct Instance {
    pub gamma: GroupHandle,
    pub module: Submodule,
    pub report: BoundReport,
}

/// `p/q`, serialized as `{"p": .., "q": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exponent {
    pub p: u64,
    pub q: u64,
}

impl Exponent {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// `|W|^q >= I^p`, i.e. `log|W| / log I >= p/q` when `I > 1`.
pub fn ratio_at_least(w_order: &BigUint, index: &BigUint, exponent: Exponent) -> bool {
    num_traits::pow(w_order.clone(), exponent.q as usize) >= num_traits::pow(index.clone(), exponent.p as usize)
}

/// Largest `p/q` with `q <= max_den` and `|W|^q >= I^p`, checked exactly.
pub fn certified_ratio(w_order: &BigUint, index: &BigUint, max_den: u64) -> Option<Exponent> {
    if *index <= BigUint::one() || *w_order <= BigUint::one() {
        return None;
    }
    let estimate = log_ratio(w_order, index);
    let mut best: Option<Exponent> = None;
    for q in 1..=max_den {
        let mut p = (estimate * q as f64).floor().max(0.0) as u64;
        while ratio_at_least(w_order, index, Exponent { p: p + 1, q }) {
            p += 1;
        }
        while p > 0 && !ratio_at_least(w_order, index, Exponent { p, q }) {
            p -= 1;
        }
        let candidate = Exponent { p, q };
        // p/q > bp/bq  ⇔  p·bq > bp·q
        if best.is_none_or(|b| p * b.q > b.p * q) {
            best = Some(candidate);
        }
    }
    best.map(|b| {
        let g = num_integer::gcd(b.p, b.q).max(1);
        Exponent { p: b.p / g, q: b.q / g }
    })
}

/// An instance ranked by `log |W| / log I(Γ)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalRecord {
    pub gamma: GroupJson,
    pub module: SubmoduleJson,
    pub report: BoundReport,
    /// `log |W| / log I`, for display and ordering.
    pub ratio: f64,
    /// Exactly certified lower bound on the ratio.
    pub ratio_lower: Exponent,
    /// Whether `|W| >= I^{target}` for the existential exponent (GL only).
    pub reaches_target: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub ambient: String,
    pub subgroups: usize,
    pub instances: usize,
    /// `(Γ, W)` pairs with `W` invariant but the action not abelian.
    pub skipped_nonabelian: usize,
    pub violations: usize,
    pub local_violations: usize,
    pub intermediate_violations: usize,
    pub max_ratio: Option<Exponent>,
    pub target: Option<Exponent>,
    pub top: Vec<ExtremalRecord>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub instances: Vec<Instance>,
    pub summary: Summary,
}

/// Verify every `(Γ, W)` with `W` invariant and the action abelian.
pub fn exhaustive_verify(config: &SearchConfig) -> Result<SearchOutcome> {
    let subgroups = enumerate_subgroups(config)?;
    verify_subgroups(config, &subgroups)
}

/// [`exhaustive_verify`] over a given list of subgroups.
pub fn verify_subgroups(config: &SearchConfig, subgroups: &[GroupHandle]) -> Result<SearchOutcome> {
    let per_group: Vec<Result<(Vec<Instance>, usize)>> = config.run(|| {
        subgroups
            .par_iter()
            .map(|gamma| {
                let mut out = Vec::new();
                let mut skipped = 0;
                for w in enumerate_invariant_submodules(gamma, config.max_module_size)? {
                    match verify_instance(gamma, &w, &config.verify)? {
                        Verification::Verified(report) => {
                            out.push(Instance { gamma: gamma.clone(), module: w, report })
                        }
                        Verification::HypothesisViolation(crate::bounds::Diagnosis::NotAbelian { .. }) => {
                            skipped += 1
                        }
                        Verification::HypothesisViolation(d) => {
                            return Err(Error::Internal(format!("enumerated module is not invariant: {d:?}")))
                        }
                    }
                }
                Ok((out, skipped))
            })
            .collect()
    })?;

    let mut instances = Vec::new();
    let mut skipped_nonabelian = 0;
    for r in per_group {
        let (inst, skipped) = r?;
        instances.extend(inst);
        skipped_nonabelian += skipped;
    }
    let top = top_records(config, &instances);
    let target = match config.ambient.kind() {
        AmbientKind::Gl => lower_target(config.ambient.m()).ok().map(|(p, q)| Exponent { p, q }),
        AmbientKind::Sp => None,
    };
    let summary = Summary {
        ambient: config.ambient.to_string(),
        subgroups: subgroups.len(),
        instances: instances.len(),
        skipped_nonabelian,
        violations: instances.iter().filter(|i| !i.report.verdict_main).count(),
        local_violations: instances.iter().filter(|i| !i.report.verdict_local).count(),
        intermediate_violations: instances.iter().filter(|i| !i.report.verdict_intermediate).count(),
        max_ratio: top.first().map(|r| r.ratio_lower),
        target,
        top,
    };
    Ok(SearchOutcome { instances, summary })
}

/// Denominator bound for certified ratios.
const RATIO_MAX_DEN: u64 = 64;

fn top_records(config: &SearchConfig, instances: &[Instance]) -> Vec<ExtremalRecord> {
    let target = match config.ambient.kind() {
        AmbientKind::Gl => lower_target(config.ambient.m()).ok().map(|(p, q)| Exponent { p, q }),
        AmbientKind::Sp => None,
    };
    let mut ranked: Vec<(f64, &Instance)> = instances
        .iter()
        .filter(|i| i.report.index > BigUint::one() && i.report.w_order > BigUint::one())
        .map(|i| (log_ratio(&i.report.w_order, &i.report.index), i))
        .collect();
    // Stable sort keeps the deterministic instance order among ties.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    ranked
        .into_iter()
        .take(config.report_top_k)
        .map(|(ratio, inst)| ExtremalRecord {
            gamma: inst.gamma.to_json(),
            module: inst.module.to_json(),
            ratio_lower: certified_ratio(&inst.report.w_order, &inst.report.index, RATIO_MAX_DEN)
                .expect("ratio defined for I > 1 and |W| > 1"),
            reaches_target: target.map(|t| ratio_at_least(&inst.report.w_order, &inst.report.index, t)),
            report: inst.report.clone(),
            ratio,
        })
        .collect()
}

/// The `report_top_k` instances with the largest `log |W| / log I(Γ)`.
pub fn extremal_search(config: &SearchConfig) -> Result<Vec<ExtremalRecord>> {
    Ok(exhaustive_verify(config)?.summary.top)
}
