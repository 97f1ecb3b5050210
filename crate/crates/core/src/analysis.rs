//! Orbit-growth profiles, congruence lattices, stable algebraic closure, the
//! width invariant, ω-partition checking, and the congruence lift used by the
//! width bound.
//!
//! "Finite orbit" of the group an expression denotes is operationalized as an
//! orbit whose size is equal at truncation sizes t and t+1, matched by label
//! through the canonical embedding of the smaller domain into the larger one.
//! Reports state the finite analog they check, never the infinite condition.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::construct::{self, TruncationMeta};
use crate::error::{Error, Result};
use crate::expr::{ConsData, GroupExpr};
use crate::label::PointLabel;
use crate::partition::Partition;
use crate::permcore::{FinPermGroup, RestrictMode, StabMode};

/// Default budget for tuple/subset sweeps.
pub const DEFAULT_TUPLE_CAP: u64 = 100_000_000;

/// Largest domain on which congruence lattices are enumerated.
const CONGRUENCE_DOMAIN_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    /// Orbits on all n-tuples.
    pub o: u64,
    /// Orbits on injective n-tuples.
    pub oi: u64,
    /// Orbits on n-subsets.
    pub os: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitProfile {
    pub rows: Vec<ProfileRow>,
}

impl OrbitProfile {
    /// os ≤ oi ≤ o ≤ n!·os. The upper bound concerns the groups expressions
    /// denote: stabilized rows (witnessed at t and t+1) carry those counts
    /// exactly, while a raw finite profile can violate it: padding a tuple's
    /// support to an n-subset needs room the domain may not have.
    pub fn chain_holds(&self) -> bool {
        self.lower_chain_holds()
            && self.rows.iter().all(|r| {
                let fact: u64 = (1..=r.n as u64).product();
                r.os == 0 || r.o <= fact.saturating_mul(r.os)
            })
    }

    /// os ≤ oi ≤ o, valid for every permutation group.
    pub fn lower_chain_holds(&self) -> bool {
        self.rows.iter().all(|r| r.os <= r.oi && r.oi <= r.o)
    }
}

fn checked_pow(base: usize, exp: usize, cap: u64, what: &str) -> Result<u64> {
    let mut total: u128 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(base as u128);
    }
    if total > cap as u128 {
        return Err(Error::CapExceeded {
            cap: cap as usize,
            context: format!("{what} sweep of size {total}"),
        });
    }
    Ok(total as u64)
}

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: u64) -> BitSet {
        BitSet {
            words: vec![0; len.div_ceil(64) as usize],
        }
    }

    #[inline]
    fn insert(&mut self, i: u64) -> bool {
        let w = (i >> 6) as usize;
        let bit = 1u64 << (i & 63);
        let fresh = self.words[w] & bit == 0;
        self.words[w] |= bit;
        fresh
    }

    #[inline]
    fn contains(&self, i: u64) -> bool {
        self.words[(i >> 6) as usize] & (1u64 << (i & 63)) != 0
    }
}

/// Orbit counts on tuples and subsets for one tuple length.
fn profile_row(g: &FinPermGroup, n: usize, tuple_cap: u64) -> Result<ProfileRow> {
    let d = g.degree();
    let gens: Vec<&[usize]> = g.gens().iter().map(|p| p.image()).collect();
    let total = checked_pow(d, n, tuple_cap, "tuple")?;

    // Closure on the full tuple space, base-d encoded. Injectivity is
    // orbit-invariant, so testing the first representative suffices.
    let mut o = 0u64;
    let mut oi = 0u64;
    let mut visited = BitSet::new(total);
    let mut stack: Vec<u64> = Vec::new();
    let mut tuple = vec![0usize; n];
    let mut image = vec![0usize; n];
    for start in 0..total {
        if visited.contains(start) {
            continue;
        }
        o += 1;
        {
            let mut code = start;
            for slot in tuple.iter_mut() {
                *slot = (code % d as u64) as usize;
                code /= d as u64;
            }
        }
        let injective = (0..n).all(|i| (0..i).all(|j| tuple[i] != tuple[j]));
        if injective {
            oi += 1;
        }
        visited.insert(start);
        stack.push(start);
        while let Some(code) = stack.pop() {
            let mut c = code;
            for slot in tuple.iter_mut() {
                *slot = (c % d as u64) as usize;
                c /= d as u64;
            }
            for gen in &gens {
                let mut enc = 0u64;
                for i in (0..n).rev() {
                    image[i] = gen[tuple[i]];
                    enc = enc * d as u64 + image[i] as u64;
                }
                if visited.insert(enc) {
                    stack.push(enc);
                }
            }
        }
    }

    // Closure on n-subsets, packed 8 bits per point.
    let os = if n > d {
        0
    } else {
        if d > 255 || n > 8 {
            return Err(Error::CapExceeded {
                cap: 255,
                context: "subset sweep encoding (domain ≤ 255, n ≤ 8)".into(),
            });
        }
        let pack = |set: &[usize]| -> u64 {
            let mut code = 0u64;
            for &p in set {
                code = (code << 8) | p as u64;
            }
            code
        };
        let mut count = 0u64;
        let mut seen: HashSet<u64> = HashSet::new();
        let mut combo: Vec<usize> = (0..n).collect();
        let mut workset = vec![0usize; n];
        loop {
            let code = pack(&combo);
            if !seen.contains(&code) {
                count += 1;
                seen.insert(code);
                let mut stack = vec![combo.clone()];
                while let Some(set) = stack.pop() {
                    for gen in &gens {
                        for (i, &p) in set.iter().enumerate() {
                            workset[i] = gen[p];
                        }
                        workset.sort_unstable();
                        let enc = pack(&workset);
                        if seen.insert(enc) {
                            stack.push(workset.clone());
                        }
                    }
                }
            }
            // next combination in lexicographic order
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if combo[i] < d - (n - i) {
                    combo[i] += 1;
                    for j in i + 1..n {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    combo.clear();
                    break;
                }
            }
            if combo.is_empty() {
                break;
            }
        }
        count
    };
    Ok(ProfileRow { n, o, oi, os })
}

/// Exact orbit counts via generator-action closure on tuple and subset
/// spaces, for every n up to n_max.
pub fn orbit_profile(g: &FinPermGroup, n_max: usize, tuple_cap: u64) -> Result<OrbitProfile> {
    if n_max == 0 {
        return Err(Error::Invalid("orbit_profile requires n_max ≥ 1".into()));
    }
    let rows = (1..=n_max)
        .map(|n| profile_row(g, n, tuple_cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitProfile { rows })
}

/// Orbit counts of the group an expression denotes: row n is computed on the
/// truncations at t = n and t = n+1 and returned only when the two agree
/// (stabilization witnessed).
pub fn stable_profile(e: &GroupExpr, n_max: usize, tuple_cap: u64) -> Result<OrbitProfile> {
    if n_max == 0 {
        return Err(Error::Invalid("stable_profile requires n_max ≥ 1".into()));
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let (g_t, _) = construct::truncate(e, n)?;
        let (g_t1, _) = construct::truncate(e, n + 1)?;
        let row_t = profile_row(&g_t, n, tuple_cap)?;
        let row_t1 = profile_row(&g_t1, n, tuple_cap)?;
        if row_t != row_t1 {
            return Err(Error::Unstable { n, t1: n + 1 });
        }
        rows.push(row_t);
    }
    Ok(OrbitProfile { rows })
}

/// Whether every generator preserves the partition.
pub fn is_congruence(g: &FinPermGroup, e: &Partition) -> bool {
    e.size() == g.degree() && g.gens().iter().all(|p| e.is_invariant_under(p))
}

/// The finest congruence relating one pair: close the pair under the
/// generator action until a fixpoint.
fn principal_congruence(g: &FinPermGroup, a: usize, b: usize) -> Partition {
    let n = g.degree();
    let mut part = Partition::from_pairs(n, [(a, b)]);
    loop {
        let mut next = part.clone();
        for gen in g.gens() {
            let mapped = Partition::from_pairs(
                n,
                (0..n).map(|i| (gen.apply(i), gen.apply(part.class_id(i)))),
            );
            next = next.join(&mapped);
        }
        if next == part {
            return part;
        }
        part = next;
    }
}

/// All G-invariant partitions: the principal congruences of all pairs closed
/// under pairwise join, plus equality. Sorted canonically.
pub fn congruences(g: &FinPermGroup) -> Result<Vec<Partition>> {
    let n = g.degree();
    if n > CONGRUENCE_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: CONGRUENCE_DOMAIN_CAP,
            context: format!("congruence lattice on {n} points"),
        });
    }
    let mut set: BTreeSet<Partition> = BTreeSet::new();
    set.insert(Partition::equality(n));
    for a in 0..n {
        for b in a + 1..n {
            set.insert(principal_congruence(g, a, b));
        }
    }
    loop {
        let list: Vec<Partition> = set.iter().cloned().collect();
        let mut grew = false;
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                if set.insert(list[i].join(&list[j])) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok(set.into_iter().collect())
}

/// A stabilization site: points to fix, and a congruence of the stabilizer.
#[derive(Clone, Debug)]
pub struct AclSite {
    pub stabilize: Vec<PointLabel>,
    pub congruence: Partition,
}

#[derive(Clone, Debug, Serialize)]
pub struct AclOrbitRow {
    pub rep: PointLabel,
    pub size_t: u64,
    pub size_t1: u64,
}

/// Orbits whose size is equal at truncations t and t+1, matched by label.
#[derive(Clone, Debug, Serialize)]
pub struct AclReport {
    pub stable_points: Vec<PointLabel>,
    pub orbit_sizes: Vec<AclOrbitRow>,
}

impl AclReport {
    pub fn acl_size(&self) -> u64 {
        self.stable_points.len() as u64
    }
}

/// Transports a congruence from the stabilizer at t to the stabilizer at t+1
/// through the canonical label embedding: start from the old pairs, close
/// under the larger stabilizer, and demand the restriction gives the old
/// congruence back.
fn transport_congruence(
    small: &FinPermGroup,
    large: &FinPermGroup,
    e: &Partition,
) -> Result<Partition> {
    let map: Vec<usize> = small
        .domain()
        .iter()
        .map(|l| {
            large.index_of(l).map_err(|_| {
                Error::SiteMismatch(format!("point {l} is missing at the larger truncation"))
            })
        })
        .collect::<Result<_>>()?;
    let n1 = large.degree();
    let mut part = e.mapped(&map, n1);
    loop {
        let mut next = part.clone();
        for gen in large.gens() {
            let mapped = Partition::from_pairs(
                n1,
                (0..n1).map(|i| (gen.apply(i), gen.apply(part.class_id(i)))),
            );
            next = next.join(&mapped);
        }
        if next == part {
            break;
        }
        part = next;
    }
    for a in 0..small.degree() {
        for b in a + 1..small.degree() {
            if e.same_class(a, b) != part.same_class(map[a], map[b]) {
                return Err(Error::SiteMismatch(
                    "closure at t+1 merges classes that are separate at t".into(),
                ));
            }
        }
    }
    Ok(part)
}

fn stable_acl_of_groups(
    g_t: &FinPermGroup,
    g_t1: &FinPermGroup,
    site: Option<&AclSite>,
) -> Result<AclReport> {
    let (h_t, h_t1, e_t, e_t1) = match site {
        None => (
            g_t.clone(),
            g_t1.clone(),
            Partition::equality(g_t.degree()),
            Partition::equality(g_t1.degree()),
        ),
        Some(site) => {
            let stab_t = g_t.stabilizer(&site.stabilize, StabMode::Pointwise)?;
            let stab_t1 = g_t1.stabilizer(&site.stabilize, StabMode::Pointwise)?;
            if !is_congruence(&stab_t, &site.congruence) {
                return Err(Error::NotACongruence(
                    "site congruence is not preserved by the stabilizer".into(),
                ));
            }
            let lifted = transport_congruence(&stab_t, &stab_t1, &site.congruence)?;
            (stab_t, stab_t1, site.congruence.clone(), lifted)
        }
    };
    let q_t = h_t.quotient_by_congruence(&e_t)?;
    let q_t1 = h_t1.quotient_by_congruence(&e_t1)?;
    let orbits_t = q_t.orbits();
    let orbits_t1 = q_t1.orbits();
    let part_t1 = q_t1.orbit_partition();
    // Classes at t+1 sorted by least member align with the quotient domain.
    let classes_t1 = e_t1.classes();
    let mut stable_points = Vec::new();
    let mut orbit_sizes = Vec::new();
    for orbit in &orbits_t {
        // The class label at t is an original point label persisting at t+1;
        // match the orbit through the class containing that point there.
        let rep_label = &q_t.domain()[orbit[0]];
        let idx_t1 = h_t1.index_of(rep_label).map_err(|_| {
            Error::SiteMismatch(format!(
                "point {rep_label} is missing at the larger truncation"
            ))
        })?;
        let class_id = e_t1.class_id(idx_t1);
        let qpos = classes_t1
            .iter()
            .position(|c| c[0] == class_id)
            .expect("classes tile the domain");
        let size_t1 = orbits_t1[orbit_index(&part_t1, &orbits_t1, qpos)].len() as u64;
        let size_t = orbit.len() as u64;
        orbit_sizes.push(AclOrbitRow {
            rep: rep_label.clone(),
            size_t,
            size_t1,
        });
        if size_t == size_t1 {
            for &p in orbit {
                stable_points.push(q_t.domain()[p].clone());
            }
        }
    }
    stable_points.sort();
    Ok(AclReport {
        stable_points,
        orbit_sizes,
    })
}

fn orbit_index(part: &Partition, orbits: &[Vec<usize>], point: usize) -> usize {
    let class = part.class_id(point);
    orbits
        .iter()
        .position(|o| o[0] == class)
        .expect("orbit list covers the domain")
}

/// Stable algebraic closure of an expression at truncation size t, optionally
/// stabilizing points and quotienting by a congruence first.
pub fn stable_acl(e: &GroupExpr, t: usize, site: Option<&AclSite>) -> Result<AclReport> {
    if t < 1 {
        return Err(Error::Invalid("stable_acl requires t ≥ 1".into()));
    }
    let (g_t, _) = construct::truncate(e, t)?;
    let (g_t1, _) = construct::truncate(e, t + 1)?;
    stable_acl_of_groups(&g_t, &g_t1, site)
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthWitness {
    pub point: PointLabel,
    pub congruence_classes: Vec<Vec<PointLabel>>,
    pub acl_size: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthReport {
    pub width: u64,
    pub witnesses: Vec<WidthWitness>,
    /// Sites whose congruence did not transport to t+1.
    pub skipped_sites: u64,
}

/// The width surrogate at truncation size t: the maximum stable-acl size over
/// orbit representatives x and congruences of their stabilizers.
pub fn width(e: &GroupExpr, t: usize) -> Result<WidthReport> {
    if t < 2 {
        return Err(Error::Invalid("width requires t ≥ 2".into()));
    }
    let (g_t, _) = construct::truncate(e, t)?;
    let (g_t1, _) = construct::truncate(e, t + 1)?;
    let mut witnesses = Vec::new();
    let mut skipped = 0u64;
    for orbit in g_t.orbits() {
        let x = g_t.domain()[orbit[0]].clone();
        let stab = g_t.stabilizer(std::slice::from_ref(&x), StabMode::Pointwise)?;
        for e_cong in congruences(&stab)? {
            let site = AclSite {
                stabilize: vec![x.clone()],
                congruence: e_cong.clone(),
            };
            match stable_acl_of_groups(&g_t, &g_t1, Some(&site)) {
                Ok(report) => {
                    let classes = e_cong
                        .classes()
                        .into_iter()
                        .map(|c| c.into_iter().map(|i| g_t.domain()[i].clone()).collect())
                        .collect();
                    witnesses.push(WidthWitness {
                        point: x.clone(),
                        congruence_classes: classes,
                        acl_size: report.acl_size(),
                    });
                }
                Err(Error::SiteMismatch(_)) => skipped += 1,
                Err(other) => return Err(other),
            }
        }
    }
    let width = witnesses.iter().map(|w| w.acl_size).max().unwrap_or(0);
    Ok(WidthReport {
        width,
        witnesses,
        skipped_sites: skipped,
    })
}

/// A candidate (K, ∇, Δ) given by label classes off K.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaCandidate {
    pub k_part: Vec<PointLabel>,
    pub nabla_classes: Vec<Vec<PointLabel>>,
    pub delta_classes: Vec<Vec<PointLabel>>,
}

/// Per-condition verdicts for the finite analog of an ω-partition.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub candidate: OmegaCandidate,
    /// K is finite and setwise fixed.
    pub cond1: bool,
    /// ∇ and Δ are congruences off K with Δ ⊆ ∇.
    pub cond2: bool,
    /// Number of ∇-classes (finitely many, reported as the count).
    pub cond3_class_count: usize,
    /// Finite analog of "ℵ0 many Δ-classes per ∇-class": exactly t.
    pub cond4: bool,
    /// Restricting to a ∇-class and quotienting by Δ gives the full
    /// symmetric group on the class set.
    pub cond5: bool,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.cond1 && self.cond2 && self.cond4 && self.cond5
    }
}

fn label_indices(g: &FinPermGroup, labels: &[PointLabel]) -> Result<Vec<usize>> {
    labels.iter().map(|l| g.index_of(l)).collect()
}

/// Evaluates the five ω-partition conditions (finite analogs) for a
/// candidate (K, ∇, Δ) on a truncated group.
pub fn omega_partition_check(
    g: &FinPermGroup,
    t: usize,
    candidate: &OmegaCandidate,
) -> Result<PartitionReport> {
    let k_idx: BTreeSet<usize> = label_indices(g, &candidate.k_part)?.into_iter().collect();
    let rest: Vec<usize> = (0..g.degree()).filter(|i| !k_idx.contains(i)).collect();

    // (1) K setwise fixed (finiteness is immediate on a finite domain).
    let cond1 = g
        .gens()
        .iter()
        .all(|p| k_idx.iter().all(|&i| k_idx.contains(&p.apply(i))));

    // Build ∇ and Δ as partitions of the whole domain with K as one class,
    // so generator invariance can be tested directly.
    let to_full = |classes: &[Vec<PointLabel>]| -> Result<Partition> {
        let mut full: Vec<Vec<usize>> = Vec::new();
        if !k_idx.is_empty() {
            full.push(k_idx.iter().copied().collect());
        }
        let mut covered: BTreeSet<usize> = k_idx.clone();
        for class in classes {
            let idx = label_indices(g, class)?;
            for &i in &idx {
                if !covered.insert(i) {
                    return Err(Error::Invalid(format!(
                        "candidate classes overlap at {}",
                        g.domain()[i]
                    )));
                }
            }
            full.push(idx);
        }
        if covered.len() != g.degree() {
            return Err(Error::Invalid(
                "candidate classes do not cover the domain".into(),
            ));
        }
        Partition::from_classes(g.degree(), &full)
    };
    let nabla = to_full(&candidate.nabla_classes)?;
    let delta = to_full(&candidate.delta_classes)?;

    let invariant = |p: &Partition| g.gens().iter().all(|gen| p.is_invariant_under(gen));
    let cond2 = cond1 && invariant(&nabla) && invariant(&delta) && delta.refines(&nabla);

    let cond3_class_count = candidate.nabla_classes.len();

    // (4) every ∇-class splits into exactly t Δ-classes.
    let mut cond4 = true;
    for class in &candidate.nabla_classes {
        let idx = label_indices(g, class)?;
        let mut deltas: BTreeSet<usize> = BTreeSet::new();
        for &i in &idx {
            deltas.insert(delta.class_id(i));
        }
        if deltas.len() != t {
            cond4 = false;
            break;
        }
    }
    if rest.is_empty() {
        cond4 = true;
    }

    // (5) G_((C))/Δ = Sym(C/Δ) for every ∇-class C.
    let mut cond5 = cond2;
    if cond5 {
        for class in &candidate.nabla_classes {
            let idx = label_indices(g, class)?;
            let restricted = g.restrict_inner(class, RestrictMode::PointwiseOutside)?;
            // Δ restricted to the class, in the restricted index space.
            let mut sorted_idx = idx.clone();
            sorted_idx.sort_unstable();
            let delta_c = delta.restricted(&sorted_idx);
            if !is_congruence(&restricted, &delta_c) {
                cond5 = false;
                break;
            }
            let q = restricted.quotient_by_congruence(&delta_c)?;
            let m = delta_c.class_count();
            if m > 8 {
                return Err(Error::CapExceeded {
                    cap: 8,
                    context: "symmetric-quotient check on more than 8 classes".into(),
                });
            }
            let full: u64 = (1..=m as u64).product();
            if q.order()? as u64 != full {
                cond5 = false;
                break;
            }
        }
    }

    Ok(PartitionReport {
        candidate: candidate.clone(),
        cond1,
        cond2,
        cond3_class_count,
        cond4,
        cond5,
    })
}

/// Enumerates candidate triples (K from setwise-fixed unions of orbits, ∇
/// and Δ from the congruence lattice off K) and returns every candidate
/// passing all finite-analog conditions.
pub fn omega_partition_find(g: &FinPermGroup, t: usize) -> Result<Vec<PartitionReport>> {
    if g.degree() > CONGRUENCE_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: CONGRUENCE_DOMAIN_CAP,
            context: "omega-partition search".into(),
        });
    }
    let orbits = g.orbits();
    let mut passing = Vec::new();
    for mask in 0..(1u32 << orbits.len()) {
        let mut k_idx: Vec<usize> = Vec::new();
        for (oi, orbit) in orbits.iter().enumerate() {
            if mask & (1 << oi) != 0 {
                k_idx.extend(orbit.iter().copied());
            }
        }
        k_idx.sort_unstable();
        let k_part: Vec<PointLabel> = k_idx.iter().map(|&i| g.domain()[i].clone()).collect();
        let rest: Vec<usize> = (0..g.degree()).filter(|i| !k_idx.contains(i)).collect();
        if rest.is_empty() {
            let candidate = OmegaCandidate {
                k_part,
                nabla_classes: vec![],
                delta_classes: vec![],
            };
            let report = omega_partition_check(g, t, &candidate)?;
            if report.ok() {
                passing.push(report);
            }
            continue;
        }
        // Restrict the group to the complement of K.
        let rest_labels: Vec<PointLabel> = rest.iter().map(|&i| g.domain()[i].clone()).collect();
        let g_rest = g.restrict_inner(&rest_labels, RestrictMode::Setwise)?;
        let congs = congruences(&g_rest)?;
        for nabla in &congs {
            for delta in &congs {
                if !delta.refines(nabla) {
                    continue;
                }
                let to_labels = |p: &Partition| -> Vec<Vec<PointLabel>> {
                    p.classes()
                        .into_iter()
                        .map(|c| c.into_iter().map(|i| g_rest.domain()[i].clone()).collect())
                        .collect()
                };
                let candidate = OmegaCandidate {
                    k_part: k_part.clone(),
                    nabla_classes: to_labels(nabla),
                    delta_classes: to_labels(delta),
                };
                let report = omega_partition_check(g, t, &candidate)?;
                if report.ok() {
                    passing.push(report);
                }
            }
        }
    }
    Ok(passing)
}

/// Lifts a congruence of the stabilized block action to a congruence of the
/// stabilizer of (x, 0) in the truncated group. Classes: the finite part,
/// every other block, every non-zero copy of block i, and the E-classes on
/// copy 0 of block i.
pub fn lift_congruence_estar(
    cons: &ConsData,
    meta: &TruncationMeta,
    block_i: usize,
    x: &PointLabel,
    e: &Partition,
) -> Result<Partition> {
    if block_i == 0 || block_i > meta.block_count() {
        return Err(Error::Invalid(format!(
            "block index {block_i} out of range"
        )));
    }
    let block = &meta.blocks()[block_i - 1];
    if !block.contains(x) {
        return Err(Error::Invalid(format!("{x} is not in block {block_i}")));
    }
    if e.size() != block.len() {
        return Err(Error::Invalid(
            "congruence size does not match the block".into(),
        ));
    }
    // e must be a congruence of the stabilizer of x in H_(Yi).
    let h_i = cons.h.restrict_inner(block, RestrictMode::Setwise)?;
    let stab_x = h_i.stabilizer(std::slice::from_ref(x), StabMode::Pointwise)?;
    if !is_congruence(&stab_x, e) {
        return Err(Error::NotACongruence(
            "E is not a congruence of the stabilizer of x in the block action".into(),
        ));
    }

    let (g, _) = construct::truncate_cons(cons, meta.t())?;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let domain_index = |label: &PointLabel| g.index_of(label);
    if !meta.k_part().is_empty() {
        classes.push(
            meta.k_part()
                .iter()
                .map(domain_index)
                .collect::<Result<_>>()?,
        );
    }
    for (j, other) in meta.blocks().iter().enumerate() {
        if j + 1 == block_i {
            continue;
        }
        let mut class = Vec::new();
        for l in other {
            for c in 0..meta.t() {
                class.push(meta.point_at(l, c)?);
            }
        }
        classes.push(class);
    }
    for c in 1..meta.t() {
        classes.push(
            block
                .iter()
                .map(|l| meta.point_at(l, c))
                .collect::<Result<_>>()?,
        );
    }
    for e_class in e.classes() {
        classes.push(
            e_class
                .iter()
                .map(|&j| meta.point_at(&block[j], 0))
                .collect::<Result<_>>()?,
        );
    }
    let estar = Partition::from_classes(g.degree(), &classes)?;

    // Validation: E* must be a congruence of the stabilizer of (x, 0).
    let x0 = g.domain()[meta.point_at(x, 0)?].clone();
    let stab = g.stabilizer(&[x0], StabMode::Pointwise)?;
    if !is_congruence(&stab, &estar) {
        return Err(Error::NotACongruence(
            "lifted partition is not a congruence of the point stabilizer".into(),
        ));
    }
    Ok(estar)
}
