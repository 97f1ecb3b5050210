//! Finite relational structures and the structure-side constructions:
//! disjoint unions, truncated copies, the nested-equivalence family,
//! automorphism groups, invariant-relation expansions, homogenizability and
//! boundedness scans, and the expansion-merge test.
//!
//! "Definable" over a finite structure is implemented as "invariant under the
//! automorphism group" (unions of orbits): the checkable finite surrogate for
//! first-order definability in the ω-categorical setting this mirrors.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::label::PointLabel;
use crate::perm::Perm;
use crate::permcore::FinPermGroup;

/// Hard cap for automorphism/embedding backtracking domains.
const STRUCT_DOMAIN_CAP: usize = 12;
/// Hard cap for isomorphism-class enumeration domains.
const ENUM_DOMAIN_CAP: usize = 7;
/// Cap on raw structures enumerated per size before canonical dedup.
const ENUM_RAW_CAP: u128 = 4_000_000;

/// A finite relational structure with named relations; equality is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelStruct {
    domain: Vec<PointLabel>,
    /// (name, arity), sorted by name.
    signature: Vec<(String, usize)>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl RelStruct {
    /// Builds a structure; the domain is sorted, and tuples are index vectors
    /// relative to the sorted domain.
    pub fn new(
        domain: Vec<PointLabel>,
        signature: Vec<(String, usize)>,
        relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ) -> Result<RelStruct> {
        let mut sorted = domain;
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!(
                    "duplicate label {} in domain",
                    w[0]
                )));
            }
        }
        let mut sig = signature;
        sig.sort();
        for w in sig.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::SignatureClash(w[0].0.clone()));
            }
        }
        for (name, arity) in &sig {
            if *arity == 0 {
                return Err(Error::Invalid(format!("relation {name} has arity 0")));
            }
        }
        let mut rels = relations;
        for (name, arity) in &sig {
            let tuples = rels.entry(name.clone()).or_default();
            for t in tuples.iter() {
                if t.len() != *arity {
                    return Err(Error::Invalid(format!(
                        "tuple {t:?} does not match arity {arity} of {name}"
                    )));
                }
                if t.iter().any(|&p| p >= sorted.len()) {
                    return Err(Error::Invalid(format!(
                        "tuple {t:?} of {name} leaves the domain"
                    )));
                }
            }
        }
        if rels.keys().any(|k| !sig.iter().any(|(n, _)| n == k)) {
            return Err(Error::Invalid(
                "relation not declared in the signature".into(),
            ));
        }
        Ok(RelStruct {
            domain: sorted,
            signature: sig,
            relations: rels,
        })
    }

    /// A structure with no relations on fresh base labels.
    pub fn pure(names: &[&str]) -> Result<RelStruct> {
        RelStruct::new(
            names.iter().map(|n| PointLabel::base(n)).collect(),
            vec![],
            BTreeMap::new(),
        )
    }

    /// An undirected graph given by edges over base labels; edges are stored
    /// symmetrically.
    pub fn graph(names: &[&str], rel: &str, edges: &[(&str, &str)]) -> Result<RelStruct> {
        let domain: Vec<PointLabel> = names.iter().map(|n| PointLabel::base(n)).collect();
        let mut sorted = domain.clone();
        sorted.sort();
        let idx = |n: &str| -> Result<usize> {
            sorted
                .binary_search(&PointLabel::base(n))
                .map_err(|_| Error::Invalid(format!("unknown vertex {n}")))
        };
        let mut tuples = BTreeSet::new();
        for (a, b) in edges {
            let (i, j) = (idx(a)?, idx(b)?);
            tuples.insert(vec![i, j]);
            tuples.insert(vec![j, i]);
        }
        let mut rels = BTreeMap::new();
        rels.insert(rel.to_string(), tuples);
        RelStruct::new(domain, vec![(rel.to_string(), 2)], rels)
    }

    /// A directed graph given by arcs over base labels.
    pub fn digraph(names: &[&str], rel: &str, arcs: &[(&str, &str)]) -> Result<RelStruct> {
        let domain: Vec<PointLabel> = names.iter().map(|n| PointLabel::base(n)).collect();
        let mut sorted = domain.clone();
        sorted.sort();
        let idx = |n: &str| -> Result<usize> {
            sorted
                .binary_search(&PointLabel::base(n))
                .map_err(|_| Error::Invalid(format!("unknown vertex {n}")))
        };
        let mut tuples = BTreeSet::new();
        for (a, b) in arcs {
            tuples.insert(vec![idx(a)?, idx(b)?]);
        }
        let mut rels = BTreeMap::new();
        rels.insert(rel.to_string(), tuples);
        RelStruct::new(domain, vec![(rel.to_string(), 2)], rels)
    }

    pub fn domain(&self) -> &[PointLabel] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn signature(&self) -> &[(String, usize)] {
        &self.signature
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name)
    }

    /// Maximal arity, counting implicit equality: always at least 2.
    pub fn max_arity(&self) -> usize {
        self.signature
            .iter()
            .map(|(_, a)| *a)
            .max()
            .unwrap_or(0)
            .max(2)
    }

    pub fn index_of(&self, label: &PointLabel) -> Result<usize> {
        self.domain
            .binary_search(label)
            .map_err(|_| Error::Invalid(format!("label {label} not in domain")))
    }

    /// The induced substructure on a set of points (indices).
    pub fn induced(&self, points: &[usize]) -> Result<RelStruct> {
        let mut sorted: Vec<usize> = points.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut pos = BTreeMap::new();
        for (i, &p) in sorted.iter().enumerate() {
            pos.insert(p, i);
        }
        let domain: Vec<PointLabel> = sorted.iter().map(|&p| self.domain[p].clone()).collect();
        let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (name, tuples) in &self.relations {
            let kept: BTreeSet<Vec<usize>> = tuples
                .iter()
                .filter(|t| t.iter().all(|p| pos.contains_key(p)))
                .map(|t| t.iter().map(|p| pos[p]).collect())
                .collect();
            rels.insert(name.clone(), kept);
        }
        RelStruct::new(domain, self.signature.clone(), rels)
    }

    /// The reduct keeping only the named relations.
    pub fn reduct(&self, names: &[&str]) -> Result<RelStruct> {
        let sig: Vec<(String, usize)> = self
            .signature
            .iter()
            .filter(|(n, _)| names.contains(&n.as_str()))
            .cloned()
            .collect();
        if sig.len() != names.len() {
            return Err(Error::Invalid(
                "reduct names a relation the structure lacks".into(),
            ));
        }
        let rels: BTreeMap<String, BTreeSet<Vec<usize>>> = self
            .relations
            .iter()
            .filter(|(n, _)| names.contains(&n.as_str()))
            .map(|(n, t)| (n.clone(), t.clone()))
            .collect();
        RelStruct::new(self.domain.clone(), sig, rels)
    }

    /// Whether `sub.sig ⊆ self.sig` with equal relations on the shared names
    /// and the same domain: `sub` is a reduct of `self`.
    pub fn is_reduct_of(sub: &RelStruct, full: &RelStruct) -> bool {
        sub.domain == full.domain
            && sub
                .signature
                .iter()
                .all(|entry| full.signature.contains(entry))
            && sub
                .relations
                .iter()
                .all(|(n, t)| full.relations.get(n) == Some(t))
    }

    fn relabeled(&self, f: impl Fn(&PointLabel) -> PointLabel) -> Result<RelStruct> {
        // Labels are remapped; tuple indices must follow the new sort order.
        let new_labels: Vec<PointLabel> = self.domain.iter().map(f).collect();
        let mut order: Vec<usize> = (0..new_labels.len()).collect();
        order.sort_by(|&a, &b| new_labels[a].cmp(&new_labels[b]));
        let mut new_index = vec![0; new_labels.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let domain: Vec<PointLabel> = order.iter().map(|&i| new_labels[i].clone()).collect();
        let rels: BTreeMap<String, BTreeSet<Vec<usize>>> = self
            .relations
            .iter()
            .map(|(n, tuples)| {
                (
                    n.clone(),
                    tuples
                        .iter()
                        .map(|t| t.iter().map(|&p| new_index[p]).collect())
                        .collect(),
                )
            })
            .collect();
        RelStruct::new(domain, self.signature.clone(), rels)
    }
}

// ---------------------------------------------------------------------------
// JSON form: {domain:[…], sig:[{name,arity}…], rels:{name:[[labels]…]}}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SigEntry {
    name: String,
    arity: usize,
}

#[derive(Serialize, Deserialize)]
struct RelStructRepr {
    domain: Vec<String>,
    sig: Vec<SigEntry>,
    rels: BTreeMap<String, Vec<Vec<String>>>,
}

impl Serialize for RelStruct {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = RelStructRepr {
            domain: self.domain.iter().map(|l| l.to_string()).collect(),
            sig: self
                .signature
                .iter()
                .map(|(name, arity)| SigEntry {
                    name: name.clone(),
                    arity: *arity,
                })
                .collect(),
            rels: self
                .relations
                .iter()
                .map(|(n, tuples)| {
                    (
                        n.clone(),
                        tuples
                            .iter()
                            .map(|t| t.iter().map(|&p| self.domain[p].to_string()).collect())
                            .collect(),
                    )
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RelStruct {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RelStructRepr::deserialize(deserializer)?;
        let domain: Vec<PointLabel> = repr
            .domain
            .iter()
            .map(|s| PointLabel::parse(s))
            .collect::<Result<_>>()
            .map_err(D::Error::custom)?;
        let mut sorted = domain.clone();
        sorted.sort();
        let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (name, tuples) in &repr.rels {
            let mut set = BTreeSet::new();
            for t in tuples {
                let idx: Vec<usize> = t
                    .iter()
                    .map(|s| {
                        let l = PointLabel::parse(s).map_err(D::Error::custom)?;
                        sorted
                            .binary_search(&l)
                            .map_err(|_| D::Error::custom(format!("tuple entry {s} not in domain")))
                    })
                    .collect::<std::result::Result<_, D::Error>>()?;
                set.insert(idx);
            }
            rels.insert(name.clone(), set);
        }
        RelStruct::new(
            domain,
            repr.sig.into_iter().map(|e| (e.name, e.arity)).collect(),
            rels,
        )
        .map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Embeddings and automorphisms
// ---------------------------------------------------------------------------

/// Backtracking search for induced embeddings of `source` into `target`.
/// Stops at the first hit when `first_only` is set.
fn embeddings(source: &RelStruct, target: &RelStruct, first_only: bool) -> Result<Vec<Vec<usize>>> {
    if source.signature != target.signature {
        return Err(Error::Invalid(
            "embedding across different signatures".into(),
        ));
    }
    if target.size() > STRUCT_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: STRUCT_DOMAIN_CAP,
            context: "embedding search target".into(),
        });
    }
    let n = source.size();
    let m = target.size();
    if n > m {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; m];

    fn consistent(source: &RelStruct, target: &RelStruct, map: &[usize], assigned: usize) -> bool {
        // Check every tuple over points 0..assigned that involves the last
        // assigned point: membership must agree on both sides.
        let last = assigned - 1;
        for (name, arity) in source.signature() {
            let src_rel = source.relation(name).unwrap();
            let tgt_rel = target.relation(name).unwrap();
            let mut tuple = vec![0usize; *arity];
            let total = assigned.pow(*arity as u32);
            for code in 0..total {
                let mut c = code;
                let mut has_last = false;
                for slot in tuple.iter_mut() {
                    *slot = c % assigned;
                    if *slot == last {
                        has_last = true;
                    }
                    c /= assigned;
                }
                if !has_last {
                    continue;
                }
                let image: Vec<usize> = tuple.iter().map(|&p| map[p]).collect();
                if src_rel.contains(&tuple) != tgt_rel.contains(&image) {
                    return false;
                }
            }
        }
        true
    }

    fn recurse(
        source: &RelStruct,
        target: &RelStruct,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        depth: usize,
        out: &mut Vec<Vec<usize>>,
        first_only: bool,
    ) {
        if first_only && !out.is_empty() {
            return;
        }
        if depth == source.size() {
            out.push(map.clone());
            return;
        }
        for cand in 0..target.size() {
            if used[cand] {
                continue;
            }
            map[depth] = cand;
            used[cand] = true;
            if consistent(source, target, map, depth + 1) {
                recurse(source, target, map, used, depth + 1, out, first_only);
            }
            used[cand] = false;
            map[depth] = usize::MAX;
        }
    }

    recurse(source, target, &mut map, &mut used, 0, &mut out, first_only);
    Ok(out)
}

/// Whether `c` embeds into `a` as an induced substructure.
pub fn embeds(c: &RelStruct, a: &RelStruct) -> Result<bool> {
    Ok(!embeddings(c, a, true)?.is_empty())
}

/// All relation-preserving bijections, presented as a permutation group whose
/// generator list is the full automorphism set.
pub fn aut_group(a: &RelStruct) -> Result<FinPermGroup> {
    if a.size() > STRUCT_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: STRUCT_DOMAIN_CAP,
            context: "automorphism search".into(),
        });
    }
    let maps = embeddings(a, a, false)?;
    let gens: Vec<Perm> = maps
        .into_iter()
        .map(Perm::from_image)
        .collect::<Result<_>>()?;
    FinPermGroup::new(a.domain.to_vec(), gens)
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// Disjoint union: block-tagged domains, original relations kept, plus fresh
/// unary predicates `U1..Un` marking the parts.
pub fn disjoint_union(parts: &[RelStruct]) -> Result<RelStruct> {
    if parts.is_empty() {
        return Err(Error::Invalid("disjoint union of zero parts".into()));
    }
    for part in parts {
        for (name, _) in &part.signature {
            let is_marker = name
                .strip_prefix('U')
                .and_then(|rest| rest.parse::<usize>().ok())
                .is_some_and(|i| i >= 1 && i <= parts.len());
            if is_marker {
                return Err(Error::SignatureClash(name.clone()));
            }
        }
    }
    let tagged: Vec<RelStruct> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| p.relabeled(|l| l.in_block(i as u32)))
        .collect::<Result<_>>()?;
    let mut domain = Vec::new();
    let mut offsets = Vec::new();
    for p in &tagged {
        offsets.push(domain.len());
        domain.extend(p.domain.iter().cloned());
    }
    let mut signature: Vec<(String, usize)> = Vec::new();
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (i, p) in tagged.iter().enumerate() {
        for (name, arity) in &p.signature {
            match signature.iter().find(|(n, _)| n == name) {
                None => signature.push((name.clone(), *arity)),
                Some((_, a)) if a == arity => {}
                Some(_) => return Err(Error::SignatureClash(name.clone())),
            }
            let entry = rels.entry(name.clone()).or_default();
            for t in p.relations.get(name).into_iter().flatten() {
                entry.insert(t.iter().map(|&p| offsets[i] + p).collect());
            }
        }
    }
    for (i, p) in tagged.iter().enumerate() {
        let name = format!("U{}", i + 1);
        signature.push((name.clone(), 1));
        let tuples: BTreeSet<Vec<usize>> = (0..p.size()).map(|j| vec![offsets[i] + j]).collect();
        rels.insert(name, tuples);
    }
    RelStruct::new(domain, signature, rels)
}

fn fresh_equiv_name(sig: &[(String, usize)]) -> String {
    if !sig.iter().any(|(n, _)| n == "E") {
        return "E".to_string();
    }
    let mut k = 2usize;
    loop {
        let name = format!("E{k}");
        if !sig.iter().any(|(n, _)| n == &name) {
            return name;
        }
        k += 1;
    }
}

/// `m` copies of a structure: copy-tagged domain, relations duplicated within
/// copies, plus a binary relation joining same-copy pairs (reflexive).
pub fn copies_trunc(a: &RelStruct, m: usize) -> Result<RelStruct> {
    if m == 0 {
        return Err(Error::Invalid("copies_trunc requires m ≥ 1".into()));
    }
    let n = a.size();
    let mut domain = Vec::with_capacity(n * m);
    for c in 0..m {
        for l in &a.domain {
            domain.push(l.in_copy(c as u32));
        }
    }
    // Index layout (copy-major) survives sorting: copy tags lead each label.
    let mut signature = a.signature.clone();
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (name, tuples) in &a.relations {
        let mut set = BTreeSet::new();
        for c in 0..m {
            for t in tuples {
                set.insert(t.iter().map(|&p| c * n + p).collect());
            }
        }
        rels.insert(name.clone(), set);
    }
    let ename = fresh_equiv_name(&signature);
    let mut epairs = BTreeSet::new();
    for c in 0..m {
        for i in 0..n {
            for j in 0..n {
                epairs.insert(vec![c * n + i, c * n + j]);
            }
        }
    }
    signature.push((ename.clone(), 2));
    rels.insert(ename, epairs);
    RelStruct::new(domain, signature, rels)
}

/// The nested-equivalence family with branching t: n = 0 is a single point;
/// level j classes have size t^j. Relations `E1..En`, with `En` universal.
pub fn en_family(n: usize, t: usize) -> Result<RelStruct> {
    if t == 0 {
        return Err(Error::Invalid("en_family requires t ≥ 1".into()));
    }
    let size = checked_usize_pow(t, n)?;
    let mut domain = vec![PointLabel::base("pt")];
    for _ in 0..n {
        let mut next = Vec::with_capacity(domain.len() * t);
        for c in 0..t {
            for l in &domain {
                next.push(l.in_copy(c as u32));
            }
        }
        domain = next;
    }
    debug_assert_eq!(domain.len(), size);
    // Copy-major construction at each level keeps the vector sorted, so index
    // p has level-j class p / t^j.
    let mut signature = Vec::new();
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for j in 1..=n {
        let name = format!("E{j}");
        let class_size = t.pow(j as u32);
        let mut pairs = BTreeSet::new();
        for p in 0..size {
            for q in 0..size {
                if p / class_size == q / class_size {
                    pairs.insert(vec![p, q]);
                }
            }
        }
        signature.push((name.clone(), 2));
        rels.insert(name, pairs);
    }
    RelStruct::new(domain, signature, rels)
}

fn checked_usize_pow(base: usize, exp: usize) -> Result<usize> {
    let mut total: u128 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(base as u128);
        if total > 4096 {
            return Err(Error::CapExceeded {
                cap: 4096,
                context: "nested-copies domain".into(),
            });
        }
    }
    Ok(total as usize)
}

// ---------------------------------------------------------------------------
// Invariant-relation expansion and homogenizability
// ---------------------------------------------------------------------------

/// Orbit ids of every tuple in `Dom^n` under the generators of `g`, encoded
/// base-|Dom| with coordinate 0 as the least-significant digit; also returns
/// representative codes per orbit in discovery order.
pub fn tuple_orbit_ids(g: &FinPermGroup, n: usize, tuple_cap: u64) -> Result<(Vec<u32>, Vec<u64>)> {
    let d = g.degree();
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(d as u128);
    }
    if total > tuple_cap as u128 {
        return Err(Error::CapExceeded {
            cap: tuple_cap as usize,
            context: "tuple orbit sweep".into(),
        });
    }
    let total = total as u64;
    let gens: Vec<&[usize]> = g.gens().iter().map(|p| p.image()).collect();
    let mut ids = vec![u32::MAX; total as usize];
    let mut reps = Vec::new();
    let mut tuple = vec![0usize; n];
    for start in 0..total {
        if ids[start as usize] != u32::MAX {
            continue;
        }
        let id = reps.len() as u32;
        reps.push(start);
        ids[start as usize] = id;
        let mut stack = vec![start];
        while let Some(code) = stack.pop() {
            let mut c = code;
            for slot in tuple.iter_mut() {
                *slot = (c % d as u64) as usize;
                c /= d as u64;
            }
            for gen in &gens {
                let mut enc = 0u64;
                for i in (0..n).rev() {
                    enc = enc * d as u64 + gen[tuple[i]] as u64;
                }
                if ids[enc as usize] == u32::MAX {
                    ids[enc as usize] = id;
                    stack.push(enc);
                }
            }
        }
    }
    Ok((ids, reps))
}

/// The expansion by all invariant m-ary relations: one relation per orbit of
/// the automorphism group on `A^m`.
pub fn delta_m(a: &RelStruct, m: usize, tuple_cap: u64) -> Result<RelStruct> {
    if m == 0 {
        return Err(Error::Invalid("delta_m requires m ≥ 1".into()));
    }
    let aut = aut_group(a)?;
    let (ids, reps) = tuple_orbit_ids(&aut, m, tuple_cap)?;
    let d = a.size();
    let mut signature = Vec::new();
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut tuples_per_orbit: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); reps.len()];
    for (code, &id) in ids.iter().enumerate() {
        let mut c = code as u64;
        let mut tuple = vec![0usize; m];
        for slot in tuple.iter_mut() {
            *slot = (c % d as u64) as usize;
            c /= d as u64;
        }
        tuples_per_orbit[id as usize].insert(tuple);
    }
    for (id, tuples) in tuples_per_orbit.into_iter().enumerate() {
        let name = format!("O{id}");
        signature.push((name.clone(), m));
        rels.insert(name, tuples);
    }
    RelStruct::new(a.domain.to_vec(), signature, rels)
}

/// Outcome of the homogenizability check: pass, or the first pair of tuples
/// in distinct orbits that no m-ary projection separates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum HomogOutcome {
    Pass,
    Counterexample {
        n: usize,
        u: Vec<String>,
        v: Vec<String>,
    },
}

/// For each n ≤ n_max, verifies that any two n-tuples in distinct orbits have
/// some coordinate map π: m→n projecting them to distinct m-orbits.
pub fn homog_check(a: &RelStruct, m: usize, n_max: usize, tuple_cap: u64) -> Result<HomogOutcome> {
    if m == 0 || n_max == 0 {
        return Err(Error::Invalid(
            "homog_check requires m ≥ 1 and n_max ≥ 1".into(),
        ));
    }
    let aut = aut_group(a)?;
    let d = a.size();
    let (m_ids, _) = tuple_orbit_ids(&aut, m, tuple_cap)?;
    for n in 1..=n_max {
        let (ids, reps) = tuple_orbit_ids(&aut, n, tuple_cap)?;
        let _ = ids;
        // Projection profiles are orbit-invariant, so comparing
        // representatives covers all pairs.
        let decode = |code: u64| -> Vec<usize> {
            let mut c = code;
            let mut tuple = vec![0usize; n];
            for slot in tuple.iter_mut() {
                *slot = (c % d as u64) as usize;
                c /= d as u64;
            }
            tuple
        };
        // All maps π: m→n, odometer over n^m.
        let maps: Vec<Vec<usize>> = {
            let mut out = Vec::new();
            let total = (n as u64).pow(m as u32);
            for code in 0..total {
                let mut c = code;
                let mut pi = vec![0usize; m];
                for slot in pi.iter_mut() {
                    *slot = (c % n as u64) as usize;
                    c /= n as u64;
                }
                out.push(pi);
            }
            out
        };
        let profile = |code: u64| -> Vec<u32> {
            let tuple = decode(code);
            maps.iter()
                .map(|pi| {
                    let mut enc = 0u64;
                    for &coord in pi.iter().rev() {
                        enc = enc * d as u64 + tuple[coord] as u64;
                    }
                    m_ids[enc as usize]
                })
                .collect()
        };
        let profiles: Vec<Vec<u32>> = reps.iter().map(|&r| profile(r)).collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                if profiles[i] == profiles[j] {
                    let to_labels = |code: u64| -> Vec<String> {
                        decode(code)
                            .iter()
                            .map(|&p| a.domain[p].to_string())
                            .collect()
                    };
                    return Ok(HomogOutcome::Counterexample {
                        n,
                        u: to_labels(reps[i]),
                        v: to_labels(reps[j]),
                    });
                }
            }
        }
    }
    Ok(HomogOutcome::Pass)
}

// ---------------------------------------------------------------------------
// Age, boundedness, forbidden substructures
// ---------------------------------------------------------------------------

/// Canonical encoding of a structure up to isomorphism: the minimum, over all
/// domain permutations, of the relation-content encoding.
fn canonical_code(s: &RelStruct) -> Vec<Vec<Vec<usize>>> {
    let n = s.size();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<Vec<Vec<usize>>>> = None;
    permute_all(&mut perm, 0, &mut |p| {
        let code: Vec<Vec<Vec<usize>>> = s
            .signature
            .iter()
            .map(|(name, _)| {
                let mut tuples: Vec<Vec<usize>> = s.relations[name]
                    .iter()
                    .map(|t| t.iter().map(|&x| p[x]).collect())
                    .collect();
                tuples.sort();
                tuples
            })
            .collect();
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    });
    best.unwrap_or_default()
}

fn permute_all(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_all(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Enumerates all structures of exactly size n over the signature, one per
/// isomorphism class, on fresh labels `p0..`.
fn enumerate_structures(signature: &[(String, usize)], n: usize) -> Result<Vec<RelStruct>> {
    if n > ENUM_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: ENUM_DOMAIN_CAP,
            context: "structure enumeration size".into(),
        });
    }
    let domain: Vec<PointLabel> = (0..n).map(|i| PointLabel::base(&format!("p{i}"))).collect();
    // All tuples per relation, then every subset combination.
    let mut tuple_lists: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut raw_count: u128 = 1;
    for (_, arity) in signature {
        let count = (n as u128).pow(*arity as u32);
        if count >= 63 {
            return Err(Error::CapExceeded {
                cap: 62,
                context: "relation tuple space too large to enumerate".into(),
            });
        }
        let mut tuples = Vec::new();
        for code in 0..count {
            let mut c = code;
            let mut t = vec![0usize; *arity];
            for slot in t.iter_mut() {
                *slot = (c % n as u128) as usize;
                c /= n as u128;
            }
            tuples.push(t);
        }
        raw_count = raw_count.saturating_mul(1u128 << tuples.len());
        tuple_lists.push(tuples);
    }
    if raw_count > ENUM_RAW_CAP {
        return Err(Error::CapExceeded {
            cap: ENUM_RAW_CAP as usize,
            context: "raw structure enumeration".into(),
        });
    }
    let mut seen: BTreeSet<Vec<Vec<Vec<usize>>>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut masks = vec![0u64; signature.len()];
    loop {
        let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (ri, (name, _)) in signature.iter().enumerate() {
            let set: BTreeSet<Vec<usize>> = tuple_lists[ri]
                .iter()
                .enumerate()
                .filter(|(ti, _)| masks[ri] & (1u64 << ti) != 0)
                .map(|(_, t)| t.clone())
                .collect();
            rels.insert(name.clone(), set);
        }
        let s = RelStruct::new(domain.clone(), signature.to_vec(), rels)?;
        if seen.insert(canonical_code(&s)) {
            out.push(s);
        }
        // Advance the multi-mask odometer.
        let mut ri = 0;
        loop {
            if ri == signature.len() {
                return Ok(out);
            }
            masks[ri] += 1;
            if masks[ri] < (1u64 << tuple_lists[ri].len()) {
                break;
            }
            masks[ri] = 0;
            ri += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub m_a: usize,
    pub minimal_obstructions: Vec<RelStruct>,
    pub b: usize,
    pub scan_size: usize,
}

/// Scans all structures of size ≤ s (up to isomorphism) for minimal
/// non-members of the age of `a`. The bound `b` is relative to the scan
/// horizon: complete up to s, not a global certificate.
pub fn boundedness_scan(a: &RelStruct, s: usize) -> Result<BoundsReport> {
    let mut obstructions = Vec::new();
    for n in 1..=s {
        for candidate in enumerate_structures(&a.signature, n)? {
            if embeds(&candidate, a)? {
                continue;
            }
            // Minimal: every one-point-deleted substructure is in the age.
            let mut minimal = true;
            for drop in 0..n {
                let points: Vec<usize> = (0..n).filter(|&p| p != drop).collect();
                let sub = candidate.induced(&points)?;
                if !embeds(&sub, a)? {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                obstructions.push(candidate);
            }
        }
    }
    let m_a = a.max_arity();
    let b = obstructions
        .iter()
        .map(|o| o.size())
        .max()
        .unwrap_or(0)
        .max(m_a);
    Ok(BoundsReport {
        m_a,
        minimal_obstructions: obstructions,
        b,
        scan_size: s,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ForbReport {
    pub agrees: bool,
    /// First structure (canonical form) where age membership and
    /// forbidden-family membership diverge, with the two verdicts.
    pub divergence: Option<(RelStruct, bool, bool)>,
}

/// Whether, among structures of size ≤ s, membership in the age of `a`
/// coincides with embedding no structure of `f`.
pub fn forb_check(a: &RelStruct, f: &[RelStruct], s: usize) -> Result<ForbReport> {
    for fs in f {
        if fs.signature != a.signature {
            return Err(Error::Invalid(
                "forbidden structures must share the signature of the base".into(),
            ));
        }
    }
    for n in 1..=s {
        for candidate in enumerate_structures(&a.signature, n)? {
            let in_age = embeds(&candidate, a)?;
            let mut forbidden = false;
            for fs in f {
                if embeds(fs, &candidate)? {
                    forbidden = true;
                    break;
                }
            }
            let in_forb_class = !forbidden;
            if in_age != in_forb_class {
                return Ok(ForbReport {
                    agrees: false,
                    divergence: Some((candidate, in_age, in_forb_class)),
                });
            }
        }
    }
    Ok(ForbReport {
        agrees: true,
        divergence: None,
    })
}

/// Extra-relation content of one expansion, in the probe's point indices.
type ExpansionContent = BTreeMap<String, BTreeSet<Vec<usize>>>;

#[derive(Clone, Debug, Serialize)]
pub struct MergeReport {
    /// Direct age membership of the probe in the reduct.
    pub direct: bool,
    /// Existence of compatible expansions of the marked-point deletions.
    pub merged: bool,
    pub agrees: bool,
}

/// Tests the expansion-merge equivalence: a structure over the reduct
/// signature is in the age of the reduct iff its marked-point deletions have
/// expansions in the age of the full structure agreeing on overlaps.
pub fn merge_expansions_check(
    b: &RelStruct,
    a: &RelStruct,
    c: &RelStruct,
    marked: &[PointLabel],
    s: usize,
) -> Result<MergeReport> {
    if !RelStruct::is_reduct_of(b, a) {
        return Err(Error::Invalid(
            "first structure is not a reduct of the second".into(),
        ));
    }
    if c.signature != b.signature {
        return Err(Error::Invalid(
            "probe must be over the reduct signature".into(),
        ));
    }
    let bounds = boundedness_scan(a, s)?;
    if marked.len() != bounds.b + 1 {
        return Err(Error::HorizonTooSmall(format!(
            "need b+1 = {} marked points for the scanned bound, got {}",
            bounds.b + 1,
            marked.len()
        )));
    }
    let marked_idx: Vec<usize> = marked
        .iter()
        .map(|l| c.index_of(l))
        .collect::<Result<_>>()?;
    {
        let mut sorted = marked_idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != marked_idx.len() {
            return Err(Error::Invalid("marked points must be distinct".into()));
        }
    }

    let direct = embeds(c, b)?;

    // For each marked point, all expansions of the deletion that embed into
    // the full structure, recorded as relation content over c's points.
    let sigma_only: Vec<(String, usize)> = a
        .signature
        .iter()
        .filter(|(n, _)| !b.signature.iter().any(|(bn, _)| bn == n))
        .cloned()
        .collect();
    let mut candidates: Vec<Vec<ExpansionContent>> = Vec::new();
    for &drop in &marked_idx {
        let points: Vec<usize> = (0..c.size()).filter(|&p| p != drop).collect();
        let c_i = c.induced(&points)?;
        // Every embedding of the reduct part into b=a|τ pulls back a unique
        // σ-expansion from a.
        let maps = embeddings(
            &c_i,
            &a.reduct(
                &b.signature
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>(),
            )?,
            false,
        )?;
        let mut exps: BTreeSet<ExpansionContent> = BTreeSet::new();
        for map in maps {
            let mut content: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
            for (name, arity) in &sigma_only {
                let rel = a.relation(name).expect("signature checked");
                let mut tuples = BTreeSet::new();
                let total = (c_i.size() as u64).pow(*arity as u32);
                for code in 0..total {
                    let mut cc = code;
                    let mut t = vec![0usize; *arity];
                    for slot in t.iter_mut() {
                        *slot = (cc % c_i.size() as u64) as usize;
                        cc /= c_i.size() as u64;
                    }
                    let image: Vec<usize> = t.iter().map(|&p| map[p]).collect();
                    if rel.contains(&image) {
                        // Record in c's global point indices.
                        tuples.insert(t.iter().map(|&p| points[p]).collect());
                    }
                }
                content.insert(name.clone(), tuples);
            }
            exps.insert(content);
        }
        candidates.push(exps.into_iter().collect());
    }

    // Search for one expansion per deletion agreeing on pairwise overlaps:
    // tuples avoiding both dropped points must match exactly.
    fn compatible(
        x: &ExpansionContent,
        y: &ExpansionContent,
        drop_x: usize,
        drop_y: usize,
    ) -> bool {
        for (name, tx) in x {
            let ty = &y[name];
            let shared = |t: &Vec<usize>| !t.contains(&drop_x) && !t.contains(&drop_y);
            let sx: BTreeSet<&Vec<usize>> = tx.iter().filter(|t| shared(t)).collect();
            let sy: BTreeSet<&Vec<usize>> = ty.iter().filter(|t| shared(t)).collect();
            if sx != sy {
                return false;
            }
        }
        true
    }

    fn search(
        candidates: &[Vec<ExpansionContent>],
        marked_idx: &[usize],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let depth = chosen.len();
        if depth == candidates.len() {
            return true;
        }
        for (ci, _) in candidates[depth].iter().enumerate() {
            let ok = (0..depth).all(|prev| {
                compatible(
                    &candidates[prev][chosen[prev]],
                    &candidates[depth][ci],
                    marked_idx[prev],
                    marked_idx[depth],
                )
            });
            if ok {
                chosen.push(ci);
                if search(candidates, marked_idx, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let merged = search(&candidates, &marked_idx, &mut Vec::new());
    Ok(MergeReport {
        direct,
        merged,
        agrees: direct == merged,
    })
}
