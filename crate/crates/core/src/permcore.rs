//! Finite permutation groups on labeled domains: element generation,
//! stabilizers, restrictions, quotients, products, finite wreath products,
//! and subgroup relations.
//!
//! Element enumeration is breadth-first closure under the generators, guarded
//! by an explicit budget. Stabilizers and restrictions return the filtered
//! element set as their generator list, so later filters stay easy to verify.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::PointLabel;
use crate::partition::Partition;
use crate::perm::Perm;

/// Default element budget for breadth-first enumeration.
pub const DEFAULT_ELEM_CAP: usize = 1_000_000;

/// A finite permutation group, given by generators on a sorted labeled domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FinPermGroup {
    domain: Vec<PointLabel>,
    gens: Vec<Perm>,
    #[serde(skip_serializing)]
    elem_cap: usize,
}

impl<'de> Deserialize<'de> for FinPermGroup {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            domain: Vec<PointLabel>,
            gens: Vec<Perm>,
        }
        let repr = Repr::deserialize(deserializer)?;
        FinPermGroup::new(repr.domain, repr.gens).map_err(serde::de::Error::custom)
    }
}

/// Result of comparing two groups on the same domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupRelation {
    pub is_subgroup: bool,
    pub is_normal: bool,
    pub index: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabMode {
    Pointwise,
    Setwise,
}

/// The two inner restrictions: `Setwise` is G_{(Y)} = G_{{Y}}|_Y, and
/// `PointwiseOutside` is G_{((Y))} = G_{Dom∖Y}|_Y.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictMode {
    Setwise,
    PointwiseOutside,
}

impl FinPermGroup {
    /// Builds a group. The domain is sorted (labels are the identity of
    /// points); generators given relative to the input order are remapped.
    pub fn new(domain: Vec<PointLabel>, gens: Vec<Perm>) -> Result<FinPermGroup> {
        Self::with_cap(domain, gens, DEFAULT_ELEM_CAP)
    }

    pub fn with_cap(
        domain: Vec<PointLabel>,
        gens: Vec<Perm>,
        elem_cap: usize,
    ) -> Result<FinPermGroup> {
        if elem_cap == 0 {
            return Err(Error::Invalid("elem_cap must be positive".into()));
        }
        let n = domain.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| domain[a].cmp(&domain[b]));
        let sorted: Vec<PointLabel> = order.iter().map(|&i| domain[i].clone()).collect();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!(
                    "duplicate label {} in domain",
                    w[0]
                )));
            }
        }
        // new_index[old] = position of the old point in the sorted domain
        let mut new_index = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut remapped = Vec::with_capacity(gens.len());
        for g in &gens {
            if g.degree() != n {
                return Err(Error::Invalid(format!(
                    "generator degree {} does not match domain size {n}",
                    g.degree()
                )));
            }
            let mut image = vec![0; n];
            for old in 0..n {
                image[new_index[old]] = new_index[g.apply(old)];
            }
            remapped.push(Perm::from_image(image)?);
        }
        remapped.sort();
        remapped.dedup();
        remapped.retain(|g| !g.is_identity());
        Ok(FinPermGroup {
            domain: sorted,
            gens: remapped,
            elem_cap,
        })
    }

    pub fn trivial(domain: Vec<PointLabel>) -> Result<FinPermGroup> {
        FinPermGroup::new(domain, vec![])
    }

    /// The full symmetric group on the given labels.
    pub fn symmetric(domain: Vec<PointLabel>) -> Result<FinPermGroup> {
        let n = domain.len();
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::from_cycles(n, &[&[0, 1]])?);
        }
        if n >= 3 {
            let cycle: Vec<usize> = (0..n).collect();
            gens.push(Perm::from_cycles(n, &[&cycle])?);
        }
        FinPermGroup::new(domain, gens)
    }

    /// The cyclic group generated by one full cycle on the given labels.
    pub fn cyclic(domain: Vec<PointLabel>) -> Result<FinPermGroup> {
        let n = domain.len();
        let gens = if n >= 2 {
            let cycle: Vec<usize> = (0..n).collect();
            vec![Perm::from_cycles(n, &[&cycle])?]
        } else {
            vec![]
        };
        FinPermGroup::new(domain, gens)
    }

    pub fn domain(&self) -> &[PointLabel] {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.domain.len()
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn elem_cap(&self) -> usize {
        self.elem_cap
    }

    pub fn set_cap(&mut self, cap: usize) {
        self.elem_cap = cap.max(1);
    }

    pub fn index_of(&self, label: &PointLabel) -> Result<usize> {
        self.domain
            .binary_search(label)
            .map_err(|_| Error::Invalid(format!("label {label} not in domain")))
    }

    /// Full element set of ⟨gens⟩ by breadth-first closure; deterministic
    /// iteration order (lexicographic on image arrays).
    pub fn elements(&self) -> Result<BTreeSet<Perm>> {
        let id = Perm::identity(self.degree());
        let mut set = BTreeSet::new();
        set.insert(id.clone());
        let mut queue = VecDeque::new();
        queue.push_back(id);
        while let Some(p) = queue.pop_front() {
            for g in &self.gens {
                let q = g.compose(&p);
                if !set.contains(&q) {
                    if set.len() >= self.elem_cap {
                        return Err(Error::CapExceeded {
                            cap: self.elem_cap,
                            context: "enumerating group elements".into(),
                        });
                    }
                    set.insert(q.clone());
                    queue.push_back(q);
                }
            }
        }
        Ok(set)
    }

    pub fn order(&self) -> Result<usize> {
        Ok(self.elements()?.len())
    }

    /// Point orbits as a partition of the domain.
    pub fn orbit_partition(&self) -> Partition {
        let n = self.degree();
        let pairs = self
            .gens
            .iter()
            .flat_map(|g| (0..n).map(move |i| (i, g.apply(i))))
            .collect::<Vec<_>>();
        Partition::from_pairs(n, pairs)
    }

    /// Point orbits sorted by least member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        self.orbit_partition().classes()
    }

    /// Whether `sub`'s element set lies in (and is normalized by) this group.
    pub fn subgroup_relation(sub: &FinPermGroup, sup: &FinPermGroup) -> Result<SubgroupRelation> {
        if sub.domain != sup.domain {
            return Err(Error::DomainMismatch(
                "subgroup_relation requires identical labeled domains".into(),
            ));
        }
        let sub_elems = sub.elements()?;
        let sup_elems = sup.elements()?;
        let is_subgroup = sub_elems.iter().all(|p| sup_elems.contains(p));
        let mut is_normal = is_subgroup;
        if is_subgroup {
            'outer: for g in &sup.gens {
                let g_inv = g.inverse();
                for x in &sub_elems {
                    let conj = g.compose(x).compose(&g_inv);
                    if !sub_elems.contains(&conj) {
                        is_normal = false;
                        break 'outer;
                    }
                }
            }
        }
        let index = if is_subgroup {
            Some(sup_elems.len() / sub_elems.len())
        } else {
            None
        };
        Ok(SubgroupRelation {
            is_subgroup,
            is_normal,
            index,
        })
    }

    /// Pointwise or setwise stabilizer of a set of labels, presented by its
    /// full element set.
    pub fn stabilizer(&self, points: &[PointLabel], mode: StabMode) -> Result<FinPermGroup> {
        let idx: BTreeSet<usize> = points
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<_>>()?;
        let elems = self.elements()?;
        let keep: Vec<Perm> = elems
            .into_iter()
            .filter(|p| match mode {
                StabMode::Pointwise => idx.iter().all(|&i| p.apply(i) == i),
                StabMode::Setwise => idx.iter().all(|&i| idx.contains(&p.apply(i))),
            })
            .collect();
        FinPermGroup::with_cap(self.domain.clone(), keep, self.elem_cap)
    }

    /// G_{(Y)} or G_{((Y))}: stabilize (setwise, or by fixing the complement
    /// pointwise), then restrict the action to `Y`.
    pub fn restrict_inner(&self, y: &[PointLabel], mode: RestrictMode) -> Result<FinPermGroup> {
        let y_idx: BTreeSet<usize> = y.iter().map(|l| self.index_of(l)).collect::<Result<_>>()?;
        let complement: Vec<PointLabel> = self
            .domain
            .iter()
            .enumerate()
            .filter(|(i, _)| !y_idx.contains(i))
            .map(|(_, l)| l.clone())
            .collect();
        let stab = match mode {
            RestrictMode::Setwise => self.stabilizer(y, StabMode::Setwise)?,
            RestrictMode::PointwiseOutside => self.stabilizer(&complement, StabMode::Pointwise)?,
        };
        // Restrict each element to Y. Elements of the setwise stabilizer keep
        // Y invariant, so the restriction is a permutation of Y.
        let y_sorted: Vec<usize> = y_idx.iter().copied().collect();
        let mut pos_in_y = BTreeMap::new();
        for (pos, &i) in y_sorted.iter().enumerate() {
            pos_in_y.insert(i, pos);
        }
        let mut restricted: BTreeSet<Perm> = BTreeSet::new();
        for p in stab.gens() {
            let image: Vec<usize> = y_sorted.iter().map(|&i| pos_in_y[&p.apply(i)]).collect();
            restricted.insert(Perm::from_image(image)?);
        }
        let labels: Vec<PointLabel> = y_sorted.iter().map(|&i| self.domain[i].clone()).collect();
        FinPermGroup::with_cap(labels, restricted.into_iter().collect(), self.elem_cap)
    }

    /// The quotient action on the classes of a congruence. Classes are
    /// labeled by their lexicographically least member.
    pub fn quotient_by_congruence(&self, e: &Partition) -> Result<FinPermGroup> {
        if e.size() != self.degree() {
            return Err(Error::Invalid(
                "partition size does not match domain".into(),
            ));
        }
        for g in &self.gens {
            if !e.is_invariant_under(g) {
                return Err(Error::NotACongruence(format!(
                    "generator {g:?} does not preserve the partition"
                )));
            }
        }
        let classes = e.classes();
        let mut class_pos = BTreeMap::new();
        for (pos, class) in classes.iter().enumerate() {
            class_pos.insert(class[0], pos);
        }
        let labels: Vec<PointLabel> = classes.iter().map(|c| self.domain[c[0]].clone()).collect();
        let mut qgens = Vec::new();
        for g in &self.gens {
            let image: Vec<usize> = classes
                .iter()
                .map(|c| class_pos[&e.class_id(g.apply(c[0]))])
                .collect();
            qgens.push(Perm::from_image(image)?);
        }
        FinPermGroup::with_cap(labels, qgens, self.elem_cap)
    }

    /// Renames every point; the map must stay injective.
    pub fn relabel(&self, f: impl Fn(&PointLabel) -> PointLabel) -> Result<FinPermGroup> {
        let new_domain: Vec<PointLabel> = self.domain.iter().map(f).collect();
        FinPermGroup::with_cap(new_domain, self.gens.clone(), self.elem_cap)
    }

    /// Direct product with pairwise-disjointness enforced by tagging part `i`
    /// with block tag `B<i>`.
    pub fn direct_product(parts: &[FinPermGroup]) -> Result<FinPermGroup> {
        if parts.is_empty() {
            return Err(Error::Invalid("direct product of zero parts".into()));
        }
        let tagged: Vec<FinPermGroup> = parts
            .iter()
            .enumerate()
            .map(|(i, p)| p.relabel(|l| l.in_block(i as u32)))
            .collect::<Result<_>>()?;
        let mut domain = Vec::new();
        let mut offsets = Vec::new();
        for p in &tagged {
            offsets.push(domain.len());
            domain.extend(p.domain.iter().cloned());
        }
        let total = domain.len();
        let mut gens = Vec::new();
        for (i, p) in tagged.iter().enumerate() {
            for g in p.gens() {
                let mut image: Vec<usize> = (0..total).collect();
                for (j, &v) in g.image().iter().enumerate() {
                    image[offsets[i] + j] = offsets[i] + v;
                }
                gens.push(Perm::from_image(image)?);
            }
        }
        let cap = parts
            .iter()
            .map(|p| p.elem_cap)
            .max()
            .unwrap_or(DEFAULT_ELEM_CAP);
        FinPermGroup::with_cap(domain, gens, cap)
    }

    /// Product of groups acting on pairwise-disjoint subsets of a common
    /// labeled domain, each extended by the identity elsewhere. No tagging.
    pub fn product_padded(domain: &[PointLabel], parts: &[&FinPermGroup]) -> Result<FinPermGroup> {
        let host = FinPermGroup::trivial(domain.to_vec())?;
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut gens = Vec::new();
        for part in parts {
            let idx: Vec<usize> = part
                .domain
                .iter()
                .map(|l| host.index_of(l))
                .collect::<Result<_>>()?;
            for &i in &idx {
                if !seen.insert(i) {
                    return Err(Error::DomainMismatch(format!(
                        "part domains overlap at {}",
                        host.domain[i]
                    )));
                }
            }
            for g in part.gens() {
                let mut image: Vec<usize> = (0..domain.len()).collect();
                for (j, &v) in g.image().iter().enumerate() {
                    image[idx[j]] = idx[v];
                }
                gens.push(Perm::from_image(image)?);
            }
        }
        let cap = parts
            .iter()
            .map(|p| p.elem_cap)
            .max()
            .unwrap_or(DEFAULT_ELEM_CAP);
        FinPermGroup::with_cap(domain.to_vec(), gens, cap)
    }

    /// Finite wreath product `G ≀ Sym(m)` on `Dom(G)×{0..m−1}` with
    /// copy-tagged labels: G's generators act on copy 0, plus the copy
    /// transpositions (0 c) acting as the identity inside each copy.
    pub fn wreath_finite(g: &FinPermGroup, m: usize) -> Result<FinPermGroup> {
        if m == 0 {
            return Err(Error::Invalid("wreath_finite requires m ≥ 1".into()));
        }
        let n = g.degree();
        let mut domain = Vec::with_capacity(n * m);
        for c in 0..m {
            for l in &g.domain {
                domain.push(l.in_copy(c as u32));
            }
        }
        let total = n * m;
        let mut gens = Vec::new();
        for gen in g.gens() {
            let mut image: Vec<usize> = (0..total).collect();
            for (j, &v) in gen.image().iter().enumerate() {
                image[j] = v;
            }
            gens.push(Perm::from_image(image)?);
        }
        for c in 1..m {
            let mut image: Vec<usize> = (0..total).collect();
            for j in 0..n {
                image[j] = c * n + j;
                image[c * n + j] = j;
            }
            gens.push(Perm::from_image(image)?);
        }
        FinPermGroup::with_cap(domain, gens, g.elem_cap)
    }

    /// Whether the two groups act on the same labeled domain with equal
    /// element sets.
    pub fn same_element_set(&self, other: &FinPermGroup) -> Result<bool> {
        if self.domain != other.domain {
            return Ok(false);
        }
        Ok(self.elements()? == other.elements()?)
    }
}
