//! The lattice of groups between a given group and the full symmetric group
//! on its domain: the finite oracle for reduct counting.
//!
//! Deduplication is by full element set, not conjugacy: on a fixed domain,
//! reducts up to interdefinability correspond to literal subgroup identity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::GroupExpr;
use crate::perm::Perm;
use crate::permcore::FinPermGroup;
use crate::structures::{aut_group, RelStruct};

/// Largest domain for full-symmetric-group lattice sweeps.
const LATTICE_DOMAIN_CAP: usize = 7;

#[derive(Clone, Debug, Serialize)]
pub struct LatticeReport {
    pub base: FinPermGroup,
    /// All groups H with base ≤ H ≤ Sym(domain), sorted by (order, elements).
    pub supergroups: Vec<FinPermGroup>,
    pub count: usize,
    /// Hasse cover pairs (sub index, super index).
    pub edges: Vec<(usize, usize)>,
}

/// Enumerates every group between `g` and the symmetric group on its domain
/// by closing one adjoined element at a time.
pub fn intermediate_groups(g: &FinPermGroup) -> Result<LatticeReport> {
    if g.degree() > LATTICE_DOMAIN_CAP {
        return Err(Error::CapExceeded {
            cap: LATTICE_DOMAIN_CAP,
            context: "intermediate-group lattice".into(),
        });
    }
    let sym = FinPermGroup::symmetric(g.domain().to_vec())?;
    let all: Vec<Perm> = sym.elements()?.into_iter().collect();
    let base_elems: Vec<Perm> = g.elements()?.into_iter().collect();

    let mut seen: BTreeSet<Vec<Perm>> = BTreeSet::new();
    seen.insert(base_elems.clone());
    let mut queue: VecDeque<Vec<Perm>> = VecDeque::new();
    queue.push_back(base_elems);
    while let Some(current) = queue.pop_front() {
        for candidate in &all {
            if current.binary_search(candidate).is_ok() {
                continue;
            }
            let mut gens = current.clone();
            gens.push(candidate.clone());
            let closed = FinPermGroup::with_cap(g.domain().to_vec(), gens, g.elem_cap())?;
            let elems: Vec<Perm> = closed.elements()?.into_iter().collect();
            if seen.insert(elems.clone()) {
                queue.push_back(elems);
            }
        }
    }

    let mut groups: Vec<Vec<Perm>> = seen.into_iter().collect();
    groups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let element_sets: Vec<BTreeSet<Perm>> =
        groups.iter().map(|v| v.iter().cloned().collect()).collect();
    let supergroups: Vec<FinPermGroup> = groups
        .iter()
        .map(|elems| FinPermGroup::with_cap(g.domain().to_vec(), elems.clone(), g.elem_cap()))
        .collect::<Result<_>>()?;

    // Cover relation: contained, and nothing strictly between.
    let contains = |i: usize, j: usize| -> bool {
        element_sets[i].iter().all(|p| element_sets[j].contains(p))
    };
    let mut edges = Vec::new();
    for i in 0..groups.len() {
        for j in 0..groups.len() {
            if i == j || groups[i].len() >= groups[j].len() || !contains(i, j) {
                continue;
            }
            let mut covered = true;
            for k in 0..groups.len() {
                if k != i
                    && k != j
                    && groups[i].len() < groups[k].len()
                    && groups[k].len() < groups[j].len()
                    && contains(i, k)
                    && contains(k, j)
                {
                    covered = false;
                    break;
                }
            }
            if covered {
                edges.push((i, j));
            }
        }
    }
    let count = supergroups.len();
    Ok(LatticeReport {
        base: g.clone(),
        supergroups,
        count,
        edges,
    })
}

/// DOT rendering of the Hasse diagram; nodes are labeled by group order.
pub fn lattice_dot(report: &LatticeReport) -> String {
    let mut out = String::from("digraph lattice {\n");
    for (i, g) in report.supergroups.iter().enumerate() {
        let order = g.elements().map(|e| e.len()).unwrap_or(0);
        out.push_str(&format!("  g{i} [label=\"order {order}\"];\n"));
    }
    for (i, j) in &report.edges {
        out.push_str(&format!("  g{i} -> g{j};\n"));
    }
    out.push_str("}\n");
    out
}

/// The number of groups above the automorphism group of a finite structure:
/// the finite-domain oracle for counting reducts up to interdefinability.
pub fn reduct_count(a: &RelStruct) -> Result<usize> {
    Ok(intermediate_groups(&aut_group(a)?)?.count)
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthMonotonicityReport {
    /// Width surrogate per lattice member, indexed like the lattice report.
    pub widths: Vec<u64>,
    /// Width never increases along any upward edge.
    pub monotone: bool,
    /// Histogram over (rank surrogate, width) pairs.
    pub histogram: BTreeMap<(usize, u64), usize>,
    pub lattice: LatticeReport,
}

/// Computes the width surrogate of every group in the lattice above `g` and
/// asserts monotonicity along every cover edge.
pub fn width_monotonicity_report(g: &FinPermGroup) -> Result<WidthMonotonicityReport> {
    let lattice = intermediate_groups(g)?;
    let mut widths = Vec::with_capacity(lattice.count);
    let mut histogram: BTreeMap<(usize, u64), usize> = BTreeMap::new();
    for member in &lattice.supergroups {
        let e = GroupExpr::Finite(member.clone());
        let report = crate::analysis::width(&e, 2)?;
        let rank = crate::expr::rank_upper(&e)?.rank_upper;
        *histogram.entry((rank, report.width)).or_default() += 1;
        widths.push(report.width);
    }
    let monotone = lattice
        .edges
        .iter()
        .all(|&(sub, sup)| widths[sub] >= widths[sup]);
    Ok(WidthMonotonicityReport {
        widths,
        monotone,
        histogram,
        lattice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::PointLabel;

    fn labels(names: &[&str]) -> Vec<PointLabel> {
        names.iter().map(|n| PointLabel::base(n)).collect()
    }

    #[test]
    fn lattice_over_trivial_on_three_points() {
        let g = FinPermGroup::trivial(labels(&["a", "b", "c"])).unwrap();
        let report = intermediate_groups(&g).unwrap();
        assert_eq!(report.count, 6);
        // Base and top are present.
        assert_eq!(report.supergroups.first().unwrap().order().unwrap(), 1);
        assert_eq!(report.supergroups.last().unwrap().order().unwrap(), 6);
    }

    #[test]
    fn lattice_over_three_cycle() {
        let g = FinPermGroup::cyclic(labels(&["a", "b", "c"])).unwrap();
        let report = intermediate_groups(&g).unwrap();
        assert_eq!(report.count, 2);
        assert_eq!(report.edges, vec![(0, 1)]);
    }

    #[test]
    fn lattice_over_full_symmetric_group() {
        let g = FinPermGroup::symmetric(labels(&["a", "b", "c", "d"])).unwrap();
        let report = intermediate_groups(&g).unwrap();
        assert_eq!(report.count, 1);
        assert!(report.edges.is_empty());
    }

    #[test]
    fn reduct_count_examples() {
        let pure3 = RelStruct::pure(&["a", "b", "c"]).unwrap();
        assert_eq!(reduct_count(&pure3).unwrap(), 1);

        let c3 = RelStruct::digraph(&["a", "b", "c"], "R", &[("a", "b"), ("b", "c"), ("c", "a")])
            .unwrap();
        assert_eq!(reduct_count(&c3).unwrap(), 2);

        // The 4-point equivalence: the count is read off the lattice of its
        // automorphism group, never asserted a priori.
        let eq4 =
            crate::structures::copies_trunc(&RelStruct::pure(&["x", "y"]).unwrap(), 2).unwrap();
        let lattice = intermediate_groups(&aut_group(&eq4).unwrap()).unwrap();
        assert_eq!(reduct_count(&eq4).unwrap(), lattice.count);
    }

    #[test]
    fn width_monotone_vacuous_on_single_group_lattice() {
        let g = FinPermGroup::symmetric(labels(&["a", "b", "c", "d"])).unwrap();
        let report = width_monotonicity_report(&g).unwrap();
        assert!(report.monotone);
        assert_eq!(report.widths.len(), 1);
    }

    #[test]
    fn width_monotone_on_small_lattices() {
        let g = FinPermGroup::trivial(labels(&["a", "b", "c"])).unwrap();
        let report = width_monotonicity_report(&g).unwrap();
        assert!(report.monotone);
        assert_eq!(report.widths.len(), 6);
    }

    #[test]
    fn lattice_deterministic_across_runs() {
        let g = FinPermGroup::cyclic(labels(&["a", "b", "c", "d"])).unwrap();
        let a = intermediate_groups(&g).unwrap();
        let b = intermediate_groups(&g).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
