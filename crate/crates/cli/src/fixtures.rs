//! Shared fixtures for the verify suite and the acceptance tests.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use hcell_core::expr::ConsData;
use hcell_core::structures::{copies_trunc, RelStruct};
use hcell_core::{FinPermGroup, Perm, PointLabel};

pub fn labels(names: &[&str]) -> Vec<PointLabel> {
    names.iter().map(|n| PointLabel::base(n)).collect()
}

pub fn sym(names: &[&str]) -> FinPermGroup {
    FinPermGroup::symmetric(labels(names)).expect("fixture group")
}

pub fn triv(names: &[&str]) -> FinPermGroup {
    FinPermGroup::trivial(labels(names)).expect("fixture group")
}

pub struct ConsFixture {
    pub name: &'static str,
    pub cons: ConsData,
    pub t: usize,
}

/// The block/copy fixtures exercised by the oracle-equivalence, index,
/// recovery, and base-action suites. Domains stay at or below 8 points so
/// the full symmetric group of the truncated domain can be swept.
pub fn cons_fixtures() -> Vec<ConsFixture> {
    let mut out = vec![ConsFixture {
        name: "trivial_core_sym2",
        cons: ConsData {
            y0: vec![],
            parts: vec![triv(&["a", "b"])],
            h: sym(&["a", "b"]),
        },
        t: 2,
    }];
    out.push(ConsFixture {
        name: "trivial_core_sym2_t3",
        cons: ConsData {
            y0: vec![],
            parts: vec![triv(&["a", "b"])],
            h: sym(&["a", "b"]),
        },
        t: 3,
    });
    out.push(ConsFixture {
        name: "full_core_sym2",
        cons: ConsData {
            y0: vec![],
            parts: vec![sym(&["a", "b"])],
            h: sym(&["a", "b"]),
        },
        t: 2,
    });
    out.push(ConsFixture {
        name: "fixed_point_block",
        cons: ConsData {
            y0: vec![PointLabel::base("z")],
            parts: vec![triv(&["a"])],
            h: triv(&["a", "z"]),
        },
        t: 3,
    });
    out.push(ConsFixture {
        name: "two_swappable_blocks",
        cons: ConsData {
            y0: vec![],
            parts: vec![triv(&["a"]), triv(&["b"])],
            h: sym(&["a", "b"]),
        },
        t: 3,
    });
    out.push(ConsFixture {
        name: "fixed_point_full_core",
        cons: ConsData {
            y0: vec![PointLabel::base("z")],
            parts: vec![sym(&["a", "b"])],
            // ⟨(a b)⟩ acting on {a, b, z}, fixing z.
            h: FinPermGroup::new(
                labels(&["a", "b", "z"]),
                vec![Perm::from_cycles(3, &[&[0, 1]]).expect("fixture perm")],
            )
            .expect("fixture group"),
        },
        t: 2,
    });
    out.push(ConsFixture {
        name: "two_blocks_dihedral",
        cons: ConsData {
            y0: vec![],
            parts: vec![triv(&["a", "b"]), triv(&["c", "d"])],
            h: FinPermGroup::new(
                labels(&["a", "b", "c", "d"]),
                vec![
                    Perm::from_cycles(4, &[&[0, 1]]).expect("fixture perm"),
                    Perm::from_cycles(4, &[&[2, 3]]).expect("fixture perm"),
                    Perm::from_cycles(4, &[&[0, 2], &[1, 3]]).expect("fixture perm"),
                ],
            )
            .expect("fixture group"),
        },
        t: 2,
    });
    out.push(ConsFixture {
        name: "cyclic_core_in_sym3",
        cons: ConsData {
            y0: vec![],
            parts: vec![FinPermGroup::cyclic(labels(&["a", "b", "c"])).expect("fixture group")],
            h: sym(&["a", "b", "c"]),
        },
        t: 2,
    });
    // Nonempty fixed part, nontrivial core, and a proper quotient at once:
    // h = Sym({a,b,c}) fixing z, core = id(z) × ⟨(a b c)⟩, index 2.
    out.push(ConsFixture {
        name: "fixed_point_cyclic_core",
        cons: ConsData {
            y0: vec![PointLabel::base("z")],
            parts: vec![FinPermGroup::cyclic(labels(&["a", "b", "c"])).expect("fixture group")],
            h: FinPermGroup::new(
                labels(&["a", "b", "c", "z"]),
                vec![
                    Perm::from_cycles(4, &[&[0, 1, 2]]).expect("fixture perm"),
                    Perm::from_cycles(4, &[&[0, 1]]).expect("fixture perm"),
                ],
            )
            .expect("fixture group"),
        },
        t: 2,
    });
    out
}

/// The core-only twin of a fixture: the base group shrunk to the core
/// id(Y0) × parts.
pub fn core_only(cons: &ConsData) -> ConsData {
    let refs: Vec<&FinPermGroup> = cons.parts.iter().collect();
    let n = FinPermGroup::product_padded(cons.h.domain(), &refs).expect("core group");
    ConsData {
        y0: cons.y0.clone(),
        parts: cons.parts.clone(),
        h: n,
    }
}

/// The 4-point equivalence structure with two classes of two.
pub fn equivalence_4() -> RelStruct {
    copies_trunc(&RelStruct::pure(&["x", "y"]).expect("fixture"), 2).expect("fixture")
}

/// The undirected n-cycle graph on vertices `n0..`.
pub fn cycle(n: usize) -> RelStruct {
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let owned: Vec<(String, String)> = (0..n)
        .map(|i| (format!("n{i}"), format!("n{}", (i + 1) % n)))
        .collect();
    let edges: Vec<(&str, &str)> = owned
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    RelStruct::graph(&refs, "R", &edges).expect("fixture")
}

/// The quadratic-residue tournament on 7 vertices: x → y iff y − x is a
/// nonzero square mod 7. Ten orbits on injective triples against eight
/// possible pair-orbit profiles, so the m = 2 projection check must fail.
pub fn paley_7() -> RelStruct {
    let names: Vec<String> = (0..7).map(|i| format!("v{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let owned: Vec<(String, String)> = (0..7usize)
        .flat_map(|x| [1usize, 2, 4].map(|d| (format!("v{x}"), format!("v{}", (x + d) % 7))))
        .collect();
    let arcs: Vec<(&str, &str)> = owned
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    RelStruct::digraph(&refs, "R", &arcs).expect("fixture")
}

/// A pure structure (equality only) on n points.
pub fn pure_struct(n: usize) -> RelStruct {
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    RelStruct::pure(&refs).expect("fixture")
}

/// The 4-point equivalence expanded by a unary marker on one class, plus its
/// equivalence reduct; the pair used by the expansion-merge checks.
pub fn marked_equivalence_pair() -> (RelStruct, RelStruct) {
    let base = equivalence_4();
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    rels.insert("E".into(), base.relation("E").expect("fixture").clone());
    rels.insert("M".into(), [vec![0], vec![1]].into_iter().collect());
    let full = RelStruct::new(
        base.domain().to_vec(),
        vec![("E".into(), 2), ("M".into(), 1)],
        rels,
    )
    .expect("fixture");
    let reduct = full.reduct(&["E"]).expect("fixture");
    (full, reduct)
}
