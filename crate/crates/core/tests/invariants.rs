//! Cross-module invariants checked against independent combinatorial
//! oracles: orbit counts of the nested-copies expressions against the Bell
//! and integer-partition recurrences, truncation label stability, and the
//! block/copy calculus on concrete fixtures.

use hcell_core::analysis::{self, DEFAULT_TUPLE_CAP};
use hcell_core::construct;
use hcell_core::expr::{ConsData, GroupExpr};
use hcell_core::{FinPermGroup, Partition, Perm, PointLabel};

fn labels(names: &[&str]) -> Vec<PointLabel> {
    names.iter().map(|n| PointLabel::base(n)).collect()
}

/// Bell numbers B(1)..B(n_max) via the Bell-triangle recurrence; the last
/// entry of row i is B(i+1).
fn bell_numbers(n_max: usize) -> Vec<u64> {
    let mut triangle = vec![vec![1u64]];
    for i in 1..n_max {
        let prev = &triangle[i - 1];
        let mut row = vec![*prev.last().unwrap()];
        for &above in prev {
            let last = *row.last().unwrap();
            row.push(last + above);
        }
        triangle.push(row);
    }
    triangle.iter().map(|row| *row.last().unwrap()).collect()
}

/// Integer partition counts via the classic recurrence
/// p(n, k) = p(n−k, k) + p(n, k−1).
fn partition_counts(n_max: usize) -> Vec<u64> {
    fn p(n: i64, k: i64) -> u64 {
        if n == 0 {
            return 1;
        }
        if n < 0 || k == 0 {
            return 0;
        }
        p(n - k, k) + p(n, k - 1)
    }
    (1..=n_max as i64).map(|n| p(n, n)).collect()
}

#[test]
fn pure_set_tuple_orbits_are_bell_numbers() {
    let profile = analysis::stable_profile(&GroupExpr::pure_set(), 4, DEFAULT_TUPLE_CAP).unwrap();
    let expected = bell_numbers(4);
    for (row, want) in profile.rows.iter().zip(expected) {
        assert_eq!(row.o, want, "tuple orbits at n = {}", row.n);
        assert_eq!(row.os, 1, "subset orbits at n = {}", row.n);
    }
}

#[test]
fn nested_copies_subset_orbits_are_partition_counts() {
    let profile =
        analysis::stable_profile(&GroupExpr::nested_copies(2), 4, DEFAULT_TUPLE_CAP).unwrap();
    let expected = partition_counts(4);
    for (row, want) in profile.rows.iter().zip(expected) {
        assert_eq!(row.os, want, "subset orbits at n = {}", row.n);
    }
}

#[test]
fn truncation_domains_embed_into_larger_sizes() {
    let exprs = vec![
        GroupExpr::pure_set(),
        GroupExpr::nested_copies(2),
        GroupExpr::DirectProduct(vec![
            GroupExpr::pure_set(),
            GroupExpr::Finite(FinPermGroup::symmetric(labels(&["a", "b"])).unwrap()),
        ]),
        GroupExpr::Cons(ConsData {
            y0: vec![PointLabel::base("z")],
            parts: vec![FinPermGroup::trivial(labels(&["a"])).unwrap()],
            h: FinPermGroup::trivial(labels(&["a", "z"])).unwrap(),
        }),
    ];
    for e in &exprs {
        for t in 1..=3usize {
            let (g_t, _) = construct::truncate(e, t).unwrap();
            let (g_t1, _) = construct::truncate(e, t + 1).unwrap();
            for l in g_t.domain() {
                assert!(
                    g_t1.domain().binary_search(l).is_ok(),
                    "label {l} vanished from t = {t} to t + 1"
                );
            }
        }
    }
}

#[test]
fn wreath_truncation_orders_follow_the_product_formula() {
    // |truncate(wr e, t)| = |truncate(e, t)|^t · t!.
    let inner = GroupExpr::nested_copies(1);
    for t in 1..=3usize {
        let (g_in, _) = construct::truncate(&inner, t).unwrap();
        let (g_out, _) =
            construct::truncate(&GroupExpr::WreathOmega(Box::new(inner.clone())), t).unwrap();
        let base = g_in.order().unwrap();
        let expected = base.pow(t as u32) * (1..=t).product::<usize>();
        assert_eq!(g_out.order().unwrap(), expected);
    }
}

#[test]
fn direct_product_truncation_merges_metas() {
    let e = GroupExpr::DirectProduct(vec![GroupExpr::pure_set(), GroupExpr::pure_set()]);
    let (g, meta) = construct::truncate(&e, 3).unwrap();
    assert_eq!(g.degree(), 6);
    assert_eq!(meta.block_count(), 2);
    assert_eq!(meta.nabla().class_count(), 2);
    assert_eq!(meta.delta().class_count(), 6);
    assert_eq!(g.order().unwrap(), 36);
    // Every element decomposes and reassembles.
    for sigma in g.elements().unwrap() {
        let d = construct::decompose(&sigma, &meta).unwrap();
        assert_eq!(construct::reassemble(&d, &meta).unwrap(), sigma);
    }
}

#[test]
fn mixed_product_truncation_recovers_its_base() {
    // A finite factor contributes only to the fixed part; the wreath factor
    // contributes one block. Base recovery gives the finite group times the
    // trivial action on the block's single base point.
    let e = GroupExpr::DirectProduct(vec![
        GroupExpr::Finite(FinPermGroup::symmetric(labels(&["a", "b"])).unwrap()),
        GroupExpr::pure_set(),
    ]);
    let (g, meta) = construct::truncate(&e, 3).unwrap();
    assert_eq!(meta.k_part().len(), 2);
    assert_eq!(meta.block_count(), 1);
    for sigma in g.elements().unwrap() {
        let d = construct::decompose(&sigma, &meta).unwrap();
        assert_eq!(construct::reassemble(&d, &meta).unwrap(), sigma);
    }
    let base = construct::recover_base(&g, &meta).unwrap();
    assert_eq!(base.order().unwrap(), 2);
    assert_eq!(base.degree(), 3);
}

#[test]
fn quotient_of_truncation_by_copy_classes_is_symmetric() {
    let (g, meta) = construct::truncate(&GroupExpr::nested_copies(2), 3).unwrap();
    let q = g.quotient_by_congruence(meta.delta()).unwrap();
    assert_eq!(q.degree(), 3);
    assert_eq!(q.order().unwrap(), 6);
}

#[test]
fn oversized_truncation_builds_but_enumeration_hits_the_budget() {
    // The two-level expression at t = 4 denotes a group of order
    // (4!)^4 · 4! ≈ 8·10^6. Building the truncation is generator-level work
    // and succeeds under any budget; enumerating it must report the budget.
    let mut e = GroupExpr::nested_copies(2);
    hcell_core::expr::set_caps(&mut e, 10_000);
    let (g, _) = construct::truncate(&e, 4).unwrap();
    assert_eq!(g.degree(), 16);
    assert!(matches!(
        g.order(),
        Err(hcell_core::Error::CapExceeded { .. })
    ));
}

#[test]
fn diagonal_extension_can_swap_blocks() {
    // Two singleton blocks with trivial cores; τ = (a b) swaps them. The
    // extension of the core truncation by τ* is exactly the truncation of
    // the block-swapping expression.
    let swap_cons = ConsData {
        y0: vec![],
        parts: vec![
            FinPermGroup::trivial(labels(&["a"])).unwrap(),
            FinPermGroup::trivial(labels(&["b"])).unwrap(),
        ],
        h: FinPermGroup::symmetric(labels(&["a", "b"])).unwrap(),
    };
    let core = ConsData {
        y0: vec![],
        parts: swap_cons.parts.clone(),
        h: FinPermGroup::trivial(labels(&["a", "b"])).unwrap(),
    };
    let (g_full, _) = construct::truncate_cons(&swap_cons, 3).unwrap();
    let (g_core, meta) = construct::truncate_cons(&core, 3).unwrap();
    let tau = Perm::from_cycles(2, &[&[0, 1]]).unwrap();
    let extended = construct::diagonal_extend(&g_core, &meta, &tau).unwrap();
    assert!(extended.same_element_set(&g_full).unwrap());
}

#[test]
fn partition_search_includes_canonical_on_fixed_point_fixture() {
    // A fixture with a nonempty fixed part: the search must report the
    // canonical triple (K = the fixed point, one block, t copy classes).
    let cons = ConsData {
        y0: vec![PointLabel::base("z")],
        parts: vec![FinPermGroup::cyclic(labels(&["a", "b", "c"])).unwrap()],
        h: FinPermGroup::new(
            labels(&["a", "b", "c", "z"]),
            vec![
                Perm::from_cycles(4, &[&[0, 1, 2]]).unwrap(),
                Perm::from_cycles(4, &[&[0, 1]]).unwrap(),
            ],
        )
        .unwrap(),
    };
    let (g, meta) = construct::truncate_cons(&cons, 2).unwrap();
    let reports = analysis::omega_partition_find(&g, meta.t()).unwrap();
    let canonical = reports.iter().any(|r| {
        r.candidate.k_part.len() == 1
            && r.candidate.nabla_classes.len() == 1
            && r.candidate.delta_classes.len() == 2
    });
    assert!(
        canonical,
        "canonical triple missing from {} reports",
        reports.len()
    );
}

#[test]
fn diagonal_extension_reaches_the_full_truncation() {
    // Rebuilding the order-4 fixture from its core plus one diagonal.
    let cons = ConsData {
        y0: vec![],
        parts: vec![FinPermGroup::trivial(labels(&["a", "b"])).unwrap()],
        h: FinPermGroup::symmetric(labels(&["a", "b"])).unwrap(),
    };
    let core = ConsData {
        y0: cons.y0.clone(),
        parts: cons.parts.clone(),
        h: FinPermGroup::trivial(labels(&["a", "b"])).unwrap(),
    };
    let (g_full, _) = construct::truncate_cons(&cons, 2).unwrap();
    let (g_core, meta) = construct::truncate_cons(&core, 2).unwrap();
    let tau = Perm::from_cycles(2, &[&[0, 1]]).unwrap();
    let extended = construct::diagonal_extend(&g_core, &meta, &tau).unwrap();
    assert!(extended.same_element_set(&g_full).unwrap());
}

#[test]
fn estar_lift_is_a_congruence_of_the_point_stabilizer() {
    let cons = ConsData {
        y0: vec![],
        parts: vec![FinPermGroup::cyclic(labels(&["a", "b", "c"])).unwrap()],
        h: FinPermGroup::symmetric(labels(&["a", "b", "c"])).unwrap(),
    };
    let (g, meta) = construct::truncate_cons(&cons, 2).unwrap();
    let x = PointLabel::base("a");
    // E = {{a}, {b, c}} on the block: a congruence of the stabilizer of a.
    let e = Partition::from_classes(3, &[vec![0], vec![1, 2]]).unwrap();
    let estar = analysis::lift_congruence_estar(&cons, &meta, 1, &x, &e).unwrap();
    let x0 = g.domain()[meta.point_at(&x, 0).unwrap()].clone();
    let stab = g
        .stabilizer(&[x0], hcell_core::StabMode::Pointwise)
        .unwrap();
    assert!(analysis::is_congruence(&stab, &estar));
    // Classes: {a0}, {b0,c0}, and the copy-1 class of the block.
    let mut sizes: Vec<usize> = estar.classes().iter().map(|c| c.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 2, 3]);
}
