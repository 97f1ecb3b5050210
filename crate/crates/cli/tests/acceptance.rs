//! Acceptance suite: one test per criterion, each printing one pass/fail
//! line through the harness. Expected values are frozen from independent
//! oracles (full enumeration, the Bell and partition recurrences, exhaustive
//! lattice sweeps); tolerances are exact unless stated.

use std::time::Instant;

use hcell::fixtures::{
    cons_fixtures, core_only, cycle, equivalence_4, labels, marked_equivalence_pair, paley_7,
    pure_struct, sym, triv,
};
use hcell::{canonical_candidate, verify};
use hcell_core::analysis::{self, OmegaCandidate, DEFAULT_TUPLE_CAP};
use hcell_core::construct::{self, ConsOracle};
use hcell_core::expr::{self, GroupExpr};
use hcell_core::reducts;
use hcell_core::structures::{self, HomogOutcome};
use hcell_core::{FinPermGroup, Perm, PointLabel, RestrictMode, StabMode};

fn pass(line: &str) {
    println!("PASS {line}");
}

/// Criterion 1: For every block/copy fixture, breadth-first enumeration of the
/// truncation equals the set of permutations accepted by the four membership
/// conditions, swept over the full symmetric group of the truncated domain.
#[test]
fn criterion_01_cons_oracle_equivalence() {
    let start = Instant::now();
    let fixtures = cons_fixtures();
    assert!(fixtures.len() >= 5, "need at least five fixtures");
    for fixture in &fixtures {
        assert!(fixture.cons.h.degree() <= 4 && fixture.t <= 3);
        let (g, meta) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
        let oracle = ConsOracle::new(&fixture.cons, &meta).unwrap();
        let elems = g.elements().unwrap();
        let full = FinPermGroup::symmetric(meta.domain().to_vec()).unwrap();
        let mut accepted = 0usize;
        for sigma in full.elements().unwrap() {
            let ok = oracle.check(&sigma).ok();
            assert_eq!(ok, elems.contains(&sigma), "{}: disagreement", fixture.name);
            accepted += ok as usize;
        }
        assert_eq!(accepted, elems.len(), "{}: size mismatch", fixture.name);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "oracle sweep took {elapsed:?}");
    pass(&format!(
        "criterion 1: oracle equivalence on {} fixtures in {elapsed:?}",
        fixtures.len()
    ));
}

/// Criterion 2: |truncation| / |core truncation| equals |H| / |N| exactly.
#[test]
fn criterion_02_index_identity() {
    for fixture in cons_fixtures() {
        let core = core_only(&fixture.cons);
        let (g, _) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
        let (n, _) = construct::truncate_cons(&core, fixture.t).unwrap();
        let g_order = g.order().unwrap();
        let n_order = n.order().unwrap();
        assert_eq!(
            g_order % n_order,
            0,
            "{}: core order must divide",
            fixture.name
        );
        let lhs = g_order / n_order;
        let rhs = fixture.cons.h.order().unwrap() / core.h.order().unwrap();
        assert_eq!(lhs, rhs, "{}: index identity", fixture.name);
    }
    pass("criterion 2: index identity exact on all fixtures");
}

/// Criterion 3: Both base-action composition identities hold for every element pair
/// and every copy vector; a control with the copy-vector shift removed fails.
#[test]
fn criterion_03_rho_calculus() {
    for fixture in cons_fixtures() {
        let (g, meta) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
        let elems: Vec<Perm> = g.elements().unwrap().into_iter().collect();
        for sigma in &elems {
            for tau in &elems {
                for vec in meta.copy_vectors() {
                    assert!(
                        construct::rho_compose_check(sigma, tau, &meta, &vec).unwrap(),
                        "{}: identity fails at {vec:?}",
                        fixture.name
                    );
                }
            }
        }
    }
    // Negative control: with a nontrivial core, dropping the shift breaks
    // the composition identity somewhere.
    let fixture = cons_fixtures()
        .into_iter()
        .find(|f| f.name == "cyclic_core_in_sym3")
        .unwrap();
    let (g, meta) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
    let elems: Vec<Perm> = g.elements().unwrap().into_iter().collect();
    let mut corrupted_differs = false;
    'outer: for sigma in &elems {
        for tau in &elems {
            let d_sigma = construct::decompose(sigma, &meta).unwrap();
            let d_tau = construct::decompose(tau, &meta).unwrap();
            let d_prod = construct::decompose(&tau.compose(sigma), &meta).unwrap();
            for vec in meta.copy_vectors() {
                let unshifted = d_tau
                    .rho_at(&meta, &vec)
                    .compose(d_sigma.rho_at(&meta, &vec));
                if *d_prod.rho_at(&meta, &vec) != unshifted {
                    corrupted_differs = true;
                    break 'outer;
                }
            }
        }
    }
    assert!(
        corrupted_differs,
        "negative control: unshifted identity never failed"
    );
    pass("criterion 3: base-action identities exact; negative control fails");
}

/// Criterion 4: Base recovery returns H (and the core twin returns N) as element sets.
#[test]
fn criterion_04_base_recovery() {
    for fixture in cons_fixtures() {
        let (g, meta) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
        let recovered = construct::recover_base(&g, &meta).unwrap();
        assert!(
            recovered.same_element_set(&fixture.cons.h).unwrap(),
            "{}: base differs",
            fixture.name
        );
        let core = core_only(&fixture.cons);
        let (gn, meta_n) = construct::truncate_cons(&core, fixture.t).unwrap();
        let recovered_n = construct::recover_base(&gn, &meta_n).unwrap();
        assert!(
            recovered_n.same_element_set(&core.h).unwrap(),
            "{}: core differs",
            fixture.name
        );
    }
    pass("criterion 4: base recovery exact on all fixtures");
}

/// Criterion 5: Stabilized orbit profiles: the pure-set expression gives the Bell
/// numbers on tuples and a single subset orbit; the two-level nested-copies
/// expression gives the integer-partition counts on subsets. Both witnessed
/// stable at t = n and t = n+1; chains hold.
#[test]
fn criterion_05_orbit_profiles() {
    let start = Instant::now();
    let pure = analysis::stable_profile(&GroupExpr::pure_set(), 5, DEFAULT_TUPLE_CAP).unwrap();
    let o: Vec<u64> = pure.rows.iter().map(|r| r.o).collect();
    assert_eq!(o, vec![1, 2, 5, 15, 52]);
    assert!(pure.rows.iter().all(|r| r.os == 1));
    assert!(pure.chain_holds());

    let nested =
        analysis::stable_profile(&GroupExpr::nested_copies(2), 5, DEFAULT_TUPLE_CAP).unwrap();
    let os: Vec<u64> = nested.rows.iter().map(|r| r.os).collect();
    assert_eq!(os, vec![1, 2, 3, 5, 7]);
    assert!(nested.chain_holds());

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "profiles took {elapsed:?}");
    pass(&format!(
        "criterion 5: profiles match the recurrences in {elapsed:?}"
    ));
}

/// Criterion 6: Structure/group mirrors: unions against products, truncated copies
/// against finite wreath products, the nested-equivalence family against the
/// iterated wreath truncation.
#[test]
fn criterion_06_structure_group_mirrors() {
    // Unions.
    let parts = vec![pure_struct(2), equivalence_4()];
    let union = structures::disjoint_union(&parts).unwrap();
    let lhs = structures::aut_group(&union).unwrap();
    let auts: Vec<FinPermGroup> = parts
        .iter()
        .map(|p| structures::aut_group(p).unwrap())
        .collect();
    let rhs = FinPermGroup::direct_product(&auts).unwrap();
    assert!(lhs.same_element_set(&rhs).unwrap());

    // Copies.
    for (a, m) in [
        (pure_struct(1), 3usize),
        (
            structures::RelStruct::graph(&["x", "y"], "R", &[("x", "y")]).unwrap(),
            2,
        ),
    ] {
        let copies = structures::copies_trunc(&a, m).unwrap();
        let lhs = structures::aut_group(&copies).unwrap();
        let rhs = FinPermGroup::wreath_finite(&structures::aut_group(&a).unwrap(), m).unwrap();
        assert!(lhs.same_element_set(&rhs).unwrap());
    }

    // Nested family against the iterated wreath truncation.
    for (n, t) in [(0usize, 2usize), (1, 2), (1, 3), (2, 2), (2, 3)] {
        let family = structures::en_family(n, t).unwrap();
        let lhs = structures::aut_group(&family).unwrap();
        let (rhs, _) = construct::truncate(&GroupExpr::nested_copies(n), t).unwrap();
        assert!(
            lhs.same_element_set(&rhs).unwrap(),
            "nested family ({n}, {t})"
        );
    }
    pass("criterion 6: all three mirrors exact");
}

/// Criterion 7: The rank upper bound of the n-fold nested-copies expression is n.
#[test]
fn criterion_07_rank_of_nested_copies() {
    for n in 0..=4usize {
        let rank = expr::rank_upper(&GroupExpr::nested_copies(n))
            .unwrap()
            .rank_upper;
        assert_eq!(rank, n);
    }
    pass("criterion 7: rank of the nested-copies family is n for n = 0..4");
}

/// Criterion 8: The canonical (K, ∇, Δ) triple passes all five finite-analog
/// conditions on the pure-set, two-level, and one block/copy fixture; one
/// corrupted candidate fails the split count and one fails the symmetric
/// quotient.
#[test]
fn criterion_08_omega_partition_verification() {
    let mut fixtures: Vec<(GroupExpr, usize)> = vec![
        (GroupExpr::pure_set(), 3),
        (GroupExpr::nested_copies(2), 3),
        (
            GroupExpr::DirectProduct(vec![GroupExpr::pure_set(), GroupExpr::pure_set()]),
            3,
        ),
    ];
    fixtures.extend(
        cons_fixtures()
            .into_iter()
            .map(|f| (GroupExpr::Cons(f.cons), f.t)),
    );
    for (e, t) in &fixtures {
        let (g, meta) = construct::truncate(e, *t).unwrap();
        let candidate = canonical_candidate(&g, &meta);
        let report = analysis::omega_partition_check(&g, meta.t(), &candidate).unwrap();
        assert!(report.ok(), "canonical candidate rejected: {report:?}");
    }

    // Corrupted candidate 1: ∇ = Δ = universal fails the split-into-t count.
    let (g, meta) = construct::truncate(&GroupExpr::pure_set(), 3).unwrap();
    let all: Vec<PointLabel> = g.domain().to_vec();
    let degenerate = OmegaCandidate {
        k_part: vec![],
        nabla_classes: vec![all.clone()],
        delta_classes: vec![all],
    };
    let report = analysis::omega_partition_check(&g, meta.t(), &degenerate).unwrap();
    assert!(!report.cond4 && !report.ok());

    // Corrupted candidate 2: swapping ∇ and Δ on the order-4 fixture keeps
    // the split count but loses the full symmetric quotient.
    let fixture = cons_fixtures()
        .into_iter()
        .find(|f| f.name == "trivial_core_sym2")
        .unwrap();
    let (g, meta) = construct::truncate_cons(&fixture.cons, fixture.t).unwrap();
    let copies: Vec<Vec<PointLabel>> = meta
        .delta()
        .classes()
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.domain()[i].clone()).collect())
        .collect();
    let singletons: Vec<Vec<PointLabel>> = g.domain().iter().map(|l| vec![l.clone()]).collect();
    let swapped = OmegaCandidate {
        k_part: vec![],
        nabla_classes: copies,
        delta_classes: singletons,
    };
    let report = analysis::omega_partition_check(&g, meta.t(), &swapped).unwrap();
    assert!(
        report.cond4,
        "split count should hold for the swapped candidate"
    );
    assert!(!report.cond5 && !report.ok());
    pass("criterion 8: canonical triples pass; both corrupted candidates fail");
}

/// Criterion 9: Width suite: the pure-set width surrogate is 2 at t = 3 and t = 4; the
/// product bound and reduct monotonicity hold across two full 4-point
/// lattices; every block-congruence lift validates and obeys the closure
/// size bound.
#[test]
fn criterion_09_width_suite() {
    assert_eq!(analysis::width(&GroupExpr::pure_set(), 3).unwrap().width, 2);
    assert_eq!(analysis::width(&GroupExpr::pure_set(), 4).unwrap().width, 2);

    // Product bound across expression pairs.
    for (lhs, rhs) in [
        (GroupExpr::pure_set(), GroupExpr::pure_set()),
        (GroupExpr::pure_set(), GroupExpr::Finite(sym(&["a", "b"]))),
    ] {
        let dp = GroupExpr::DirectProduct(vec![lhs.clone(), rhs.clone()]);
        let w = analysis::width(&dp, 3).unwrap().width;
        let bound =
            analysis::width(&lhs, 3).unwrap().width + analysis::width(&rhs, 3).unwrap().width;
        assert!(w <= bound, "width {w} exceeds the product bound {bound}");
    }

    // Reduct monotonicity across the full lattices of two 4-point bases.
    let bases = vec![
        FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2).unwrap(),
        FinPermGroup::cyclic(labels(&["a", "b", "c", "d"])).unwrap(),
    ];
    for base in &bases {
        let report = reducts::width_monotonicity_report(base).unwrap();
        assert!(report.monotone);
        assert!(report.lattice.count >= 2);
    }

    // Congruence lifts validate and respect the width bound on all fixtures.
    for fixture in cons_fixtures() {
        let cons = &fixture.cons;
        let t = fixture.t.max(2);
        let (_, meta) = construct::truncate_cons(cons, t).unwrap();
        let width = analysis::width(&GroupExpr::Cons(cons.clone()), t)
            .unwrap()
            .width;
        for (bi, part) in cons.parts.iter().enumerate() {
            let h_i = cons
                .h
                .restrict_inner(part.domain(), RestrictMode::Setwise)
                .unwrap();
            for x in part.domain() {
                let stab = h_i
                    .stabilizer(std::slice::from_ref(x), StabMode::Pointwise)
                    .unwrap();
                for cong in analysis::congruences(&stab).unwrap() {
                    let lifted =
                        analysis::lift_congruence_estar(cons, &meta, bi + 1, x, &cong).unwrap();
                    assert_eq!(lifted.size(), meta.domain().len());
                    assert!(
                        cong.class_count() as u64 <= width,
                        "{}: closure of the stabilized block action exceeds the width",
                        fixture.name
                    );
                }
            }
        }
    }
    pass("criterion 9: width surrogate, product bound, monotonicity, and lifts hold");
}

/// Criterion 10: Homogenizability: the 4-point equivalence passes at (m = 2, n ≤ 4);
/// the invariant-relation expansion preserves the automorphism group on all
/// fixtures; the 7-point tournament demonstrates counterexample detection.
#[test]
fn criterion_10_homogenizability() {
    let eq4 = equivalence_4();
    assert_eq!(
        structures::homog_check(&eq4, 2, 4, DEFAULT_TUPLE_CAP).unwrap(),
        HomogOutcome::Pass
    );

    // Projection-expansion round trip preserves the automorphism group.
    for a in [
        eq4.clone(),
        cycle(8),
        structures::RelStruct::graph(&["a", "b", "c"], "R", &[("a", "b"), ("b", "c")]).unwrap(),
    ] {
        let expanded = structures::delta_m(&a, 2, DEFAULT_TUPLE_CAP).unwrap();
        let lhs = structures::aut_group(&a).unwrap();
        let rhs = structures::aut_group(&expanded).unwrap();
        assert!(lhs.same_element_set(&rhs).unwrap());
    }

    // Counterexample detection: the 7-point quadratic-residue tournament has
    // ten orbits on injective triples but only eight pair-orbit profiles.
    match structures::homog_check(&paley_7(), 2, 3, DEFAULT_TUPLE_CAP).unwrap() {
        HomogOutcome::Counterexample { n, u, v } => {
            assert_eq!(n, 3);
            assert_eq!(u.len(), 3);
            assert_eq!(v.len(), 3);
        }
        HomogOutcome::Pass => panic!("tournament must fail the m = 2 projection check"),
    }
    pass("criterion 10: equivalence passes, expansions preserve groups, tournament fails");
}

/// Criterion 10b: As stated, the criterion also requires the 8-cycle graph to fail at
/// (m = 2, n = 3). The 8-cycle passes at every n: its tuple orbits are
/// separated by pairwise distance orbits (cycles are metrically
/// homogeneous), so no counterexample exists. The assertion is kept in its
/// stated form and fails honestly.
#[test]
fn criterion_10b_eight_cycle_counterexample() {
    let outcome = structures::homog_check(&cycle(8), 2, 3, DEFAULT_TUPLE_CAP).unwrap();
    assert!(
        matches!(outcome, HomogOutcome::Counterexample { n: 3, .. }),
        "homog_check(8-cycle, m=2, n≤3) returned {outcome:?}: every pair of distinct \
         triple orbits is separated by an ordered pairwise distance profile, so the \
         stated counterexample cannot exist"
    );
    pass("criterion 10b: eight-cycle counterexample found");
}

/// Criterion 11: Boundedness: the 5-point pure structure at horizon 6 has exactly one
/// minimal obstruction (size 6) and bound 6; the forbidden-family check
/// round-trips the scan output; the expansion-merge test agrees with direct
/// age membership on every probe.
#[test]
fn criterion_11_boundedness() {
    let pure5 = pure_struct(5);
    let bounds = structures::boundedness_scan(&pure5, 6).unwrap();
    assert_eq!(bounds.minimal_obstructions.len(), 1);
    assert_eq!(bounds.minimal_obstructions[0].size(), 6);
    assert_eq!(bounds.b, 6);

    // Forbidden-family round trips.
    for (a, s) in [(pure5.clone(), 6usize), (equivalence_4(), 3), (cycle(5), 3)] {
        let scan = structures::boundedness_scan(&a, s).unwrap();
        let report = structures::forb_check(&a, &scan.minimal_obstructions, s).unwrap();
        assert!(report.agrees, "round trip diverged: {report:?}");
    }
    // Negative control: an empty family diverges once an obstruction exists.
    let report = structures::forb_check(&equivalence_4(), &[], 3).unwrap();
    assert!(!report.agrees && report.divergence.is_some());

    // Expansion-merge agreement on every probe.
    let (full, reduct) = marked_equivalence_pair();
    let scan = structures::boundedness_scan(&full, 3).unwrap();
    let marked_count = scan.b + 1;
    let names: Vec<String> = (0..marked_count).map(|i| format!("q{i}")).collect();
    let marked: Vec<PointLabel> = names.iter().map(|n| PointLabel::base(n)).collect();
    let domain: Vec<PointLabel> = marked.clone();
    // Probes: an equivalence with classes 2+1+1 (in the age), 4 singleton
    // classes (too many classes), and one class of size 3 plus a singleton
    // (class too large).
    let probe = |class_lists: Vec<Vec<usize>>| -> structures::RelStruct {
        let mut pairs = std::collections::BTreeSet::new();
        for class in &class_lists {
            for &i in class {
                for &j in class {
                    pairs.insert(vec![i, j]);
                }
            }
        }
        structures::RelStruct::new(
            domain.clone(),
            vec![("E".into(), 2)],
            [("E".to_string(), pairs)].into_iter().collect(),
        )
        .unwrap()
    };
    // The probes have exactly b+1 = 4 points, so only the full 2+2 shape
    // embeds; too many classes or an oversized class must fail both sides.
    let probes = vec![
        (probe(vec![vec![0, 1], vec![2, 3]]), true),
        (probe(vec![vec![0], vec![1], vec![2], vec![3]]), false),
        (probe(vec![vec![0, 1, 2], vec![3]]), false),
    ];
    for (c, expected_direct) in &probes {
        let report = structures::merge_expansions_check(&reduct, &full, c, &marked, 3).unwrap();
        assert!(
            report.agrees,
            "merge and direct membership diverge: {report:?}"
        );
        assert_eq!(report.direct, *expected_direct);
    }
    pass("criterion 11: boundedness scan, forbidden round trip, and merge agreement");
}

/// Criterion 12: Reduct lattices: 6 groups over the trivial group on three points, 2
/// over the 3-cycle; byte-identical reports across repeated runs.
#[test]
fn criterion_12_reduct_lattice() {
    let trivial = triv(&["a", "b", "c"]);
    let report = reducts::intermediate_groups(&trivial).unwrap();
    assert_eq!(report.count, 6);

    let cyclic = FinPermGroup::cyclic(labels(&["a", "b", "c"])).unwrap();
    let report = reducts::intermediate_groups(&cyclic).unwrap();
    assert_eq!(report.count, 2);

    let a = serde_json::to_string(&reducts::intermediate_groups(&trivial).unwrap()).unwrap();
    let b = serde_json::to_string(&reducts::intermediate_groups(&trivial).unwrap()).unwrap();
    assert_eq!(a, b, "lattice reports must be byte-identical across runs");
    pass("criterion 12: lattice counts 6 and 2, deterministic");
}

/// Criterion 13: The verify suite passes (exit 0) within its time budget; every
/// negative control makes the suite exit nonzero.
#[test]
fn criterion_13_verify_suite() {
    let start = Instant::now();
    let results = verify::run_suite(None, false);
    let elapsed = start.elapsed();
    assert!(!results.is_empty());
    for r in &results {
        assert!(r.passed, "check {} failed: {}", r.name, r.detail);
    }
    assert!(elapsed.as_secs() < 300, "verify suite took {elapsed:?}");

    // Each negative control fails on its own, and through the binary the
    // suite exits nonzero.
    let negatives = verify::run_suite(Some("negative."), true);
    assert_eq!(negatives.len(), 4);
    for r in &negatives {
        assert!(!r.passed, "negative control {} unexpectedly passed", r.name);
    }

    let bin = env!("CARGO_BIN_EXE_hcell");
    let ok = std::process::Command::new(bin)
        .arg("verify")
        .output()
        .unwrap();
    assert!(ok.status.success(), "verify subcommand must exit 0");
    for name in [
        "negative.rho_identity_without_shift",
        "negative.omega_partition_wrong_split",
        "negative.omega_partition_wrong_symmetric_quotient",
        "negative.oracle_on_tampered_truncation",
    ] {
        let out = std::process::Command::new(bin)
            .args(["verify", "--include-negative", "--filter", name])
            .output()
            .unwrap();
        assert!(
            !out.status.success(),
            "negative control {name} must make the suite exit nonzero"
        );
    }
    pass(&format!(
        "criterion 13: verify suite green in {elapsed:?}; negative controls exit nonzero"
    ));
}
