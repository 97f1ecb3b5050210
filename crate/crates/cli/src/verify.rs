//! The named invariant checks: each module invariant runs as exactly one
//! check over the shared fixtures. Negative controls are opt-in and fail by
//! construction, exercising the failure-detection paths end to end.

use std::time::Instant;

use serde::Serialize;

use hcell_core::analysis::{self, OmegaCandidate, DEFAULT_TUPLE_CAP};
use hcell_core::construct::{self, ConsOracle};
use hcell_core::expr::{self, ConsData, GroupExpr};
use hcell_core::reducts;
use hcell_core::structures::{self, HomogOutcome};
use hcell_core::{FinPermGroup, Partition, Perm, PointLabel, RestrictMode, StabMode};

use crate::fixtures::{cons_fixtures, core_only, equivalence_4, labels, pure_struct, sym, triv};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

type Check = (&'static str, fn() -> Result<String, String>);

fn e<T>(r: hcell_core::Result<T>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------------------
// permcore
// ---------------------------------------------------------------------------

fn closure_under_product_and_inverse() -> Result<String, String> {
    let groups = vec![
        sym(&["a", "b", "c"]),
        e(FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2))?,
        e(FinPermGroup::cyclic(labels(&["a", "b", "c", "d"])))?,
    ];
    for g in &groups {
        let elems = e(g.elements())?;
        ensure(
            elems.contains(&Perm::identity(g.degree())),
            "identity missing",
        )?;
        for a in &elems {
            ensure(
                elems.contains(&a.inverse()),
                format!("inverse of {a:?} missing"),
            )?;
            for b in &elems {
                ensure(
                    elems.contains(&a.compose(b)),
                    "product leaves the element set",
                )?;
            }
        }
    }
    Ok(format!("{} groups closed", groups.len()))
}

fn wreath_order_formula() -> Result<String, String> {
    let cases = vec![
        (sym(&["x", "y"]), 1usize),
        (sym(&["x", "y"]), 2),
        (sym(&["x", "y"]), 3),
        (sym(&["a", "b", "c"]), 2),
        (triv(&["p"]), 4),
    ];
    for (g, m) in &cases {
        let w = e(FinPermGroup::wreath_finite(g, *m))?;
        let base = e(g.order())?;
        let expected = base.pow(*m as u32) * (1..=*m).product::<usize>();
        let got = e(w.order())?;
        ensure(
            got == expected,
            format!("|{base}^{m} wreath| = {got}, expected {expected}"),
        )?;
    }
    Ok(format!("{} cases", cases.len()))
}

fn restrict_double_inside_single() -> Result<String, String> {
    let mut cases = 0;
    for fixture in cons_fixtures() {
        let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
        for class in meta.delta().classes() {
            let labels: Vec<PointLabel> = class.iter().map(|&i| g.domain()[i].clone()).collect();
            let double = e(g.restrict_inner(&labels, RestrictMode::PointwiseOutside))?;
            let single = e(g.restrict_inner(&labels, RestrictMode::Setwise))?;
            let single_elems = e(single.elements())?;
            for p in e(double.elements())? {
                ensure(
                    single_elems.contains(&p),
                    "double restriction leaves single",
                )?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} block classes"))
}

fn quotient_is_homomorphic() -> Result<String, String> {
    let w = e(FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2))?;
    let blocks = e(Partition::from_classes(4, &[vec![0, 1], vec![2, 3]]))?;
    let q = e(w.quotient_by_congruence(&blocks))?;
    // Compare the quotient of each generator pair product with the product
    // of the quotients.
    let induce = |p: &Perm| -> Result<Perm, String> {
        let classes = blocks.classes();
        let image: Vec<usize> = classes
            .iter()
            .map(|c| {
                let target = blocks.class_id(p.apply(c[0]));
                classes.iter().position(|d| d[0] == target).unwrap()
            })
            .collect();
        e(Perm::from_image(image))
    };
    for a in w.gens() {
        for b in w.gens() {
            let lhs = induce(&a.compose(b))?;
            let rhs = induce(a)?.compose(&induce(b)?);
            ensure(
                lhs == rhs,
                "quotient is not homomorphic on a generator pair",
            )?;
        }
    }
    ensure(e(q.order())? == 2, "block quotient should have order 2")?;
    Ok("generator pairs agree".into())
}

fn orbit_count_monotonicity() -> Result<String, String> {
    let s3 = sym(&["a", "b", "c"]);
    let a3 = e(FinPermGroup::cyclic(labels(&["a", "b", "c"])))?;
    let s4 = sym(&["p", "q", "r", "s"]);
    let d4 = e(FinPermGroup::new(
        labels(&["p", "q", "r", "s"]),
        vec![
            e(Perm::from_cycles(4, &[&[0, 1, 2, 3]]))?,
            e(Perm::from_cycles(4, &[&[0, 2]]))?,
        ],
    ))?;
    for (h, g) in [(a3, s3), (d4, s4)] {
        let rel = e(FinPermGroup::subgroup_relation(&h, &g))?;
        ensure(rel.is_subgroup, "fixture must be a subgroup")?;
        let ph = e(analysis::orbit_profile(&h, 3, DEFAULT_TUPLE_CAP))?;
        let pg = e(analysis::orbit_profile(&g, 3, DEFAULT_TUPLE_CAP))?;
        for (rh, rg) in ph.rows.iter().zip(pg.rows.iter()) {
            ensure(
                rg.o <= rh.o && rg.oi <= rh.oi && rg.os <= rh.os,
                format!("larger group has more orbits at n = {}", rh.n),
            )?;
        }
    }
    Ok("2 subgroup pairs".into())
}

// ---------------------------------------------------------------------------
// expr
// ---------------------------------------------------------------------------

fn rank_of_wreath_increments() -> Result<String, String> {
    let exprs = vec![
        GroupExpr::Finite(sym(&["a", "b", "c"])),
        GroupExpr::pure_set(),
        GroupExpr::nested_copies(2),
    ];
    for inner in exprs {
        let base = e(expr::rank_upper(&inner))?.rank_upper;
        let wrapped = e(expr::rank_upper(&GroupExpr::WreathOmega(Box::new(inner))))?.rank_upper;
        ensure(wrapped == base + 1, format!("rank {wrapped} != {base} + 1"))?;
    }
    Ok("3 expressions".into())
}

fn rank_of_product_is_max() -> Result<String, String> {
    let cases = vec![
        (
            vec![GroupExpr::pure_set(), GroupExpr::Finite(sym(&["a", "b"]))],
            1,
        ),
        (vec![GroupExpr::nested_copies(2), GroupExpr::pure_set()], 2),
        (
            vec![
                GroupExpr::Finite(sym(&["a", "b"])),
                GroupExpr::Finite(sym(&["x", "y"])),
            ],
            0,
        ),
    ];
    for (parts, expected) in cases {
        let got = e(expr::rank_upper(&GroupExpr::DirectProduct(parts)))?.rank_upper;
        ensure(
            got == expected,
            format!("product rank {got}, expected {expected}"),
        )?;
    }
    Ok("3 products".into())
}

fn validate_accepts_builders_rejects_corruptions() -> Result<String, String> {
    for fixture in cons_fixtures() {
        let violations = expr::validate(&GroupExpr::Cons(fixture.cons.clone()));
        ensure(
            violations.is_empty(),
            format!("{} rejected: {violations:?}", fixture.name),
        )?;
    }
    // Non-normal core.
    let bad_core = ConsData {
        y0: vec![],
        parts: vec![e(FinPermGroup::new(
            labels(&["a", "b", "c"]),
            vec![e(Perm::from_cycles(3, &[&[0, 1]]))?],
        ))?],
        h: sym(&["a", "b", "c"]),
    };
    ensure(
        !expr::validate(&GroupExpr::Cons(bad_core)).is_empty(),
        "non-normal core accepted",
    )?;
    // Base group moving the fixed part.
    let moves_y0 = ConsData {
        y0: vec![PointLabel::base("z")],
        parts: vec![triv(&["a"])],
        h: sym(&["a", "z"]),
    };
    ensure(
        !expr::validate(&GroupExpr::Cons(moves_y0)).is_empty(),
        "moved fixed part accepted",
    )?;
    // Overlapping domains.
    let overlap = ConsData {
        y0: vec![PointLabel::base("a")],
        parts: vec![triv(&["a", "b"])],
        h: triv(&["a", "b"]),
    };
    ensure(
        !expr::validate(&GroupExpr::Cons(overlap)).is_empty(),
        "overlapping domains accepted",
    )?;
    Ok("builders accepted, 3 corruptions rejected".into())
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

fn oracle_equivalence() -> Result<String, String> {
    let mut swept = 0usize;
    for fixture in cons_fixtures() {
        let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
        let oracle = e(ConsOracle::new(&fixture.cons, &meta))?;
        let elems = e(g.elements())?;
        let full = e(FinPermGroup::symmetric(meta.domain().to_vec()))?;
        for sigma in e(full.elements())? {
            let verdict = oracle.check(&sigma);
            ensure(
                verdict.ok() == elems.contains(&sigma),
                format!(
                    "{}: oracle and enumeration disagree at {sigma:?}",
                    fixture.name
                ),
            )?;
            swept += 1;
        }
    }
    Ok(format!("{swept} permutations swept"))
}

fn index_identity() -> Result<String, String> {
    for fixture in cons_fixtures() {
        let cons = &fixture.cons;
        let core = core_only(cons);
        let (g, _) = e(construct::truncate_cons(cons, fixture.t))?;
        let (n, _) = e(construct::truncate_cons(&core, fixture.t))?;
        let lhs = e(g.order())? / e(n.order())?;
        let rhs = e(cons.h.order())? / e(core.h.order())?;
        ensure(
            lhs == rhs,
            format!("{}: index {lhs} != |H|/|N| = {rhs}", fixture.name),
        )?;
    }
    Ok(format!("{} fixtures", cons_fixtures().len()))
}

fn base_recovery() -> Result<String, String> {
    for fixture in cons_fixtures() {
        let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
        let recovered = e(construct::recover_base(&g, &meta))?;
        ensure(
            e(recovered.same_element_set(&fixture.cons.h))?,
            format!("{}: recovered base differs from H", fixture.name),
        )?;
        let core = core_only(&fixture.cons);
        let (gn, meta_n) = e(construct::truncate_cons(&core, fixture.t))?;
        let recovered_n = e(construct::recover_base(&gn, &meta_n))?;
        ensure(
            e(recovered_n.same_element_set(&core.h))?,
            format!("{}: recovered core differs from N", fixture.name),
        )?;
    }
    Ok("base and core recovered on all fixtures".into())
}

fn decompose_reassemble_identity() -> Result<String, String> {
    let mut count = 0usize;
    for fixture in cons_fixtures() {
        let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
        for sigma in e(g.elements())? {
            let d = e(construct::decompose(&sigma, &meta))?;
            let back = e(construct::reassemble(&d, &meta))?;
            ensure(
                back == sigma,
                format!("{}: roundtrip broke {sigma:?}", fixture.name),
            )?;
            count += 1;
        }
    }
    Ok(format!("{count} elements"))
}

fn rho_product_identities() -> Result<String, String> {
    let mut checked = 0usize;
    for fixture in cons_fixtures() {
        let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
        let elems: Vec<Perm> = e(g.elements())?.into_iter().collect();
        for sigma in &elems {
            for tau in &elems {
                for vec in meta.copy_vectors() {
                    ensure(
                        e(construct::rho_compose_check(sigma, tau, &meta, &vec))?,
                        format!("{}: base-action identity fails", fixture.name),
                    )?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} triples"))
}

// ---------------------------------------------------------------------------
// analysis
// ---------------------------------------------------------------------------

fn profile_chain() -> Result<String, String> {
    // The full chain on stabilized profiles, where rows carry the counts of
    // the group the expression denotes; the lower chain on raw profiles.
    for (expr, n_max) in [
        (GroupExpr::pure_set(), 4usize),
        (GroupExpr::nested_copies(2), 3),
    ] {
        let p = e(analysis::stable_profile(&expr, n_max, DEFAULT_TUPLE_CAP))?;
        ensure(p.chain_holds(), "chain broken on a stabilized profile")?;
    }
    let p = e(analysis::orbit_profile(
        &sym(&["a", "b", "c", "d"]),
        3,
        DEFAULT_TUPLE_CAP,
    ))?;
    ensure(p.chain_holds(), "chain broken on the symmetric group")?;
    let raw = vec![
        (
            e(FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2))?,
            3usize,
        ),
        (triv(&["a", "b"]), 2),
    ];
    for (g, n_max) in &raw {
        let p = e(analysis::orbit_profile(g, *n_max, DEFAULT_TUPLE_CAP))?;
        ensure(
            p.lower_chain_holds(),
            "subset/injective/tuple ordering broken",
        )?;
    }
    Ok("chains hold".into())
}

fn orbit_monotonicity_on_expressions() -> Result<String, String> {
    let (g, _) = e(construct::truncate(&GroupExpr::pure_set(), 3))?;
    let sub = e(FinPermGroup::cyclic(g.domain().to_vec()))?;
    let rel = e(FinPermGroup::subgroup_relation(&sub, &g))?;
    ensure(
        rel.is_subgroup,
        "cyclic group must sit inside the truncation",
    )?;
    let pg = e(analysis::orbit_profile(&g, 3, DEFAULT_TUPLE_CAP))?;
    let ps = e(analysis::orbit_profile(&sub, 3, DEFAULT_TUPLE_CAP))?;
    for (rg, rs) in pg.rows.iter().zip(ps.rows.iter()) {
        ensure(
            rg.o <= rs.o && rg.oi <= rs.oi && rg.os <= rs.os,
            "monotonicity broken",
        )?;
    }
    Ok("truncation vs subgroup".into())
}

fn width_reduct_monotonicity() -> Result<String, String> {
    let bases = vec![
        e(FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2))?,
        e(FinPermGroup::cyclic(labels(&["a", "b", "c", "d"])))?,
    ];
    for base in &bases {
        let report = e(reducts::width_monotonicity_report(base))?;
        ensure(report.monotone, "width increased along a lattice edge")?;
    }
    Ok(format!("{} lattices monotone", bases.len()))
}

fn width_product_bound() -> Result<String, String> {
    let pairs = vec![
        (GroupExpr::pure_set(), GroupExpr::pure_set()),
        (GroupExpr::pure_set(), GroupExpr::Finite(sym(&["a", "b"]))),
        (
            GroupExpr::Finite(sym(&["a", "b"])),
            GroupExpr::Finite(triv(&["z"])),
        ),
    ];
    for (lhs, rhs) in &pairs {
        let dp = GroupExpr::DirectProduct(vec![lhs.clone(), rhs.clone()]);
        let w = e(analysis::width(&dp, 3))?.width;
        let wl = e(analysis::width(lhs, 3))?.width;
        let wr = e(analysis::width(rhs, 3))?.width;
        ensure(w <= wl + wr, format!("width {w} > {wl} + {wr}"))?;
    }
    Ok(format!("{} product pairs", pairs.len()))
}

fn core_subdirect_closure() -> Result<String, String> {
    for fixture in cons_fixtures() {
        let cons = &fixture.cons;
        // H* = ⟨H, ∏ H_(Yi)⟩ with the block restrictions padded back.
        let mut gens = cons.h.gens().to_vec();
        let mut parts_on_blocks = Vec::new();
        for part in &cons.parts {
            parts_on_blocks.push(e(cons
                .h
                .restrict_inner(part.domain(), RestrictMode::Setwise))?);
        }
        let refs: Vec<&FinPermGroup> = parts_on_blocks.iter().collect();
        let padded = e(FinPermGroup::product_padded(cons.h.domain(), &refs))?;
        gens.extend(padded.gens().iter().cloned());
        let h_star = e(FinPermGroup::new(cons.h.domain().to_vec(), gens))?;
        let core = core_only(cons).h;
        let rel = e(FinPermGroup::subgroup_relation(&core, &h_star))?;
        ensure(
            rel.is_subgroup && rel.is_normal,
            format!("{}: core not normal in H*", fixture.name),
        )?;
        ensure(rel.index.is_some(), "index must be finite")?;
    }
    Ok("core normal with finite index in H* on all fixtures".into())
}

fn congruences_join_closed_with_bounds() -> Result<String, String> {
    let groups = vec![
        sym(&["a", "b", "c"]),
        e(FinPermGroup::wreath_finite(&sym(&["x", "y"]), 2))?,
        triv(&["a", "b", "c"]),
    ];
    for g in &groups {
        let congs = e(analysis::congruences(g))?;
        let n = g.degree();
        ensure(congs.contains(&Partition::equality(n)), "equality missing")?;
        ensure(
            congs.contains(&Partition::universal(n)),
            "universal missing",
        )?;
        for a in &congs {
            for b in &congs {
                ensure(congs.contains(&a.join(b)), "join leaves the lattice")?;
            }
        }
    }
    Ok(format!("{} lattices", groups.len()))
}

fn estar_lift_and_acl_bound() -> Result<String, String> {
    let mut lifted = 0usize;
    for fixture in cons_fixtures() {
        let cons = &fixture.cons;
        let t = fixture.t.max(2);
        let (_, meta) = e(construct::truncate_cons(cons, t))?;
        let width = e(analysis::width(&GroupExpr::Cons(cons.clone()), t))?.width;
        for (bi, part) in cons.parts.iter().enumerate() {
            let block_i = bi + 1;
            let h_i = e(cons.h.restrict_inner(part.domain(), RestrictMode::Setwise))?;
            for x in part.domain() {
                let stab = e(h_i.stabilizer(std::slice::from_ref(x), StabMode::Pointwise))?;
                for cong in e(analysis::congruences(&stab))? {
                    let estar = e(analysis::lift_congruence_estar(
                        cons, &meta, block_i, x, &cong,
                    ))?;
                    ensure(estar.size() == meta.domain().len(), "lift has wrong size")?;
                    // The stabilized block quotient is finite, so its stable
                    // closure is its whole class set.
                    let acl = cong.class_count() as u64;
                    ensure(
                        acl <= width,
                        format!("{}: acl {acl} exceeds width {width}", fixture.name),
                    )?;
                    lifted += 1;
                }
            }
        }
    }
    Ok(format!("{lifted} lifts validated"))
}

// ---------------------------------------------------------------------------
// structures
// ---------------------------------------------------------------------------

fn union_aut_mirror() -> Result<String, String> {
    let cases: Vec<Vec<structures::RelStruct>> = vec![
        vec![pure_struct(2), pure_struct(2)],
        vec![
            e(structures::RelStruct::graph(
                &["a", "b", "c"],
                "R",
                &[("a", "b"), ("b", "c")],
            ))?,
            e(structures::RelStruct::graph(
                &["x", "y", "z"],
                "R",
                &[("x", "y"), ("y", "z"), ("x", "z")],
            ))?,
        ],
    ];
    for parts in &cases {
        let union = e(structures::disjoint_union(parts))?;
        let lhs = e(structures::aut_group(&union))?;
        let auts: Vec<FinPermGroup> = parts
            .iter()
            .map(|p| e(structures::aut_group(p)))
            .collect::<Result<_, _>>()?;
        let rhs = e(FinPermGroup::direct_product(&auts))?;
        ensure(
            e(lhs.same_element_set(&rhs))?,
            "union automorphisms differ from the product",
        )?;
    }
    Ok(format!("{} unions", cases.len()))
}

fn copies_aut_mirror() -> Result<String, String> {
    let cases = vec![
        (pure_struct(1), 3usize),
        (
            e(structures::RelStruct::graph(
                &["x", "y"],
                "R",
                &[("x", "y")],
            ))?,
            2,
        ),
        (
            e(structures::RelStruct::graph(
                &["a", "b", "c"],
                "R",
                &[("a", "b"), ("b", "c")],
            ))?,
            2,
        ),
    ];
    for (a, m) in &cases {
        let copies = e(structures::copies_trunc(a, *m))?;
        let lhs = e(structures::aut_group(&copies))?;
        let rhs = e(FinPermGroup::wreath_finite(
            &e(structures::aut_group(a))?,
            *m,
        ))?;
        ensure(
            e(lhs.same_element_set(&rhs))?,
            "copy automorphisms differ from the wreath",
        )?;
    }
    Ok(format!("{} copy structures", cases.len()))
}

fn nested_family_aut_mirror() -> Result<String, String> {
    for (n, t) in [(0usize, 2usize), (1, 3), (2, 2), (2, 3)] {
        let family = e(structures::en_family(n, t))?;
        let lhs = e(structures::aut_group(&family))?;
        let (rhs, _) = e(construct::truncate(&GroupExpr::nested_copies(n), t))?;
        ensure(
            e(lhs.same_element_set(&rhs))?,
            format!("nested family ({n}, {t}) differs from the wreath truncation"),
        )?;
    }
    Ok("4 (n, t) pairs".into())
}

fn homog_transfers_to_expansion() -> Result<String, String> {
    let a = equivalence_4();
    let base = e(structures::homog_check(&a, 2, 4, DEFAULT_TUPLE_CAP))?;
    ensure(base == HomogOutcome::Pass, "equivalence fixture must pass")?;
    let expanded = e(structures::delta_m(&a, 2, DEFAULT_TUPLE_CAP))?;
    let again = e(structures::homog_check(&expanded, 2, 4, DEFAULT_TUPLE_CAP))?;
    ensure(
        again == HomogOutcome::Pass,
        "expansion must stay homogenizable",
    )?;
    Ok("transfer holds".into())
}

fn finite_index_homogenization() -> Result<String, String> {
    // (A, B, d): Aut(B) ⊇ Aut(A) with index d.
    let c3 = e(structures::RelStruct::digraph(
        &["a", "b", "c"],
        "R",
        &[("a", "b"), ("b", "c"), ("c", "a")],
    ))?;
    let k3 = e(structures::RelStruct::graph(
        &["a", "b", "c"],
        "R",
        &[("a", "b"), ("b", "c"), ("a", "c")],
    ))?;
    let eq4 = equivalence_4();
    let pure4 = {
        let names: Vec<String> = eq4
            .domain()
            .iter()
            .map(|l| l.to_string().replace('/', "_"))
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        e(structures::RelStruct::pure(&refs))?
    };
    let cases = vec![(c3, k3, 2usize, 2usize, 3usize), (eq4, pure4, 3, 2, 4)];
    for (a, b, d, m, n_max) in &cases {
        let aut_a = e(structures::aut_group(a))?;
        let aut_b = e(structures::aut_group(b))?;
        let index = e(aut_b.order())? / e(aut_a.order())?;
        ensure(index == *d, format!("index is {index}, fixture says {d}"))?;
        ensure(
            e(structures::homog_check(a, *m, *n_max, DEFAULT_TUPLE_CAP))? == HomogOutcome::Pass,
            "base fixture must pass",
        )?;
        ensure(
            e(structures::homog_check(b, d * m, *n_max, DEFAULT_TUPLE_CAP))? == HomogOutcome::Pass,
            "reduct must pass at arity d·m",
        )?;
    }
    Ok(format!("{} reduct pairs", cases.len()))
}

fn type_count_bound() -> Result<String, String> {
    let c3 = e(structures::RelStruct::digraph(
        &["a", "b", "c"],
        "R",
        &[("a", "b"), ("b", "c"), ("c", "a")],
    ))?;
    let k3 = e(structures::RelStruct::graph(
        &["a", "b", "c"],
        "R",
        &[("a", "b"), ("b", "c"), ("a", "c")],
    ))?;
    let aut_a = e(structures::aut_group(&c3))?;
    let aut_b = e(structures::aut_group(&k3))?;
    let d = e(aut_b.order())? / e(aut_a.order())?;
    for n in 1..=3usize {
        let (ids_a, _) = e(structures::tuple_orbit_ids(&aut_a, n, DEFAULT_TUPLE_CAP))?;
        let (ids_b, _) = e(structures::tuple_orbit_ids(&aut_b, n, DEFAULT_TUPLE_CAP))?;
        let mut splits: std::collections::BTreeMap<u32, std::collections::BTreeSet<u32>> =
            Default::default();
        for (code, &b_id) in ids_b.iter().enumerate() {
            splits.entry(b_id).or_default().insert(ids_a[code]);
        }
        for (b_id, parts) in &splits {
            ensure(
                parts.len() <= d,
                format!(
                    "orbit {b_id} splits into {} > {d} parts at n = {n}",
                    parts.len()
                ),
            )?;
        }
    }
    Ok("orbit splits bounded by the index".into())
}

// ---------------------------------------------------------------------------
// reducts
// ---------------------------------------------------------------------------

fn lattice_members_closed() -> Result<String, String> {
    let base = triv(&["a", "b", "c"]);
    let report = e(reducts::intermediate_groups(&base))?;
    let base_elems = e(base.elements())?;
    for member in &report.supergroups {
        let elems = e(member.elements())?;
        for p in &base_elems {
            ensure(elems.contains(p), "member does not contain the base")?;
        }
        for a in &elems {
            ensure(
                elems.contains(&a.inverse()),
                "member not closed under inverse",
            )?;
            for b in &elems {
                ensure(
                    elems.contains(&a.compose(b)),
                    "member not closed under product",
                )?;
            }
        }
    }
    Ok(format!("{} members closed", report.count))
}

fn lattice_order_insensitive() -> Result<String, String> {
    // The same base group presented by different generating sets.
    let g1 = e(FinPermGroup::new(
        labels(&["a", "b", "c", "d"]),
        vec![e(Perm::from_cycles(4, &[&[0, 1, 2, 3]]))?],
    ))?;
    let g2 = e(FinPermGroup::new(
        labels(&["a", "b", "c", "d"]),
        vec![e(Perm::from_cycles(4, &[&[0, 3, 2, 1]]))?],
    ))?;
    let r1 = e(reducts::intermediate_groups(&g1))?;
    let r2 = e(reducts::intermediate_groups(&g2))?;
    let s1 = serde_json::to_string(&r1.supergroups).expect("serialize");
    let s2 = serde_json::to_string(&r2.supergroups).expect("serialize");
    ensure(s1 == s2, "different presentations gave different lattices")?;
    Ok(format!("{} groups either way", r1.count))
}

fn count_per_truncation_reported() -> Result<String, String> {
    let e2 = GroupExpr::pure_set();
    let (g2, _) = e(construct::truncate(&e2, 2))?;
    let (g3, _) = e(construct::truncate(&e2, 3))?;
    let c2 = e(reducts::intermediate_groups(&g2))?.count;
    let c3 = e(reducts::intermediate_groups(&g3))?.count;
    ensure(c2 >= 1 && c3 >= 1, "counts must be positive")?;
    Ok(format!(
        "count at t=2: {c2}; at t=3: {c3} (reported, not asserted equal)"
    ))
}

// ---------------------------------------------------------------------------
// cli
// ---------------------------------------------------------------------------

fn report_determinism() -> Result<String, String> {
    let profile_a = e(analysis::stable_profile(
        &GroupExpr::pure_set(),
        3,
        DEFAULT_TUPLE_CAP,
    ))?;
    let profile_b = e(analysis::stable_profile(
        &GroupExpr::pure_set(),
        3,
        DEFAULT_TUPLE_CAP,
    ))?;
    ensure(
        serde_json::to_string(&profile_a).unwrap() == serde_json::to_string(&profile_b).unwrap(),
        "profile reports differ between runs",
    )?;
    let lattice_a = e(reducts::intermediate_groups(&triv(&["a", "b", "c"])))?;
    let lattice_b = e(reducts::intermediate_groups(&triv(&["a", "b", "c"])))?;
    ensure(
        serde_json::to_string(&lattice_a).unwrap() == serde_json::to_string(&lattice_b).unwrap(),
        "lattice reports differ between runs",
    )?;
    Ok("byte-identical reports".into())
}

// ---------------------------------------------------------------------------
// negative controls: each must FAIL, demonstrating the detection paths
// ---------------------------------------------------------------------------

fn negative_rho_identity_without_shift() -> Result<String, String> {
    // Drop the copy-vector shift from the composition identity; on a fixture
    // with a nontrivial core the unshifted form must differ somewhere, so
    // asserting it everywhere fails.
    let cons = cons_fixtures()
        .into_iter()
        .find(|f| f.name == "cyclic_core_in_sym3")
        .unwrap();
    let (g, meta) = e(construct::truncate_cons(&cons.cons, cons.t))?;
    let elems: Vec<Perm> = e(g.elements())?.into_iter().collect();
    for sigma in &elems {
        for tau in &elems {
            let d_sigma = e(construct::decompose(sigma, &meta))?;
            let d_tau = e(construct::decompose(tau, &meta))?;
            let d_prod = e(construct::decompose(&tau.compose(sigma), &meta))?;
            for vec in meta.copy_vectors() {
                let unshifted = d_tau
                    .rho_at(&meta, &vec)
                    .compose(d_sigma.rho_at(&meta, &vec));
                ensure(
                    *d_prod.rho_at(&meta, &vec) == unshifted,
                    "unshifted composition identity broke (as it must)",
                )?;
            }
        }
    }
    Ok("unshifted identity held everywhere (unexpected)".into())
}

fn negative_omega_partition_wrong_split() -> Result<String, String> {
    let (g, meta) = e(construct::truncate(&GroupExpr::pure_set(), 3))?;
    let all: Vec<PointLabel> = g.domain().to_vec();
    let candidate = OmegaCandidate {
        k_part: vec![],
        nabla_classes: vec![all.clone()],
        delta_classes: vec![all],
    };
    let report = e(analysis::omega_partition_check(&g, meta.t(), &candidate))?;
    ensure(
        report.ok(),
        format!(
            "degenerate candidate rejected: split-into-t is {}",
            report.cond4
        ),
    )?;
    Ok("degenerate candidate accepted (unexpected)".into())
}

fn negative_omega_partition_wrong_symmetric_quotient() -> Result<String, String> {
    // Swap the roles of the two partitions on the order-4 fixture: the split
    // count happens to pass, the symmetric-quotient condition cannot.
    let fixture = cons_fixtures()
        .into_iter()
        .find(|f| f.name == "trivial_core_sym2")
        .unwrap();
    let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
    let delta_classes: Vec<Vec<PointLabel>> = meta
        .delta()
        .classes()
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.domain()[i].clone()).collect())
        .collect();
    let singletons: Vec<Vec<PointLabel>> = g.domain().iter().map(|l| vec![l.clone()]).collect();
    let candidate = OmegaCandidate {
        k_part: vec![],
        nabla_classes: delta_classes,
        delta_classes: singletons,
    };
    let report = e(analysis::omega_partition_check(&g, meta.t(), &candidate))?;
    ensure(
        report.ok(),
        format!(
            "swapped candidate rejected: split-into-t {}, symmetric quotient {}",
            report.cond4, report.cond5
        ),
    )?;
    Ok("swapped candidate accepted (unexpected)".into())
}

fn negative_oracle_on_tampered_truncation() -> Result<String, String> {
    // Adjoin a one-sided base swap to the truncation: the enumerated group
    // grows past what the membership conditions accept.
    let fixture = cons_fixtures()
        .into_iter()
        .find(|f| f.name == "trivial_core_sym2")
        .unwrap();
    let (g, meta) = e(construct::truncate_cons(&fixture.cons, fixture.t))?;
    let a0 = e(meta.point_at(&PointLabel::base("a"), 0))?;
    let b0 = e(meta.point_at(&PointLabel::base("b"), 0))?;
    let rogue = e(Perm::from_cycles(g.degree(), &[&[a0, b0]]))?;
    let mut gens = g.gens().to_vec();
    gens.push(rogue);
    let tampered = e(FinPermGroup::new(meta.domain().to_vec(), gens))?;
    let oracle = e(ConsOracle::new(&fixture.cons, &meta))?;
    for sigma in e(tampered.elements())? {
        ensure(
            oracle.check(&sigma).ok(),
            "tampered element rejected by the oracle (as it must)",
        )?;
    }
    Ok("tampered truncation accepted (unexpected)".into())
}

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

fn positive_checks() -> Vec<Check> {
    vec![
        (
            "permcore.closure_under_product_and_inverse",
            closure_under_product_and_inverse,
        ),
        ("permcore.wreath_order_formula", wreath_order_formula),
        (
            "permcore.restrict_double_inside_single",
            restrict_double_inside_single,
        ),
        ("permcore.quotient_is_homomorphic", quotient_is_homomorphic),
        (
            "permcore.orbit_count_monotonicity",
            orbit_count_monotonicity,
        ),
        ("expr.rank_of_wreath_increments", rank_of_wreath_increments),
        ("expr.rank_of_product_is_max", rank_of_product_is_max),
        (
            "expr.validate_accepts_builders_rejects_corruptions",
            validate_accepts_builders_rejects_corruptions,
        ),
        ("construct.oracle_equivalence", oracle_equivalence),
        ("construct.index_identity", index_identity),
        ("construct.base_recovery", base_recovery),
        (
            "construct.decompose_reassemble_identity",
            decompose_reassemble_identity,
        ),
        ("construct.rho_product_identities", rho_product_identities),
        ("analysis.profile_chain", profile_chain),
        (
            "analysis.orbit_monotonicity_on_expressions",
            orbit_monotonicity_on_expressions,
        ),
        (
            "analysis.width_reduct_monotonicity",
            width_reduct_monotonicity,
        ),
        ("analysis.width_product_bound", width_product_bound),
        ("analysis.core_subdirect_closure", core_subdirect_closure),
        (
            "analysis.congruences_join_closed_with_bounds",
            congruences_join_closed_with_bounds,
        ),
        (
            "analysis.estar_lift_and_acl_bound",
            estar_lift_and_acl_bound,
        ),
        ("structures.union_aut_mirror", union_aut_mirror),
        ("structures.copies_aut_mirror", copies_aut_mirror),
        (
            "structures.nested_family_aut_mirror",
            nested_family_aut_mirror,
        ),
        (
            "structures.homog_transfers_to_expansion",
            homog_transfers_to_expansion,
        ),
        (
            "structures.finite_index_homogenization",
            finite_index_homogenization,
        ),
        ("structures.type_count_bound", type_count_bound),
        ("reducts.lattice_members_closed", lattice_members_closed),
        (
            "reducts.lattice_order_insensitive",
            lattice_order_insensitive,
        ),
        (
            "reducts.count_per_truncation_reported",
            count_per_truncation_reported,
        ),
        ("cli.report_determinism", report_determinism),
    ]
}

fn negative_checks() -> Vec<Check> {
    vec![
        (
            "negative.rho_identity_without_shift",
            negative_rho_identity_without_shift,
        ),
        (
            "negative.omega_partition_wrong_split",
            negative_omega_partition_wrong_split,
        ),
        (
            "negative.omega_partition_wrong_symmetric_quotient",
            negative_omega_partition_wrong_symmetric_quotient,
        ),
        (
            "negative.oracle_on_tampered_truncation",
            negative_oracle_on_tampered_truncation,
        ),
    ]
}

/// Runs the checks matching the filter, in name order.
pub fn run_suite(filter: Option<&str>, include_negative: bool) -> Vec<CheckResult> {
    let mut checks = positive_checks();
    if include_negative {
        checks.extend(negative_checks());
    }
    checks.sort_by_key(|(name, _)| *name);
    let mut results = Vec::new();
    for (name, check) in checks {
        if let Some(f) = filter {
            if !name.contains(f) {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = check();
        let millis = start.elapsed().as_millis();
        let (passed, detail) = match outcome {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        results.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
            millis,
        });
    }
    results
}

pub fn render(results: &[CheckResult]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for r in results {
        let _ = writeln!(
            out,
            "{} {:<55} {:>6} ms  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.millis,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} checks passed", results.len());
    out
}
