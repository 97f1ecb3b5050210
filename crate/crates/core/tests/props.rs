//! Property tests over random permutations, partitions, small generated
//! groups, and expression trees.

use proptest::prelude::*;

use hcell_core::analysis;
use hcell_core::expr::{self, GroupExpr};
use hcell_core::{FinPermGroup, Partition, Perm, PointLabel};

fn arb_perm(n: usize) -> impl Strategy<Value = Perm> {
    Just(()).prop_perturb(move |_, mut rng| {
        let mut image: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            image.swap(i, j);
        }
        Perm::from_image(image).unwrap()
    })
}

fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0..n.max(1), 0..=n).prop_map(move |pairs| {
        let pairs: Vec<(usize, usize)> = pairs.windows(2).map(|w| (w[0], w[1])).collect();
        Partition::from_pairs(n, pairs)
    })
}

fn small_domain(n: usize) -> Vec<PointLabel> {
    (0..n).map(|i| PointLabel::base(&format!("x{i}"))).collect()
}

fn arb_group(n: usize, max_gens: usize) -> impl Strategy<Value = FinPermGroup> {
    proptest::collection::vec(arb_perm(n), 0..=max_gens)
        .prop_map(move |gens| FinPermGroup::new(small_domain(n), gens).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perm_compose_inverse_laws(a in arb_perm(6), b in arb_perm(6)) {
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&b).inverse(), b.inverse().compose(&a.inverse()));
    }

    #[test]
    fn perm_serde_roundtrip(a in arb_perm(7)) {
        let text = serde_json::to_string(&a).unwrap();
        let back: Perm = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn partition_join_laws(a in arb_partition(6), b in arb_partition(6), c in arb_partition(6)) {
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        prop_assert_eq!(a.join(&a), a.clone());
        prop_assert!(a.refines(&a.join(&b)));
    }

    #[test]
    fn generated_elements_form_a_group(g in arb_group(4, 2)) {
        let elems = g.elements().unwrap();
        prop_assert!(elems.contains(&Perm::identity(4)));
        for a in &elems {
            prop_assert!(elems.contains(&a.inverse()));
            for b in &elems {
                prop_assert!(elems.contains(&a.compose(b)));
            }
        }
    }

    #[test]
    fn orbit_counts_shrink_in_larger_groups(g in arb_group(4, 2)) {
        let sym = FinPermGroup::symmetric(small_domain(4)).unwrap();
        let pg = analysis::orbit_profile(&g, 2, 1 << 20).unwrap();
        let ps = analysis::orbit_profile(&sym, 2, 1 << 20).unwrap();
        for (rs, rg) in ps.rows.iter().zip(pg.rows.iter()) {
            prop_assert!(rs.o <= rg.o && rs.oi <= rg.oi && rs.os <= rg.os);
        }
    }

    #[test]
    fn congruences_are_invariant_and_join_closed(g in arb_group(4, 2)) {
        let congs = analysis::congruences(&g).unwrap();
        for c in &congs {
            prop_assert!(analysis::is_congruence(&g, c));
            for d in &congs {
                prop_assert!(congs.contains(&c.join(d)));
            }
        }
    }

    #[test]
    fn quotient_order_divides_group_order(g in arb_group(4, 2)) {
        let order = g.order().unwrap();
        for c in analysis::congruences(&g).unwrap() {
            let q = g.quotient_by_congruence(&c).unwrap();
            prop_assert_eq!(order % q.order().unwrap(), 0);
        }
    }

    #[test]
    fn dsl_roundtrips_for_small_trees(
        depth in 0usize..3,
        points in 1usize..3,
        symmetric in proptest::bool::ANY,
    ) {
        let names: Vec<String> = (0..points).map(|i| format!("y{i}")).collect();
        let refs: Vec<PointLabel> = names.iter().map(|n| PointLabel::base(n)).collect();
        let leaf = if symmetric {
            FinPermGroup::symmetric(refs).unwrap()
        } else {
            FinPermGroup::trivial(refs).unwrap()
        };
        let mut e = GroupExpr::Finite(leaf);
        for level in 0..depth {
            e = if level % 2 == 0 {
                GroupExpr::WreathOmega(Box::new(e))
            } else {
                GroupExpr::DirectProduct(vec![e, GroupExpr::pure_set()])
            };
        }
        let text = expr::print(&e);
        let back = expr::parse(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(expr::print(&back), text);
    }
}
