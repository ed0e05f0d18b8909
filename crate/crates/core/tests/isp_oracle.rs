mod common;

use common::*;
use fusion_width::convert::localize_merges;
use fusion_width::graph::evaluate;
use fusion_width::Expression;
use fusion_width::isp::{
    apply_join, apply_relabel, base_polynomial, brute_force_labeled_isp, brute_force_labeled_isp_sequential,
    extract_univariate, labeled_isp, labeled_isp_trace, LabeledPolynomial,
};
use proptest::prelude::*;

fn p3() -> Expression {
    parse("(fuse 2 (union (join 1 2 (union (vert 1) (vert 2))) (join 3 2 (union (vert 3) (vert 2)))))")
}

#[test]
fn oracle_agrees_with_subset_enumeration() {
    let mut r = rng(7);
    for _ in 0..200 {
        let e = random_expression(&mut r, &GenConfig::fusion(4, 10));
        let g = evaluate(&e);
        let p = brute_force_labeled_isp(&g, 25).unwrap();
        assert_eq!(labeled_counts(&p), naive_labeled_counts(&g), "{e}");
    }
}

#[test]
fn golden_p3() {
    let p = labeled_isp(&p3()).unwrap();
    let expected = LabeledPolynomial::from_small(&[(0, &[], 1), (1, &[1], 1), (1, &[2], 1), (1, &[3], 1), (2, &[1, 3], 1)]).unwrap();
    assert_eq!(p, expected);
    assert_eq!(extract_univariate(&p).to_text(), "1 : 3\n2 : 1\n");
}

#[test]
fn golden_k23_and_c5() {
    let k23 = parse("(join 1 2 (union (verts 1 2) (verts 2 3)))");
    assert_eq!(extract_univariate(&labeled_isp(&k23).unwrap()).to_text(), "1 : 5\n2 : 4\n3 : 1\n");
    // C5: one gadget per edge, then every vertex label merges its two copies
    let edge = |x: u32, y: u32| Expression::union(Expression::verts(l(6), 1), Expression::verts(l(7), 1)).join(l(6), l(7)).relabel(l(6), l(x)).relabel(l(7), l(y));
    let mut c5 = Expression::union_all((1..=5).map(|v| edge(v, v % 5 + 1))).unwrap();
    for v in 1..=5 {
        c5 = c5.fuse(l(v));
    }
    let g = evaluate(&c5);
    assert_eq!((g.vertex_count(), g.edge_count()), (5, 5));
    assert!(g.vertex_ids().all(|v| g.degree(v) == 2));
    assert_eq!(naive_univariate(&g), vec![1, 5, 5, 0, 0, 0]);
    assert_eq!(extract_univariate(&labeled_isp(&c5).unwrap()).to_text(), "1 : 5\n2 : 5\n");
    let tri = parse("(join 1 3 (join 2 3 (join 1 2 (union (union (vert 1) (vert 2)) (vert 3)))))");
    assert_eq!(extract_univariate(&labeled_isp(&tri).unwrap()).to_text(), "1 : 3\n");
}

#[test]
fn parallel_and_sequential_oracles_match() {
    let mut r = rng(11);
    for _ in 0..20 {
        let e = random_expression(&mut r, &GenConfig::fusion(3, 16));
        let g = evaluate(&e);
        assert_eq!(brute_force_labeled_isp(&g, 25).unwrap(), brute_force_labeled_isp_sequential(&g, 25).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_oracle(seed in any::<u64>()) {
        let e = random_expression(&mut rng(seed), &GenConfig::fusion(4, 12));
        let g = evaluate(&e);
        let p = labeled_isp(&e).unwrap();
        prop_assert_eq!(&p, &brute_force_labeled_isp(&g, 25).unwrap());
        prop_assert!(p.check_invariants().is_ok());
        let n = g.vertex_count();
        prop_assert_eq!(univariate_vec(&extract_univariate(&p), n + 1), naive_univariate(&g));
    }

    #[test]
    fn trace_matches_oracle_at_every_node(seed in any::<u64>()) {
        let e = localize_merges(&random_expression(&mut rng(seed), &GenConfig::fusion(3, 8)));
        let trace = labeled_isp_trace(&e).unwrap();
        prop_assert_eq!(trace.len(), e.len());
        for (idx, p) in trace.iter().enumerate() {
            let g = evaluate(&e.subexpression(idx).to_owned());
            prop_assert_eq!(p, &brute_force_labeled_isp(&g, 25).unwrap());
        }
    }

    #[test]
    fn join_and_relabel_rules_match_graph_operations(seed in any::<u64>(), i in 1u32..4, j in 1u32..4) {
        let e = random_expression(&mut rng(seed), &GenConfig::clique_width(3, 7));
        let p = labeled_isp(&e).unwrap();
        let relabeled = e.clone().relabel(l(i), l(j));
        prop_assert_eq!(apply_relabel(&p, l(i), l(j)), brute_force_labeled_isp(&evaluate(&relabeled), 25).unwrap());
        if i != j {
            let joined = e.join(l(i), l(j));
            prop_assert_eq!(apply_join(&p, l(i), l(j)).unwrap(), brute_force_labeled_isp(&evaluate(&joined), 25).unwrap());
        }
    }

    #[test]
    fn base_polynomial_counts_subsets(m in 1u64..40) {
        let p = base_polynomial(l(1), m).unwrap();
        let total: num_bigint::BigUint = p.total();
        prop_assert_eq!(total, big(2).pow(m as u32));
    }
}
