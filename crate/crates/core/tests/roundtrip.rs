mod common;

use common::*;
use fusion_width::expr::{expression_stats, expression_width, validate_expression, Expression, Op};
use fusion_width::graph::evaluate;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>(), fuses in any::<bool>()) {
        let cfg = if fuses { GenConfig::fusion(6, 20) } else { GenConfig::clique_width(6, 20) };
        let e = random_expression(&mut rng(seed), &cfg);
        let text = e.render();
        let back: Expression = text.parse().unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.render(), text);
    }

    #[test]
    fn evaluation_invariants(seed in any::<u64>()) {
        let e = random_expression(&mut rng(seed), &GenConfig::fusion(4, 14));
        let g = evaluate(&e);
        prop_assert!(g.check_invariants().is_ok());
        let s = expression_stats(&e);
        prop_assert!(g.vertex_count() as u128 <= s.vertex_creations);
        prop_assert_eq!(s.distinct_labels, expression_width(&e));
        prop_assert!(g.vertices().all(|(_, info)| e.labels().contains(&info.label)));
        let creations: usize = g.vertices().map(|(_, info)| info.provenance.len()).sum();
        prop_assert_eq!(creations as u128, s.vertex_creations);
    }

    #[test]
    fn clique_width_form_is_also_fusion_form(seed in any::<u64>()) {
        let e = random_expression(&mut rng(seed), &GenConfig::clique_width(4, 10));
        prop_assert!(validate_expression(&e, true).is_valid());
        prop_assert!(validate_expression(&e, false).is_valid());
        let fuse_free = e.ops().iter().all(|op| !matches!(op, Op::Fuse { .. }));
        prop_assert!(fuse_free);
    }
}

#[test]
fn comments_and_sugar() {
    let e: Expression = "; a path\n(join 1 2 ; edge\n (union (vert 1) (verts 2 1)))".parse().unwrap();
    assert_eq!(e.render(), "(join 1 2 (union (verts 1 1) (verts 2 1)))");
}
