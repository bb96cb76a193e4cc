mod common;

use proptest::prelude::*;
use qkdnet::pathloss::{build_loss_table, split_at_midpoint, LossModel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_exhaustive_search(
        seed in any::<u64>(),
        n_s in 2usize..=5,
        n_c in 1usize..=3,
        switch_db in prop_oneof![Just(0.0), Just(1.0), Just(1.5), Just(2.0)],
    ) {
        let g = common::small_graph(seed, n_s, n_c, 60.0);
        prop_assume!(g.nodes.len() <= 8);
        let model = LossModel::new(0.2, switch_db).unwrap();
        let t = build_loss_table(&g, &model).unwrap();
        for &s in t.sources() {
            for to in 0..g.nodes.len() {
                let want = common::brute_force_loss(&g, &model, s, to).unwrap();
                let got = t.loss(s, to);
                prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{} -> {}: {} vs {}", s, to, got, want);
            }
        }
    }

    #[test]
    fn switch_loss_only_adds(seed in any::<u64>()) {
        let g = common::small_graph(seed, 6, 4, 80.0);
        let tables: Vec<_> = [0.0, 1.0, 1.5, 2.0]
            .iter()
            .map(|&s| build_loss_table(&g, &LossModel::new(0.2, s).unwrap()).unwrap())
            .collect();
        for &s in tables[0].sources() {
            for to in 0..g.nodes.len() {
                for w in tables.windows(2) {
                    prop_assert!(w[1].loss(s, to) >= w[0].loss(s, to));
                }
                let (r0, r1) = (tables[0].route(s, to), tables[1].route(s, to));
                if r0.nodes == r1.nodes {
                    prop_assert!((r1.loss_db - r0.loss_db - r0.hops as f64).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_switch_is_scaled_distance(seed in any::<u64>()) {
        let g = common::small_graph(seed, 5, 3, 100.0);
        let t = build_loss_table(&g, &LossModel::new(0.2, 0.0).unwrap()).unwrap();
        for &s in t.sources() {
            for to in 0..g.nodes.len() {
                let r = t.route(s, to);
                prop_assert!((r.loss_db - 0.2 * r.fibre_km).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn midpoint_halves_fibre(
        lengths in prop::collection::vec(0.1f64..80.0, 1..8),
        switch_db in 0.0f64..2.0,
    ) {
        let fibre_only = LossModel::new(0.2, 0.0).unwrap();
        let (fa, fb) = split_at_midpoint(&lengths, &fibre_only);
        prop_assert!((fa - fb).abs() < 1e-12);
        let unit_switch = LossModel::new(0.2, 1.0).unwrap();
        let (ua, ub) = split_at_midpoint(&lengths, &unit_switch);
        let (sa, sb) = ((ua - fa).round(), (ub - fb).round());
        prop_assert!((sa + sb - lengths.len() as f64).abs() < 1e-12);
        prop_assert!(sa >= 1.0);
        let m = LossModel::new(0.2, switch_db).unwrap();
        let (a, b) = split_at_midpoint(&lengths, &m);
        prop_assert!((a - (fa + switch_db * sa)).abs() < 1e-9);
        prop_assert!((b - (fb + switch_db * sb)).abs() < 1e-9);
    }
}
