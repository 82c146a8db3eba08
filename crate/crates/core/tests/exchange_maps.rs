mod common;

use drna::topology::{
    build_exchange_map, default_degree, default_per_neighbor, havel_hakimi_regular, ExchangeMap,
    TopologyKind,
};
use proptest::prelude::*;

#[test]
fn maps_are_bijections_up_to_1e5_slots() {
    common::check_exchange_maps_bijective().unwrap();
}

proptest! {
    #[test]
    fn block_exchange_is_an_involution(m in 2usize..80, k in 1usize..200, frac in 0.0f64..=1.0) {
        let d = default_degree(m);
        let graph = havel_hakimi_regular(m, d).unwrap();
        prop_assert!(graph.is_connected());
        let p = ((k / d) as f64 * frac).floor() as usize;
        let map = ExchangeMap::block_exchange(&graph, k, p).unwrap();
        for pe in 0..m {
            for slot in 0..k {
                let (u, v) = map.apply(pe, slot);
                prop_assert_eq!(map.apply(u, v), (pe, slot));
                if u != pe {
                    prop_assert!(graph.has_edge(pe, u));
                }
            }
            prop_assert_eq!(map.outgoing(pe), p * d);
        }
    }

    #[test]
    fn default_sizing_moves_about_ninety_percent(m in 2usize..200, k in 10usize..400) {
        let map = build_exchange_map(TopologyKind::HavelHakimi, m, k, None).unwrap();
        let d = default_degree(m);
        let out = default_per_neighbor(k, d) * d;
        prop_assert!(out * 10 <= 9 * k);
        for pe in 0..m {
            prop_assert_eq!(map.outgoing(pe), out);
        }
    }
}
