//! Property tests over randomly generated graphs and walks.

mod common;

use chainscope::class::CohomologyClass;
use chainscope::cycles::{cycle_class, eulerian_reduce, is_simple_cycle};
use chainscope::graph::{normalize_edges, Digraph, Edge};
use chainscope::quasi::is_quasi_lyapunov;
use chainscope::storage;
use chainscope::transition::TransitionGraph;
use proptest::prelude::*;

fn arb_edges(nodes: u64, dim: usize) -> impl Strategy<Value = Vec<Edge>> {
    prop::collection::vec(
        (0..nodes, 0..nodes, prop::collection::vec(-4i32..=4, dim)),
        1..40,
    )
    .prop_map(|tuples| {
        tuples
            .into_iter()
            .map(|(src, dst, displacement)| Edge {
                src,
                dst,
                displacement,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reduction_conserves_class(edges in arb_edges(6, 2), wander in 1usize..200, seed in 0u64..1000) {
        // close the graph into a ring so closed walks always exist
        let mut all = edges;
        for i in 0..6u64 {
            all.push(Edge { src: i, dst: (i + 1) % 6, displacement: vec![1, -1] });
        }
        let g = Digraph::new(6, 2, 1.0, normalize_edges(all)).unwrap();
        let mut rng = common::rng(seed);
        let walk = common::random_closed_walk(&mut rng, &g, wander);
        let total = cycle_class(&g, &walk).unwrap();
        let pieces = eulerian_reduce(&g, &walk).unwrap();
        let mut h = vec![0i64; 2];
        let mut len = 0usize;
        for p in &pieces {
            prop_assert!(is_simple_cycle(&g, &p.edges));
            for (acc, &x) in h.iter_mut().zip(&p.class.h) { *acc += x; }
            len += p.class.edge_count;
        }
        prop_assert_eq!(h, total.h);
        prop_assert_eq!(len, total.edge_count);
    }

    #[test]
    fn certificates_always_revalidate(edges in arb_edges(7, 2), num in -6i64..=6, den in 1i64..=6) {
        let g = Digraph::new(7, 2, 1.0, normalize_edges(edges)).unwrap();
        let alpha = CohomologyClass::rational(vec![(num, den), (den - num, 7)]).unwrap();
        let cert = is_quasi_lyapunov(&g, &alpha).unwrap();
        prop_assert!(cert.revalidate(&g).is_ok());
        // exactly one payload is present
        prop_assert!(cert.potential().is_some() != cert.violating_cycle().is_some());
    }

    #[test]
    fn storage_roundtrips(edges in arb_edges(16, 2), eps_num in 1u32..=4) {
        let grid = chainscope::grid::BoxGrid::new(2, 4).unwrap();
        let eps = eps_num as f64 / 8.0;
        let tg = TransitionGraph::from_parts(grid, eps, 1.0, [7u8; 32], normalize_edges(edges)).unwrap();
        let bytes = storage::to_bytes(&tg);
        let back = storage::from_bytes(&bytes).unwrap();
        prop_assert_eq!(tg.digraph().edges(), back.digraph().edges());
        prop_assert_eq!(tg.epsilon(), back.epsilon());
        prop_assert_eq!(storage::to_bytes(&back), bytes);
    }
}
