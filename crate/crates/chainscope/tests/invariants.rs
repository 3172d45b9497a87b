//! Cross-module invariants checked against independent oracles: exhaustive
//! cycle enumeration, brute-force reachability, and explicit pseudo-orbit
//! realization on built graphs.

mod common;

use chainscope::class::CohomologyClass;
use chainscope::cone::{cone_equivalence_check, direction_cone, sullivan_cone_support};
use chainscope::cycles::{cycle_class, eulerian_reduce, is_simple_cycle, open_walk_reduce};
use chainscope::flow::{integrate, LiftedPoint, VectorField};
use chainscope::graph::{Digraph, Edge};
use chainscope::grid::BoxId;
use chainscope::lyapunov::{lyapunov_potential, verify_potential, PotentialKind};
use chainscope::quasi::{alpha_recurrent, is_quasi_lyapunov, rec_empty_iff_strict};
use chainscope::ratio::max_ratio_cycle;
use chainscope::recurrence::{attractor_from, chain_decompose, conley_order, graded_pre_lyapunov};
use chainscope::transition::{build_transition_graph, BuildParams};
use common::*;
use num::rational::BigRational;
use num::Signed;
use rand::prelude::*;

#[test]
fn ql_verdict_matches_cycle_enumeration() {
    let mut rng = rng(1001);
    for _ in 0..150 {
        let g = random_graph(&mut rng, 8, 24, 2, 3);
        let cycles = simple_cycles(&g);
        for _ in 0..4 {
            let alpha = random_rational_class(&mut rng, 2);
            let cert = is_quasi_lyapunov(&g, &alpha).unwrap();
            assert_eq!(
                cert.is_ql(),
                oracle_is_ql(&g, &alpha, &cycles),
                "verdict mismatch"
            );
            cert.revalidate(&g).unwrap();
        }
    }
}

#[test]
fn rec_set_matches_zero_cycle_search() {
    let mut rng = rng(1002);
    let mut checked = 0;
    while checked < 100 {
        let g = random_graph(&mut rng, 7, 18, 2, 2);
        let cycles = simple_cycles(&g);
        let Some(alpha) = random_ql_class(&mut rng, &g, 30) else {
            continue;
        };
        let rec = alpha_recurrent(&g, &alpha).unwrap();
        assert_eq!(rec.nodes, oracle_rec_set(&g, &alpha, &cycles));
        checked += 1;
    }
}

#[test]
fn max_ratio_matches_enumeration_exactly() {
    let mut rng = rng(1003);
    let mut checked = 0;
    while checked < 120 {
        let g = random_graph(&mut rng, 9, 26, 2, 3);
        let cycles = simple_cycles(&g);
        if cycles.is_empty() {
            assert!(max_ratio_cycle(&g, &CohomologyClass::integer(vec![1, 0])).is_err());
            continue;
        }
        let alpha = random_rational_class(&mut rng, 2);
        let r = max_ratio_cycle(&g, &alpha).unwrap();
        let expected = oracle_max_ratio(&g, &alpha, &cycles).unwrap();
        assert_eq!(r.value_exact.unwrap(), expected);
        // the witness itself attains the value
        let witness_class = cycle_class(&g, &r.witness).unwrap();
        let t = BigRational::from_float(g.t_flow()).unwrap();
        let witness_ratio = cycle_pairing(&g, &alpha, &r.witness)
            / (BigRational::from_integer(witness_class.edge_count.into()) * t);
        assert_eq!(witness_ratio, expected);
        assert!(is_simple_cycle(&g, &r.witness));
        checked += 1;
    }
}

#[test]
fn max_ratio_monotone_under_edge_addition() {
    let mut rng = rng(1004);
    for _ in 0..40 {
        let g = random_strongly_connected(&mut rng, 6, 8, 2, 3);
        let alpha = random_rational_class(&mut rng, 2);
        let base = max_ratio_cycle(&g, &alpha).unwrap().value_exact.unwrap();
        // add random edges, the max ratio may only grow
        let mut edges = g.edges().to_vec();
        for _ in 0..4 {
            edges.push(Edge {
                src: rng.gen_range(0..6),
                dst: rng.gen_range(0..6),
                displacement: vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
            });
        }
        let bigger = Digraph::new(6, 2, 1.0, edges).unwrap();
        let after = max_ratio_cycle(&bigger, &alpha).unwrap().value_exact.unwrap();
        assert!(after >= base);
    }
}

#[test]
fn circulation_support_equals_max_ratio() {
    let mut rng = rng(1005);
    let mut checked = 0;
    while checked < 60 {
        let g = random_graph(&mut rng, 7, 20, 2, 3);
        if !g
            .strongly_connected_components()
            .has_cycle
            .iter()
            .any(|&c| c)
        {
            continue;
        }
        let alpha = random_rational_class(&mut rng, 2);
        let ratio = max_ratio_cycle(&g, &alpha).unwrap();
        let (_, lp_exact) = sullivan_cone_support(&g, &alpha).unwrap();
        assert_eq!(
            lp_exact.unwrap(),
            ratio.value_exact.unwrap(),
            "flow-decomposition identity failed"
        );
        checked += 1;
    }
}

#[test]
fn eulerian_reduction_conserves_exactly() {
    let mut rng = rng(1006);
    for _ in 0..60 {
        let nodes = rng.gen_range(3..12);
        let g = random_strongly_connected(&mut rng, nodes, 10, 2, 5);
        let wander = rng.gen_range(1..400);
        let walk = random_closed_walk(&mut rng, &g, wander);
        let total = cycle_class(&g, &walk).unwrap();
        let pieces = eulerian_reduce(&g, &walk).unwrap();
        let mut h_sum = vec![0i64; 2];
        let mut len_sum = 0usize;
        for p in &pieces {
            assert!(is_simple_cycle(&g, &p.edges));
            assert!(p.edges.len() <= g.node_count() as usize);
            for (acc, &x) in h_sum.iter_mut().zip(&p.class.h) {
                *acc += x;
            }
            len_sum += p.class.edge_count;
        }
        assert_eq!(h_sum, total.h);
        assert_eq!(len_sum, total.edge_count);
    }
}

#[test]
fn open_walk_reduction_conserves_exactly() {
    let mut rng = rng(1007);
    for _ in 0..60 {
        let nodes = rng.gen_range(3..10);
        let g = random_strongly_connected(&mut rng, nodes, 8, 2, 4);
        // any prefix of a closed walk is an open walk
        let wander = rng.gen_range(2..300);
        let closed = random_closed_walk(&mut rng, &g, wander);
        let cut = rng.gen_range(1..=closed.len());
        let walk = &closed[..cut];
        let (path, cycles) = open_walk_reduce(&g, walk).unwrap();
        // endpoints preserved; an empty remainder means the walk was closed
        if path.edges.is_empty() {
            assert_eq!(g.edge(walk[0]).src, g.edge(*walk.last().unwrap()).dst);
        } else {
            assert_eq!(
                g.edge(path.edges[0]).src,
                g.edge(walk[0]).src,
                "path start moved"
            );
            assert_eq!(
                g.edge(*path.edges.last().unwrap()).dst,
                g.edge(*walk.last().unwrap()).dst,
                "path end moved"
            );
        }
        // simple path: no repeated sources, end distinct from interior
        let mut h = path.class.h.clone();
        let mut len = path.class.edge_count;
        for c in &cycles {
            assert!(is_simple_cycle(&g, &c.edges));
            for (acc, &x) in h.iter_mut().zip(&c.class.h) {
                *acc += x;
            }
            len += c.class.edge_count;
        }
        let mut total = vec![0i64; 2];
        for &eid in walk {
            for (acc, &x) in total.iter_mut().zip(&g.edge(eid).displacement) {
                *acc += x as i64;
            }
        }
        assert_eq!(h, total);
        assert_eq!(len, walk.len());
    }
}

#[test]
fn reversed_walk_negates_displacement_sum() {
    let mut rng = rng(1008);
    let g = random_strongly_connected(&mut rng, 8, 12, 2, 3);
    for _ in 0..50 {
        let walk = random_closed_walk(&mut rng, &g, 60);
        let forward = cycle_class(&g, &walk).unwrap();
        let reversed_sum: Vec<i64> = {
            let mut acc = vec![0i64; 2];
            for &eid in walk.iter().rev() {
                for (a, &x) in acc.iter_mut().zip(&g.edge(eid).displacement) {
                    *a -= x as i64;
                }
            }
            acc
        };
        assert_eq!(
            reversed_sum,
            forward.h.iter().map(|&x| -x).collect::<Vec<_>>()
        );
    }
}

#[test]
fn recto_equivalence_matches_brute_force() {
    let mut rng = rng(1009);
    for round in 0..25 {
        // a few rounds run at the 200-node scale, the rest stay small
        let max_nodes = if round % 8 == 0 { 200 } else { 40 };
        let g = random_graph(&mut rng, max_nodes, 3 * max_nodes as usize, 1, 1);
        let dec = chain_decompose(&g);
        let reach = reach_nonempty(&g);
        let n = g.node_count() as usize;
        for u in 0..n {
            for v in 0..n {
                let mutual = reach[u][v] && reach[v][u];
                let same_chain = dec.recurrent[u]
                    && dec.recurrent[v]
                    && dec.scc_id[u] == dec.scc_id[v];
                assert_eq!(mutual, same_chain, "u={u} v={v}");
            }
        }
    }
}

#[test]
fn chains_are_separated_by_attractor_pairs() {
    let mut rng = rng(1010);
    for round in 0..60 {
        // sparse large rounds reach condensations with up to ~20 chains
        let (nodes, edges) = if round % 6 == 0 { (44, 66) } else { (14, 40) };
        let g = random_graph(&mut rng, nodes, edges, 1, 1);
        let dec = chain_decompose(&g);
        let order = conley_order(&dec);
        let m = dec.chain_ids.len();
        for r1 in 0..m {
            for r2 in 0..m {
                if r1 == r2 || order.reaches(r1, r2) {
                    continue;
                }
                // r1 does not reach r2: some pair separates them
                let pair_a = attractor_from(&g, &dec, &[r2]).unwrap();
                let a_has_r2 = dec.chain_members(r2).iter().all(|&v| pair_a.attractor[v as usize]);
                let astar_has_r1 = dec.chain_members(r1).iter().all(|&v| pair_a.repeller[v as usize]);
                let separated_a = a_has_r2 && astar_has_r1;

                let pair_b = attractor_from(&g, &dec, &[r1]).unwrap();
                let b_has_r1 = dec.chain_members(r1).iter().all(|&v| pair_b.attractor[v as usize]);
                let bstar_has_r2 = dec.chain_members(r2).iter().all(|&v| pair_b.repeller[v as usize]);
                let separated_b = b_has_r1 && bstar_has_r2;

                assert!(
                    separated_a || separated_b,
                    "chains {r1} and {r2} not separated"
                );
            }
        }
    }
}

#[test]
fn graded_functions_on_random_pairs() {
    let mut rng = rng(1011);
    let mut done = 0;
    while done < 100 {
        let g = random_graph(&mut rng, 12, 30, 1, 1);
        let dec = chain_decompose(&g);
        if dec.chain_ids.is_empty() {
            continue;
        }
        let seed = rng.gen_range(0..dec.chain_ids.len());
        let pair = attractor_from(&g, &dec, &[seed]).unwrap();
        let f = graded_pre_lyapunov(&g, &pair);
        for e in g.edges() {
            let (u, v) = (e.src as usize, e.dst as usize);
            assert!(f[u] >= f[v], "graded function must not increase");
            if !pair.attractor[u] && !pair.repeller[u] {
                assert!(f[u] > f[v], "strict decrease required off the pair");
            }
        }
        done += 1;
    }
}

#[test]
fn ql_and_lyapunov_agree_on_random_graphs() {
    // completeness at graph level: QL iff a strong potential exists
    let mut rng = rng(1012);
    for _ in 0..80 {
        let g = random_graph(&mut rng, 8, 22, 2, 3);
        let alpha = random_rational_class(&mut rng, 2);
        let cert = is_quasi_lyapunov(&g, &alpha).unwrap();
        match lyapunov_potential(&g, &alpha).unwrap() {
            Ok(potential) => {
                assert!(cert.is_ql());
                let outcome = verify_potential(&g, &alpha, &potential.values).unwrap();
                assert_eq!(outcome.kind, Some(PotentialKind::Strong));
            }
            Err(cycle) => {
                assert!(!cert.is_ql());
                assert!(cycle_pairing(&g, &alpha, &cycle.0).is_positive());
            }
        }
    }
}

#[test]
fn rec_empty_iff_strict_on_random_ql_classes() {
    let mut rng = rng(1013);
    let mut done = 0;
    while done < 50 {
        let g = random_graph(&mut rng, 8, 20, 2, 3);
        if !g.strongly_connected_components().has_cycle.iter().any(|&c| c) {
            continue;
        }
        let Some(alpha) = random_ql_class(&mut rng, &g, 25) else {
            continue;
        };
        let (strict, empty) = rec_empty_iff_strict(&g, &alpha).unwrap();
        assert_eq!(strict, empty);
        done += 1;
    }
}

#[test]
fn cone_rays_reevaluate_from_witnesses() {
    let mut rng = rng(1014);
    for _ in 0..30 {
        let g = random_strongly_connected(&mut rng, 6, 10, 2, 3);
        let cone = direction_cone(&g, 0.5, None).unwrap();
        assert!(!cone.rays.is_empty());
        for ray in &cone.rays {
            let class = cycle_class(&g, &ray.witness).unwrap();
            assert_eq!(class.h, ray.h);
            assert_eq!(class.edge_count, ray.edge_count);
            let recomputed = class.direction(g.t_flow());
            assert_eq!(recomputed, ray.direction);
        }
        // no redundant rays: each is a vertex of the ray hull
        let exact: Vec<Vec<BigRational>> = cone
            .rays
            .iter()
            .map(|r| r.direction_exact(g.t_flow()))
            .collect();
        let hull = chainscope::hull::hull_2d(&exact);
        assert_eq!(hull.len(), cone.rays.len());
    }
}

#[test]
fn built_graph_edges_are_sound() {
    // re-derive 100 random edges from their box samples
    let field = VectorField::figure_one();
    let params = BuildParams::new(8, 2);
    let tg = build_transition_graph(&field, &params).unwrap();
    let g = tg.digraph();
    let mut rng = rng(1015);
    let n = tg.grid().resolution() as f64;
    for _ in 0..100 {
        let eid = rng.gen_range(0..g.edges().len());
        let e = g.edge(eid);
        // some sample of the source box must flow to within epsilon + side
        // of the destination copy
        let mut found = false;
        'samples: for mask in 0..=(1usize << 2) {
            let lo = tg.grid().lower_corner(BoxId(e.src));
            let side = tg.grid().side();
            let sample: Vec<f64> = match mask {
                0 => lo.iter().map(|&c| c + side / 2.0).collect(),
                m => (0..2)
                    .map(|axis| lo[axis] + if (m - 1) >> axis & 1 == 1 { side * (1.0 - 1e-9) } else { 0.0 })
                    .collect(),
            };
            let seg = integrate(&field, &LiftedPoint::new(sample), tg.t_flow(), params.step)
                .unwrap();
            let end = seg.end.lift();
            // destination copy in the cover
            let dst_coords = tg.grid().coords(BoxId(e.dst));
            for axis in 0..2 {
                let box_lo = dst_coords[axis] as f64 / n + e.displacement[axis] as f64;
                let box_hi = box_lo + side;
                let dist = if end[axis] < box_lo {
                    box_lo - end[axis]
                } else if end[axis] > box_hi {
                    end[axis] - box_hi
                } else {
                    0.0
                };
                if dist > tg.epsilon() + 1e-9 {
                    continue 'samples;
                }
            }
            found = true;
            break;
        }
        assert!(found, "edge {eid} not reproduced by any box sample");
    }
}

#[test]
fn paths_realize_as_pseudo_orbits() {
    // every directed path realizes with jumps at most epsilon + box side,
    // and its displacement sum is the homology class of the realization
    let field = VectorField::linear(vec![1.0, 0.618]).unwrap();
    let params = BuildParams::new(8, 2);
    let tg = build_transition_graph(&field, &params).unwrap();
    let g = tg.digraph();
    let mut rng = rng(1016);
    let slack = tg.epsilon() + tg.grid().side() + 1e-9;

    for _ in 0..20 {
        // random closed walk within one cyclic component
        let scc = g.strongly_connected_components();
        let comp = (0..scc.count()).find(|&c| scc.has_cycle[c]).unwrap();
        let start = scc.members[comp][rng.gen_range(0..scc.members[comp].len())];
        let mut walk = Vec::new();
        let mut at = start;
        loop {
            let candidates: Vec<_> = g
                .out_edges(at)
                .iter()
                .copied()
                .filter(|&eid| scc.comp_of[g.edge(eid).dst as usize] == comp)
                .collect();
            let eid = candidates[rng.gen_range(0..candidates.len())];
            walk.push(eid);
            at = g.edge(eid).dst;
            if at == start && walk.len() >= 2 {
                break;
            }
            if walk.len() > 200 {
                // force closure along a path back (walk may be open): retry
                walk.clear();
                at = start;
            }
        }

        // realize: start at the box center, integrate, jump to the center
        // of the next box copy; track the lift
        let mut lift: Vec<f64> = tg.grid().center(BoxId(start));
        let mut lattice = [0f64; 2];
        for &eid in &walk {
            let e = g.edge(eid);
            let seg = integrate(&field, &LiftedPoint::new(lift.clone()), tg.t_flow(), params.step)
                .unwrap();
            let end = seg.end.lift().to_vec();
            // jump target: center of the destination copy
            for axis in 0..2 {
                lattice[axis] += e.displacement[axis] as f64;
            }
            let target: Vec<f64> = tg
                .grid()
                .center(BoxId(e.dst))
                .iter()
                .enumerate()
                .map(|(axis, &c)| c + lattice[axis])
                .collect();
            let jump = end
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(jump <= slack, "jump {jump} exceeds epsilon + side {slack}");
            lift = target;
        }
        // closed walk: final lift differs from the initial by the summed
        // displacement exactly
        let total = cycle_class(g, &walk).unwrap();
        let start_center = tg.grid().center(BoxId(start));
        for axis in 0..2 {
            let expected = start_center[axis] + total.h[axis] as f64;
            assert!((lift[axis] - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn catalog_duality_and_orbit_containment() {
    let field = VectorField::circle_slow();
    let tg = build_transition_graph(&field, &BuildParams::new(16, 1)).unwrap();
    let report = cone_equivalence_check(&tg, Some(&field), 12, 6, 40.0, 2024).unwrap();
    assert!(report.clean(), "violations: {report:?}");
    assert!(report.orbit_samples > 0);
}

#[test]
fn minimal_linear_flow_is_one_chain_covering_everything() {
    // a linear flow with irrational slope is minimal: at n = 8 and at the
    // refined scale every box is recurrent and there is a single chain
    let field = VectorField::linear(vec![1.0, 1.618033988749895]).unwrap();
    for n in [8u32, 16] {
        let tg = build_transition_graph(&field, &BuildParams::new(n, 2)).unwrap();
        let dec = chain_decompose(tg.digraph());
        assert!(dec.recurrent.iter().all(|&r| r), "n={n}: all boxes recurrent");
        assert_eq!(dec.chain_ids.len(), 1, "n={n}: one chain");
    }
}

#[test]
fn linear_flow_cone_contains_the_slope() {
    let phi = 1.618033988749895;
    let field = VectorField::linear(vec![1.0, phi]).unwrap();
    let tg = build_transition_graph(&field, &BuildParams::new(16, 2)).unwrap();
    let cone = direction_cone(tg.digraph(), tg.epsilon(), None).unwrap();
    let excess = cone.outside_distance(&[1.0, phi]);
    assert!(
        excess <= 2.0 * tg.epsilon(),
        "true drift must lie in the inflated hull, excess {excess}"
    );
    assert!(cone.diameter() <= 4.0 * tg.epsilon());
}

#[test]
fn circle_flow_negative_class_is_ql_with_tight_fixed_loop() {
    let field = VectorField::circle_slow();
    let tg = build_transition_graph(&field, &BuildParams::new(32, 1)).unwrap();
    let g = tg.digraph();
    let alpha = CohomologyClass::integer(vec![-1]);
    let cert = is_quasi_lyapunov(g, &alpha).unwrap();
    assert!(cert.is_ql(), "reverse winding is impossible");
    let rec = chainscope::quasi::alpha_recurrent_from(g, &cert).unwrap();
    // the box containing the fixed point keeps its zero self-loop tight
    let zero_box = tg.grid().box_id(&[0]).unwrap().0;
    assert!(rec.contains(zero_box), "fixed-point box must be recurrent");
}

#[test]
fn figure_one_chain_structure_and_prescription_band() {
    let field = VectorField::figure_one();
    let tg = build_transition_graph(&field, &BuildParams::new(64, 2)).unwrap();
    let g = tg.digraph();
    let n = 64;

    // the connecting orbits close a loop through both fixed points, so the
    // full graph has a single chain containing both
    let dec = chain_decompose(g);
    assert_eq!(dec.chain_ids.len(), 1);
    let p_box = tg.grid().box_id(&[0, 0]).unwrap().0 as usize;
    let q_box = tg.grid().box_id(&[n / 2, n / 2]).unwrap().0 as usize;
    assert!(dec.recurrent[p_box] && dec.recurrent[q_box]);
    assert_eq!(dec.scc_id[p_box], dec.scc_id[q_box]);

    // for dx+dy the tight chains split at the fixed points, and prescribed
    // values are coupled through the connecting orbits: equal values extend,
    // wildly unequal ones are rejected with a witness path
    let alpha = CohomologyClass::integer(vec![1, 1]);
    let rec = alpha_recurrent(g, &alpha).unwrap();
    let chain_p = rec.chain_of(p_box as u64).expect("p chain");
    let chain_q = rec.chain_of(q_box as u64).expect("q chain");
    assert_ne!(chain_p, chain_q, "tight chains at p and q must be distinct");

    // the restriction of a valid potential extends exactly, while skewing
    // one fixed-point chain far upward breaks the coupling through the
    // connecting orbits
    use num::bigint::BigInt;
    use num::rational::BigRational;
    let strong = lyapunov_potential(g, &alpha).unwrap().unwrap();
    let chainscope::quasi::PotentialValues::Exact(values) = &strong.values else {
        unreachable!()
    };
    let base: Vec<BigRational> = rec.anchors.iter().map(|&a| values[a as usize].clone()).collect();
    let out = chainscope::lyapunov::prescribed_pre_lyapunov(g, &alpha, &base).unwrap();
    assert!(out.is_ok(), "potential restriction must extend");

    let mut skewed = base.clone();
    skewed[chain_q] = &skewed[chain_q] + BigRational::from_integer(BigInt::from(1000));
    let out = chainscope::lyapunov::prescribed_pre_lyapunov(g, &alpha, &skewed).unwrap();
    let witness = out.err().expect("skewed prescription must be rejected");
    assert!(!witness.path.is_empty());
}

#[test]
fn lifted_potential_is_equivariantly_monotone() {
    // F(node, l) = f(node) + alpha . l decreases along every lifted edge
    let mut rng = rng(1017);
    let g = random_strongly_connected(&mut rng, 7, 12, 2, 3);
    let Some(alpha) = random_ql_class(&mut rng, &g, 40) else {
        return;
    };
    let potential = lyapunov_potential(&g, &alpha).unwrap().unwrap();
    let values = match &potential.values {
        chainscope::quasi::PotentialValues::Exact(v) => v
            .iter()
            .map(|x| num::ToPrimitive::to_f64(x).unwrap())
            .collect::<Vec<_>>(),
        chainscope::quasi::PotentialValues::Float(v) => v.clone(),
    };
    let af = alpha.as_f64();
    for _ in 0..100 {
        let eid = rng.gen_range(0..g.edges().len());
        let e = g.edge(eid);
        let lattice: Vec<f64> = (0..2).map(|_| rng.gen_range(-5i32..=5) as f64).collect();
        let tail = values[e.src as usize] + af[0] * lattice[0] + af[1] * lattice[1];
        let head = values[e.dst as usize]
            + af[0] * (lattice[0] + e.displacement[0] as f64)
            + af[1] * (lattice[1] + e.displacement[1] as f64);
        assert!(head <= tail + 1e-9, "lifted edge must not increase");
    }
}

#[test]
fn rational_approx_on_boundary_face_keeps_tight_rays() {
    // two self-loops spanning a segment cone; a floating class tight on one
    // ray must be approximated by rationals tight on the same ray
    let g = Digraph::new(
        2,
        2,
        1.0,
        vec![
            Edge { src: 0, dst: 0, displacement: vec![1, 0] },
            Edge { src: 1, dst: 1, displacement: vec![0, 1] },
        ],
    )
    .unwrap();
    let cone = direction_cone(&g, 0.5, None).unwrap();
    let alpha = CohomologyClass::float(vec![-0.7234881912, 0.0]).unwrap();
    let approx =
        chainscope::quasi::rational_approx(&g, &alpha, 1e-6, 1_000_000, &cone).unwrap();
    let face = chainscope::quasi::open_face(&g, &alpha, &cone).unwrap();
    assert!(!face.tight_rays.is_empty());
    for beta in &approx.betas {
        let b = beta.as_big_rational().unwrap();
        for &j in &face.tight_rays {
            let v: num::rational::BigRational = b
                .iter()
                .zip(&cone.rays[j].h)
                .map(|(x, &h)| {
                    x * num::rational::BigRational::from_integer(num::bigint::BigInt::from(h))
                })
                .sum();
            assert!(num::Zero::is_zero(&v), "tight ray must stay tight");
        }
    }
}

#[test]
fn rational_approx_straddles_on_built_graph() {
    let phi = 1.618033988749895;
    let field = VectorField::linear(vec![1.0, phi]).unwrap();
    let tg = build_transition_graph(&field, &BuildParams::new(16, 2)).unwrap();
    let g = tg.digraph();
    let alpha = CohomologyClass::float(vec![-1.0, -phi]).unwrap();
    assert!(is_quasi_lyapunov(g, &alpha).unwrap().is_ql());
    let cone = direction_cone(g, tg.epsilon(), None).unwrap();
    let approx =
        chainscope::quasi::rational_approx(g, &alpha, 1e-5, 1_000_000, &cone).unwrap();
    assert!(approx.betas.len() >= 2, "straddling requires several terms");
    for betata in &approx.betas {
        assert!(is_quasi_lyapunov(g, beta_ref(beta_ref2(betata))).unwrap().is_ql());
    }
    for (r, a) in approx.reconstruction.iter().zip(alpha.as_f64()) {
        assert!((r - a).abs() <= 1e-5);
    }
}

fn beta_ref(b: &CohomologyClass) -> &CohomologyClass { b }
fn beta_ref2(b: &CohomologyClass) -> &CohomologyClass { b }
