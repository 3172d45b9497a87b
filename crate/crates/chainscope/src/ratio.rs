//! Maximum-ratio cycles: the support function of the direction cone. For a
//! pairing vector `u`, computes `max over cycles c of u.h(c) / len(c)` with
//! a witness cycle. Rational `u` runs exactly (scaled-integer dynamic
//! program per strongly connected component); floating `u` follows the
//! parametric route: bisection on `lambda` with positive-cycle detection.

use crate::class::{CohomologyClass, ScaledWeights};
use crate::error::{Error, Result};
use crate::graph::{Digraph, EdgeId};
use crate::potential::{relax, tight_edges, Relaxation};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;

/// Bisection width for the floating route.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct MaxRatioCycle {
    /// `u.h / (edges * T)` of the best cycle, as f64
    pub value: f64,
    /// exact value when `u` is rational
    pub value_exact: Option<BigRational>,
    /// a simple cycle attaining the maximum (within tolerance in float mode)
    pub witness: Vec<EdgeId>,
}

pub fn max_ratio_cycle(graph: &Digraph, u: &CohomologyClass) -> Result<MaxRatioCycle> {
    if u.dimension() != graph.dimension() {
        return Err(Error::DimensionMismatch {
            expected: graph.dimension(),
            got: u.dimension(),
        });
    }
    if u.is_rational() {
        max_ratio_exact(graph, u)
    } else {
        max_ratio_float(graph, u)
    }
}

// --- exact route --------------------------------------------------------

fn max_ratio_exact(graph: &Digraph, u: &CohomologyClass) -> Result<MaxRatioCycle> {
    let scaled = ScaledWeights::compute(u, graph.edges())?;
    let weights: Vec<i64> = scaled
        .weights
        .iter()
        .map(|&w| {
            i64::try_from(w)
                .map_err(|_| Error::NumericOverflow("edge weight exceeds i64".into()))
        })
        .collect::<Result<Vec<_>>>()?;

    let scc = graph.strongly_connected_components();
    let mut best: Option<(i64, i64)> = None; // mean = num/den over scaled weights
    let mut best_comp: usize = 0;
    for comp in 0..scc.count() {
        if !scc.has_cycle[comp] {
            continue;
        }
        let (num, den) = karp_max_mean(graph, &weights, &scc.members[comp])?;
        let better = match best {
            None => true,
            // num/den > bn/bd  <=>  num*bd > bn*den   (positive denominators)
            Some((bn, bd)) => (num as i128) * (bd as i128) > (bn as i128) * (den as i128),
        };
        if better {
            best = Some((num, den));
            best_comp = comp;
        }
    }
    let (num, den) = best.ok_or(Error::Acyclic)?;

    let witness = extract_mean_cycle(graph, &weights, &scc.members[best_comp], num, den);

    // mean of scaled weights per edge; divide by scale and flow time
    let t_rat = BigRational::from_float(graph.t_flow())
        .ok_or_else(|| Error::NumericOverflow("non-finite T".into()))?;
    let value_exact = BigRational::new(BigInt::from(num), BigInt::from(den))
        / BigRational::from_integer(scaled.scale.clone())
        / t_rat;
    let value = value_exact
        .to_f64()
        .ok_or_else(|| Error::NumericOverflow("ratio does not fit in f64".into()))?;

    debug_assert!(!witness.is_empty());
    Ok(MaxRatioCycle {
        value,
        value_exact: Some(value_exact),
        witness,
    })
}

/// Max mean weight (as an exact fraction num/den with den > 0) over cycles
/// inside one strongly connected component, by the longest-walk table of
/// exact edge counts.
fn karp_max_mean(graph: &Digraph, weights: &[i64], members: &[u64]) -> Result<(i64, i64)> {
    let s = members.len();
    let mut local = std::collections::HashMap::with_capacity(s);
    for (i, &v) in members.iter().enumerate() {
        local.insert(v, i);
    }
    // intra-component edges only
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for &v in members {
        for &eid in graph.out_edges(v) {
            let e = graph.edge(eid);
            if let Some(&j) = local.get(&e.dst) {
                edges.push((local[&v], j, weights[eid]));
            }
        }
    }

    const NEG: i64 = i64::MIN / 4;
    let cells = (s + 1)
        .checked_mul(s)
        .filter(|&c| c <= 200_000_000)
        .ok_or_else(|| Error::NumericOverflow("component too large for the exact table".into()))?;
    let mut table = vec![NEG; cells];
    table[0] = 0; // source = local node 0, walks of length 0

    for k in 1..=s {
        let (prev, cur) = table.split_at_mut(k * s);
        let prev = &prev[(k - 1) * s..];
        let cur = &mut cur[..s];
        for &(a, b, w) in &edges {
            if prev[a] > NEG {
                let cand = prev[a]
                    .checked_add(w)
                    .ok_or_else(|| Error::NumericOverflow("walk weight overflow".into()))?;
                if cand > cur[b] {
                    cur[b] = cand;
                }
            }
        }
    }

    let mut best: Option<(i64, i64)> = None;
    let last = &table[s * s..];
    for v in 0..s {
        if last[v] <= NEG {
            continue;
        }
        // min over k of (F_n - F_k)/(n-k)
        let mut vmin: Option<(i64, i64)> = None;
        for k in 0..s {
            let fk = table[k * s + v];
            if fk <= NEG {
                continue;
            }
            let num = last[v] - fk;
            let den = (s - k) as i64;
            let smaller = match vmin {
                None => true,
                Some((mn, md)) => (num as i128) * (md as i128) < (mn as i128) * (den as i128),
            };
            if smaller {
                vmin = Some((num, den));
            }
        }
        if let Some((num, den)) = vmin {
            let larger = match best {
                None => true,
                Some((bn, bd)) => (num as i128) * (bd as i128) > (bn as i128) * (den as i128),
            };
            if larger {
                best = Some((num, den));
            }
        }
    }
    best.ok_or_else(|| Error::NumericOverflow("empty mean-cycle table".into()))
}

/// Given the exact max mean `num/den` on a component, find a simple cycle
/// attaining it: under weights `den*w - num` no cycle is positive and the
/// optimal ones are exactly the cycles of the tight subgraph.
fn extract_mean_cycle(
    graph: &Digraph,
    weights: &[i64],
    members: &[u64],
    num: i64,
    den: i64,
) -> Vec<EdgeId> {
    let member_set: std::collections::HashSet<u64> = members.iter().copied().collect();
    let reweighted: Vec<i128> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            if member_set.contains(&e.src) && member_set.contains(&e.dst) {
                den as i128 * weights[id] as i128 - num as i128
            } else {
                // edges outside the component must not form positive cycles
                -1
            }
        })
        .collect();
    let g = match relax(graph, &reweighted, 0) {
        Relaxation::Potentials(g) => g,
        Relaxation::PositiveCycle(_) => unreachable!("mean was not maximal"),
    };
    let tight = tight_edges(graph, &reweighted, &g, 0);

    // any cycle within the tight subgraph restricted to the component
    // attains the mean; find one by iterative DFS
    let n = graph.node_count() as usize;
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut stack: Vec<(u64, usize)> = Vec::new(); // (node, out index)
    let mut path: Vec<EdgeId> = Vec::new();
    for &root in members {
        if state[root as usize] != 0 {
            continue;
        }
        stack.push((root, 0));
        state[root as usize] = 1;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            let out = graph.out_edges(v);
            let mut advanced = false;
            while *idx < out.len() {
                let eid = out[*idx];
                *idx += 1;
                let e = graph.edge(eid);
                if !tight[eid] || !member_set.contains(&e.dst) || !member_set.contains(&e.src) {
                    continue;
                }
                let w = e.dst;
                match state[w as usize] {
                    0 => {
                        path.push(eid);
                        stack.push((w, 0));
                        state[w as usize] = 1;
                        advanced = true;
                        break;
                    }
                    1 => {
                        // found a tight cycle closing at w
                        path.push(eid);
                        let pos = stack.iter().position(|&(n, _)| n == w).unwrap();
                        return path[pos..].to_vec();
                    }
                    _ => {}
                }
            }
            if advanced {
                continue;
            }
            state[v as usize] = 2;
            stack.pop();
            path.pop();
        }
    }
    unreachable!("tight subgraph of an optimal component must contain a cycle")
}

// --- floating route -----------------------------------------------------

fn max_ratio_float(graph: &Digraph, u: &CohomologyClass) -> Result<MaxRatioCycle> {
    let scc = graph.strongly_connected_components();
    if !scc.has_cycle.iter().any(|&c| c) {
        return Err(Error::Acyclic);
    }
    let t = graph.t_flow();
    let w: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| u.pair_f64(&e.displacement))
        .collect();

    let mut lo = w.iter().cloned().fold(f64::INFINITY, f64::min) / t - 1.0;
    let mut hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / t + 1.0;
    let feasible = |lambda: f64| -> Option<Vec<EdgeId>> {
        let shifted: Vec<f64> = w.iter().map(|wi| wi - lambda * t).collect();
        match relax(graph, &shifted, 0.0) {
            Relaxation::PositiveCycle(c) => Some(c),
            Relaxation::Potentials(_) => None,
        }
    };

    let mut witness = feasible(lo).ok_or(Error::Acyclic)?;
    while hi - lo > FLOAT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(c) => {
                witness = c;
                lo = mid;
            }
            None => hi = mid,
        }
    }

    // report the witness's own ratio: it is within tolerance of the optimum
    let value = cycle_ratio(graph, u, &witness);
    Ok(MaxRatioCycle {
        value,
        value_exact: None,
        witness,
    })
}

/// Ratio of a specific closed walk.
pub fn cycle_ratio(graph: &Digraph, u: &CohomologyClass, walk: &[EdgeId]) -> f64 {
    let total: f64 = walk
        .iter()
        .map(|&id| u.pair_f64(&graph.edge(id).displacement))
        .sum();
    total / (walk.len() as f64 * graph.t_flow())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn g1() -> Digraph {
        Digraph::new(
            2,
            2,
            1.0,
            vec![
                Edge { src: 0, dst: 1, displacement: vec![1, 0] },
                Edge { src: 1, dst: 0, displacement: vec![0, 1] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn g1_ratio_along_x() {
        let g = g1();
        let r = max_ratio_cycle(&g, &CohomologyClass::integer(vec![1, 0])).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(
            r.value_exact.unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        assert_eq!(r.witness.len(), 2);
    }

    #[test]
    fn g1_ratio_balanced_direction_is_zero() {
        let g = g1();
        let r = max_ratio_cycle(&g, &CohomologyClass::integer(vec![1, -1])).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn acyclic_graph_errors() {
        let g = Digraph::new(
            2,
            1,
            1.0,
            vec![Edge { src: 0, dst: 1, displacement: vec![1] }],
        )
        .unwrap();
        assert!(matches!(
            max_ratio_cycle(&g, &CohomologyClass::integer(vec![1])),
            Err(Error::Acyclic)
        ));
    }

    #[test]
    fn picks_the_better_of_two_cycles() {
        // self-loop value 1 on node 0 vs 2-cycle mean 3/2 on {1,2}
        let g = Digraph::new(
            3,
            1,
            1.0,
            vec![
                Edge { src: 0, dst: 0, displacement: vec![1] },
                Edge { src: 0, dst: 1, displacement: vec![0] },
                Edge { src: 1, dst: 2, displacement: vec![2] },
                Edge { src: 2, dst: 1, displacement: vec![1] },
            ],
        )
        .unwrap();
        let r = max_ratio_cycle(&g, &CohomologyClass::integer(vec![1])).unwrap();
        assert_eq!(
            r.value_exact.unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
        assert_eq!(r.witness.len(), 2);
        assert_eq!(cycle_ratio(&g, &CohomologyClass::integer(vec![1]), &r.witness), 1.5);
    }

    #[test]
    fn float_route_matches_exact_route() {
        let g = Digraph::new(
            4,
            2,
            1.0,
            vec![
                Edge { src: 0, dst: 1, displacement: vec![2, -1] },
                Edge { src: 1, dst: 0, displacement: vec![-1, 1] },
                Edge { src: 1, dst: 2, displacement: vec![0, 3] },
                Edge { src: 2, dst: 3, displacement: vec![1, 1] },
                Edge { src: 3, dst: 1, displacement: vec![-2, 0] },
                Edge { src: 2, dst: 2, displacement: vec![0, -1] },
            ],
        )
        .unwrap();
        for u in [vec![1.0, 0.0], vec![0.3, 0.7], vec![-1.0, 2.0]] {
            let f = max_ratio_cycle(&g, &CohomologyClass::float(u.clone()).unwrap()).unwrap();
            let num = (u[0] * 1000.0).round() as i64;
            let den = (u[1] * 1000.0).round() as i64;
            let exact = max_ratio_cycle(
                &g,
                &CohomologyClass::rational(vec![(num, 1000), (den, 1000)]).unwrap(),
            )
            .unwrap();
            assert!(
                (f.value - exact.value).abs() < 1e-8,
                "float {} vs exact {}",
                f.value,
                exact.value
            );
        }
    }
}
