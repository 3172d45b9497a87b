//! Shared test oracles, independent of the library's algorithm paths:
//! exhaustive simple-cycle enumeration, brute-force reachability, and random
//! graph generators.

#![allow(dead_code)]

use chainscope::class::CohomologyClass;
use chainscope::graph::{Digraph, Edge, EdgeId, NodeId};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every node-simple cycle as an edge list, each anchored at its smallest
/// node. Intended for graphs with at most a dozen nodes.
pub fn simple_cycles(g: &Digraph) -> Vec<Vec<EdgeId>> {
    let n = g.node_count() as usize;
    let mut out = Vec::new();
    let mut visited = vec![false; n];
    let mut path: Vec<EdgeId> = Vec::new();

    fn dfs(
        g: &Digraph,
        anchor: NodeId,
        v: NodeId,
        visited: &mut [bool],
        path: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        for &eid in g.out_edges(v) {
            let w = g.edge(eid).dst;
            if w == anchor {
                let mut cycle = path.clone();
                cycle.push(eid);
                out.push(cycle);
            } else if w > anchor && !visited[w as usize] {
                visited[w as usize] = true;
                path.push(eid);
                dfs(g, anchor, w, visited, path, out);
                path.pop();
                visited[w as usize] = false;
            }
        }
    }

    for s in 0..n as NodeId {
        dfs(g, s, s, &mut visited, &mut path, &mut out);
    }
    out
}

/// Exact pairing of a rational class with a cycle's displacement sum.
pub fn cycle_pairing(g: &Digraph, alpha: &CohomologyClass, cycle: &[EdgeId]) -> BigRational {
    let a = alpha.as_big_rational().expect("oracle needs rational class");
    let mut total: BigRational = Zero::zero();
    for &eid in cycle {
        for (ai, &h) in a.iter().zip(&g.edge(eid).displacement) {
            total += ai * BigRational::from_integer(BigInt::from(h));
        }
    }
    total
}

/// Oracle verdict: quasi-Lyapunov iff no simple cycle pairs positively.
pub fn oracle_is_ql(g: &Digraph, alpha: &CohomologyClass, cycles: &[Vec<EdgeId>]) -> bool {
    cycles
        .iter()
        .all(|c| !cycle_pairing(g, alpha, c).is_positive())
}

/// Oracle recurrent set: nodes on some zero-pairing simple cycle.
pub fn oracle_rec_set(
    g: &Digraph,
    alpha: &CohomologyClass,
    cycles: &[Vec<EdgeId>],
) -> Vec<NodeId> {
    let mut flags = vec![false; g.node_count() as usize];
    for c in cycles {
        if cycle_pairing(g, alpha, c).is_zero() {
            for &eid in c {
                flags[g.edge(eid).src as usize] = true;
            }
        }
    }
    flags
        .iter()
        .enumerate()
        .filter_map(|(v, &f)| f.then_some(v as NodeId))
        .collect()
}

/// Oracle max ratio: exact max of pairing / length over simple cycles.
pub fn oracle_max_ratio(
    g: &Digraph,
    alpha: &CohomologyClass,
    cycles: &[Vec<EdgeId>],
) -> Option<BigRational> {
    let t = BigRational::from_float(g.t_flow()).unwrap();
    cycles
        .iter()
        .map(|c| {
            cycle_pairing(g, alpha, c)
                / (BigRational::from_integer(BigInt::from(c.len() as i64)) * t.clone())
        })
        .max()
}

/// Reachability by nonempty paths, brute force.
pub fn reach_nonempty(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.node_count() as usize;
    let mut reach = vec![vec![false; n]; n];
    for e in g.edges() {
        reach[e.src as usize][e.dst as usize] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Random graph with the given limits; displacements uniform per axis.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_nodes: u64,
    max_edges: usize,
    dim: usize,
    disp: i32,
) -> Digraph {
    let n = rng.gen_range(2..=max_nodes);
    let e = rng.gen_range(1..=max_edges);
    let edges: Vec<Edge> = (0..e)
        .map(|_| Edge {
            src: rng.gen_range(0..n),
            dst: rng.gen_range(0..n),
            displacement: (0..dim).map(|_| rng.gen_range(-disp..=disp)).collect(),
        })
        .collect();
    Digraph::new(n, dim, 1.0, chainscope::graph::normalize_edges(edges)).unwrap()
}

/// Random graph that is strongly connected (a ring plus chords), so closed
/// walks of any length exist.
pub fn random_strongly_connected(
    rng: &mut ChaCha8Rng,
    nodes: u64,
    extra_edges: usize,
    dim: usize,
    disp: i32,
) -> Digraph {
    let mut edges: Vec<Edge> = (0..nodes)
        .map(|i| Edge {
            src: i,
            dst: (i + 1) % nodes,
            displacement: (0..dim).map(|_| rng.gen_range(-disp..=disp)).collect(),
        })
        .collect();
    for _ in 0..extra_edges {
        edges.push(Edge {
            src: rng.gen_range(0..nodes),
            dst: rng.gen_range(0..nodes),
            displacement: (0..dim).map(|_| rng.gen_range(-disp..=disp)).collect(),
        });
    }
    Digraph::new(nodes, dim, 1.0, chainscope::graph::normalize_edges(edges)).unwrap()
}

/// Random closed walk from a random start, wandering then returning along
/// outgoing edges (requires strong connectivity).
pub fn random_closed_walk(rng: &mut ChaCha8Rng, g: &Digraph, wander: usize) -> Vec<EdgeId> {
    let start = rng.gen_range(0..g.node_count());
    let mut walk = Vec::new();
    let mut at = start;
    for _ in 0..wander {
        let out = g.out_edges(at);
        let eid = out[rng.gen_range(0..out.len())];
        walk.push(eid);
        at = g.edge(eid).dst;
    }
    // walk home by BFS over edges
    if at != start {
        let n = g.node_count() as usize;
        let mut back: Vec<Option<EdgeId>> = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(at);
        let mut seen = vec![false; n];
        seen[at as usize] = true;
        'bfs: while let Some(v) = queue.pop_front() {
            for &eid in g.out_edges(v) {
                let w = g.edge(eid).dst;
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    back[w as usize] = Some(eid);
                    if w == start {
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        let mut tail = Vec::new();
        let mut node = start;
        while node != at {
            let eid = back[node as usize].expect("graph must be strongly connected");
            tail.push(eid);
            node = g.edge(eid).src;
        }
        tail.reverse();
        walk.extend(tail);
    }
    if walk.is_empty() {
        // ensure nonemptiness with one lap around the ring
        let mut node = start;
        loop {
            let eid = g.out_edges(node)[0];
            walk.push(eid);
            node = g.edge(eid).dst;
            if node == start {
                break;
            }
        }
    }
    walk
}

/// Random rational class with entries `p/q`, `|p| <= 9`, `1 <= q <= 9`.
pub fn random_rational_class(rng: &mut ChaCha8Rng, dim: usize) -> CohomologyClass {
    CohomologyClass::rational(
        (0..dim)
            .map(|_| (rng.gen_range(-9i64..=9), rng.gen_range(1i64..=9)))
            .collect(),
    )
    .unwrap()
}

/// Rejection-sample a rational class that is quasi-Lyapunov on the graph.
pub fn random_ql_class(
    rng: &mut ChaCha8Rng,
    g: &Digraph,
    tries: usize,
) -> Option<CohomologyClass> {
    for _ in 0..tries {
        let alpha = random_rational_class(rng, g.dimension());
        if chainscope::quasi::is_quasi_lyapunov(g, &alpha).unwrap().is_ql() {
            return Some(alpha);
        }
    }
    None
}
