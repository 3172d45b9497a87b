//! Cycle homology classes and the reduction of long walks into simple
//! pieces. The reduction peels a closed walk into simple cycles (and an open
//! walk into a simple path plus simple cycles) conserving the summed
//! displacement and the summed length exactly, in integer arithmetic.

use crate::error::{Error, Result};
use crate::graph::{Digraph, EdgeId, NodeId};
use serde::Serialize;
use std::collections::HashMap;

/// Homology class of a closed walk: summed displacement, edge count, and the
/// derived direction `h / (edges * T)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleClass {
    pub h: Vec<i64>,
    pub edge_count: usize,
}

impl CycleClass {
    /// Length in flow time.
    pub fn length(&self, t_flow: f64) -> f64 {
        self.edge_count as f64 * t_flow
    }

    /// Direction `h / length`; recomputed from the exact data so that
    /// `direction * length == h` holds by construction.
    pub fn direction(&self, t_flow: f64) -> Vec<f64> {
        let len = self.length(t_flow);
        self.h.iter().map(|&x| x as f64 / len).collect()
    }
}

/// Validate that `walk` is a nonempty closed edge walk and return its class.
pub fn cycle_class(graph: &Digraph, walk: &[EdgeId]) -> Result<CycleClass> {
    check_walk(graph, walk, true)?;
    Ok(class_of(graph, walk))
}

fn class_of(graph: &Digraph, walk: &[EdgeId]) -> CycleClass {
    let mut h = vec![0i64; graph.dimension()];
    for &id in walk {
        for (acc, &d) in h.iter_mut().zip(&graph.edge(id).displacement) {
            *acc += d as i64;
        }
    }
    CycleClass {
        h,
        edge_count: walk.len(),
    }
}

fn check_walk(graph: &Digraph, walk: &[EdgeId], closed: bool) -> Result<()> {
    if walk.is_empty() {
        return Err(Error::EmptyWalk);
    }
    for (i, pair) in walk.windows(2).enumerate() {
        let (a, b) = (graph.edge(pair[0]), graph.edge(pair[1]));
        if a.dst != b.src {
            return Err(Error::WalkNotClosed {
                index: i,
                got: a.dst,
                expected: b.src,
            });
        }
    }
    if closed {
        let first = graph.edge(walk[0]);
        let last = graph.edge(walk[walk.len() - 1]);
        if last.dst != first.src {
            return Err(Error::WalkNotClosed {
                index: walk.len() - 1,
                got: last.dst,
                expected: first.src,
            });
        }
    }
    Ok(())
}

/// A piece produced by the reduction: its edges plus the exact class.
#[derive(Clone, Debug, Serialize)]
pub struct SimplePiece {
    pub edges: Vec<EdgeId>,
    pub class: CycleClass,
}

/// Peel a closed walk into simple cycles, Hierholzer style: scanning the
/// walk, whenever the current node reappears on the pending stack, the edges
/// in between split off as one simple cycle. Each piece visits a node at
/// most once, and the summed displacements and edge counts equal the walk's
/// exactly.
pub fn eulerian_reduce(graph: &Digraph, walk: &[EdgeId]) -> Result<Vec<SimplePiece>> {
    check_walk(graph, walk, true)?;
    let (cycles, leftover) = peel(graph, walk);
    debug_assert!(leftover.is_empty(), "closed walk left an open remainder");
    Ok(cycles)
}

/// Reduce an open walk to a simple path with the same endpoints plus simple
/// cycles.
pub fn open_walk_reduce(graph: &Digraph, walk: &[EdgeId]) -> Result<(SimplePiece, Vec<SimplePiece>)> {
    check_walk(graph, walk, false)?;
    let (cycles, path) = peel(graph, walk);
    Ok((
        SimplePiece {
            class: class_of(graph, &path),
            edges: path,
        },
        cycles,
    ))
}

fn peel(graph: &Digraph, walk: &[EdgeId]) -> (Vec<SimplePiece>, Vec<EdgeId>) {
    let start = graph.edge(walk[0]).src;
    let mut stack: Vec<EdgeId> = Vec::new();
    // node -> stack length after its visit
    let mut seen_at: HashMap<NodeId, usize> = HashMap::new();
    seen_at.insert(start, 0);
    let mut cycles = Vec::new();

    for &eid in walk {
        stack.push(eid);
        let node = graph.edge(eid).dst;
        if let Some(&pos) = seen_at.get(&node) {
            let piece: Vec<EdgeId> = stack.drain(pos..).collect();
            for &e in &piece {
                seen_at.remove(&graph.edge(e).dst);
            }
            seen_at.insert(node, pos);
            cycles.push(SimplePiece {
                class: class_of(graph, &piece),
                edges: piece,
            });
        } else {
            seen_at.insert(node, stack.len());
        }
    }
    (cycles, stack)
}

/// True when a closed walk visits each node at most once.
pub fn is_simple_cycle(graph: &Digraph, walk: &[EdgeId]) -> bool {
    let mut seen = std::collections::HashSet::new();
    walk.iter().all(|&e| seen.insert(graph.edge(e).src))
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
                Edge {
                    src: 0,
                    dst: 1,
                    displacement: vec![1, 0],
                },
                Edge {
                    src: 1,
                    dst: 0,
                    displacement: vec![0, 1],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn class_of_g1_cycle() {
        let g = g1();
        let class = cycle_class(&g, &[0, 1]).unwrap();
        assert_eq!(class.h, vec![1, 1]);
        assert_eq!(class.edge_count, 2);
        assert_eq!(class.length(g.t_flow()), 2.0);
        assert_eq!(class.direction(g.t_flow()), vec![0.5, 0.5]);
    }

    #[test]
    fn doubling_a_walk_doubles_class() {
        let g = g1();
        let once = cycle_class(&g, &[0, 1]).unwrap();
        let twice = cycle_class(&g, &[0, 1, 0, 1]).unwrap();
        assert_eq!(twice.h, vec![2, 2]);
        assert_eq!(twice.edge_count, 2 * once.edge_count);
        assert_eq!(twice.direction(1.0), once.direction(1.0));
    }

    #[test]
    fn open_walk_is_rejected_as_cycle() {
        let g = g1();
        assert!(matches!(
            cycle_class(&g, &[0]),
            Err(Error::WalkNotClosed { .. })
        ));
        assert!(matches!(cycle_class(&g, &[]), Err(Error::EmptyWalk)));
    }

    #[test]
    fn simple_cycle_reduces_to_itself() {
        let g = g1();
        let pieces = eulerian_reduce(&g, &[0, 1]).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].edges, vec![0, 1]);
    }

    #[test]
    fn figure_eight_splits_into_two_cycles() {
        // a=0, b=1, c=2: walk a->b->a->c->a
        let g = Digraph::new(
            3,
            1,
            1.0,
            vec![
                Edge { src: 0, dst: 1, displacement: vec![1] },
                Edge { src: 1, dst: 0, displacement: vec![0] },
                Edge { src: 0, dst: 2, displacement: vec![-2] },
                Edge { src: 2, dst: 0, displacement: vec![1] },
            ],
        )
        .unwrap();
        let pieces = eulerian_reduce(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].edges, vec![0, 1]);
        assert_eq!(pieces[1].edges, vec![2, 3]);
        let total_h: i64 = pieces.iter().map(|p| p.class.h[0]).sum();
        assert_eq!(total_h, 0);
        let total_len: usize = pieces.iter().map(|p| p.class.edge_count).sum();
        assert_eq!(total_len, 4);
    }

    #[test]
    fn open_walk_with_repeat_gives_shortcut_and_cycle() {
        // 0 -> 1 -> 1 (self loop) -> 2
        let g = Digraph::new(
            3,
            1,
            1.0,
            vec![
                Edge { src: 0, dst: 1, displacement: vec![1] },
                Edge { src: 1, dst: 1, displacement: vec![5] },
                Edge { src: 1, dst: 2, displacement: vec![-1] },
            ],
        )
        .unwrap();
        let (path, cycles) = open_walk_reduce(&g, &[0, 1, 2]).unwrap();
        assert_eq!(path.edges, vec![0, 2]);
        assert_eq!(path.class.h, vec![0]);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].class.h, vec![5]);
        assert!(is_simple_cycle(&g, &cycles[0].edges));
    }

    #[test]
    fn simple_path_reduces_to_itself() {
        let g = Digraph::new(
            3,
            1,
            1.0,
            vec![
                Edge { src: 0, dst: 1, displacement: vec![1] },
                Edge { src: 1, dst: 2, displacement: vec![2] },
            ],
        )
        .unwrap();
        let (path, cycles) = open_walk_reduce(&g, &[0, 1]).unwrap();
        assert_eq!(path.edges, vec![0, 1]);
        assert!(cycles.is_empty());
    }
}
