//! Longest-path machinery over displacement pairings: positive-cycle
//! detection with certificate extraction, edgewise potentials, and the tight
//! subgraph they induce. Generic over exact integer and floating weights.

use crate::graph::{Digraph, EdgeId};

/// Scalar weights usable in the relaxation loops. `tol` separates genuine
/// improvements from rounding noise; exact integers use zero.
pub trait Weight: Copy + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn gt(self, other: Self, tol: Self) -> bool;
    fn abs_le(self, tol: Self) -> bool;
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }
    fn add(self, other: Self) -> Self {
        self.checked_add(other).expect("i128 overflow in relaxation")
    }
    fn sub(self, other: Self) -> Self {
        self.checked_sub(other).expect("i128 overflow in relaxation")
    }
    fn gt(self, other: Self, _tol: Self) -> bool {
        self > other
    }
    fn abs_le(self, tol: Self) -> bool {
        self.abs() <= tol
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn gt(self, other: Self, tol: Self) -> bool {
        self > other + tol
    }
    fn abs_le(self, tol: Self) -> bool {
        self.abs() <= tol
    }
}

/// Outcome of the relaxation: either stable potentials or a positive cycle.
pub enum Relaxation<W> {
    /// `g` values with `g(v) >= g(u) + w(u->v)` for every edge and `g >= 0`.
    Potentials(Vec<W>),
    /// Edge ids of a cycle whose total weight is strictly positive.
    PositiveCycle(Vec<EdgeId>),
}

/// Bellman-Ford from an implicit source attached to every node with weight 0.
/// Detects cycles of strictly positive total weight; otherwise returns the
/// least nonnegative potentials.
pub fn relax<W: Weight>(graph: &Digraph, weights: &[W], tol: W) -> Relaxation<W> {
    let n = graph.node_count() as usize;
    let mut g = vec![W::zero(); n];
    let mut pred: Vec<Option<EdgeId>> = vec![None; n];

    let mut changed = true;
    let mut rounds = 0usize;
    while changed && rounds <= n {
        changed = false;
        for (id, e) in graph.edges().iter().enumerate() {
            let cand = g[e.src as usize].add(weights[id]);
            if cand.gt(g[e.dst as usize], tol) {
                g[e.dst as usize] = cand;
                pred[e.dst as usize] = Some(id);
                changed = true;
            }
        }
        rounds += 1;
    }

    if !changed {
        return Relaxation::Potentials(g);
    }

    // an edge still relaxing after n+1 full passes certifies a positive
    // cycle; root the predecessor chain at it and walk backwards until a
    // node repeats
    let (wid, wedge) = graph
        .edges()
        .iter()
        .enumerate()
        .find(|(id, e)| g[e.src as usize].add(weights[*id]).gt(g[e.dst as usize], tol))
        .expect("relaxation flagged without a witness");
    pred[wedge.dst as usize] = Some(wid);

    let mut pos = vec![usize::MAX; n];
    let mut back_edges: Vec<EdgeId> = Vec::new();
    let mut node = wedge.dst as usize;
    loop {
        if pos[node] != usize::MAX {
            let mut cycle: Vec<EdgeId> = back_edges[pos[node]..].to_vec();
            cycle.reverse();
            return Relaxation::PositiveCycle(cycle);
        }
        pos[node] = back_edges.len();
        let e = pred[node].expect("positive-cycle predecessor chain broke");
        back_edges.push(e);
        node = graph.edge(e).src as usize;
    }
}

/// Edge flags for the tight subgraph `g(dst) = g(src) + w` (within `tol`).
pub fn tight_edges<W: Weight>(graph: &Digraph, weights: &[W], g: &[W], tol: W) -> Vec<bool> {
    graph
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let slack = g[e.dst as usize].sub(g[e.src as usize].add(weights[id]));
            slack.abs_le(tol)
        })
        .collect()
}

/// Sum of edge weights along a walk.
pub fn walk_weight<W: Weight>(weights: &[W], walk: &[EdgeId]) -> W {
    walk.iter()
        .fold(W::zero(), |acc, &id| acc.add(weights[id]))
}
