//! Chain-recurrence structure of a transition graph: recurrent nodes,
//! recurrence chains (cyclic strongly connected components), the Conley
//! order on chains, attractor-repeller pairs and the graded pre-Lyapunov
//! functions they generate.

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use serde::Serialize;
use std::collections::VecDeque;

/// SCC decomposition with recurrence flags and the condensation DAG.
#[derive(Clone, Debug)]
pub struct ChainDecomposition {
    /// node -> SCC id; ids are topologically ordered, sources first
    pub scc_id: Vec<usize>,
    /// node -> lies on some cycle
    pub recurrent: Vec<bool>,
    /// SCC id -> member nodes
    pub scc_members: Vec<Vec<NodeId>>,
    /// condensation adjacency (deduplicated, acyclic)
    pub condensation: Vec<Vec<usize>>,
    /// SCC ids that contain a cycle; these are the recurrence chains
    pub chain_ids: Vec<usize>,
}

impl ChainDecomposition {
    pub fn scc_count(&self) -> usize {
        self.scc_members.len()
    }

    /// Chain index (position in `chain_ids`) of an SCC id, if recurrent.
    pub fn chain_index(&self, scc: usize) -> Option<usize> {
        self.chain_ids.binary_search(&scc).ok()
    }

    /// Member nodes of chain `k` (indexing `chain_ids`).
    pub fn chain_members(&self, k: usize) -> &[NodeId] {
        &self.scc_members[self.chain_ids[k]]
    }

    /// JSON export: chains as node lists plus the Conley order as pairs
    /// `[i, j]` meaning chain i reaches chain j.
    pub fn export_json(&self, order: &ConleyOrder) -> serde_json::Value {
        let chains: Vec<Vec<NodeId>> = (0..self.chain_ids.len())
            .map(|k| self.chain_members(k).to_vec())
            .collect();
        let mut pairs = Vec::new();
        for i in 0..self.chain_ids.len() {
            for j in 0..self.chain_ids.len() {
                if i != j && order.reaches(i, j) {
                    pairs.push([i, j]);
                }
            }
        }
        serde_json::json!({ "chains": chains, "order": pairs })
    }
}

/// Tarjan-style decomposition; recurrent means lying on a cycle (SCC of size
/// at least two, or a self-loop).
pub fn chain_decompose(graph: &Digraph) -> ChainDecomposition {
    let scc = graph.strongly_connected_components();
    let recurrent: Vec<bool> = (0..graph.node_count() as usize)
        .map(|v| scc.has_cycle[scc.comp_of[v]])
        .collect();

    let mut condensation: Vec<Vec<usize>> = vec![Vec::new(); scc.count()];
    for e in graph.edges() {
        let (a, b) = (scc.comp_of[e.src as usize], scc.comp_of[e.dst as usize]);
        if a != b {
            condensation[a].push(b);
        }
    }
    for adj in condensation.iter_mut() {
        adj.sort_unstable();
        adj.dedup();
    }

    let chain_ids: Vec<usize> = (0..scc.count()).filter(|&c| scc.has_cycle[c]).collect();

    ChainDecomposition {
        scc_id: scc.comp_of,
        recurrent,
        scc_members: scc.members,
        condensation,
        chain_ids,
    }
}

/// Reachability between recurrence chains in the condensation: `R_i >= R_j`
/// iff `R_i` reaches `R_j`.
#[derive(Clone, Debug)]
pub struct ConleyOrder {
    /// chain index -> bitset over chain indices reachable from it
    reach: Vec<Vec<u64>>,
}

impl ConleyOrder {
    /// Chain `i` reaches chain `j` (reflexive).
    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.reach[i][j / 64] & (1 << (j % 64)) != 0
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.reaches(i, j) || self.reaches(j, i)
    }

    pub fn chain_count(&self) -> usize {
        self.reach.len()
    }
}

pub fn conley_order(dec: &ChainDecomposition) -> ConleyOrder {
    let n = dec.scc_count();
    let m = dec.chain_ids.len();
    let words = m.div_ceil(64).max(1);
    let mut chain_of = vec![usize::MAX; n];
    for (k, &c) in dec.chain_ids.iter().enumerate() {
        chain_of[c] = k;
    }
    // which chains each SCC reaches, in reverse topological order
    let mut closure: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    for c in (0..n).rev() {
        if chain_of[c] != usize::MAX {
            closure[c][chain_of[c] / 64] |= 1 << (chain_of[c] % 64);
        }
        let (head, tail) = closure.split_at_mut(c + 1);
        let dst = &mut head[c];
        for &s in &dec.condensation[c] {
            for (w, bits) in dst.iter_mut().zip(&tail[s - c - 1]) {
                *w |= bits;
            }
        }
    }
    let reach = dec.chain_ids.iter().map(|&c| closure[c].clone()).collect();
    ConleyOrder { reach }
}

/// Attractor-repeller pair: `attractor` is forward-closed, `repeller` is
/// backward-closed and disjoint from it, and every recurrence chain lies
/// wholly in one of the two.
#[derive(Clone, Debug, Serialize)]
pub struct AttractorPair {
    pub attractor: Vec<bool>,
    pub repeller: Vec<bool>,
}

impl AttractorPair {
    pub fn attractor_nodes(&self) -> Vec<NodeId> {
        collect(&self.attractor)
    }

    pub fn repeller_nodes(&self) -> Vec<NodeId> {
        collect(&self.repeller)
    }
}

fn collect(flags: &[bool]) -> Vec<NodeId> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(v, &f)| f.then_some(v as NodeId))
        .collect()
}

/// Forward closure of the seed chains' nodes, paired with the dual repeller:
/// the nodes from which some maximal path avoids the attractor forever
/// (equivalently, reaches a cycle or a sink outside it).
pub fn attractor_from(
    graph: &Digraph,
    dec: &ChainDecomposition,
    seed_chains: &[usize],
) -> Result<AttractorPair> {
    let n = graph.node_count() as usize;
    for &k in seed_chains {
        if k >= dec.chain_ids.len() {
            return Err(Error::UnknownChain(k));
        }
    }

    // forward closure by BFS
    let mut attractor = vec![false; n];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &k in seed_chains {
        for &v in dec.chain_members(k) {
            if !attractor[v as usize] {
                attractor[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &eid in graph.out_edges(v) {
            let w = graph.edge(eid).dst;
            if !attractor[w as usize] {
                attractor[w as usize] = true;
                queue.push_back(w);
            }
        }
    }

    let repeller = repeller_of(graph, &attractor);
    let pair = AttractorPair {
        attractor,
        repeller,
    };
    validate_pair(graph, dec, &pair)?;
    Ok(pair)
}

/// Nodes admitting a maximal forward path that avoids `attractor`: backward
/// closure, inside the complement, of the complement's cycles and sinks.
fn repeller_of(graph: &Digraph, attractor: &[bool]) -> Vec<bool> {
    let n = graph.node_count() as usize;
    let mut seed = vec![false; n];

    // cycles of the induced subgraph: a Tarjan pass over the full graph with
    // attractor nodes removed is equivalent to filtering chains, because a
    // cycle never crosses the forward-closed attractor boundary
    let scc = graph.strongly_connected_components();
    let mut comp_size = vec![0usize; scc.count()];
    for v in 0..n {
        if !attractor[v] {
            comp_size[scc.comp_of[v]] += 1;
        }
    }
    for e in graph.edges() {
        let (u, v) = (e.src as usize, e.dst as usize);
        if attractor[u] || attractor[v] {
            continue;
        }
        if scc.comp_of[u] == scc.comp_of[v] && (u == v || comp_size[scc.comp_of[u]] >= 2) {
            seed[u] = true;
            seed[v] = true;
        }
    }
    // sinks of the induced subgraph
    for v in 0..n {
        if attractor[v] {
            continue;
        }
        let escapes = graph
            .out_edges(v as NodeId)
            .iter()
            .any(|&eid| !attractor[graph.edge(eid).dst as usize]);
        if !escapes {
            // every out-edge (if any) enters the attractor; the node is a
            // sink of the complement only when it has no out-edges at all
            if graph.out_edges(v as NodeId).is_empty() {
                seed[v] = true;
            }
        }
    }

    // backward closure within the complement
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, e) in graph.edges().iter().enumerate() {
        incoming[e.dst as usize].push(id);
    }
    let mut repeller = seed;
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| repeller[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &eid in &incoming[v] {
            let u = graph.edge(eid).src as usize;
            if !attractor[u] && !repeller[u] {
                repeller[u] = true;
                queue.push_back(u);
            }
        }
    }
    repeller
}

/// Assert the attractor-repeller axioms; every constructed pair passes here.
pub fn validate_pair(
    graph: &Digraph,
    dec: &ChainDecomposition,
    pair: &AttractorPair,
) -> Result<()> {
    let a = &pair.attractor;
    let r = &pair.repeller;
    for e in graph.edges() {
        if a[e.src as usize] && !a[e.dst as usize] {
            return Err(Error::InvalidParameter(
                "attractor is not forward-closed".into(),
            ));
        }
        if r[e.dst as usize] && !r[e.src as usize] {
            return Err(Error::InvalidParameter(
                "repeller is not backward-closed".into(),
            ));
        }
    }
    if (0..a.len()).any(|v| a[v] && r[v]) {
        return Err(Error::InvalidParameter(
            "attractor and repeller intersect".into(),
        ));
    }
    for k in 0..dec.chain_ids.len() {
        let members = dec.chain_members(k);
        let in_a = members.iter().filter(|&&v| a[v as usize]).count();
        let in_r = members.iter().filter(|&&v| r[v as usize]).count();
        if !(in_a == members.len() && in_r == 0 || in_a == 0 && in_r == members.len()) {
            return Err(Error::InvalidParameter(format!(
                "chain {k} is split by the pair"
            )));
        }
    }
    Ok(())
}

/// Graded pre-Lyapunov node function of a pair: 0 on the attractor, 1 on the
/// repeller, and a longest-path grading strictly decreasing along every edge
/// leaving the basin gap, rescaled into (0,1).
pub fn graded_pre_lyapunov(graph: &Digraph, pair: &AttractorPair) -> Vec<f64> {
    let n = graph.node_count() as usize;
    let gap: Vec<bool> = (0..n)
        .map(|v| !pair.attractor[v] && !pair.repeller[v])
        .collect();

    // the gap induces a DAG (a gap cycle would belong to the repeller);
    // level(u) = longest edge count until the attractor
    let mut level = vec![0u64; n];
    let mut order: Vec<usize> = Vec::new();
    let mut out_deg = vec![0usize; n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edges() {
        let (u, v) = (e.src as usize, e.dst as usize);
        if gap[u] && gap[v] {
            out_deg[u] += 1;
            incoming[v].push(u);
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| gap[v] && out_deg[v] == 0).collect();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &u in &incoming[v] {
            out_deg[u] -= 1;
            if out_deg[u] == 0 {
                queue.push_back(u);
            }
        }
    }
    debug_assert_eq!(order.len(), gap.iter().filter(|&&g| g).count());

    for &v in &order {
        let mut best = 1u64; // at least one step from the attractor
        for &eid in graph.out_edges(v as NodeId) {
            let w = graph.edge(eid).dst as usize;
            if gap[w] {
                best = best.max(level[w] + 1);
            }
        }
        level[v] = best;
    }

    let max_level = order.iter().map(|&v| level[v]).max().unwrap_or(0);
    let denom = (max_level + 1) as f64;
    (0..n)
        .map(|v| {
            if pair.repeller[v] {
                1.0
            } else if gap[v] {
                level[v] as f64 / denom
            } else {
                0.0
            }
        })
        .collect()
}
