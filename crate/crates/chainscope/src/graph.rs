//! Directed graphs whose edges carry an integer homology displacement and a
//! common duration. Every analysis in the crate runs on this structure; a
//! built transition graph wraps one together with its grid geometry.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Index of an edge in a [`Digraph`].
pub type EdgeId = usize;

/// Node index. Transition graphs use the flat box index.
pub type NodeId = u64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    /// Lattice element of `H_1 = Z^d` gained along the edge.
    pub displacement: Vec<i32>,
}

/// A digraph on `0..node_count` with displacement-labelled edges, each of
/// duration `t_flow`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Digraph {
    node_count: u64,
    dimension: usize,
    t_flow: f64,
    edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: OnceAdjacency,
}

/// Cached CSR adjacency (edge ids grouped by source node).
#[derive(Clone, Debug, Default)]
struct OnceAdjacency(std::sync::OnceLock<Adjacency>);

#[derive(Clone, Debug, PartialEq)]
struct Adjacency {
    offsets: Vec<usize>,
    edge_ids: Vec<EdgeId>,
}

impl Digraph {
    pub fn new(node_count: u64, dimension: usize, t_flow: f64, edges: Vec<Edge>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(t_flow > 0.0) {
            return Err(Error::InvalidParameter("edge duration must be > 0".into()));
        }
        for e in &edges {
            if e.src >= node_count || e.dst >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "edge endpoint out of range: {} -> {}",
                    e.src, e.dst
                )));
            }
            if e.displacement.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: e.displacement.len(),
                });
            }
        }
        Ok(Self {
            node_count,
            dimension,
            t_flow,
            edges,
            adjacency: OnceAdjacency::default(),
        })
    }

    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Flow time per edge.
    pub fn t_flow(&self) -> f64 {
        self.t_flow
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    fn adjacency(&self) -> &Adjacency {
        self.adjacency.0.get_or_init(|| {
            let n = self.node_count as usize;
            let mut counts = vec![0usize; n + 1];
            for e in &self.edges {
                counts[e.src as usize + 1] += 1;
            }
            for i in 0..n {
                counts[i + 1] += counts[i];
            }
            let mut edge_ids = vec![0usize; self.edges.len()];
            let mut cursor = counts.clone();
            for (id, e) in self.edges.iter().enumerate() {
                edge_ids[cursor[e.src as usize]] = id;
                cursor[e.src as usize] += 1;
            }
            Adjacency {
                offsets: counts,
                edge_ids,
            }
        })
    }

    /// Edge ids leaving `node`.
    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        let adj = self.adjacency();
        let u = node as usize;
        &adj.edge_ids[adj.offsets[u]..adj.offsets[u + 1]]
    }

    /// Strongly connected components in reverse topological discovery order,
    /// relabelled so that component ids increase along a topological order of
    /// the condensation (sources first).
    pub fn strongly_connected_components(&self) -> SccResult {
        let n = self.node_count as usize;
        let mut index = vec![usize::MAX; n];
        let mut lowlink = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut comp_of = vec![usize::MAX; n];
        let mut next_index = 0usize;
        let mut comp_count = 0usize;

        // iterative Tarjan
        enum Frame {
            Visit(usize),
            PostEdge(usize, usize),
        }
        let mut work: Vec<Frame> = Vec::new();
        let mut edge_cursor = vec![0usize; n];

        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            work.push(Frame::Visit(root));
            while let Some(frame) = work.pop() {
                match frame {
                    Frame::Visit(v) => {
                        if index[v] == usize::MAX {
                            index[v] = next_index;
                            lowlink[v] = next_index;
                            next_index += 1;
                            stack.push(v);
                            on_stack[v] = true;
                        }
                        let out = self.out_edges(v as NodeId);
                        let mut advanced = false;
                        while edge_cursor[v] < out.len() {
                            let w = self.edges[out[edge_cursor[v]]].dst as usize;
                            edge_cursor[v] += 1;
                            if index[w] == usize::MAX {
                                work.push(Frame::PostEdge(v, w));
                                work.push(Frame::Visit(w));
                                advanced = true;
                                break;
                            } else if on_stack[w] {
                                lowlink[v] = lowlink[v].min(index[w]);
                            }
                        }
                        if advanced {
                            continue;
                        }
                        if lowlink[v] == index[v] {
                            loop {
                                let w = stack.pop().expect("tarjan stack underflow");
                                on_stack[w] = false;
                                comp_of[w] = comp_count;
                                if w == v {
                                    break;
                                }
                            }
                            comp_count += 1;
                        }
                    }
                    Frame::PostEdge(v, w) => {
                        lowlink[v] = lowlink[v].min(lowlink[w]);
                        // resume v
                        work.push(Frame::Visit(v));
                    }
                }
            }
        }

        // Tarjan emits components in reverse topological order; flip so ids
        // increase from sources to sinks.
        for c in comp_of.iter_mut() {
            *c = comp_count - 1 - *c;
        }

        let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); comp_count];
        for v in 0..n {
            members[comp_of[v]].push(v as NodeId);
        }

        let mut has_cycle = vec![false; comp_count];
        for e in &self.edges {
            let cs = comp_of[e.src as usize];
            if cs == comp_of[e.dst as usize] && (members[cs].len() >= 2 || e.src == e.dst) {
                has_cycle[cs] = true;
            }
        }

        SccResult {
            comp_of,
            members,
            has_cycle,
        }
    }
}

/// Output of the SCC pass.
#[derive(Clone, Debug)]
pub struct SccResult {
    /// node -> component id, ids topologically ordered (sources first)
    pub comp_of: Vec<usize>,
    /// component id -> member nodes
    pub members: Vec<Vec<NodeId>>,
    /// component id -> contains a cycle (size >= 2 or a self-loop)
    pub has_cycle: Vec<bool>,
}

impl SccResult {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

impl PartialEq for OnceAdjacency {
    fn eq(&self, _other: &Self) -> bool {
        true // cache only, not part of the value
    }
}

/// Deterministic normal form: edges sorted by (src, dst, displacement) with
/// exact duplicates removed.
pub fn normalize_edges(mut edges: Vec<Edge>) -> Vec<Edge> {
    edges.sort_by(|a, b| {
        (a.src, a.dst, &a.displacement).cmp(&(b.src, b.dst, &b.displacement))
    });
    edges.dedup();
    edges
}
