//! Building the transition digraph of a flow over a box grid: integrate
//! sample points of every box for time T, inflate the endpoint by the jump
//! radius, and connect to every box the inflated ball meets. Edge
//! displacements are the lattice offsets of the destination box copy in the
//! cover, so path sums recover the homology class of a realization.

use crate::error::{Error, Result};
use crate::flow::{integrate, LiftedPoint, VectorField};
use crate::graph::{normalize_edges, Digraph, Edge, NodeId};
use crate::grid::{BoxGrid, BoxId};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Parameters of a build. `epsilon` defaults to the box side (the sup-metric
/// box diameter), `t_flow` to 1, `step` to `t_flow / 64`.
#[derive(Clone, Debug, Serialize)]
pub struct BuildParams {
    pub resolution: u32,
    pub t_flow: f64,
    pub epsilon: f64,
    pub step: f64,
    pub samples_per_box: usize,
    pub edge_cap: u64,
}

impl BuildParams {
    pub fn new(resolution: u32, dimension: usize) -> Self {
        let eps = 1.0 / resolution as f64;
        Self {
            resolution,
            t_flow: 1.0,
            epsilon: eps,
            step: 1.0 / 64.0,
            samples_per_box: 1 + (1usize << dimension),
            edge_cap: 20_000_000,
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t_flow = t;
        self.step = t / 64.0;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_per_box = samples;
        self
    }
}

/// The (epsilon, T) transition digraph over a box grid.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    grid: BoxGrid,
    epsilon: f64,
    digraph: Digraph,
    fingerprint: [u8; 32],
}

impl TransitionGraph {
    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t_flow(&self) -> f64 {
        self.digraph.t_flow()
    }

    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn node_count(&self) -> u64 {
        self.digraph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.digraph.edges().len()
    }

    pub fn fingerprint_matches(&self, field: &VectorField) -> bool {
        self.fingerprint == field.fingerprint()
    }

    /// Assemble from raw parts (deserialization and synthetic fixtures).
    pub fn from_parts(
        grid: BoxGrid,
        epsilon: f64,
        t_flow: f64,
        fingerprint: [u8; 32],
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be > 0".into()));
        }
        let digraph = Digraph::new(grid.box_count(), grid.dimension(), t_flow, edges)?;
        Ok(Self {
            grid,
            epsilon,
            digraph,
            fingerprint,
        })
    }
}

/// Build the transition graph. Deterministic: sample points come from
/// per-box seeded generators and the edge list is sorted and deduplicated,
/// so identical parameters give identical graphs regardless of parallelism.
pub fn build_transition_graph(field: &VectorField, params: &BuildParams) -> Result<TransitionGraph> {
    let d = field.dimension();
    let grid = BoxGrid::new(d, params.resolution)?;
    if !(params.t_flow > 0.0) {
        return Err(Error::InvalidParameter("T must be > 0".into()));
    }
    let min_eps = grid.diameter_sup() * (1.0 - 1e-12);
    if params.epsilon < min_eps {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} must be at least the box diameter {}",
            params.epsilon,
            grid.diameter_sup()
        )));
    }
    if params.epsilon + grid.side() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(
            "epsilon + box side must not exceed 1".into(),
        ));
    }

    // displacement bound per axis used as a sanity invariant below
    let bound: Vec<i64> = field
        .speed_bound()
        .iter()
        .map(|&s| (params.t_flow * s).ceil() as i64 + 1)
        .collect();

    let boxes: Vec<u64> = (0..grid.box_count()).collect();
    let edge_lists: Vec<Result<Vec<Edge>>> = boxes
        .par_iter()
        .map(|&flat| build_box_edges(field, &grid, params, flat, &bound))
        .collect();

    let mut edges = Vec::new();
    for list in edge_lists {
        edges.extend(list?);
        if edges.len() as u64 > params.edge_cap {
            return Err(Error::EdgeOverflow {
                got: edges.len() as u64,
                cap: params.edge_cap,
            });
        }
    }
    let edges = normalize_edges(edges);

    let digraph = Digraph::new(grid.box_count(), d, params.t_flow, edges)?;
    Ok(TransitionGraph {
        grid,
        epsilon: params.epsilon,
        digraph,
        fingerprint: field.fingerprint(),
    })
}

fn build_box_edges(
    field: &VectorField,
    grid: &BoxGrid,
    params: &BuildParams,
    flat: u64,
    bound: &[i64],
) -> Result<Vec<Edge>> {
    let d = grid.dimension();
    let id = BoxId(flat);
    let samples = box_samples(grid, id, params.samples_per_box);
    let mut edges = Vec::new();
    let n = grid.resolution() as i64;

    for sample in samples {
        let seg = integrate(field, &LiftedPoint::new(sample), params.t_flow, params.step)?;
        let end = seg.end.lift();

        // lift boxes intersecting the closed epsilon-ball around the endpoint
        let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(d);
        for axis in 0..d {
            let lo = ((end[axis] - params.epsilon) * n as f64).floor() as i64;
            let hi = ((end[axis] + params.epsilon) * n as f64).floor() as i64;
            ranges.push((lo, hi));
        }

        let mut cursor: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let mut index = vec![0u32; d];
            let mut lattice = vec![0i32; d];
            for axis in 0..d {
                let m = cursor[axis];
                let k = m.div_euclid(n);
                index[axis] = (m - k * n) as u32;
                if k.abs() > bound[axis] {
                    return Err(Error::InvalidParameter(format!(
                        "displacement {k} exceeds bound {} on axis {axis}",
                        bound[axis]
                    )));
                }
                lattice[axis] = k as i32;
            }
            let dst = grid.box_id(&index)?;
            edges.push(Edge {
                src: flat as NodeId,
                dst: dst.0 as NodeId,
                displacement: lattice,
            });

            // advance the cartesian cursor
            let mut axis = 0;
            loop {
                if axis == d {
                    break;
                }
                cursor[axis] += 1;
                if cursor[axis] <= ranges[axis].1 {
                    break;
                }
                cursor[axis] = ranges[axis].0;
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
    }
    Ok(edges)
}

/// Center, corners, then stratified interior points up to `count`.
fn box_samples(grid: &BoxGrid, id: BoxId, count: usize) -> Vec<Vec<f64>> {
    let d = grid.dimension();
    let side = grid.side();
    let lo = grid.lower_corner(id);
    let mut samples = Vec::with_capacity(count.max(1));

    let center: Vec<f64> = lo.iter().map(|&c| c + side / 2.0).collect();
    samples.push(center);

    let corners = 1usize << d;
    for mask in 0..corners {
        if samples.len() >= count.max(1) {
            break;
        }
        let point: Vec<f64> = (0..d)
            .map(|axis| {
                // keep corner samples inside the half-open box
                let hi = side * (1.0 - 1e-9);
                lo[axis] + if mask >> axis & 1 == 1 { hi } else { 0.0 }
            })
            .collect();
        samples.push(point);
    }

    // Latin-hypercube interior points, deterministic per box
    let extra = count.saturating_sub(samples.len());
    if extra > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15 ^ id.0);
        let strata: Vec<Vec<usize>> = (0..d)
            .map(|_| {
                let mut perm: Vec<usize> = (0..extra).collect();
                perm.shuffle(&mut rng);
                perm
            })
            .collect();
        for i in 0..extra {
            let point: Vec<f64> = (0..d)
                .map(|axis| {
                    let stratum = strata[axis][i] as f64;
                    lo[axis] + side * (stratum + 0.5) / extra as f64
                })
                .collect();
            samples.push(point);
        }
    }
    samples
}

/// Rebuild at doubled resolution and halved jump radius.
pub fn refine(field: &VectorField, params: &BuildParams) -> Result<TransitionGraph> {
    let refined = BuildParams {
        resolution: params.resolution * 2,
        epsilon: params.epsilon / 2.0,
        ..params.clone()
    };
    build_transition_graph(field, &refined)
}
