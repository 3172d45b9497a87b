//! The asymptotic pseudo-direction cone of a graph: the convex hull of
//! simple-cycle directions, discovered through support probes; the
//! circulation polytope support (the invariant-measure picture of the same
//! cone); and the equivalence check between the two, with orbit-closure
//! sampling for flow-backed graphs.

use crate::class::CohomologyClass;
use crate::error::{Error, Result};
use crate::flow::{integrate, LiftedPoint, VectorField};
use crate::graph::{Digraph, EdgeId};
use crate::hull::{extreme_1d, extreme_filter, hull_2d, hull_2d_normals, support};
use crate::ratio::max_ratio_cycle;
use crate::simplex::{solve_warm, verify_basis_exact, Program};
use crate::transition::TransitionGraph;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashSet;

/// Edge-count threshold up to which the circulation program runs in exact
/// rationals end to end; larger programs solve in floats and the final basis
/// is re-certified in rationals.
pub const EXACT_LP_EDGE_LIMIT: usize = 2_000;

/// One extreme ray of the cone, realized by an explicit simple cycle.
#[derive(Clone, Debug, Serialize)]
pub struct ConeRay {
    pub h: Vec<i64>,
    pub edge_count: usize,
    pub witness: Vec<EdgeId>,
    /// `h / (edge_count * T)` as floats
    pub direction: Vec<f64>,
}

impl ConeRay {
    pub fn direction_exact(&self, t_flow: f64) -> Vec<BigRational> {
        let t = BigRational::from_float(t_flow).expect("finite T");
        let len = BigRational::from_integer(BigInt::from(self.edge_count as i64)) * t;
        self.h
            .iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)) / len.clone())
            .collect()
    }
}

/// Extreme points of `conv { h(c) / len(c) }` over simple cycles.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionCone {
    pub rays: Vec<ConeRay>,
    pub epsilon: f64,
    pub t_flow: f64,
}

impl DirectionCone {
    pub fn export_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": self.rays.iter().map(|r| r.direction.clone()).collect::<Vec<_>>(),
            "witnesses": self.rays.iter().map(|r| r.witness.clone()).collect::<Vec<_>>(),
            "epsilon": self.epsilon,
            "T": self.t_flow,
        })
    }

    /// Sup-metric diameter of the ray set.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in &self.rays {
            for b in &self.rays {
                let d = a
                    .direction
                    .iter()
                    .zip(&b.direction)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                best = best.max(d);
            }
        }
        best
    }

    /// Distance from a point to the hull along probe normals (0 inside).
    pub fn outside_distance(&self, point: &[f64]) -> f64 {
        if self.rays.is_empty() {
            return f64::INFINITY;
        }
        let d = point.len();
        let exact: Vec<Vec<BigRational>> = self
            .rays
            .iter()
            .map(|r| r.direction_exact(self.t_flow))
            .collect();
        let mut worst: f64 = 0.0;
        let mut check = |u: &[f64]| {
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return;
            }
            let here: f64 = u.iter().zip(point).map(|(a, b)| a * b).sum();
            let hull_support = self
                .rays
                .iter()
                .map(|r| u.iter().zip(&r.direction).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max((here - hull_support) / norm);
        };
        match d {
            1 => {
                check(&[1.0]);
                check(&[-1.0]);
            }
            2 => {
                let hull = hull_2d(&exact);
                for n in hull_2d_normals(&exact, &hull) {
                    check(&n.iter().map(|&x| x as f64).collect::<Vec<_>>());
                }
                check(&[1.0, 0.0]);
                check(&[-1.0, 0.0]);
                check(&[0.0, 1.0]);
                check(&[0.0, -1.0]);
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(31);
                for _ in 0..128 {
                    let u: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                    check(&u);
                }
            }
        }
        worst.max(0.0)
    }
}

/// Discover the cone by probing support directions: axis directions first,
/// then outward facet normals of the current hull until no probe improves
/// it, plus a budget of random directions in higher dimension. Exact in
/// dimensions one and two.
pub fn direction_cone(
    graph: &Digraph,
    epsilon: f64,
    probe_budget: Option<usize>,
) -> Result<DirectionCone> {
    let d = graph.dimension();
    let t = graph.t_flow();

    struct Candidate {
        point: Vec<BigRational>,
        h: Vec<i64>,
        edge_count: usize,
        witness: Vec<EdgeId>,
    }

    let mut probed: HashSet<Vec<i64>> = HashSet::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let t_rat = BigRational::from_float(t).ok_or_else(|| {
        Error::InvalidParameter("non-finite flow time".into())
    })?;

    let probe = |u: Vec<i64>,
                 probed: &mut HashSet<Vec<i64>>,
                 candidates: &mut Vec<Candidate>|
     -> Result<bool> {
        if u.iter().all(|&x| x == 0) || !probed.insert(u.clone()) {
            return Ok(false);
        }
        let r = max_ratio_cycle(graph, &CohomologyClass::integer(u.clone()))?;
        let mut h = vec![0i64; d];
        for &eid in &r.witness {
            for (acc, &x) in h.iter_mut().zip(&graph.edge(eid).displacement) {
                *acc += x as i64;
            }
        }
        let len = BigRational::from_integer(BigInt::from(r.witness.len() as i64)) * t_rat.clone();
        let point: Vec<BigRational> = h
            .iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)) / len.clone())
            .collect();
        // improvement test: the witness direction must beat the current
        // candidate support strictly
        let improved = match support(
            &candidates.iter().map(|c| c.point.clone()).collect::<Vec<_>>(),
            &u,
        ) {
            None => true,
            Some(cur) => {
                let new: BigRational = point
                    .iter()
                    .zip(&u)
                    .map(|(x, &c)| x * BigRational::from_integer(BigInt::from(c)))
                    .fold(Zero::zero(), |acc: BigRational, v| acc + v);
                new > cur
            }
        };
        if improved {
            candidates.push(Candidate {
                point,
                h,
                edge_count: r.witness.len(),
                witness: r.witness,
            });
        }
        Ok(improved)
    };

    // axis probes always run; they complete the single-point case exactly
    for axis in 0..d {
        for sign in [1i64, -1] {
            let mut u = vec![0i64; d];
            u[axis] = sign;
            probe(u, &mut probed, &mut candidates)?;
        }
    }

    match d {
        1 => {}
        2 => {
            // refine along facet normals until stable
            let max_rounds = probe_budget.unwrap_or(1024);
            for _ in 0..max_rounds {
                let points: Vec<Vec<BigRational>> =
                    candidates.iter().map(|c| c.point.clone()).collect();
                let hull = hull_2d(&points);
                let normals = hull_2d_normals(&points, &hull);
                let mut grew = false;
                for nrm in normals {
                    grew |= probe(nrm, &mut probed, &mut candidates)?;
                }
                if !grew {
                    break;
                }
            }
        }
        _ => {
            let budget = probe_budget.unwrap_or(64 + 2 * d * d);
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for _ in 0..budget {
                let u: Vec<i64> = (0..d).map(|_| rng.gen_range(-8i64..=8)).collect();
                probe(u, &mut probed, &mut candidates)?;
            }
        }
    }

    if candidates.is_empty() {
        return Err(Error::Acyclic);
    }

    // restrict to hull vertices
    let points: Vec<Vec<BigRational>> = candidates.iter().map(|c| c.point.clone()).collect();
    let keep: Vec<usize> = match d {
        1 => extreme_1d(&points),
        2 => hull_2d(&points),
        _ => extreme_filter(&points)?,
    };

    let rays = keep
        .into_iter()
        .map(|i| {
            let c = &candidates[i];
            ConeRay {
                h: c.h.clone(),
                edge_count: c.edge_count,
                witness: c.witness.clone(),
                direction: c
                    .point
                    .iter()
                    .map(|x| x.to_f64().expect("direction fits f64"))
                    .collect(),
            }
        })
        .collect();

    Ok(DirectionCone {
        rays,
        epsilon,
        t_flow: t,
    })
}

/// Support of the circulation polytope in direction `u`: maximize
/// `u . sum f_e h_e` over conservative nonnegative edge flows normalized by
/// `sum f_e T = 1`. Returns the float value and an exact certificate.
pub fn sullivan_cone_support(
    graph: &Digraph,
    u: &CohomologyClass,
) -> Result<(f64, Option<BigRational>)> {
    let n = graph.node_count() as usize;
    let edges = graph.edges();
    if edges.is_empty() {
        return Err(Error::Acyclic);
    }
    let t_rat = BigRational::from_float(graph.t_flow())
        .ok_or_else(|| Error::InvalidParameter("non-finite flow time".into()))?;
    let u_rat: Option<Vec<BigRational>> = u.as_big_rational();

    // rows 0..n: conservation (in - out = 0); row n: normalization
    let exact_program = |u_vals: &[BigRational]| -> Program<BigRational> {
        let columns = edges
            .iter()
            .map(|e| {
                let mut col: Vec<(usize, BigRational)> = Vec::with_capacity(3);
                if e.src != e.dst {
                    col.push((e.dst as usize, num::One::one()));
                    col.push((e.src as usize, -<BigRational as num::One>::one()));
                }
                col.push((n, t_rat.clone()));
                col
            })
            .collect();
        let objective = edges
            .iter()
            .map(|e| {
                e.displacement
                    .iter()
                    .zip(u_vals)
                    .map(|(&h, a)| a * BigRational::from_integer(BigInt::from(h)))
                    .fold(<BigRational as Zero>::zero(), |acc, v| acc + v)
            })
            .collect();
        let mut rhs = vec![<BigRational as Zero>::zero(); n + 1];
        rhs[n] = num::One::one();
        Program {
            rows: n + 1,
            columns,
            rhs,
            objective,
        }
    };

    // warm-start hint: any structural cycle gives a feasible circulation
    let hint = any_cycle(graph).unwrap_or_default();

    if let (Some(u_vals), true) = (&u_rat, edges.len() <= EXACT_LP_EDGE_LIMIT) {
        let program = exact_program(u_vals);
        let opt = solve_warm(&program, &hint).map_err(|e| match e {
            Error::LpInfeasible => Error::Acyclic,
            other => other,
        })?;
        let value = opt
            .value
            .to_f64()
            .ok_or_else(|| Error::NumericOverflow("LP value overflow".into()))?;
        return Ok((value, Some(opt.value)));
    }

    // float solve, then certify the basis in rationals when u is rational
    let float_program = Program {
        rows: n + 1,
        columns: edges
            .iter()
            .map(|e| {
                let mut col: Vec<(usize, f64)> = Vec::with_capacity(3);
                if e.src != e.dst {
                    col.push((e.dst as usize, 1.0));
                    col.push((e.src as usize, -1.0));
                }
                col.push((n, graph.t_flow()));
                col
            })
            .collect(),
        rhs: {
            let mut rhs = vec![0.0; n + 1];
            rhs[n] = 1.0;
            rhs
        },
        objective: edges.iter().map(|e| u.pair_f64(&e.displacement)).collect(),
    };
    let opt = solve_warm(&float_program, &hint).map_err(|e| match e {
        Error::LpInfeasible => Error::Acyclic,
        other => other,
    })?;

    if let Some(u_vals) = &u_rat {
        let program = exact_program(u_vals);
        if let Some(certified) = verify_basis_exact(&program, &opt.basis)? {
            let value = certified
                .to_f64()
                .ok_or_else(|| Error::NumericOverflow("LP value overflow".into()))?;
            return Ok((value, Some(certified)));
        }
        // floating basis failed certification: fall back to the exact solver
        let exact = solve_warm(&program, &hint).map_err(|e| match e {
            Error::LpInfeasible => Error::Acyclic,
            other => other,
        })?;
        let value = exact
            .value
            .to_f64()
            .ok_or_else(|| Error::NumericOverflow("LP value overflow".into()))?;
        return Ok((value, Some(exact.value)));
    }
    Ok((opt.value, None))
}

/// Report of the cone equivalence and orbit-sampling checks.
#[derive(Clone, Debug, Serialize)]
pub struct ConeEquivalenceReport {
    pub trials: usize,
    pub max_duality_gap: f64,
    pub duality_violations: Vec<DualityViolation>,
    pub orbit_samples: usize,
    pub orbit_skipped: usize,
    pub orbit_outside: Vec<OrbitViolation>,
    pub max_orbit_excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityViolation {
    pub direction: Vec<i64>,
    pub lp_value: f64,
    pub cycle_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitViolation {
    pub seed_point: Vec<f64>,
    pub direction: Vec<f64>,
    pub excess: f64,
}

impl ConeEquivalenceReport {
    pub fn clean(&self) -> bool {
        self.duality_violations.is_empty() && self.orbit_outside.is_empty()
    }
}

/// For random directions, assert that the circulation support equals the
/// max-ratio-cycle value; for flow-backed graphs, close long orbits within a
/// single box and assert their homological directions lie in the inflated
/// hull.
pub fn cone_equivalence_check(
    tg: &TransitionGraph,
    field: Option<&VectorField>,
    trials: usize,
    orbit_samples: usize,
    orbit_length: f64,
    seed: u64,
) -> Result<ConeEquivalenceReport> {
    let graph = tg.digraph();
    let d = graph.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cone = direction_cone(graph, tg.epsilon(), None)?;

    let tol = 1e-6;
    let mut duality_violations = Vec::new();
    let mut max_gap: f64 = 0.0;
    for _ in 0..trials {
        let mut u: Vec<i64> = (0..d).map(|_| rng.gen_range(-5i64..=5)).collect();
        if u.iter().all(|&x| x == 0) {
            u[0] = 1;
        }
        let class = CohomologyClass::integer(u.clone());
        let ratio = max_ratio_cycle(graph, &class)?;
        let (lp_value, lp_exact) = sullivan_cone_support(graph, &class)?;
        let gap = match (&lp_exact, &ratio.value_exact) {
            (Some(a), Some(b)) => {
                if a == b {
                    0.0
                } else {
                    (a - b).to_f64().unwrap_or(f64::INFINITY).abs()
                }
            }
            _ => (lp_value - ratio.value).abs(),
        };
        max_gap = max_gap.max(gap);
        if gap > tol {
            duality_violations.push(DualityViolation {
                direction: u,
                lp_value,
                cycle_value: ratio.value,
            });
        }
    }

    let mut orbit_checked = 0;
    let mut orbit_skipped = 0;
    let mut orbit_outside = Vec::new();
    let mut max_excess: f64 = 0.0;
    if let Some(field) = field {
        let slack = 2.0 * tg.epsilon();
        for _ in 0..orbit_samples {
            let start: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            match closed_orbit_direction(tg, field, &start, orbit_length)? {
                Some(direction) => {
                    orbit_checked += 1;
                    let excess = cone.outside_distance(&direction);
                    max_excess = max_excess.max(excess);
                    if excess > slack {
                        orbit_outside.push(OrbitViolation {
                            seed_point: start,
                            direction,
                            excess,
                        });
                    }
                }
                None => orbit_skipped += 1,
            }
        }
    }

    Ok(ConeEquivalenceReport {
        trials,
        max_duality_gap: max_gap,
        duality_violations,
        orbit_samples: orbit_checked,
        orbit_skipped,
        orbit_outside,
        max_orbit_excess: max_excess,
    })
}

/// Integrate a long orbit, then close it by jumping to the earliest prior
/// visit of the final box; the closing curve stays inside one box. Returns
/// the homological direction of the closed loop, or `None` when the orbit
/// never revisits its final box early enough.
fn closed_orbit_direction(
    tg: &TransitionGraph,
    field: &VectorField,
    start: &[f64],
    orbit_length: f64,
) -> Result<Option<Vec<f64>>> {
    let t = tg.t_flow();
    let steps = (orbit_length / t).ceil() as usize;
    let step = t / 64.0;
    let mut lifts: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut point = LiftedPoint::new(start.to_vec());
    for _ in 0..steps {
        let seg = integrate(field, &point, t, step)?;
        point = seg.end.clone();
        lifts.push(point.lift().to_vec());
    }

    let last = lifts.last().unwrap();
    let last_box = tg.grid().locate(LiftedPoint::new(last.clone()).base().coords())?;
    for j in 0..lifts.len().saturating_sub(1) {
        let b = tg
            .grid()
            .locate(LiftedPoint::new(lifts[j].clone()).base().coords())?;
        if b == last_box {
            let duration = (lifts.len() - 1 - j) as f64 * t;
            if duration < t {
                break;
            }
            let h: Vec<f64> = last
                .iter()
                .zip(&lifts[j])
                .map(|(a, b)| (a - b).round())
                .collect();
            return Ok(Some(h.iter().map(|&x| x / duration).collect()));
        }
    }
    Ok(None)
}

/// Any directed cycle found by depth-first search, independent of weights.
fn any_cycle(graph: &Digraph) -> Option<Vec<EdgeId>> {
    let n = graph.node_count() as usize;
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut stack: Vec<(u64, usize)> = Vec::new();
    let mut path: Vec<EdgeId> = Vec::new();
    for root in 0..n as u64 {
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
                let w = graph.edge(eid).dst;
                match state[w as usize] {
                    0 => {
                        path.push(eid);
                        stack.push((w, 0));
                        state[w as usize] = 1;
                        advanced = true;
                        break;
                    }
                    1 => {
                        path.push(eid);
                        let pos = stack.iter().position(|&(node, _)| node == w).unwrap();
                        return Some(path[pos..].to_vec());
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
    None
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
    fn g1_cone_is_a_single_vertex() {
        let cone = direction_cone(&g1(), 0.5, None).unwrap();
        assert_eq!(cone.rays.len(), 1);
        assert_eq!(cone.rays[0].direction, vec![0.5, 0.5]);
        assert_eq!(cone.diameter(), 0.0);
    }

    #[test]
    fn g1_circulation_support() {
        let (value, exact) =
            sullivan_cone_support(&g1(), &CohomologyClass::integer(vec![1, 0])).unwrap();
        assert!((value - 0.5).abs() < 1e-12);
        assert_eq!(
            exact.unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        let (zero_val, _) =
            sullivan_cone_support(&g1(), &CohomologyClass::integer(vec![0, 0])).unwrap();
        assert_eq!(zero_val, 0.0);
    }

    #[test]
    fn two_loop_cone_is_a_segment() {
        // two self-loops with different directions
        let g = Digraph::new(
            1,
            2,
            1.0,
            vec![
                Edge { src: 0, dst: 0, displacement: vec![1, 0] },
                Edge { src: 0, dst: 0, displacement: vec![0, 1] },
            ],
        )
        .unwrap();
        let cone = direction_cone(&g, 0.5, None).unwrap();
        assert_eq!(cone.rays.len(), 2);
        let mut dirs: Vec<Vec<f64>> = cone.rays.iter().map(|r| r.direction.clone()).collect();
        dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(dirs, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn triangle_cone_found_exactly() {
        // three self-loops spanning a triangle, plus a mid-edge loop that
        // must not appear as a ray
        let g = Digraph::new(
            1,
            2,
            1.0,
            vec![
                Edge { src: 0, dst: 0, displacement: vec![2, 0] },
                Edge { src: 0, dst: 0, displacement: vec![0, 2] },
                Edge { src: 0, dst: 0, displacement: vec![-2, -2] },
                Edge { src: 0, dst: 0, displacement: vec![1, 1] },
            ],
        )
        .unwrap();
        let cone = direction_cone(&g, 0.5, None).unwrap();
        assert_eq!(cone.rays.len(), 3);
        for r in &cone.rays {
            assert_eq!(r.witness.len(), 1);
        }
    }

    #[test]
    fn duality_holds_on_g1_wrapped() {
        let grid = crate::grid::BoxGrid::new(2, 2).unwrap();
        // synthetic transition graph around g1-like loops on a 2x2 grid
        let edges = vec![
            Edge { src: 0, dst: 1, displacement: vec![1, 0] },
            Edge { src: 1, dst: 0, displacement: vec![0, 1] },
            Edge { src: 2, dst: 2, displacement: vec![0, 0] },
            Edge { src: 3, dst: 2, displacement: vec![0, 0] },
        ];
        let tg = TransitionGraph::from_parts(grid, 0.5, 1.0, [0u8; 32], edges).unwrap();
        let report = cone_equivalence_check(&tg, None, 16, 0, 0.0, 99).unwrap();
        assert!(report.clean(), "violations: {report:?}");
        assert_eq!(report.max_duality_gap, 0.0);
    }

    #[test]
    fn ray_exact_direction_matches_f64() {
        let cone = direction_cone(&g1(), 0.5, None).unwrap();
        let exact = cone.rays[0].direction_exact(1.0);
        assert_eq!(
            exact,
            vec![
                BigRational::new(BigInt::from(1), BigInt::from(2)),
                BigRational::new(BigInt::from(1), BigInt::from(2))
            ]
        );
    }
}
