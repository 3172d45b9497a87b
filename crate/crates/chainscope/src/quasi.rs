//! Quasi-Lyapunov testing with replayable certificates, the recurrent set
//! of a class, monotonicity of recurrent sets, open faces of the
//! quasi-Lyapunov cone, and rational approximation of floating classes.
//!
//! A class is quasi-Lyapunov on a graph when no cycle has positive pairing
//! with it. The certificate is either an edgewise potential
//! `f(u) >= f(v) + alpha.h(e)` or a violating cycle; rational classes run in
//! exact scaled-integer arithmetic, floating classes use the tolerance
//! `1e-9 * (1 + |alpha|)`.

use crate::class::{rational_to_pair, CohomologyClass, ScaledWeights};
use crate::cone::DirectionCone;
use crate::error::{Error, Result};
use crate::graph::{Digraph, Edge, EdgeId, NodeId};
use crate::potential::{relax, walk_weight, Relaxation};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub fn float_tolerance(alpha: &CohomologyClass) -> f64 {
    1e-9 * (1.0 + alpha.sup_norm())
}

/// Node potentials of a certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialValues {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl PotentialValues {
    pub fn len(&self) -> usize {
        match self {
            PotentialValues::Exact(v) => v.len(),
            PotentialValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            PotentialValues::Exact(v) => v
                .iter()
                .map(|x| x.to_f64().expect("potential fits f64"))
                .collect(),
            PotentialValues::Float(v) => v.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PotentialValues::Exact(_))
    }
}

#[derive(Clone, Debug)]
pub enum QlOutcome {
    /// edgewise-valid potential
    Ql { potential: PotentialValues },
    /// a cycle with positive pairing
    NotQl { cycle: Vec<EdgeId> },
}

#[derive(Clone, Debug)]
pub struct QlCertificate {
    pub alpha: CohomologyClass,
    pub outcome: QlOutcome,
}

impl QlCertificate {
    pub fn is_ql(&self) -> bool {
        matches!(self.outcome, QlOutcome::Ql { .. })
    }

    pub fn potential(&self) -> Option<&PotentialValues> {
        match &self.outcome {
            QlOutcome::Ql { potential } => Some(potential),
            QlOutcome::NotQl { .. } => None,
        }
    }

    pub fn violating_cycle(&self) -> Option<&[EdgeId]> {
        match &self.outcome {
            QlOutcome::NotQl { cycle } => Some(cycle),
            QlOutcome::Ql { .. } => None,
        }
    }

    /// Re-validate from scratch: the potential satisfies every edge
    /// inequality, or the cycle is closed with strictly positive pairing.
    /// Exact for rational classes.
    pub fn revalidate(&self, graph: &Digraph) -> Result<()> {
        match &self.outcome {
            QlOutcome::Ql { potential } => {
                validate_potential_edges(graph, &self.alpha, potential)
            }
            QlOutcome::NotQl { cycle } => {
                crate::cycles::cycle_class(graph, cycle)?;
                let positive = match self.alpha.as_big_rational() {
                    Some(a) => {
                        let mut total: BigRational = Zero::zero();
                        for &eid in cycle.iter() {
                            for (ai, &h) in a.iter().zip(&graph.edge(eid).displacement) {
                                total += ai * BigRational::from_integer(BigInt::from(h));
                            }
                        }
                        total.is_positive()
                    }
                    None => {
                        let total: f64 = cycle
                            .iter()
                            .map(|&eid| self.alpha.pair_f64(&graph.edge(eid).displacement))
                            .sum();
                        total > 0.0
                    }
                };
                if positive {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "violating cycle does not have positive pairing".into(),
                    ))
                }
            }
        }
    }

    pub fn export_json(&self, epsilon: f64) -> serde_json::Value {
        let base = serde_json::json!({
            "alpha": self.alpha.as_f64(),
            "epsilon": epsilon,
        });
        let mut doc = base;
        match &self.outcome {
            QlOutcome::Ql { potential } => {
                doc["verdict"] = "QL".into();
                let values: serde_json::Map<String, serde_json::Value> = match potential {
                    PotentialValues::Exact(v) => v
                        .iter()
                        .enumerate()
                        .map(|(i, x)| (i.to_string(), format!("{x}").into()))
                        .collect(),
                    PotentialValues::Float(v) => v
                        .iter()
                        .enumerate()
                        .map(|(i, x)| (i.to_string(), (*x).into()))
                        .collect(),
                };
                doc["potential"] = values.into();
            }
            QlOutcome::NotQl { cycle } => {
                doc["verdict"] = "NotQL".into();
                doc["cycle"] = cycle.clone().into();
            }
        }
        doc
    }
}

fn validate_potential_edges(
    graph: &Digraph,
    alpha: &CohomologyClass,
    potential: &PotentialValues,
) -> Result<()> {
    match (alpha.as_big_rational(), potential) {
        (Some(a), PotentialValues::Exact(f)) => {
            for e in graph.edges() {
                let w: BigRational = a
                    .iter()
                    .zip(&e.displacement)
                    .map(|(ai, &h)| ai * BigRational::from_integer(BigInt::from(h)))
                    .fold(Zero::zero(), |acc: BigRational, v| acc + v);
                if &f[e.src as usize] - &f[e.dst as usize] < w {
                    return Err(Error::InvalidParameter(format!(
                        "edge {} -> {} violates the potential inequality",
                        e.src, e.dst
                    )));
                }
            }
            Ok(())
        }
        _ => {
            let f = potential.as_f64();
            let tau = float_tolerance(alpha);
            for e in graph.edges() {
                let w = alpha.pair_f64(&e.displacement);
                if f[e.src as usize] - f[e.dst as usize] < w - tau {
                    return Err(Error::InvalidParameter(format!(
                        "edge {} -> {} violates the potential inequality",
                        e.src, e.dst
                    )));
                }
            }
            Ok(())
        }
    }
}

/// Decide the quasi-Lyapunov property with a certificate.
pub fn is_quasi_lyapunov(graph: &Digraph, alpha: &CohomologyClass) -> Result<QlCertificate> {
    if alpha.dimension() != graph.dimension() {
        return Err(Error::DimensionMismatch {
            expected: graph.dimension(),
            got: alpha.dimension(),
        });
    }
    if alpha.is_rational() {
        let scaled = ScaledWeights::compute(alpha, graph.edges())?;
        let outcome = match relax(graph, &scaled.weights, 0i128) {
            Relaxation::Potentials(g) => {
                let scale = BigRational::from_integer(scaled.scale.clone());
                let values = g
                    .iter()
                    .map(|&gi| {
                        -BigRational::from_integer(BigInt::from(gi)) / scale.clone()
                    })
                    .collect();
                QlOutcome::Ql {
                    potential: PotentialValues::Exact(values),
                }
            }
            Relaxation::PositiveCycle(cycle) => {
                debug_assert!(walk_weight(&scaled.weights, &cycle) > 0);
                QlOutcome::NotQl { cycle }
            }
        };
        Ok(QlCertificate {
            alpha: alpha.clone(),
            outcome,
        })
    } else {
        let weights: Vec<f64> = graph
            .edges()
            .iter()
            .map(|e| alpha.pair_f64(&e.displacement))
            .collect();
        let tau = float_tolerance(alpha);
        let outcome = match relax(graph, &weights, tau) {
            Relaxation::Potentials(g) => QlOutcome::Ql {
                potential: PotentialValues::Float(g.iter().map(|&x| -x).collect()),
            },
            Relaxation::PositiveCycle(cycle) => {
                let total = walk_weight(&weights, &cycle);
                if total <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "floating tolerance produced an inconsistent cycle".into(),
                    ));
                }
                QlOutcome::NotQl { cycle }
            }
        };
        Ok(QlCertificate {
            alpha: alpha.clone(),
            outcome,
        })
    }
}

/// Edges where the certificate potential is tight:
/// `f(src) = f(dst) + alpha.h` (within tolerance for floating classes).
pub fn tight_subgraph(
    graph: &Digraph,
    alpha: &CohomologyClass,
    potential: &PotentialValues,
) -> Result<Vec<bool>> {
    match (alpha.as_big_rational(), potential) {
        (Some(_), PotentialValues::Exact(_)) => {
            // recompute in scaled integers for speed: f = -g / D
            let scaled = ScaledWeights::compute(alpha, graph.edges())?;
            let PotentialValues::Exact(f) = potential else {
                unreachable!()
            };
            let scale = BigRational::from_integer(scaled.scale.clone());
            let g: Vec<i128> = f
                .iter()
                .map(|x| {
                    let v = -(x * &scale);
                    debug_assert!(v.denom().is_one());
                    v.numer()
                        .to_i128()
                        .ok_or_else(|| Error::NumericOverflow("potential overflow".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(crate::potential::tight_edges(graph, &scaled.weights, &g, 0))
        }
        _ => {
            let weights: Vec<f64> = graph
                .edges()
                .iter()
                .map(|e| alpha.pair_f64(&e.displacement))
                .collect();
            let f = potential.as_f64();
            let g: Vec<f64> = f.iter().map(|&x| -x).collect();
            let tau = float_tolerance(alpha);
            Ok(crate::potential::tight_edges(graph, &weights, &g, tau))
        }
    }
}

/// The alpha-recurrent set: nodes on zero-pairing cycles, partitioned into
/// chains (the cyclic components of the tight subgraph).
#[derive(Clone, Debug, Serialize)]
pub struct AlphaRecSet {
    pub node_flags: Vec<bool>,
    pub nodes: Vec<NodeId>,
    pub chains: Vec<Vec<NodeId>>,
    /// per-chain anchor (smallest node id), parallel to `chains`
    pub anchors: Vec<NodeId>,
}

impl AlphaRecSet {
    pub fn contains(&self, node: NodeId) -> bool {
        self.node_flags[node as usize]
    }

    pub fn is_subset_of(&self, other: &AlphaRecSet) -> bool {
        self.nodes.iter().all(|&v| other.contains(v))
    }

    pub fn chain_of(&self, node: NodeId) -> Option<usize> {
        self.chains.iter().position(|c| c.contains(&node))
    }
}

/// Rejects classes that are not quasi-Lyapunov.
pub fn alpha_recurrent(graph: &Digraph, alpha: &CohomologyClass) -> Result<AlphaRecSet> {
    let cert = is_quasi_lyapunov(graph, alpha)?;
    alpha_recurrent_from(graph, &cert)
}

pub fn alpha_recurrent_from(graph: &Digraph, cert: &QlCertificate) -> Result<AlphaRecSet> {
    let potential = match &cert.outcome {
        QlOutcome::Ql { potential } => potential,
        QlOutcome::NotQl { cycle } => {
            return Err(Error::NotQuasiLyapunov {
                cycle_len: cycle.len(),
            })
        }
    };
    let tight = tight_subgraph(graph, &cert.alpha, potential)?;
    rec_set_from_tight(graph, &tight)
}

fn rec_set_from_tight(graph: &Digraph, tight: &[bool]) -> Result<AlphaRecSet> {
    let tight_edges: Vec<Edge> = graph
        .edges()
        .iter()
        .zip(tight)
        .filter(|(_, &t)| t)
        .map(|(e, _)| e.clone())
        .collect();
    let sub = Digraph::new(
        graph.node_count(),
        graph.dimension(),
        graph.t_flow(),
        tight_edges,
    )?;
    let scc = sub.strongly_connected_components();
    let mut node_flags = vec![false; graph.node_count() as usize];
    for (v, flag) in node_flags.iter_mut().enumerate() {
        *flag = scc.has_cycle[scc.comp_of[v]];
    }
    let mut chains: Vec<Vec<NodeId>> = (0..scc.count())
        .filter(|&c| scc.has_cycle[c])
        .map(|c| scc.members[c].clone())
        .collect();
    for chain in chains.iter_mut() {
        chain.sort_unstable();
    }
    chains.sort_by_key(|c| c[0]);
    let anchors = chains.iter().map(|c| c[0]).collect();
    let nodes = node_flags
        .iter()
        .enumerate()
        .filter_map(|(v, &f)| f.then_some(v as NodeId))
        .collect();
    Ok(AlphaRecSet {
        node_flags,
        nodes,
        chains,
        anchors,
    })
}

/// Both sides of the emptiness criterion, computed independently:
/// `max cycle ratio < 0` and `quasi-Lyapunov with empty recurrent set`.
pub fn rec_empty_iff_strict(graph: &Digraph, alpha: &CohomologyClass) -> Result<(bool, bool)> {
    let strict_negative = match crate::ratio::max_ratio_cycle(graph, alpha) {
        Ok(r) => match &r.value_exact {
            Some(v) => v.is_negative(),
            None => r.value < -float_tolerance(alpha),
        },
        Err(Error::Acyclic) => true,
        Err(e) => return Err(e),
    };
    let cert = is_quasi_lyapunov(graph, alpha)?;
    let ql_and_empty = match &cert.outcome {
        QlOutcome::NotQl { .. } => false,
        QlOutcome::Ql { .. } => alpha_recurrent_from(graph, &cert)?.nodes.is_empty(),
    };
    Ok((strict_negative, ql_and_empty))
}

/// Pairing of a class with an integer vector, exact when rational.
fn pair_exact(alpha: &CohomologyClass, h: &[i64]) -> Option<BigRational> {
    alpha.as_big_rational().map(|a| {
        a.iter()
            .zip(h)
            .map(|(ai, &x)| ai * BigRational::from_integer(BigInt::from(x)))
            .fold(Zero::zero(), |acc: BigRational, v| acc + v)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RecMonotoneReport {
    /// Rec(a+b) is contained in Rec(a) and Rec(b)
    pub sum_inclusion_holds: bool,
    pub sum_violators: Vec<NodeId>,
    /// Rec(a) contained in Rec(b)
    pub rec_inclusion: bool,
    /// a  + t (a - b) is quasi-Lyapunov for some breakpoint-derived t > 0
    pub exists_t: bool,
    /// the t that certified existence, as (num, den)
    pub t_used: Option<(i64, i64)>,
    pub biconditional_holds: bool,
    /// when no t exists: a cycle with zero a-pairing and negative b-pairing
    /// that blocks every shift (at fixed epsilon this can coexist with the
    /// set inclusion; the witness certifies the discretization artifact)
    pub blocking_cycle: Option<Vec<EdgeId>>,
}

/// The two monotonicity laws of recurrent sets, checked on a pair of
/// quasi-Lyapunov classes. The existential over `t` is decided on the
/// breakpoints induced by the cone's extreme rays and confirmed by an
/// actual certificate at the chosen `t`.
pub fn rec_monotone_checks(
    graph: &Digraph,
    alpha: &CohomologyClass,
    beta: &CohomologyClass,
    cone: &DirectionCone,
) -> Result<RecMonotoneReport> {
    let rec_a = alpha_recurrent(graph, alpha)?;
    let rec_b = alpha_recurrent(graph, beta)?;
    let sum = alpha.add(beta)?;
    let rec_sum = alpha_recurrent(graph, &sum)?;

    let sum_violators: Vec<NodeId> = rec_sum
        .nodes
        .iter()
        .copied()
        .filter(|&v| !(rec_a.contains(v) && rec_b.contains(v)))
        .collect();
    let sum_inclusion_holds = sum_violators.is_empty();

    let rec_inclusion = rec_a.is_subset_of(&rec_b);

    let (exists_t, t_used, blocking_cycle) = exists_shift_ql(graph, alpha, beta, cone)?;

    Ok(RecMonotoneReport {
        sum_inclusion_holds,
        sum_violators,
        rec_inclusion,
        exists_t,
        t_used,
        biconditional_holds: rec_inclusion == exists_t,
        blocking_cycle,
    })
}

/// Decide whether `alpha + t (alpha - beta)` is quasi-Lyapunov for some
/// `t > 0`. Along each extreme ray the value is affine in `t`, so the
/// breakpoints are the ray-wise roots; any `t` below them all works, and a
/// ray that is tight for `alpha` but negative for `beta` blocks every `t`.
type ShiftOutcome = (bool, Option<(i64, i64)>, Option<Vec<EdgeId>>);

fn exists_shift_ql(
    graph: &Digraph,
    alpha: &CohomologyClass,
    beta: &CohomologyClass,
    cone: &DirectionCone,
) -> Result<ShiftOutcome> {
    let exact = alpha.is_rational() && beta.is_rational();
    // breakpoint analysis on the rays
    let mut t_cap: Option<BigRational> = None;
    let mut blocked: Option<Vec<EdgeId>> = None;
    for ray in &cone.rays {
        let (a, b) = if exact {
            (
                pair_exact(alpha, &ray.h).unwrap(),
                pair_exact(beta, &ray.h).unwrap(),
            )
        } else {
            let af = alpha
                .as_f64()
                .iter()
                .zip(&ray.h)
                .map(|(x, &h)| x * h as f64)
                .sum::<f64>();
            let bf = beta
                .as_f64()
                .iter()
                .zip(&ray.h)
                .map(|(x, &h)| x * h as f64)
                .sum::<f64>();
            let snap = |x: f64| {
                BigRational::from_float(if x.abs() <= float_tolerance(alpha) {
                    0.0
                } else {
                    x
                })
                .unwrap()
            };
            (snap(af), snap(bf))
        };
        if a.is_zero() {
            if b.is_negative() {
                blocked = Some(ray.witness.clone());
                break;
            }
            continue;
        }
        // a < 0 here (alpha is quasi-Lyapunov on every ray)
        let slope = &a - &b;
        if slope.is_positive() {
            let root = -&a / slope;
            t_cap = Some(match t_cap {
                None => root,
                Some(cur) => cur.min(root),
            });
        }
    }
    if let Some(witness) = blocked {
        return Ok((false, None, Some(witness)));
    }

    let one: BigRational = One::one();
    let first = match &t_cap {
        None => one.clone(),
        Some(cap) => cap / BigRational::from_integer(BigInt::from(2)),
    };
    // the 2^-k grid under the first breakpoint
    let mut t = first;
    for _ in 0..42 {
        let shifted = alpha.ray_shift(beta, &t)?;
        if is_quasi_lyapunov(graph, &shifted)?.is_ql() {
            let pair = rational_to_pair(&t)?;
            return Ok((true, Some(pair), None));
        }
        t /= BigRational::from_integer(BigInt::from(2));
    }
    Ok((false, None, None))
}

/// An open face of the quasi-Lyapunov cone, identified by its set of tight
/// extreme rays.
#[derive(Clone, Debug, Serialize)]
pub struct FaceDescriptor {
    /// indices into the cone's rays with zero pairing
    pub tight_rays: Vec<usize>,
    /// rational basis of `{ b : b . r = 0 for all tight rays r }`
    pub span_basis: Vec<Vec<(i64, i64)>>,
    /// the sample class (guaranteed quasi-Lyapunov)
    pub sample: CohomologyClass,
}

impl FaceDescriptor {
    pub fn same_face(&self, other: &FaceDescriptor) -> bool {
        self.tight_rays == other.tight_rays
    }

    /// `self` lies in the closure of `other` iff the tight set contains the
    /// other's.
    pub fn in_closure_of(&self, other: &FaceDescriptor) -> bool {
        other.tight_rays.iter().all(|r| self.tight_rays.contains(r))
    }

    pub fn export_json(&self) -> serde_json::Value {
        serde_json::json!({
            "tight_rays": self.tight_rays,
            "span_basis": self
                .span_basis
                .iter()
                .map(|v| v.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "sample": self.sample.as_f64(),
        })
    }
}

/// The unique open face containing a quasi-Lyapunov class.
pub fn open_face(
    graph: &Digraph,
    alpha: &CohomologyClass,
    cone: &DirectionCone,
) -> Result<FaceDescriptor> {
    let cert = is_quasi_lyapunov(graph, alpha)?;
    if !cert.is_ql() {
        return Err(Error::NotQuasiLyapunov {
            cycle_len: cert.violating_cycle().map(|c| c.len()).unwrap_or(0),
        });
    }
    let tau = float_tolerance(alpha);
    let mut tight = Vec::new();
    for (j, ray) in cone.rays.iter().enumerate() {
        let is_tight = match pair_exact(alpha, &ray.h) {
            Some(v) => v.is_zero(),
            None => {
                let v: f64 = alpha
                    .as_f64()
                    .iter()
                    .zip(&ray.h)
                    .map(|(x, &h)| x * h as f64)
                    .sum();
                v.abs() <= tau * (1.0 + ray.edge_count as f64)
            }
        };
        if is_tight {
            tight.push(j);
        }
    }

    let rows: Vec<Vec<BigRational>> = tight
        .iter()
        .map(|&j| {
            cone.rays[j]
                .h
                .iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let basis = nullspace_basis(&rows, graph.dimension());
    let span_basis = basis
        .iter()
        .map(|v| v.iter().map(rational_to_pair).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    Ok(FaceDescriptor {
        tight_rays: tight,
        span_basis,
        sample: alpha.clone(),
    })
}

/// Rational basis of the right nullspace of `rows` in dimension `d`.
fn nullspace_basis(rows: &[Vec<BigRational>], d: usize) -> Vec<Vec<BigRational>> {
    let zero = || <BigRational as Zero>::zero();
    let mut mat: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..d {
        let pivot = (rank..mat.len()).find(|&r| !mat[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        mat.swap(rank, pr);
        let p = mat[rank][col].clone();
        for k in 0..d {
            mat[rank][k] = &mat[rank][k] / &p;
        }
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for k in 0..d {
                    let delta = &factor * &mat[rank][k];
                    mat[r][k] = &mat[r][k] - &delta;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    let free_cols: Vec<usize> = (0..d).filter(|c| !pivot_cols.contains(c)).collect();
    free_cols
        .iter()
        .map(|&fc| {
            let mut v = vec![zero(); d];
            v[fc] = One::one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -mat[r][fc].clone();
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceRecEntry {
    pub face: FaceDescriptor,
    pub rec_nodes: Vec<NodeId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceRecMap {
    pub entries: Vec<FaceRecEntry>,
    pub violations: Vec<String>,
}

/// Compute `Rec` for each face sample, re-sample each face interior to
/// check sample independence, and verify the order-reversing biconditional
/// between face closure and recurrent-set inclusion plus the at-most-one
/// empty set law.
pub fn face_rec_map(
    graph: &Digraph,
    faces: &[FaceDescriptor],
    cone: &DirectionCone,
) -> Result<FaceRecMap> {
    let mut entries = Vec::new();
    let mut violations = Vec::new();

    for (i, face) in faces.iter().enumerate() {
        let rec = alpha_recurrent(graph, &face.sample)?;
        // a second interior sample of the same face must give the same set
        if let Some(second) = second_sample(face, cone)? {
            let face2 = open_face(graph, &second, cone)?;
            if face2.tight_rays != face.tight_rays {
                violations.push(format!(
                    "face {i}: perturbed sample left the face (tight set changed)"
                ));
            } else {
                let rec2 = alpha_recurrent(graph, &second)?;
                if rec2.nodes != rec.nodes {
                    violations.push(format!("face {i}: recurrent set depends on the sample"));
                }
            }
        }
        entries.push(FaceRecEntry {
            face: face.clone(),
            rec_nodes: rec.nodes,
        });
    }

    for i in 0..entries.len() {
        for j in 0..entries.len() {
            if i == j {
                continue;
            }
            let closure = entries[i].face.in_closure_of(&entries[j].face);
            let rec_incl = entries[j]
                .rec_nodes
                .iter()
                .all(|v| entries[i].rec_nodes.contains(v));
            if closure != rec_incl {
                violations.push(format!(
                    "faces {i},{j}: closure relation {closure} but inclusion {rec_incl}"
                ));
            }
        }
    }

    let empty = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.rec_nodes.is_empty())
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    // distinct faces may not share an empty recurrent set
    let mut distinct_empty = 0usize;
    for (k, &i) in empty.iter().enumerate() {
        if empty[..k]
            .iter()
            .all(|&j| !entries[i].face.same_face(&entries[j].face))
        {
            distinct_empty += 1;
        }
    }
    if distinct_empty > 1 {
        violations.push(format!(
            "{distinct_empty} distinct faces have an empty recurrent set"
        ));
    }

    Ok(FaceRecMap {
        entries,
        violations,
    })
}

/// A second strictly-interior sample of the face: shift the sample along a
/// span direction independent from it, scaled to keep every non-tight ray
/// strictly negative; falls back to rescaling when the span is a line.
fn second_sample(
    face: &FaceDescriptor,
    cone: &DirectionCone,
) -> Result<Option<CohomologyClass>> {
    let Some(alpha) = face.sample.as_big_rational() else {
        return Ok(None); // floating samples are not re-sampled exactly
    };
    let basis: Vec<Vec<BigRational>> = face
        .span_basis
        .iter()
        .map(|v| {
            v.iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect()
        })
        .collect();
    let independent = basis.iter().find(|v| !is_parallel(v, &alpha));
    let Some(dir) = independent else {
        // the face's span is the sample's line: rescale
        let doubled: Vec<BigRational> = alpha.iter().map(|x| x * BigRational::from_integer(BigInt::from(2))).collect();
        let entries = doubled
            .iter()
            .map(rational_to_pair)
            .collect::<Result<Vec<_>>>()?;
        return Ok(Some(CohomologyClass::Rational(entries)));
    };

    // eta below every non-tight ray's slack
    let mut eta: BigRational = One::one();
    for (j, ray) in cone.rays.iter().enumerate() {
        if face.tight_rays.contains(&j) {
            continue;
        }
        let a: BigRational = alpha
            .iter()
            .zip(&ray.h)
            .map(|(x, &h)| x * BigRational::from_integer(BigInt::from(h)))
            .fold(Zero::zero(), |acc: BigRational, v| acc + v);
        let v: BigRational = dir
            .iter()
            .zip(&ray.h)
            .map(|(x, &h)| x * BigRational::from_integer(BigInt::from(h)))
            .fold(Zero::zero(), |acc: BigRational, v| acc + v);
        debug_assert!(a.is_negative());
        if v.is_zero() {
            continue;
        }
        let bound = -&a / (BigRational::from_integer(BigInt::from(2)) * v.abs());
        eta = eta.min(bound);
    }
    let shifted: Vec<BigRational> = alpha
        .iter()
        .zip(dir)
        .map(|(x, v)| x + &eta * v)
        .collect();
    let entries = shifted
        .iter()
        .map(rational_to_pair)
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(CohomologyClass::Rational(entries)))
}

fn is_parallel(a: &[BigRational], b: &[BigRational]) -> bool {
    // a x b = 0 in all coordinate pairs
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    true
}

/// Result of approximating a floating class by rational quasi-Lyapunov
/// classes with the same (or larger) tight ray set.
#[derive(Clone, Debug, Serialize)]
pub struct RationalApprox {
    pub betas: Vec<CohomologyClass>,
    pub lambdas: Vec<f64>,
    pub reconstruction: Vec<f64>,
}

/// Default denominator cap for the rationalization.
pub const DEFAULT_DENOMINATOR_CAP: i64 = 1_000_000;

/// Approximate a quasi-Lyapunov class by rational quasi-Lyapunov classes
/// within `tol`, each with tight rays containing the target's; the target is
/// reconstructed as a positive combination.
pub fn rational_approx(
    graph: &Digraph,
    alpha: &CohomologyClass,
    tol: f64,
    denominator_cap: i64,
    cone: &DirectionCone,
) -> Result<RationalApprox> {
    let cert = is_quasi_lyapunov(graph, alpha)?;
    if !cert.is_ql() {
        return Err(Error::NotQuasiLyapunov {
            cycle_len: cert.violating_cycle().map(|c| c.len()).unwrap_or(0),
        });
    }
    if let CohomologyClass::Rational(_) = alpha {
        return Ok(RationalApprox {
            betas: vec![alpha.clone()],
            lambdas: vec![1.0],
            reconstruction: alpha.as_f64(),
        });
    }

    let face = open_face(graph, alpha, cone)?;
    let basis_f: Vec<Vec<f64>> = face
        .span_basis
        .iter()
        .map(|v| v.iter().map(|&(p, q)| p as f64 / q as f64).collect())
        .collect();
    let m = basis_f.len();
    if m == 0 {
        return Err(Error::ApproxFailed(
            "tight rays span the whole space but the class is nonzero".into(),
        ));
    }
    let d = graph.dimension();
    let af = alpha.as_f64();

    // coordinates of the projection of alpha onto the span
    let coords = least_squares(&basis_f, &af)
        .ok_or_else(|| Error::ApproxFailed("span projection is singular".into()))?;
    let projected: Vec<f64> = (0..d)
        .map(|i| (0..m).map(|k| coords[k] * basis_f[k][i]).sum())
        .collect();
    let residual: f64 = projected
        .iter()
        .zip(&af)
        .map(|(p, a)| (p - a).abs())
        .fold(0.0, f64::max);
    if residual > tol / 2.0 {
        return Err(Error::ApproxFailed(format!(
            "class lies {residual:.3e} away from its face span"
        )));
    }

    let basis_norm: f64 = basis_f
        .iter()
        .map(|v| v.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // the inner verification re-checks tolerance, positivity and the
    // quasi-Lyapunov property, so failed attempts shrink the simplex
    let mut delta = (tol / 2.0) / (basis_norm * (m as f64 + 1.0));
    for _attempt in 0..20 {
        match try_simplex_approx(
            graph, alpha, &face, cone, &basis_f, &coords, delta, tol, denominator_cap,
        )? {
            Some(result) => return Ok(result),
            None => delta /= 2.0,
        }
    }
    Err(Error::ApproxFailed(format!(
        "tolerance {tol:.3e} unachievable with denominator cap {denominator_cap}"
    )))
}

#[allow(clippy::too_many_arguments)]
fn try_simplex_approx(
    graph: &Digraph,
    alpha: &CohomologyClass,
    face: &FaceDescriptor,
    cone: &DirectionCone,
    basis_f: &[Vec<f64>],
    coords: &[f64],
    delta: f64,
    tol: f64,
    denominator_cap: i64,
) -> Result<Option<RationalApprox>> {
    let m = basis_f.len();
    let d = basis_f[0].len();
    let af = alpha.as_f64();

    // simplex of coordinate vectors around the projection
    let mut vertex_coords: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    vertex_coords.push(coords.iter().map(|c| c - delta).collect());
    for j in 0..m {
        let mut v: Vec<f64> = coords.iter().map(|c| c - delta).collect();
        v[j] += delta * (m as f64 + 1.0);
        vertex_coords.push(v);
    }

    // rationalize each beta = sum_k v_k b_k in class space
    let basis_rat: Vec<Vec<BigRational>> = face
        .span_basis
        .iter()
        .map(|v| {
            v.iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect()
        })
        .collect();
    let mut betas = Vec::with_capacity(m + 1);
    let mut rationalized_coords: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for vc in &vertex_coords {
        let mut entries: Vec<BigRational> = vec![Zero::zero(); d];
        let mut rc = Vec::with_capacity(m);
        for (k, &c) in vc.iter().enumerate() {
            let (p, q) = approx_rational(c, denominator_cap);
            let coeff = BigRational::new(BigInt::from(p), BigInt::from(q));
            rc.push(p as f64 / q as f64);
            for (ei, bi) in entries.iter_mut().zip(&basis_rat[k]) {
                *ei += &coeff * bi;
            }
        }
        rationalized_coords.push(rc);
        let pairs = entries
            .iter()
            .map(rational_to_pair)
            .collect::<Result<Vec<_>>>()?;
        betas.push(CohomologyClass::Rational(pairs));
    }

    // each beta must be quasi-Lyapunov with the target's tight rays, close
    // enough to alpha
    for beta in &betas {
        let bf = beta.as_f64();
        let dist = bf
            .iter()
            .zip(&af)
            .map(|(b, a)| (b - a).abs())
            .fold(0.0, f64::max);
        if dist > tol {
            return Ok(None);
        }
        if !is_quasi_lyapunov(graph, beta)?.is_ql() {
            return Ok(None);
        }
        for &j in &face.tight_rays {
            let v = pair_exact(beta, &cone.rays[j].h).expect("beta is rational");
            if !v.is_zero() {
                return Ok(None);
            }
        }
    }

    // positive reconstruction weights: solve the barycentric system in
    // coordinate space, shifted and rescaled so the pivots stay O(1)
    let bf: Vec<Vec<f64>> = betas.iter().map(|b| b.as_f64()).collect();
    let lambdas = match barycentric_weights(&rationalized_coords, coords, delta) {
        Some(l) => l,
        None => return Ok(None),
    };
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Ok(None);
    }
    let reconstruction: Vec<f64> = (0..d)
        .map(|i| lambdas.iter().zip(&bf).map(|(l, b)| l * b[i]).sum())
        .collect();
    let err = reconstruction
        .iter()
        .zip(&af)
        .map(|(r, a)| (r - a).abs())
        .fold(0.0, f64::max);
    if err > tol {
        return Ok(None);
    }
    Ok(Some(RationalApprox {
        betas,
        lambdas,
        reconstruction,
    }))
}

/// Least squares `min |B^T c - target|` for column vectors `basis`; `None`
/// when the normal system is singular.
fn least_squares(basis: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    let m = basis.len();
    let mut gram = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
        }
        gram[i][m] = basis[i].iter().zip(target).map(|(a, b)| a * b).sum();
    }
    solve_f64(&mut gram, m)
}

/// Weights solving `sum l_j v_j = target, sum l_j = 1`, for a simplex of
/// `m + 1` vertices in m coordinates scaled by `delta` around the target.
fn barycentric_weights(vertices: &[Vec<f64>], target: &[f64], delta: f64) -> Option<Vec<f64>> {
    let k = vertices.len();
    let m = target.len();
    if k != m + 1 {
        return None;
    }
    // rows: shifted, rescaled coordinates; last row: the affine constraint
    let mut aug = vec![vec![0.0; k + 1]; k];
    for (j, v) in vertices.iter().enumerate() {
        for i in 0..m {
            aug[i][j] = (v[i] - target[i]) / delta;
        }
        aug[m][j] = 1.0;
    }
    aug[m][k] = 1.0;
    solve_f64(&mut aug, k)
}

fn solve_f64(aug: &mut [Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            aug[a][col]
                .abs()
                .partial_cmp(&aug[b][col].abs())
                .unwrap()
        })?;
        if aug[pivot][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, pivot);
        let p = aug[col][col];
        for k in col..=n {
            aug[col][k] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                for k in col..=n {
                    aug[r][k] -= f * aug[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| aug[i][n]).collect())
}

/// Best rational approximation with bounded denominator (continued
/// fractions).
pub fn approx_rational(x: f64, cap: i64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 1);
    }
    let negative = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = x.floor();
        if a > i64::MAX as f64 {
            break;
        }
        let a_int = a as i64;
        let p2 = match a_int.checked_mul(p1).and_then(|v| v.checked_add(p0)) {
            Some(v) => v,
            None => break,
        };
        let q2 = match a_int.checked_mul(q1).and_then(|v| v.checked_add(q0)) {
            Some(v) => v,
            None => break,
        };
        if q2 > cap {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1 == 0 {
        return (0, 1);
    }
    (if negative { -p1 } else { p1 }, q1)
}
