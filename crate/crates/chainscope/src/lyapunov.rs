//! Equivariant Lyapunov potentials. A potential is `pre` when
//! `f(u) >= f(v) + alpha.h(e)` on every edge, and `strong` when additionally
//! the inequality is strict on every edge not inside a tight recurrent chain
//! and distinct chains carry distinct values.
//!
//! Construction: base longest-path potentials, then rank offsets over the
//! tight condensation (strictness), then geometric chain offsets scaled by
//! the minimum slack (distinct values), mirroring the fast-decay sum of the
//! continuous construction on a finite graph.

use crate::class::{CohomologyClass, ScaledWeights};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Edge, EdgeId, NodeId};
use crate::quasi::{
    alpha_recurrent_from, float_tolerance, is_quasi_lyapunov, tight_subgraph, AlphaRecSet,
    PotentialValues, QlOutcome,
};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

const THETA_NUM: i64 = 1;
const THETA_DEN: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PotentialKind {
    Pre,
    Strong,
}

#[derive(Clone, Debug)]
pub struct EquivariantPotential {
    pub alpha: CohomologyClass,
    pub values: PotentialValues,
    pub kind: PotentialKind,
    /// value on each tight recurrent chain, keyed by its anchor node
    pub chain_values: Vec<(NodeId, f64)>,
}

impl EquivariantPotential {
    pub fn export_json(&self) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> = match &self.values {
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
        let chains: serde_json::Map<String, serde_json::Value> = self
            .chain_values
            .iter()
            .map(|(anchor, v)| (anchor.to_string(), (*v).into()))
            .collect();
        serde_json::json!({
            "alpha": self.alpha.as_f64(),
            "kind": match self.kind { PotentialKind::Pre => "pre", PotentialKind::Strong => "strong" },
            "values": values,
            "chain_values": chains,
        })
    }
}

/// Error payload when the class is not quasi-Lyapunov: the violating cycle.
#[derive(Clone, Debug)]
pub struct NotQlCycle(pub Vec<EdgeId>);

/// Construct a strong potential for a quasi-Lyapunov class; returns the
/// violating cycle otherwise.
pub fn lyapunov_potential(
    graph: &Digraph,
    alpha: &CohomologyClass,
) -> Result<std::result::Result<EquivariantPotential, NotQlCycle>> {
    let cert = is_quasi_lyapunov(graph, alpha)?;
    match &cert.outcome {
        QlOutcome::NotQl { cycle } => Ok(Err(NotQlCycle(cycle.clone()))),
        QlOutcome::Ql { potential } => {
            let rec = alpha_recurrent_from(graph, &cert)?;
            let values = match potential {
                PotentialValues::Exact(f0) => {
                    PotentialValues::Exact(strictify_exact(graph, alpha, f0, &rec)?)
                }
                PotentialValues::Float(f0) => PotentialValues::Float(strictify_float(
                    graph,
                    alpha,
                    f0,
                    &rec,
                    float_tolerance(alpha),
                )?),
            };
            let chain_values = rec
                .anchors
                .iter()
                .map(|&a| (a, values.as_f64()[a as usize]))
                .collect();
            let potential = EquivariantPotential {
                alpha: alpha.clone(),
                values,
                kind: PotentialKind::Strong,
                chain_values,
            };
            let outcome = verify_potential(graph, alpha, &potential.values)?;
            debug_assert_eq!(outcome.kind, Some(PotentialKind::Strong));
            Ok(Ok(potential))
        }
    }
}

/// Tight condensation data shared by the offset passes.
struct TightStructure {
    /// component id per node, ids topologically ordered
    comp_of: Vec<usize>,
    comp_count: usize,
}

fn tight_structure(graph: &Digraph, tight: &[bool]) -> Result<TightStructure> {
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
    let comp_count = scc.count();
    Ok(TightStructure {
        comp_of: scc.comp_of,
        comp_count,
    })
}

fn strictify_exact(
    graph: &Digraph,
    alpha: &CohomologyClass,
    f0: &[BigRational],
    rec: &AlphaRecSet,
) -> Result<Vec<BigRational>> {
    let tight = tight_subgraph(graph, alpha, &PotentialValues::Exact(f0.to_vec()))?;
    let ts = tight_structure(graph, &tight)?;
    let a = alpha.as_big_rational().expect("rational class");

    // minimum positive slack
    let mut s_min: Option<BigRational> = None;
    for (id, e) in graph.edges().iter().enumerate() {
        if tight[id] {
            continue;
        }
        let w: BigRational = a
            .iter()
            .zip(&e.displacement)
            .map(|(ai, &h)| ai * BigRational::from_integer(BigInt::from(h)))
            .fold(Zero::zero(), |acc: BigRational, v| acc + v);
        let slack = &f0[e.src as usize] - &f0[e.dst as usize] - w;
        debug_assert!(slack.is_positive());
        s_min = Some(match s_min {
            None => slack,
            Some(cur) => cur.min(slack),
        });
    }
    let s_min = s_min.unwrap_or_else(One::one);

    // rank offsets over the tight condensation: strictly decreasing along
    // every inter-component tight edge, all below s_min / 2
    let n_comp = ts.comp_count.max(1);
    let half = &s_min / BigRational::from_integer(BigInt::from(2));
    let bump = |comp: usize| -> BigRational {
        &half * BigRational::new(BigInt::from((n_comp - comp) as i64), BigInt::from(n_comp as i64))
    };
    let mut values: Vec<BigRational> = f0.to_vec();
    for (v, val) in values.iter_mut().enumerate() {
        *val += bump(ts.comp_of[v]);
    }

    // geometric chain offsets below the smallest rank gap, rescaled until
    // chain values are pairwise distinct
    let m = rec.chains.len();
    if m > 1 {
        let gap = &half / BigRational::from_integer(BigInt::from(n_comp as i64));
        let mut scale = &gap / BigRational::from_integer(BigInt::from(2));
        let theta = BigRational::new(BigInt::from(THETA_NUM), BigInt::from(THETA_DEN));
        'retry: for _ in 0..(m * m + 2) {
            let mut chain_vals: Vec<BigRational> = Vec::with_capacity(m);
            let mut power: BigRational = One::one();
            for chain in rec.chains.iter() {
                let anchor = chain[0] as usize;
                chain_vals.push(&values[anchor] + &scale * &power);
                power *= &theta;
            }
            for i in 0..m {
                for j in i + 1..m {
                    if chain_vals[i] == chain_vals[j] {
                        scale /= BigRational::from_integer(BigInt::from(2));
                        continue 'retry;
                    }
                }
            }
            // apply
            let mut power: BigRational = One::one();
            for chain in rec.chains.iter() {
                let offset = &scale * &power;
                for &v in chain {
                    values[v as usize] += offset.clone();
                }
                power *= &theta;
            }
            return Ok(values);
        }
        return Err(Error::NumericOverflow(
            "chain separation failed to converge".into(),
        ));
    }
    Ok(values)
}

fn strictify_float(
    graph: &Digraph,
    alpha: &CohomologyClass,
    f0: &[f64],
    rec: &AlphaRecSet,
    tau: f64,
) -> Result<Vec<f64>> {
    let tight = tight_subgraph(graph, alpha, &PotentialValues::Float(f0.to_vec()))?;
    let ts = tight_structure(graph, &tight)?;
    let af = alpha.as_f64();

    let mut s_min = f64::INFINITY;
    for (id, e) in graph.edges().iter().enumerate() {
        if tight[id] {
            continue;
        }
        let w: f64 = af
            .iter()
            .zip(&e.displacement)
            .map(|(ai, &h)| ai * h as f64)
            .sum();
        let slack = f0[e.src as usize] - f0[e.dst as usize] - w;
        s_min = s_min.min(slack);
    }
    if !s_min.is_finite() {
        s_min = 1.0;
    }
    let n_comp = ts.comp_count.max(1);
    let half = s_min / 2.0;
    let mut values: Vec<f64> = f0.to_vec();
    for (v, val) in values.iter_mut().enumerate() {
        *val += half * (n_comp - ts.comp_of[v]) as f64 / n_comp as f64;
    }

    let m = rec.chains.len();
    if m > 1 {
        let gap = half / n_comp as f64;
        let mut scale = gap / 2.0;
        let theta = THETA_NUM as f64 / THETA_DEN as f64;
        'retry: for _ in 0..64 {
            let mut chain_vals = Vec::with_capacity(m);
            let mut power = 1.0;
            for chain in rec.chains.iter() {
                chain_vals.push(values[chain[0] as usize] + scale * power);
                power *= theta;
            }
            for i in 0..m {
                for j in i + 1..m {
                    if (chain_vals[i] - chain_vals[j]).abs() <= tau {
                        scale *= 1.7;
                        continue 'retry;
                    }
                }
            }
            let mut power = 1.0;
            for chain in rec.chains.iter() {
                let offset = scale * power;
                for &v in chain {
                    values[v as usize] += offset;
                }
                power *= theta;
            }
            return Ok(values);
        }
        return Err(Error::NumericOverflow(
            "chain separation failed in floating point".into(),
        ));
    }
    Ok(values)
}

/// What a candidate potential satisfies, with witnesses for each failure of
/// the next stronger class.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutcome {
    /// `None` means invalid (an edge inequality fails)
    pub kind: Option<PotentialKind>,
    pub failures: Vec<VerifyFailure>,
}

#[derive(Clone, Debug, Serialize)]
pub enum VerifyFailure {
    /// edge inequality violated: not even pre
    EdgeViolation { edge: EdgeId },
    /// slack is zero on an edge outside every chain: pre but not strong
    MissingStrictness { edge: EdgeId },
    /// two chains share a value: pre but not strong
    ChainCollision { anchor_a: NodeId, anchor_b: NodeId },
}

/// Classify a candidate node function against a class.
pub fn verify_potential(
    graph: &Digraph,
    alpha: &CohomologyClass,
    candidate: &PotentialValues,
) -> Result<VerifyOutcome> {
    if candidate.len() != graph.node_count() as usize {
        return Err(Error::InvalidParameter(
            "candidate length must match the node count".into(),
        ));
    }
    let exact = alpha.as_big_rational().zip(match candidate {
        PotentialValues::Exact(v) => Some(v.clone()),
        PotentialValues::Float(_) => None,
    });

    let mut failures = Vec::new();

    // edge inequalities and slack signs
    let mut tight_flags = vec![false; graph.edges().len()];
    match &exact {
        Some((a, f)) => {
            for (id, e) in graph.edges().iter().enumerate() {
                let w: BigRational = a
                    .iter()
                    .zip(&e.displacement)
                    .map(|(ai, &h)| ai * BigRational::from_integer(BigInt::from(h)))
                    .fold(Zero::zero(), |acc: BigRational, v| acc + v);
                let slack = &f[e.src as usize] - &f[e.dst as usize] - w;
                if slack.is_negative() {
                    failures.push(VerifyFailure::EdgeViolation { edge: id });
                } else if slack.is_zero() {
                    tight_flags[id] = true;
                }
            }
        }
        None => {
            let f = candidate.as_f64();
            let tau = float_tolerance(alpha);
            for (id, e) in graph.edges().iter().enumerate() {
                let w = alpha.pair_f64(&e.displacement);
                let slack = f[e.src as usize] - f[e.dst as usize] - w;
                if slack < -tau {
                    failures.push(VerifyFailure::EdgeViolation { edge: id });
                } else if slack.abs() <= tau {
                    tight_flags[id] = true;
                }
            }
        }
    }
    if !failures.is_empty() {
        return Ok(VerifyOutcome {
            kind: None,
            failures,
        });
    }

    // the chains are a property of the graph and class, not of the candidate
    let rec = crate::quasi::alpha_recurrent(graph, alpha)?;

    for (id, e) in graph.edges().iter().enumerate() {
        if !tight_flags[id] {
            continue;
        }
        let same_chain = rec
            .chain_of(e.src)
            .is_some_and(|c| rec.chain_of(e.dst) == Some(c));
        if !same_chain {
            failures.push(VerifyFailure::MissingStrictness { edge: id });
        }
    }

    let values = candidate.as_f64();
    let tau = if candidate.is_exact() {
        0.0
    } else {
        float_tolerance(alpha)
    };
    for i in 0..rec.anchors.len() {
        for j in i + 1..rec.anchors.len() {
            let (a, b) = (rec.anchors[i], rec.anchors[j]);
            let distinct = match &exact {
                Some((_, f)) => f[a as usize] != f[b as usize],
                None => (values[a as usize] - values[b as usize]).abs() > tau,
            };
            if !distinct {
                failures.push(VerifyFailure::ChainCollision {
                    anchor_a: a,
                    anchor_b: b,
                });
            }
        }
    }

    Ok(VerifyOutcome {
        kind: Some(if failures.is_empty() {
            PotentialKind::Strong
        } else {
            PotentialKind::Pre
        }),
        failures,
    })
}

/// Witness of an infeasible prescription: a path along which the prescribed
/// values increase faster than the edge weights allow.
#[derive(Clone, Debug, Serialize)]
pub struct PrescriptionWitness {
    pub path: Vec<EdgeId>,
    pub from_chain: usize,
    pub to_chain: usize,
}

/// Extend prescribed chain values to a pre potential: chain nodes are
/// clamped to the prescription (offset by the intra-chain profile), other
/// nodes take the least value consistent with every edge inequality. The
/// restriction to the recurrent set reproduces the prescription exactly.
pub fn prescribed_pre_lyapunov(
    graph: &Digraph,
    alpha: &CohomologyClass,
    prescription: &[BigRational],
) -> Result<std::result::Result<EquivariantPotential, PrescriptionWitness>> {
    if !alpha.is_rational() {
        return Err(Error::InvalidParameter(
            "prescriptions need a rational class".into(),
        ));
    }
    let cert = is_quasi_lyapunov(graph, alpha)?;
    let QlOutcome::Ql { potential: base } = &cert.outcome else {
        return Err(Error::NotQuasiLyapunov {
            cycle_len: cert.violating_cycle().map(|c| c.len()).unwrap_or(0),
        });
    };
    let rec = alpha_recurrent_from(graph, &cert)?;
    if prescription.len() != rec.chains.len() {
        return Err(Error::InvalidParameter(format!(
            "prescription has {} values for {} chains",
            prescription.len(),
            rec.chains.len()
        )));
    }
    let PotentialValues::Exact(f0) = base else {
        unreachable!("rational class yields exact potentials")
    };

    let n = graph.node_count() as usize;
    // clamp values on chain nodes: prescription + intra-chain profile
    let mut clamp: Vec<Option<BigRational>> = vec![None; n];
    let mut chain_of_node: Vec<Option<usize>> = vec![None; n];
    for (k, chain) in rec.chains.iter().enumerate() {
        let anchor = chain[0] as usize;
        for &v in chain {
            let profile = &f0[v as usize] - &f0[anchor];
            clamp[v as usize] = Some(&prescription[k] + profile);
            chain_of_node[v as usize] = Some(k);
        }
    }

    let weights = ScaledWeights::compute(alpha, graph.edges())?;
    let scale = BigRational::from_integer(weights.scale.clone());
    let w_rat = |id: usize| -> BigRational {
        BigRational::from_integer(BigInt::from(weights.weights[id])) / scale.clone()
    };

    // backward relaxation of the least consistent value
    let mut flow: Vec<Option<BigRational>> = clamp.clone();
    let mut pred: Vec<Option<EdgeId>> = vec![None; n];
    let rounds = n + 1;
    let mut changed = true;
    for _ in 0..rounds {
        if !changed {
            break;
        }
        changed = false;
        for (id, e) in graph.edges().iter().enumerate() {
            let Some(down) = flow[e.dst as usize].clone() else {
                continue;
            };
            let cand = down + w_rat(id);
            let better = match &flow[e.src as usize] {
                None => true,
                Some(cur) => cand > *cur,
            };
            if better {
                flow[e.src as usize] = Some(cand);
                pred[e.src as usize] = Some(id);
                changed = true;
            }
        }
    }
    debug_assert!(!changed, "relaxation must settle: the class is QL");

    // clamped nodes must not be pushed above their prescribed value
    for v in 0..n {
        let (Some(cv), Some(fv)) = (&clamp[v], &flow[v]) else {
            continue;
        };
        if fv > cv {
            // walk the predecessor chain to a clamped node
            let mut path = Vec::new();
            let mut node = v;
            while let Some(eid) = pred[node] {
                path.push(eid);
                node = graph.edge(eid).dst as usize;
                if clamp[node].is_some() && pred[node].is_none() {
                    break;
                }
                if path.len() > n {
                    break;
                }
            }
            let witness = PrescriptionWitness {
                from_chain: chain_of_node[v].unwrap_or(usize::MAX),
                to_chain: chain_of_node[node].unwrap_or(usize::MAX),
                path,
            };
            return Ok(Err(witness));
        }
    }

    // nodes that reach no chain float freely below; only edges entering
    // them from assigned nodes bound the common shift from above (an edge
    // out of the unassigned set cannot exist, it would assign its source)
    let mut shift: Option<BigRational> = None;
    for (id, e) in graph.edges().iter().enumerate() {
        let (u, v) = (e.src as usize, e.dst as usize);
        if flow[u].is_none() || flow[v].is_some() {
            continue;
        }
        // flow(u) >= f0(v) + C + w must hold
        let bound = flow[u].clone().unwrap() - w_rat(id) - &f0[v];
        shift = Some(match shift {
            None => bound,
            Some(cur) => cur.min(bound),
        });
    }
    let shift = shift.unwrap_or_else(Zero::zero);
    let values: Vec<BigRational> = (0..n)
        .map(|v| match &flow[v] {
            Some(x) => x.clone(),
            None => &f0[v] + &shift,
        })
        .collect();

    let potential = EquivariantPotential {
        alpha: alpha.clone(),
        chain_values: rec
            .anchors
            .iter()
            .zip(prescription)
            .map(|(&anchor, p)| (anchor, p.to_f64().unwrap_or(f64::NAN)))
            .collect(),
        values: PotentialValues::Exact(values),
        kind: PotentialKind::Pre,
    };
    // the extension is pre by construction; re-verify defensively
    let outcome = verify_potential(graph, alpha, &potential.values)?;
    if outcome.kind.is_none() {
        return Err(Error::InvalidParameter(
            "prescribed extension failed the edge inequalities".into(),
        ));
    }
    Ok(Ok(potential))
}

/// Strong potential for a floating class through its rational
/// decomposition: per-term strong potentials combined with the positive
/// weights, then re-separated if the combination collides.
pub fn real_alpha_potential(
    graph: &Digraph,
    alpha: &CohomologyClass,
    tol: f64,
    denominator_cap: i64,
    cone: &crate::cone::DirectionCone,
) -> Result<EquivariantPotential> {
    let approx = crate::quasi::rational_approx(graph, alpha, tol, denominator_cap, cone)?;
    let mut combined = vec![0.0; graph.node_count() as usize];
    for (beta, lambda) in approx.betas.iter().zip(&approx.lambdas) {
        let potential = lyapunov_potential(graph, beta)?
            .map_err(|_| Error::InvalidParameter("decomposition term is not QL".into()))?;
        for (acc, v) in combined.iter_mut().zip(potential.values.as_f64()) {
            *acc += lambda * v;
        }
    }

    let candidate = PotentialValues::Float(combined.clone());
    let outcome = verify_potential(graph, alpha, &candidate)?;
    let values = match outcome.kind {
        Some(PotentialKind::Strong) => combined,
        Some(PotentialKind::Pre) => {
            let cert = is_quasi_lyapunov(graph, alpha)?;
            let rec = alpha_recurrent_from(graph, &cert)?;
            strictify_float(graph, alpha, &combined, &rec, float_tolerance(alpha))?
        }
        None => {
            return Err(Error::InvalidParameter(
                "combined potential violates an edge inequality".into(),
            ))
        }
    };
    let values = PotentialValues::Float(values);
    let outcome = verify_potential(graph, alpha, &values)?;
    if outcome.kind != Some(PotentialKind::Strong) {
        return Err(Error::ApproxFailed(
            "separation did not reach a strong potential".into(),
        ));
    }
    let rec = crate::quasi::alpha_recurrent(graph, alpha)?;
    let chain_values = rec
        .anchors
        .iter()
        .map(|&a| (a, values.as_f64()[a as usize]))
        .collect();
    Ok(EquivariantPotential {
        alpha: alpha.clone(),
        values,
        kind: PotentialKind::Strong,
        chain_values,
    })
}
