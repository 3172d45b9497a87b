//! Discretizes continuous flows on tori into homology-weighted transition
//! digraphs and computes their chain-recurrent structure, asymptotic
//! pseudo-direction cones, quasi-Lyapunov certificates, recurrent sets and
//! equivariant Lyapunov potentials.

pub mod class;
pub mod cone;
pub mod cycles;
pub mod error;
pub mod flow;
pub mod graph;
pub mod grid;
pub mod hull;
pub mod lyapunov;
pub mod potential;
pub mod quasi;
pub mod ratio;
pub mod recurrence;
pub mod simplex;
pub mod storage;
pub mod transition;

pub use class::CohomologyClass;
pub use cone::{cone_equivalence_check, direction_cone, sullivan_cone_support, DirectionCone};
pub use cycles::{cycle_class, eulerian_reduce, open_walk_reduce, CycleClass};
pub use error::{Error, Result};
pub use flow::{catalog_figure_one, evaluate_field, integrate, LiftedPoint, TorusPoint, VectorField};
pub use graph::{Digraph, Edge, EdgeId, NodeId};
pub use grid::{BoxGrid, BoxId};
pub use lyapunov::{
    lyapunov_potential, prescribed_pre_lyapunov, real_alpha_potential, verify_potential,
    EquivariantPotential, PotentialKind,
};
pub use quasi::{
    alpha_recurrent, face_rec_map, is_quasi_lyapunov, open_face, rational_approx,
    rec_empty_iff_strict, rec_monotone_checks, AlphaRecSet, FaceDescriptor, QlCertificate,
};
pub use ratio::{max_ratio_cycle, MaxRatioCycle};
pub use recurrence::{
    attractor_from, chain_decompose, conley_order, graded_pre_lyapunov, AttractorPair,
    ChainDecomposition, ConleyOrder,
};
pub use transition::{build_transition_graph, refine, BuildParams, TransitionGraph};
