//! Robustness certification for ReLU feedforward networks.
//!
//! The crate is organized as a ladder of verifiers of increasing precision
//! (and cost), all sound by construction:
//!
//! - [`propagate::ibp_bounds`]: interval bound propagation, linear in depth.
//! - [`propagate::linear_bounds`]: greedy linear-relaxation backsubstitution
//!   (same-slope and adaptive-slope variants), quadratic in depth.
//! - [`certify::certify_lp`]: exact solutions of the triangle-relaxed
//!   certification LP, optionally with per-neuron LP-refined bounds.
//! - [`certify::certify_krelu`]: multi-neuron refinement that jointly relaxes
//!   groups of k ReLUs through convex hulls of their branch polytopes.
//! - [`certify::exact_certify`]: complete branch-and-bound verification over
//!   ReLU branch configurations, used as the oracle for everything above.
//!
//! Supporting kernels: a dense two-phase simplex LP solver ([`lp`]) and a
//! floating-point double-description polytope converter ([`polytope`]).

pub mod certify;
pub mod krelu;
pub mod lp;
pub mod network;
pub mod numerics;
pub mod polytope;
pub mod propagate;

pub use certify::{
    build_relaxed_lp, certify_greedy, certify_krelu, certify_lp, exact_certify, exact_minimize,
    krelu_layer_bounds, lp_layer_bounds, BoundSource, CertificationResult, ExactMinimum,
    GreedyMethod, ObjectiveMargin, Verdict,
};
pub use krelu::{
    group_hull, joint_relu_hull, octahedral_coefficients, partition_neurons, refine_bounds,
    relational_bounds, KReluSet, NeuronGroup, RelationalConstraints,
};
pub use lp::{solve_lp, LinearProgram, LpOutcome};
pub use network::{MarginObjective, Network};
pub use numerics::{
    holder_conjugate, neg_part, pos_part, row_norm, support_value, LayerBounds, NormOrder,
    UncertaintySet,
};
pub use polytope::{h_to_v, hull_of_union, intersect, v_to_h, HPolytope, VPolytope};
pub use propagate::{
    backsubstitute, concretize, ibp_bounds, linear_bounds, relu_relaxation, same_slope_bounds,
    AffineBounds, RelaxationMode, ReluRelaxation,
};

/// Errors shared across the certification pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("network must have at least one layer")]
    EmptyNetwork,
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("network has a single output; nothing to certify")]
    NothingToCertify,
    #[error("uncertainty set is not centered at the query point")]
    SetNotCentered,
    #[error("no relaxation available for layer {0}")]
    MissingRelaxation(usize),
    #[error("LP solver stalled after {pivots} pivots")]
    SolverStall { pivots: usize },
    #[error("malformed linear program: {0}")]
    MalformedLp(String),
    #[error("refinement LP unexpectedly {0}; constraint assembly is inconsistent")]
    InconsistentRefinement(&'static str),
    #[error("polytope dimension {dim} exceeds the double-description cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("generator count exceeded the double-description cap of {0}")]
    GeneratorCap(usize),
    #[error("group size {0} outside the supported range 1..=4")]
    GroupSizeCap(usize),
    #[error("input set with p = {0} is not polyhedral; the LP path needs an l-inf ball or a box")]
    InputSetNotPolyhedral(&'static str),
    #[error("{unstable} unstable neurons exceed the exact-verification budget of {budget}")]
    BudgetExceeded { unstable: usize, budget: usize },
    #[error("{neurons} hidden neurons exceed the recursive-LP cap of {cap}")]
    RecursiveLpCap { neurons: usize, cap: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("network file: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
