//! Exact construction and certification of disjoint hypercyclic operator
//! tuples.
//!
//! The ambient space is the space of finite-support real sequences with
//! rational entries, carrying the ℓ² distance. On it the crate provides:
//!
//! * [`sparse`]: vectors, functionals, the pairing ⟨f, x⟩ and exact norms;
//! * [`operators`]: operator expression trees (shifts, finite-rank updates of
//!   the identity, compositions, certified inverses) with exact evaluation
//!   and duals;
//! * [`constructions`]: the similarity maps that move one vector (and one
//!   functional) onto another, and the pipelines that conjugate a
//!   hypercyclic direct sum into a disjoint hypercyclic tuple;
//! * [`synthesis`]: explicit vectors whose orbit under `(λB)^{⊕m}` visits a
//!   prescribed target schedule, with exact error certificates;
//! * [`verify`]: orbit-density reports and similarity audits.
//!
//! All arithmetic is exact; there is no floating point on any verdict path.

pub mod constructions;
pub mod matrix;
pub mod operators;
pub mod scalar;
pub mod sparse;
pub mod synthesis;
pub mod verify;

pub use constructions::{
    biorthogonal_pair, conjugate_tuple, dual_transitive_map, genericity_check, repair_genericity, restriction_matrix,
    solve_coefficients, theorem_d_pipeline, theorem_d_pipeline_with, theorem_s_pipeline, theorem_s_reduction,
    transitive_map, CoefficientTriple, Construction, DisjointTupleArtifact, DualData, DualTransitiveMap,
};
pub use operators::{conjugate, invert, FiniteRankUpdate, InverseOfUpdate, OperatorExpr, OperatorTuple};
pub use scalar::Scalar;
pub use sparse::{linearly_independent, norm_sq, pair, SparseFunctional, SparseVector};
pub use synthesis::{enumerate_targets, synthesize, GridSpec, SynthesisCertificate, TargetSchedule, Visit, VisitCheck};
pub use verify::{
    conjugate_schedule, dual_similarity_audit, orbit_report, orbit_report_with_times, similarity_audit, OrbitRecord,
    OrbitReport,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("operator is not invertible: {0}")]
    NotInvertible(String),
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
