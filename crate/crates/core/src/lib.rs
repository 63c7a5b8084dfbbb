//! Achievable rate regions for cooperative relay broadcast channels with
//! rate-limited feedback.
//!
//! The crate is organised bottom-up:
//!
//! - [`prob`]: exact finite joint pmfs, conditional mutual information and
//!   seeded generators for the structured pmf families of the coding schemes.
//! - [`gauss`]: jointly Gaussian systems with log-determinant mutual information.
//! - [`polytope`]: halfspace systems over named rate variables with
//!   Fourier-Motzkin elimination, LP redundancy removal, vertex enumeration
//!   and tolerance-based region comparison.
//! - [`region`]: symbolic region templates (mutual-information expressions with
//!   `min{0, .}` corrections) and their instantiation into polytopes.
//! - [`prefme`]: the pre-elimination achievability systems of the three coding
//!   schemes, their numerical projection and the projection-vs-theorem check.
//! - [`bounds`]: corner-point rates of the Gaussian relay broadcast channel.

pub mod bounds;
pub mod error;
pub mod gauss;
pub mod polytope;
pub mod prefme;
pub mod prob;
pub mod region;
mod search;

pub use bounds::{
    cf_rate, cf_rate_at, liang_pdf_rate, scheme1_rate, scheme1_rate_with, table1, wu_rate,
    ActiveConstraint, BoundResult, GaussianParamPoint, Scheme1Options, Table1, Table1Row,
};
pub use error::{Error, Result};
pub use gauss::{GaussianRbcParams, GaussianSystem};
pub use polytope::{
    polytopes_equal, Comparison, Containment, HalfspaceSystem, RateVar, Relation, Row, Verdict,
    VertexSet,
};
pub use prefme::{
    build_scheme_system, check_pmf, marton_counterexample, project_to_rates, verify_theorem, Direction, Discrepancy,
    Mismatch, PmfCheck, SchemeSystem, Transcription, VerifyOptions, VerifyReport,
};
pub use prob::{random_structured_pmf, JointPmf, MiAtom, Scheme, StructuredFamilySpec, VariableId};
pub use region::{
    build_region, instantiate_region, relaxed_feedback_constraint, slice_r0, AssignmentSource,
    FeedbackRates, Instantiated, Link, MiAssignment, MiExpr, RegionId, RegionSpec,
};
