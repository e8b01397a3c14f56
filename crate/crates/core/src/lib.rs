//! # qdt-core
//!
//! A quantum decision-theory engine. Choice problems are modeled as quantum
//! probability spaces: alternatives are orthonormal vectors, the decision
//! maker's state is a density operator, and choosing is a projective
//! measurement followed by Lüders state reduction.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, `exp(-iHt)`, Haar unitaries.
//! - [`space`]: bases, density states, projector-valued measures, Born-rule probabilities.
//! - [`sequential`]: Lüders reduction, joint and conditional probabilities of two
//!   time-ordered choices, the immediate-choice limit, order-symmetry reports.
//! - [`behavioral`]: subject (feeling) space, emotion vectors, prospects in the
//!   tensor-product decision space, rational fraction and quality factor.
//! - [`classical`]: Kolmogorov joint tables as the comparison baseline.
//! - [`scenario`]: JSON scenario schema, evaluation pipelines, sampler, audit, emitters.

pub mod behavioral;
pub mod classical;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scenario;
pub mod sequential;
pub mod space;

pub use error::{QdtError, Result, ScenarioError};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use space::{AlternativeBasis, DensityState, ProjectorMeasure};

/// Default numerical tolerances.
pub mod tol {
    /// Hermiticity, unitarity, unit trace, normalization, probability range.
    pub const STRUCTURAL: f64 = 1e-9;
    /// Algebraic identities on small matrices.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Probabilities at or below this value cannot be conditioned on.
    pub const CONDITIONING: f64 = 1e-12;
}
