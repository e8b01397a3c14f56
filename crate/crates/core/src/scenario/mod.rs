//! Scenario files, evaluation pipelines and reports.
//!
//! A scenario bundles everything needed to evaluate a choice problem: the
//! ambient dimension, one or two alternative bases, the initial state, the
//! evolution between the two choices, and optionally a subject space with
//! emotion vectors. When a subject space is present the state and evolution
//! live on the decision space `H_A ⊗ H_S`.

mod audit;
mod emit;
mod eval;
mod parse;
mod sample;
pub mod schema;

pub use audit::{run_symmetry_audit, AuditReport, Counterexample, IdentityResult, WitnessResult};
pub use emit::{render, round_significant, Format, DEFAULT_DIGITS};
pub use eval::{
    run_behavioral, run_eval, run_sequence, DecompositionEntry, Metadata, ProbabilityEntry, ProbabilityReport,
    ResidualEntry, ResidualKind, SequenceSection,
};
pub use parse::{emit_scenario, parse_scenario, MAX_AMBIENT_DIM, MAX_DECISION_DIM};
pub use sample::{run_sample, Protocol, SampleReport, SampleRow};

use crate::behavioral::{ProspectMeasure, SubjectSpace};
use crate::linalg::ComplexMatrix;
use crate::space::{AlternativeBasis, DensityState, ProjectorMeasure};
use schema::ScenarioDoc;

/// Thresholds used when judging reported residuals and symmetries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub symmetry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondMeasure {
    pub basis: AlternativeBasis,
    pub measure: ProjectorMeasure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BehavioralSetup {
    pub subject: SubjectSpace,
    /// Prospects built on the alternative basis.
    pub prospects: ProspectMeasure,
    /// Prospects built on the second basis, when second emotions are given.
    pub second_prospects: Option<ProspectMeasure>,
}

/// A validated scenario. Construct with [`parse_scenario`].
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    doc: ScenarioDoc,
    alternatives: AlternativeBasis,
    alternative_measure: ProjectorMeasure,
    second: Option<SecondMeasure>,
    state: DensityState,
    evolution: ComplexMatrix,
    behavioral: Option<BehavioralSetup>,
    tolerances: Tolerances,
    seed: u64,
}

impl Scenario {
    pub fn doc(&self) -> &ScenarioDoc {
        &self.doc
    }

    pub fn ambient_dim(&self) -> usize {
        self.doc.ambient_dim
    }

    /// Subject-space dimension, 1 when there is no subject space.
    pub fn subject_dim(&self) -> usize {
        self.behavioral.as_ref().map_or(1, |b| b.subject.dim())
    }

    pub fn decision_dim(&self) -> usize {
        self.ambient_dim() * self.subject_dim()
    }

    pub fn alternatives(&self) -> &AlternativeBasis {
        &self.alternatives
    }

    pub fn alternative_measure(&self) -> &ProjectorMeasure {
        &self.alternative_measure
    }

    pub fn second(&self) -> Option<&SecondMeasure> {
        self.second.as_ref()
    }

    /// Initial state on the decision space.
    pub fn state(&self) -> &DensityState {
        &self.state
    }

    pub fn evolution(&self) -> &ComplexMatrix {
        &self.evolution
    }

    pub fn behavioral(&self) -> Option<&BehavioralSetup> {
        self.behavioral.as_ref()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.doc.seed = seed;
        self
    }

    /// Overrides the residual pass/fail threshold.
    pub fn with_residual_tolerance(mut self, tolerance: f64) -> crate::Result<Self> {
        if !tolerance.is_finite() || tolerance <= 0.0 || tolerance >= 1.0 {
            return Err(crate::QdtError::InvalidArgument(format!(
                "tolerance {tolerance} must lie in (0, 1)"
            )));
        }
        self.tolerances.residual = tolerance;
        self.doc.tolerances.residual = tolerance;
        Ok(self)
    }
}
