//! Serialized form of a scenario (`"schema": "qdt/1"`).
//!
//! Complex numbers are `[re, im]` arrays, matrices are arrays of rows. Unknown
//! fields are rejected everywhere.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "qdt/1";

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

/// `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex2(pub f64, pub f64);

impl<'de> Deserialize<'de> for Complex2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<f64>::deserialize(d)?;
        match parts[..] {
            [re, im] => Ok(Complex2(re, im)),
            _ => Err(serde::de::Error::invalid_length(parts.len(), &"a two-element [re, im] array")),
        }
    }
}

pub type VectorDoc = Vec<Complex2>;
pub type MatrixDoc = Vec<Vec<Complex2>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub ambient_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative_basis: Option<BasisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_basis: Option<BasisDoc>,
    #[serde(default)]
    pub initial_state: StateDoc,
    #[serde(default)]
    pub evolution: EvolutionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_space: Option<SubjectDoc>,
    #[serde(default)]
    pub tolerances: TolerancesDoc,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub vectors: Vec<VectorDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDoc {
    #[default]
    Uniform,
    Pure {
        vector: VectorDoc,
    },
    Density {
        matrix: MatrixDoc,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvolutionDoc {
    #[default]
    Identity,
    Unitary {
        matrix: MatrixDoc,
    },
    Hamiltonian {
        matrix: MatrixDoc,
        time: f64,
    },
    /// `U_A ⊗ U_S`; only valid with a subject space.
    Factors {
        alternative: Box<EvolutionDoc>,
        subject: Box<EvolutionDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectDoc {
    pub feelings: Vec<String>,
    /// One row of feeling amplitudes per alternative.
    pub emotions: Vec<VectorDoc>,
    /// One row per vector of the second basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_emotions: Option<Vec<VectorDoc>>,
}

fn default_residual() -> f64 {
    crate::tol::STRUCTURAL
}

fn default_symmetry() -> f64 {
    crate::tol::ALGEBRAIC
}

/// Report thresholds. Input validation always uses the engine defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDoc {
    /// Pass/fail threshold for reported residuals.
    #[serde(default = "default_residual")]
    pub residual: f64,
    /// Threshold below which forward and reverse values count as equal.
    #[serde(default = "default_symmetry")]
    pub symmetry: f64,
}

impl Default for TolerancesDoc {
    fn default() -> Self {
        Self {
            residual: default_residual(),
            symmetry: default_symmetry(),
        }
    }
}
