use super::schema::{BasisDoc, EvolutionDoc, MatrixDoc, ScenarioDoc, StateDoc, VectorDoc, SCHEMA_VERSION};
use super::{BehavioralSetup, Scenario, SecondMeasure, Tolerances};
use crate::behavioral::{EmotionVector, ProspectMeasure, SubjectSpace};
use crate::error::ScenarioError;
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64};
use crate::space::{measure_from_basis, AlternativeBasis, DensityState};
use crate::tol;

/// Largest accepted ambient dimension.
pub const MAX_AMBIENT_DIM: usize = 64;
/// Largest accepted decision-space dimension (ambient × subject).
pub const MAX_DECISION_DIM: usize = 256;

type Parsed<T> = std::result::Result<T, ScenarioError>;

fn invariant(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invariant {
        path: path.into(),
        message: message.into(),
    }
}

fn json_path(path: &serde_path_to_error::Path) -> String {
    let p = path.to_string();
    if p == "." || p.is_empty() {
        "$".to_string()
    } else if p.starts_with('[') {
        format!("${p}")
    } else {
        format!("$.{p}")
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Parsed<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    if !value.is_object() {
        return Err(ScenarioError::Schema {
            path: "$".into(),
            message: "a scenario must be a JSON object".into(),
        });
    }
    let doc: ScenarioDoc = serde_path_to_error::deserialize(value).map_err(|err| ScenarioError::Schema {
        path: json_path(err.path()),
        message: strip_position(&err.into_inner().to_string()),
    })?;
    build(doc)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Pretty-printed document that reparses to an equal scenario.
pub fn emit_scenario(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(scenario.doc()).expect("scenario documents always serialize")
}

fn to_vector(doc: &VectorDoc, len: usize, path: &str) -> Parsed<ComplexVector> {
    if doc.len() != len {
        return Err(invariant(path, format!("expected {len} entries, got {}", doc.len())));
    }
    ComplexVector::new(doc.iter().map(|z| C64::new(z.0, z.1)).collect()).map_err(|e| invariant(path, e.to_string()))
}

fn to_matrix(doc: &MatrixDoc, n: usize, path: &str) -> Parsed<ComplexMatrix> {
    if doc.len() != n {
        return Err(invariant(path, format!("expected {n} rows, got {}", doc.len())));
    }
    let mut rows = Vec::with_capacity(n);
    for (i, row) in doc.iter().enumerate() {
        if row.len() != n {
            return Err(invariant(
                format!("{path}[{i}]"),
                format!("expected {n} entries, got {}", row.len()),
            ));
        }
        rows.push(row.iter().map(|z| C64::new(z.0, z.1)).collect());
    }
    ComplexMatrix::from_rows(rows).map_err(|e| invariant(path, e.to_string()))
}

fn check_labels(labels: &[String], path: &str, taken: &[String]) -> Parsed<()> {
    for (i, l) in labels.iter().enumerate() {
        let p = format!("{path}[{i}]");
        if l.is_empty() {
            return Err(invariant(p, "label must not be empty"));
        }
        if labels[..i].contains(l) {
            return Err(invariant(p, format!("duplicate label `{l}`")));
        }
        if taken.contains(l) {
            return Err(invariant(p, format!("label `{l}` is already used by the alternative basis")));
        }
    }
    Ok(())
}

fn build_basis(doc: &mut BasisDoc, dim: usize, path: &str, prefix: &str, taken: &[String]) -> Parsed<AlternativeBasis> {
    if doc.vectors.is_empty() {
        return Err(invariant(format!("{path}.vectors"), "basis needs at least one vector"));
    }
    if doc.vectors.len() > dim {
        return Err(invariant(
            format!("{path}.vectors"),
            format!("{} vectors cannot be orthonormal in dimension {dim}", doc.vectors.len()),
        ));
    }
    let labels = doc
        .labels
        .get_or_insert_with(|| (1..=doc.vectors.len()).map(|k| format!("{prefix}{k}")).collect())
        .clone();
    if labels.len() != doc.vectors.len() {
        return Err(invariant(
            format!("{path}.labels"),
            format!("{} labels for {} vectors", labels.len(), doc.vectors.len()),
        ));
    }
    check_labels(&labels, &format!("{path}.labels"), taken)?;

    let mut vectors = Vec::with_capacity(doc.vectors.len());
    for (i, v) in doc.vectors.iter().enumerate() {
        let p = format!("{path}.vectors[{i}]");
        let v = to_vector(v, dim, &p)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(invariant(p, format!("vector {i} not normalized: ‖v{i}‖ = {norm}")));
        }
        for (m, prev) in vectors.iter().enumerate() {
            let overlap = linalg::ComplexVector::inner(prev, &v).expect("same dimension").norm();
            if overlap > tol::STRUCTURAL {
                return Err(invariant(
                    format!("{path}.vectors[{i}]"),
                    format!("vectors {m},{i} not orthogonal: |⟨v{m}|v{i}⟩| = {overlap}"),
                ));
            }
        }
        vectors.push(v);
    }
    AlternativeBasis::new(labels, vectors).map_err(|e| invariant(path, e.to_string()))
}

fn build_evolution(doc: &EvolutionDoc, dim: usize, path: &str, factors: Option<(usize, usize)>) -> Parsed<ComplexMatrix> {
    match doc {
        EvolutionDoc::Identity => Ok(ComplexMatrix::identity(dim)),
        EvolutionDoc::Unitary { matrix } => {
            let p = format!("{path}.matrix");
            let u = to_matrix(matrix, dim, &p)?;
            u.require_unitary(tol::STRUCTURAL).map_err(|e| invariant(p, e.to_string()))?;
            Ok(u)
        }
        EvolutionDoc::Hamiltonian { matrix, time } => {
            let p = format!("{path}.matrix");
            let h = to_matrix(matrix, dim, &p)?;
            if !time.is_finite() {
                return Err(invariant(format!("{path}.time"), "time must be finite"));
            }
            linalg::unitary_from_hamiltonian(&h, *time).map_err(|e| invariant(p, e.to_string()))
        }
        EvolutionDoc::Factors { alternative, subject } => {
            let Some((da, ds)) = factors else {
                return Err(invariant(path, "factored evolution requires a subject_space at the top level"));
            };
            let ua = build_evolution(alternative, da, &format!("{path}.alternative"), None)?;
            let us = build_evolution(subject, ds, &format!("{path}.subject"), None)?;
            Ok(ua.kron(&us))
        }
    }
}

fn build_state(doc: &StateDoc, dim: usize) -> Parsed<DensityState> {
    match doc {
        StateDoc::Uniform => DensityState::maximally_mixed(dim).map_err(|e| invariant("$.initial_state", e.to_string())),
        StateDoc::Pure { vector } => {
            let p = "$.initial_state.vector";
            let v = to_vector(vector, dim, p)?;
            let norm = v.norm();
            if (norm - 1.0).abs() > tol::STRUCTURAL {
                return Err(invariant(p, format!("state vector not normalized: ‖ψ‖ = {norm}")));
            }
            DensityState::pure(&v).map_err(|e| invariant(p, e.to_string()))
        }
        StateDoc::Density { matrix } => {
            let p = "$.initial_state.matrix";
            let m = to_matrix(matrix, dim, p)?;
            DensityState::new(m).map_err(|e| invariant(p, e.to_string()))
        }
    }
}

fn build_emotions(rows: &[VectorDoc], count: usize, subject_dim: usize, path: &str) -> Parsed<Vec<EmotionVector>> {
    if rows.len() != count {
        return Err(invariant(
            path,
            format!("{} emotion rows for {count} alternatives", rows.len()),
        ));
    }
    rows.iter()
        .enumerate()
        .map(|(n, row)| {
            let p = format!("{path}[{n}]");
            let v = to_vector(row, subject_dim, &p)?;
            let weight = v.norm().powi(2);
            EmotionVector::new(v).map_err(|_| {
                invariant(
                    p,
                    format!("emotion vector {n} not normalized: Σ|b|² = {weight} (must equal 1)"),
                )
            })
        })
        .collect()
}

fn check_tolerance(value: f64, path: &str) -> Parsed<()> {
    if !value.is_finite() || value <= 0.0 || value >= 1.0 {
        return Err(invariant(path, format!("tolerance {value} must lie in (0, 1)")));
    }
    Ok(())
}

pub(super) fn build(mut doc: ScenarioDoc) -> Parsed<Scenario> {
    if doc.schema != SCHEMA_VERSION {
        return Err(ScenarioError::Schema {
            path: "$.schema".into(),
            message: format!("unsupported schema `{}`, expected `{SCHEMA_VERSION}`", doc.schema),
        });
    }
    let dim = doc.ambient_dim;
    if dim == 0 || dim > MAX_AMBIENT_DIM {
        return Err(invariant(
            "$.ambient_dim",
            format!("ambient dimension must lie in 1..={MAX_AMBIENT_DIM}, got {dim}"),
        ));
    }
    check_tolerance(doc.tolerances.residual, "$.tolerances.residual")?;
    check_tolerance(doc.tolerances.symmetry, "$.tolerances.symmetry")?;

    let subject_dim = match &doc.subject_space {
        Some(s) => {
            if s.feelings.is_empty() {
                return Err(invariant("$.subject_space.feelings", "subject space needs at least one feeling"));
            }
            check_labels(&s.feelings, "$.subject_space.feelings", &[])?;
            s.feelings.len()
        }
        None => 1,
    };
    let decision_dim = dim * subject_dim;
    if decision_dim > MAX_DECISION_DIM {
        return Err(invariant(
            "$.subject_space.feelings",
            format!("decision space dimension {decision_dim} exceeds {MAX_DECISION_DIM}"),
        ));
    }

    let alternatives = match doc.alternative_basis.as_mut() {
        Some(b) => build_basis(b, dim, "$.alternative_basis", "A", &[])?,
        None => AlternativeBasis::canonical(dim, "A").map_err(|e| invariant("$.ambient_dim", e.to_string()))?,
    };
    let alternative_measure =
        measure_from_basis(&alternatives).map_err(|e| invariant("$.alternative_basis", e.to_string()))?;
    let second = match doc.second_basis.as_mut() {
        Some(b) => {
            let basis = build_basis(b, dim, "$.second_basis", "B", alternatives.labels())?;
            let measure = measure_from_basis(&basis).map_err(|e| invariant("$.second_basis", e.to_string()))?;
            Some(SecondMeasure { basis, measure })
        }
        None => None,
    };

    let state = build_state(&doc.initial_state, decision_dim)?;
    let factors = doc.subject_space.as_ref().map(|_| (dim, subject_dim));
    let evolution = build_evolution(&doc.evolution, decision_dim, "$.evolution", factors)?;

    let behavioral = match &doc.subject_space {
        Some(s) => {
            let subject = SubjectSpace::new(s.feelings.clone())
                .map_err(|e| invariant("$.subject_space.feelings", e.to_string()))?;
            let emotions = build_emotions(&s.emotions, alternatives.len(), subject_dim, "$.subject_space.emotions")?;
            let prospects = ProspectMeasure::from_basis(&alternatives, &emotions)
                .map_err(|e| invariant("$.subject_space.emotions", e.to_string()))?;
            let second_prospects = match (&s.second_emotions, &second) {
                (None, _) => None,
                (Some(_), None) => {
                    return Err(invariant(
                        "$.subject_space.second_emotions",
                        "second_emotions requires a second_basis",
                    ))
                }
                (Some(rows), Some(sm)) => {
                    let path = "$.subject_space.second_emotions";
                    let emotions = build_emotions(rows, sm.basis.len(), subject_dim, path)?;
                    Some(
                        ProspectMeasure::from_basis(&sm.basis, &emotions)
                            .map_err(|e| invariant(path, e.to_string()))?,
                    )
                }
            };
            Some(BehavioralSetup {
                subject,
                prospects,
                second_prospects,
            })
        }
        None => None,
    };

    let tolerances = Tolerances {
        residual: doc.tolerances.residual,
        symmetry: doc.tolerances.symmetry,
    };
    let seed = doc.seed;
    Ok(Scenario {
        doc,
        alternatives,
        alternative_measure,
        second,
        state,
        evolution,
        behavioral,
        tolerances,
        seed,
    })
}
