use serde::Serialize;

use super::schema::SCHEMA_VERSION;
use super::Scenario;
use crate::behavioral::{self, ProspectMeasure};
use crate::error::{QdtError, Result, ScenarioError};
use crate::linalg::ComplexMatrix;
use crate::sequential::{self, ChoiceRecord, SymmetryReport, TimeTag};
use crate::space::{self, DensityState, ProjectorMeasure};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityEntry {
    pub measure: String,
    pub label: String,
    pub probability: f64,
}

/// `p = f + q` for one prospect.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionEntry {
    pub measure: String,
    pub label: String,
    pub total: f64,
    pub rational: f64,
    pub quality: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// Must vanish for every valid input.
    Identity,
    /// Vanishes only for suitably chosen states or measures.
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub identity: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub kind: ResidualKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceSection {
    pub first: String,
    pub second: String,
    pub first_measure: String,
    pub second_measure: String,
    /// `immediate` when the evolution is the identity, `evolved` otherwise.
    pub mode: String,
    pub prior_first: f64,
    pub prior_second: f64,
    pub joint_forward: f64,
    pub joint_reverse: f64,
    pub conditional_forward: f64,
    pub conditional_reverse: Option<f64>,
    pub conditional_by_reduction: f64,
    pub trail: Vec<ChoiceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub schema: String,
    pub seed: u64,
    pub residual_tolerance: f64,
    pub symmetry_tolerance: f64,
    pub ambient_dim: usize,
    pub subject_dim: usize,
    pub decision_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityReport {
    pub command: String,
    pub probabilities: Vec<ProbabilityEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decomposition: Vec<DecompositionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryReport>,
    pub residuals: Vec<ResidualEntry>,
    pub metadata: Metadata,
}

impl ProbabilityReport {
    fn new(command: &str, s: &Scenario) -> Self {
        let t = s.tolerances();
        Self {
            command: command.to_string(),
            probabilities: Vec::new(),
            decomposition: Vec::new(),
            sequence: None,
            symmetry: None,
            residuals: Vec::new(),
            metadata: Metadata {
                schema: SCHEMA_VERSION.to_string(),
                seed: s.seed(),
                residual_tolerance: t.residual,
                symmetry_tolerance: t.symmetry,
                ambient_dim: s.ambient_dim(),
                subject_dim: s.subject_dim(),
                decision_dim: s.decision_dim(),
            },
        }
    }

    fn residual(&mut self, identity: &str, value: f64, tolerance: f64, kind: ResidualKind) {
        self.residuals.push(ResidualEntry {
            identity: identity.to_string(),
            value,
            tolerance,
            passed: value < tolerance,
            kind,
        });
    }

    pub fn probability(&self, measure: &str, label: &str) -> Option<f64> {
        self.probabilities
            .iter()
            .find(|e| e.measure == measure && e.label == label)
            .map(|e| e.probability)
    }

    pub fn residual_value(&self, identity: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.identity == identity).map(|r| r.value)
    }

    /// Every identity-kind residual is below its tolerance.
    pub fn identities_pass(&self) -> bool {
        self.residuals
            .iter()
            .filter(|r| r.kind == ResidualKind::Identity)
            .all(|r| r.passed)
    }
}

fn require_subject(s: &Scenario) -> Result<&super::BehavioralSetup> {
    s.behavioral().ok_or_else(|| {
        QdtError::Scenario(ScenarioError::Invariant {
            path: "$.subject_space".into(),
            message: "behavioral evaluation requires a subject_space".into(),
        })
    })
}

/// State on the alternative space: the scenario state, or its partial trace
/// over the subject space.
pub(crate) fn alternative_state(s: &Scenario) -> Result<DensityState> {
    if s.behavioral().is_some() {
        behavioral::reduced_alternative_state(s.state(), s.subject_dim())
    } else {
        Ok(s.state().clone())
    }
}

fn push_measure(report: &mut ProbabilityReport, name: &str, state: &DensityState, m: &ProjectorMeasure) -> Result<()> {
    let probs = space::all_probabilities(state, m)?;
    let total: f64 = probs.iter().sum();
    for (label, p) in m.labels().iter().zip(&probs) {
        report.probabilities.push(ProbabilityEntry {
            measure: name.to_string(),
            label: label.clone(),
            probability: *p,
        });
    }
    let kind = if m.is_complete(tol::STRUCTURAL) {
        ResidualKind::Identity
    } else {
        ResidualKind::Diagnostic
    };
    let tol = report.metadata.residual_tolerance;
    report.residual(&format!("{name}_normalization"), (total - 1.0).abs(), tol, kind);
    Ok(())
}

fn push_behavioral(report: &mut ProbabilityReport, name: &str, state: &DensityState, m: &ProspectMeasure) -> Result<()> {
    let tol = report.metadata.residual_tolerance;
    let diag = behavioral::decomposition_diagnostics(state, m)?;
    let mut split = 0.0_f64;
    for (label, row) in m.labels().iter().zip(&diag.rows) {
        report.probabilities.push(ProbabilityEntry {
            measure: format!("{name}_prospect"),
            label: label.clone(),
            probability: row.total,
        });
        report.decomposition.push(DecompositionEntry {
            measure: name.to_string(),
            label: label.clone(),
            total: row.total,
            rational: row.rational,
            quality: row.quality,
        });
        split = split.max((row.total - row.rational - row.quality).abs());
    }
    report.residual(&format!("{name}_decomposition"), split, tol, ResidualKind::Identity);
    let resolution = behavioral::resolution_check(state, m)?;
    report.residual(&format!("{name}_resolution"), resolution, tol, ResidualKind::Diagnostic);
    report.residual(&format!("{name}_rational_sum"), diag.rational_residual, tol, ResidualKind::Diagnostic);
    report.residual(&format!("{name}_quality_sum"), diag.quality_residual, tol, ResidualKind::Diagnostic);
    report.residual(&format!("{name}_split"), diag.split_residual, tol, ResidualKind::Diagnostic);
    Ok(())
}

/// Single-choice probabilities, plus the prospect decomposition when the
/// scenario has a subject space.
pub fn run_eval(s: &Scenario) -> Result<ProbabilityReport> {
    let mut report = ProbabilityReport::new("eval", s);
    let state = alternative_state(s)?;
    push_measure(&mut report, "alternative", &state, s.alternative_measure())?;
    if let Some(second) = s.second() {
        push_measure(&mut report, "second", &state, &second.measure)?;
    }
    if let Some(b) = s.behavioral() {
        push_behavioral(&mut report, "alternative", s.state(), &b.prospects)?;
        if let Some(sp) = &b.second_prospects {
            push_behavioral(&mut report, "second", s.state(), sp)?;
        }
    }
    Ok(report)
}

/// Prospect probabilities and their decomposition only.
pub fn run_behavioral(s: &Scenario) -> Result<ProbabilityReport> {
    let b = require_subject(s)?;
    let mut report = ProbabilityReport::new("behavioral", s);
    push_behavioral(&mut report, "alternative", s.state(), &b.prospects)?;
    if let Some(sp) = &b.second_prospects {
        push_behavioral(&mut report, "second", s.state(), sp)?;
    }
    Ok(report)
}

pub(crate) fn prospect_projector_measure(m: &ProspectMeasure) -> Result<ProjectorMeasure> {
    ProjectorMeasure::new(m.labels().to_vec(), m.projectors().to_vec())
}

/// Measures on the decision space, by name: prospects when a subject space
/// is present, plain alternatives otherwise.
pub(crate) fn decision_measures(s: &Scenario) -> Result<Vec<(&'static str, ProjectorMeasure)>> {
    let mut out = Vec::new();
    match s.behavioral() {
        Some(b) => {
            out.push(("alternative", prospect_projector_measure(&b.prospects)?));
            if let Some(sp) = &b.second_prospects {
                out.push(("second", prospect_projector_measure(sp)?));
            }
        }
        None => {
            out.push(("alternative", s.alternative_measure().clone()));
            if let Some(second) = s.second() {
                out.push(("second", second.measure.clone()));
            }
        }
    }
    Ok(out)
}

fn resolve<'a>(
    measures: &'a [(&'static str, ProjectorMeasure)],
    s: &Scenario,
    label: &str,
) -> Result<(&'static str, &'a ProjectorMeasure, usize)> {
    for (name, m) in measures {
        if let Some(i) = m.index_of(label) {
            return Ok((name, m, i));
        }
    }
    let in_second_basis = s.second().is_some_and(|sm| sm.basis.index_of(label).is_some());
    if in_second_basis {
        return Err(QdtError::InvalidArgument(format!(
            "label `{label}` belongs to the second basis, which has no second_emotions"
        )));
    }
    Err(QdtError::InvalidArgument(format!("unknown label `{label}`")))
}

fn is_identity(u: &ComplexMatrix) -> bool {
    u.max_abs_diff(&ComplexMatrix::identity(u.rows())).is_ok_and(|d| d == 0.0)
}

fn with_label(e: QdtError, label: &str) -> QdtError {
    match e {
        QdtError::ZeroProbabilityConditioning {
            probability,
            threshold,
            ..
        } => QdtError::ZeroProbabilityConditioning {
            probability,
            threshold,
            label: Some(label.to_string()),
        },
        other => other,
    }
}

/// Two-step choice: `first` at `t₀`, `second` after the scenario evolution.
pub fn run_sequence(s: &Scenario, first: &str, second: &str) -> Result<ProbabilityReport> {
    let measures = decision_measures(s)?;
    let (fname, fm, fi) = resolve(&measures, s, first)?;
    let (sname, sm, si) = resolve(&measures, s, second)?;
    let state = s.state();
    let u = s.evolution();
    let pa = fm.projector(fi)?;
    let pb = sm.projector(si)?;
    let tolerances = s.tolerances();

    let mut report = ProbabilityReport::new("sequence", s);
    let distinct: Vec<&(&str, ProjectorMeasure)> = measures
        .iter()
        .filter(|(n, _)| *n == fname || *n == sname)
        .collect();
    for (name, m) in distinct {
        push_measure(&mut report, name, state, m)?;
    }

    let conditional_forward = sequential::conditional_probability(state, pa, u, pb).map_err(|e| with_label(e, first))?;
    let conditional_by_reduction =
        sequential::conditional_by_reduction(state, pa, u, pb).map_err(|e| with_label(e, first))?;
    let symmetry = sequential::symmetry_report_for_projectors(state, pa, pb, u, tolerances.symmetry)?;
    let immediate = is_identity(u);

    report.residual(
        "compositional_equivalence",
        (conditional_forward - conditional_by_reduction).abs(),
        tolerances.residual,
        ResidualKind::Identity,
    );
    if fm.is_complete(tol::STRUCTURAL) && sm.is_complete(tol::STRUCTURAL) {
        let check = sequential::marginal_check(state, fm, u, sm)?;
        let r = check.residuals;
        for (name, value) in [
            ("conditional_normalization", r.conditional_normalization),
            ("joint_marginal", r.joint_marginal),
            ("joint_total", r.joint_total),
            ("antisymmetric_total", r.antisymmetric_total),
        ] {
            report.residual(name, value, tolerances.residual, ResidualKind::Identity);
        }
    }

    report.sequence = Some(SequenceSection {
        first: first.to_string(),
        second: second.to_string(),
        first_measure: fname.to_string(),
        second_measure: sname.to_string(),
        mode: if immediate { "immediate" } else { "evolved" }.to_string(),
        prior_first: space::clamp_probability(space::born_raw(state, pa)?)?,
        prior_second: space::clamp_probability(space::born_raw(state, pb)?)?,
        joint_forward: symmetry.joint_forward,
        joint_reverse: symmetry.joint_reverse,
        conditional_forward,
        conditional_reverse: symmetry.conditional_reverse,
        conditional_by_reduction,
        trail: vec![
            ChoiceRecord::new(fname, fm, fi, TimeTag::At)?,
            ChoiceRecord::new(
                sname,
                sm,
                si,
                if immediate { TimeTag::ImmediatelyAfter } else { TimeTag::Later },
            )?,
        ],
    });
    report.symmetry = Some(symmetry);
    Ok(report)
}
