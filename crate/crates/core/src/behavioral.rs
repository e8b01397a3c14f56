//! Behavioral probabilities on the decision space `H_A ⊗ H_S`.
//!
//! The subject space `H_S` is spanned by orthonormal elementary feelings `|α⟩`.
//! Each alternative `A_n` carries an emotion vector `|x_n⟩ = Σ_α b_{nα}|α⟩`;
//! emotion vectors are normalized but need not be mutually orthogonal. The
//! prospect `|A_n x_n⟩ = |A_n⟩ ⊗ |x_n⟩` is what a decision maker actually
//! chooses, and its probability splits into a rational fraction (the diagonal
//! part in the feeling basis) plus a quality factor (the interference part).
//!
//! Emotion coefficients are fixed inputs of one evaluation. Contextual drift
//! can be imitated with [`EmotionVector::perturbed`].

use rand::Rng;
use serde::Serialize;

use crate::error::{QdtError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64, ZERO};
use crate::rng;
use crate::sequential::{self, SymmetryReport};
use crate::space::{self, clamp_probability, AlternativeBasis, DensityState};
use crate::tol;

/// Space of elementary feelings.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectSpace {
    feeling_labels: Vec<String>,
}

impl SubjectSpace {
    pub fn new(feeling_labels: Vec<String>) -> Result<Self> {
        if feeling_labels.is_empty() {
            return Err(QdtError::InvalidArgument("subject space needs at least one feeling".into()));
        }
        space::check_unique_labels(&feeling_labels)?;
        Ok(Self { feeling_labels })
    }

    /// Feelings labeled `s1..s{dim}`.
    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new((1..=dim).map(|k| format!("s{k}")).collect())
    }

    pub fn dim(&self) -> usize {
        self.feeling_labels.len()
    }

    pub fn feeling_labels(&self) -> &[String] {
        &self.feeling_labels
    }
}

/// Unit vector of feeling amplitudes `b_{nα}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmotionVector {
    coefficients: ComplexVector,
}

impl EmotionVector {
    pub fn new(coefficients: ComplexVector) -> Result<Self> {
        coefficients.require_unit(tol::STRUCTURAL)?;
        Ok(Self { coefficients })
    }

    /// A single elementary feeling `|α⟩`.
    pub fn elementary(dim: usize, feeling: usize) -> Result<Self> {
        Self::new(ComplexVector::basis(dim, feeling)?)
    }

    pub fn coefficients(&self) -> &ComplexVector {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim()
    }

    /// `⟨self|other⟩`; generally non-zero for distinct emotions.
    pub fn overlap(&self, other: &EmotionVector) -> Result<C64> {
        self.coefficients.inner(&other.coefficients)
    }

    /// Adds complex Gaussian noise of the given amplitude to every coefficient
    /// and renormalizes.
    pub fn perturbed<R: Rng + ?Sized>(&self, amplitude: f64, rng: &mut R) -> Result<EmotionVector> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(QdtError::InvalidArgument(format!("noise amplitude {amplitude}")));
        }
        let noisy: Vec<C64> = self
            .coefficients
            .entries()
            .iter()
            .map(|b| b + rng::complex_gaussian(rng) * amplitude)
            .collect();
        Self::new(ComplexVector::new(noisy)?.normalized()?)
    }
}

/// An alternative paired with its emotion vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Prospect {
    pub alternative_index: usize,
    alternative_vector: ComplexVector,
    emotion: EmotionVector,
}

impl Prospect {
    pub fn new(alternative_index: usize, alternative_vector: ComplexVector, emotion: EmotionVector) -> Result<Self> {
        alternative_vector.require_unit(tol::STRUCTURAL)?;
        Ok(Self {
            alternative_index,
            alternative_vector,
            emotion,
        })
    }

    pub fn alternative_vector(&self) -> &ComplexVector {
        &self.alternative_vector
    }

    pub fn emotion(&self) -> &EmotionVector {
        &self.emotion
    }

    /// `|A_n⟩ ⊗ |x_n⟩`.
    pub fn vector(&self) -> ComplexVector {
        self.alternative_vector.kron(self.emotion.coefficients())
    }

    pub fn alternative_dim(&self) -> usize {
        self.alternative_vector.dim()
    }

    pub fn subject_dim(&self) -> usize {
        self.emotion.dim()
    }

    pub fn decision_dim(&self) -> usize {
        self.alternative_dim() * self.subject_dim()
    }
}

/// Projector-valued measure of prospects for distinct alternatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ProspectMeasure {
    labels: Vec<String>,
    prospects: Vec<Prospect>,
    projectors: Vec<ComplexMatrix>,
}

impl ProspectMeasure {
    pub fn new(labels: Vec<String>, prospects: Vec<Prospect>) -> Result<Self> {
        if prospects.is_empty() {
            return Err(QdtError::InvalidArgument("prospect measure is empty".into()));
        }
        if labels.len() != prospects.len() {
            return Err(QdtError::InvalidArgument(format!(
                "{} labels for {} prospects",
                labels.len(),
                prospects.len()
            )));
        }
        space::check_unique_labels(&labels)?;
        let (da, ds) = (prospects[0].alternative_dim(), prospects[0].subject_dim());
        if let Some(i) = prospects
            .iter()
            .position(|p| p.alternative_dim() != da || p.subject_dim() != ds)
        {
            return Err(QdtError::Dimension(format!(
                "prospect {i} lives in a {}x{} space, expected {da}x{ds}",
                prospects[i].alternative_dim(),
                prospects[i].subject_dim()
            )));
        }
        let vectors: Vec<ComplexVector> = prospects.iter().map(Prospect::vector).collect();
        for m in 0..vectors.len() {
            for n in m + 1..vectors.len() {
                let overlap = vectors[m].inner(&vectors[n])?.norm();
                if overlap > tol::STRUCTURAL {
                    return Err(QdtError::InvalidBasis(format!(
                        "prospects {m},{n} not orthogonal: |⟨x{m}A{m}|A{n}x{n}⟩| = {overlap}"
                    )));
                }
            }
        }
        let projectors = prospects
            .iter()
            .map(prospect_projector)
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in projectors.iter().enumerate() {
            let idem = p.matmul(p)?.max_abs_diff(p)?;
            if idem > tol::STRUCTURAL {
                return Err(QdtError::InvalidProjector(format!("prospect projector {i} not idempotent")));
            }
        }
        for m in 0..projectors.len() {
            for n in m + 1..projectors.len() {
                let prod = projectors[m].matmul(&projectors[n])?.max_abs();
                let comm = projectors[m].commutator(&projectors[n])?.max_abs();
                if prod > tol::STRUCTURAL || comm > tol::STRUCTURAL {
                    return Err(QdtError::InvalidProjector(format!(
                        "prospect projectors {m},{n} neither orthogonal nor commuting"
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            prospects,
            projectors,
        })
    }

    /// One prospect per basis vector, each paired with the emotion of the same index.
    pub fn from_basis(basis: &AlternativeBasis, emotions: &[EmotionVector]) -> Result<Self> {
        if emotions.len() != basis.len() {
            return Err(QdtError::InvalidArgument(format!(
                "{} emotion vectors for {} alternatives",
                emotions.len(),
                basis.len()
            )));
        }
        let prospects = basis
            .vectors()
            .iter()
            .zip(emotions)
            .enumerate()
            .map(|(n, (v, e))| Prospect::new(n, v.clone(), e.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis.labels().to_vec(), prospects)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prospects(&self) -> &[Prospect] {
        &self.prospects
    }

    pub fn prospect(&self, index: usize) -> Result<&Prospect> {
        self.prospects.get(index).ok_or(QdtError::Index {
            index,
            len: self.prospects.len(),
        })
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.prospects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prospects.is_empty()
    }

    pub fn decision_dim(&self) -> usize {
        self.prospects[0].decision_dim()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Total probability split into rational fraction and quality factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProspectDecomposition {
    pub total: f64,
    pub rational: f64,
    pub quality: f64,
}

/// `|x⟩⟨x|` on the subject space.
pub fn emotion_projector(e: &EmotionVector) -> ComplexMatrix {
    ComplexMatrix::outer(e.coefficients(), e.coefficients())
}

/// `P(A_n) ⊗ P(x_n)` on the decision space.
pub fn prospect_projector(p: &Prospect) -> Result<ComplexMatrix> {
    let pa = space::projector_from_vector(p.alternative_vector())?;
    Ok(pa.kron(&emotion_projector(p.emotion())))
}

fn require_decision_dim(state: &DensityState, p: &Prospect) -> Result<()> {
    if state.dim() != p.decision_dim() {
        return Err(QdtError::Dimension(format!(
            "state has dimension {} but the decision space has dimension {}",
            state.dim(),
            p.decision_dim()
        )));
    }
    Ok(())
}

/// `|Tr(ρ Σ_n P(A_n x_n)) - 1|`.
pub fn resolution_check(state: &DensityState, measure: &ProspectMeasure) -> Result<f64> {
    if state.dim() != measure.decision_dim() {
        return Err(QdtError::Dimension(format!(
            "state has dimension {} but the decision space has dimension {}",
            state.dim(),
            measure.decision_dim()
        )));
    }
    let mut total = 0.0;
    for p in measure.projectors() {
        total += linalg::trace_of_product(state.matrix(), p)?.re;
    }
    Ok((total - 1.0).abs())
}

pub fn is_behaviorally_normalized(state: &DensityState, measure: &ProspectMeasure, tol: f64) -> Result<bool> {
    Ok(resolution_check(state, measure)? < tol)
}

/// `Tr(ρ P(A_n x_n))`.
pub fn prospect_probability(state: &DensityState, p: &Prospect) -> Result<f64> {
    require_decision_dim(state, p)?;
    let proj = prospect_projector(p)?;
    clamp_probability(linalg::trace_of_product(state.matrix(), &proj)?.re)
}

/// `⟨A_n α|ρ|A_n β⟩` for all feeling pairs.
fn feeling_block(state: &DensityState, alternative: &ComplexVector, subject_dim: usize) -> Vec<Vec<C64>> {
    let rho = state.matrix();
    let da = alternative.dim();
    let a = alternative.entries();
    let mut block = vec![vec![ZERO; subject_dim]; subject_dim];
    for (alpha, row) in block.iter_mut().enumerate() {
        for (beta, cell) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..da {
                let ai = a[i].conj();
                if ai == ZERO {
                    continue;
                }
                for j in 0..da {
                    acc += ai * rho.get(i * subject_dim + alpha, j * subject_dim + beta) * a[j];
                }
            }
            *cell = acc;
        }
    }
    block
}

/// Total, rational fraction and complex quality factor, without range checks.
pub(crate) fn decompose_raw(state: &DensityState, p: &Prospect) -> Result<(f64, f64, C64)> {
    let total = prospect_probability(state, p)?;
    let ds = p.subject_dim();
    let block = feeling_block(state, p.alternative_vector(), ds);
    let b = p.emotion().coefficients().entries();
    let mut rational = 0.0;
    let mut quality = ZERO;
    for alpha in 0..ds {
        rational += b[alpha].norm_sqr() * block[alpha][alpha].re;
        for beta in 0..ds {
            if alpha != beta {
                quality += b[alpha].conj() * b[beta] * block[alpha][beta];
            }
        }
    }
    Ok((total, rational, quality))
}

/// Rational fraction (diagonal in the feeling basis) and quality factor
/// (off-diagonal interference) of a prospect probability.
pub fn decompose_prospect(state: &DensityState, p: &Prospect) -> Result<ProspectDecomposition> {
    let (total, rational, quality) = decompose_raw(state, p)?;
    if quality.im.abs() > tol::STRUCTURAL {
        return Err(QdtError::InvalidState(format!(
            "quality factor has imaginary part {:.3e}",
            quality.im
        )));
    }
    if quality.re.abs() > 1.0 + tol::STRUCTURAL {
        return Err(QdtError::InvalidState(format!("quality factor {} outside [-1, 1]", quality.re)));
    }
    Ok(ProspectDecomposition {
        total,
        rational,
        quality: quality.re,
    })
}

/// Sums of the decomposition over a prospect measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionDiagnostics {
    pub rows: Vec<ProspectDecomposition>,
    pub sum_total: f64,
    pub sum_rational: f64,
    pub sum_quality: f64,
    /// `|Σ f - 1|`; zero only for states that satisfy the rational normalization.
    pub rational_residual: f64,
    /// `|Σ q|`; zero only when the interference terms cancel in aggregate.
    pub quality_residual: f64,
    /// `|Σ q - (1 - Σ f)|`, equal to the resolution residual.
    pub split_residual: f64,
}

pub fn decomposition_diagnostics(state: &DensityState, measure: &ProspectMeasure) -> Result<DecompositionDiagnostics> {
    let rows = measure
        .prospects()
        .iter()
        .map(|p| decompose_prospect(state, p))
        .collect::<Result<Vec<_>>>()?;
    let sum_total = rows.iter().map(|r| r.total).sum::<f64>();
    let sum_rational = rows.iter().map(|r| r.rational).sum::<f64>();
    let sum_quality = rows.iter().map(|r| r.quality).sum::<f64>();
    Ok(DecompositionDiagnostics {
        rows,
        sum_total,
        sum_rational,
        sum_quality,
        rational_residual: (sum_rational - 1.0).abs(),
        quality_residual: sum_quality.abs(),
        split_residual: (sum_quality - (1.0 - sum_rational)).abs(),
    })
}

/// Lüders reduction by a prospect projector.
pub fn behavioral_luders(state: &DensityState, p: &Prospect) -> Result<DensityState> {
    require_decision_dim(state, p)?;
    sequential::luders_reduce(state, &prospect_projector(p)?)
}

pub fn behavioral_joint(state0: &DensityState, first: &Prospect, u: &ComplexMatrix, second: &Prospect) -> Result<f64> {
    require_decision_dim(state0, first)?;
    require_decision_dim(state0, second)?;
    sequential::joint_probability(state0, &prospect_projector(first)?, u, &prospect_projector(second)?)
}

pub fn behavioral_conditional(
    state0: &DensityState,
    first: &Prospect,
    u: &ComplexMatrix,
    second: &Prospect,
) -> Result<f64> {
    require_decision_dim(state0, first)?;
    require_decision_dim(state0, second)?;
    sequential::conditional_probability(state0, &prospect_projector(first)?, u, &prospect_projector(second)?)
}

/// Conditional behavioral probability by reduce, evolve, then measure.
pub fn behavioral_conditional_by_reduction(
    state0: &DensityState,
    first: &Prospect,
    u: &ComplexMatrix,
    second: &Prospect,
) -> Result<f64> {
    let reduced = behavioral_luders(state0, first)?;
    let evolved = space::evolve(&reduced, u)?;
    prospect_probability(&evolved, second)
}

/// `|⟨x_k B_k|A_n x_n⟩|²`.
pub fn immediate_behavioral_conditional(first: &Prospect, second: &Prospect) -> Result<f64> {
    clamp_probability(second.vector().inner(&first.vector())?.norm_sqr())
}

pub fn behavioral_symmetry_report(
    state0: &DensityState,
    a: &Prospect,
    u: &ComplexMatrix,
    b: &Prospect,
    tolerance: f64,
) -> Result<SymmetryReport> {
    require_decision_dim(state0, a)?;
    require_decision_dim(state0, b)?;
    sequential::symmetry_report_for_projectors(state0, &prospect_projector(a)?, &prospect_projector(b)?, u, tolerance)
}

/// `U_A ⊗ U_S`.
pub fn decision_unitary(u_alternatives: &ComplexMatrix, u_subject: &ComplexMatrix) -> Result<ComplexMatrix> {
    u_alternatives.require_unitary(tol::STRUCTURAL)?;
    u_subject.require_unitary(tol::STRUCTURAL)?;
    Ok(u_alternatives.kron(u_subject))
}

/// Partial trace over the subject factor.
pub fn reduced_alternative_state(state: &DensityState, subject_dim: usize) -> Result<DensityState> {
    if subject_dim == 0 || !state.dim().is_multiple_of(subject_dim) {
        return Err(QdtError::Dimension(format!(
            "state dimension {} is not a multiple of the subject dimension {subject_dim}",
            state.dim()
        )));
    }
    let da = state.dim() / subject_dim;
    let rho = state.matrix();
    let mut data = vec![ZERO; da * da];
    for i in 0..da {
        for j in 0..da {
            data[i * da + j] = (0..subject_dim)
                .map(|s| rho.get(i * subject_dim + s, j * subject_dim + s))
                .sum();
        }
    }
    DensityState::new(ComplexMatrix::new(da, da, data)?)
}
