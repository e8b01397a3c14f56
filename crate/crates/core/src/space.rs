//! Quantum probability spaces for a single choice.
//!
//! A choice problem is a triple: a Hilbert space spanned by alternative
//! vectors, a density state, and a projector-valued measure with one rank-1
//! projector per alternative. The probability of choosing alternative `n` is
//! the Born rule `Tr(ρ P_n) = ⟨A_n|ρ|A_n⟩`.

use std::collections::HashSet;

use log::debug;
use rand::Rng;

use crate::error::{QdtError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64};
use crate::rng;
use crate::tol;

/// Orthonormal, labeled family of alternative vectors in a common ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternativeBasis {
    labels: Vec<String>,
    vectors: Vec<ComplexVector>,
}

pub(crate) fn check_unique_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() {
            return Err(QdtError::InvalidArgument(format!("label {i} is empty")));
        }
        if !seen.insert(l.as_str()) {
            return Err(QdtError::InvalidArgument(format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

impl AlternativeBasis {
    pub fn new(labels: Vec<String>, vectors: Vec<ComplexVector>) -> Result<Self> {
        Self::with_tolerance(labels, vectors, tol::STRUCTURAL)
    }

    pub fn with_tolerance(labels: Vec<String>, vectors: Vec<ComplexVector>, tol: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(QdtError::InvalidBasis("basis has no vectors".into()));
        }
        if labels.len() != vectors.len() {
            return Err(QdtError::InvalidBasis(format!(
                "{} labels for {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        check_unique_labels(&labels).map_err(|e| QdtError::InvalidBasis(e.to_string()))?;
        let dim = vectors[0].dim();
        if let Some(i) = vectors.iter().position(|v| v.dim() != dim) {
            return Err(QdtError::InvalidBasis(format!(
                "vector {i} has dimension {}, expected {dim}",
                vectors[i].dim()
            )));
        }
        if vectors.len() > dim {
            return Err(QdtError::InvalidBasis(format!(
                "{} vectors cannot be orthonormal in dimension {dim}",
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            let n = v.norm();
            if (n - 1.0).abs() > tol {
                return Err(QdtError::InvalidBasis(format!("vector {i} not normalized: ‖v{i}‖ = {n}")));
            }
        }
        for m in 0..vectors.len() {
            for n in m + 1..vectors.len() {
                let overlap = vectors[m].inner(&vectors[n])?.norm();
                if overlap > tol {
                    return Err(QdtError::InvalidBasis(format!(
                        "vectors {m},{n} not orthogonal: |⟨v{m}|v{n}⟩| = {overlap}"
                    )));
                }
            }
        }
        Ok(Self { labels, vectors })
    }

    /// Canonical basis `e_1..e_dim` labeled `{prefix}1..{prefix}dim`.
    pub fn canonical(dim: usize, prefix: &str) -> Result<Self> {
        let vectors = (0..dim)
            .map(|k| ComplexVector::basis(dim, k))
            .collect::<Result<Vec<_>>>()?;
        let labels = (1..=dim).map(|k| format!("{prefix}{k}")).collect();
        Self::new(labels, vectors)
    }

    /// Columns of a unitary as a complete basis.
    pub fn from_unitary_columns(u: &ComplexMatrix, prefix: &str) -> Result<Self> {
        u.require_unitary(tol::STRUCTURAL)?;
        let vectors = (0..u.cols()).map(|j| u.column(j)).collect();
        let labels = (1..=u.cols()).map(|k| format!("{prefix}{k}")).collect();
        Self::new(labels, vectors)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> Result<&ComplexVector> {
        self.vectors.get(index).ok_or(QdtError::Index {
            index,
            len: self.vectors.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, tol::STRUCTURAL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QdtError::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_deviation();
        if herm > tol {
            return Err(QdtError::InvalidState(format!("not Hermitian: max |ρ - ρ†| = {herm:.3e}")));
        }
        let tr = matrix.trace()?;
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(QdtError::InvalidState(format!("trace is {} instead of 1", tr.re)));
        }
        let lowest = linalg::hermitian_eigenvalues(&matrix)?[0];
        if lowest < -tol {
            return Err(QdtError::InvalidState(format!(
                "not positive semidefinite: smallest eigenvalue {lowest:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QdtError::InvalidArgument("state dimension must be at least 1".into()));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        Self::new(projector_from_vector(psi)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix)
            .expect("square")
            .re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix).expect("square")
    }
}

/// Labeled family of pairwise-orthogonal rank-1 projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorMeasure {
    labels: Vec<String>,
    projectors: Vec<ComplexMatrix>,
}

/// Checks that `p` is a Hermitian idempotent of rank one.
pub fn validate_rank_one_projector(p: &ComplexMatrix, tol: f64) -> Result<()> {
    if !p.is_square() {
        return Err(QdtError::Dimension(format!(
            "projector must be square, got {}x{}",
            p.rows(),
            p.cols()
        )));
    }
    let herm = p.hermiticity_deviation();
    if herm > tol {
        return Err(QdtError::InvalidProjector(format!("not Hermitian: deviation {herm:.3e}")));
    }
    let idem = p.matmul(p)?.max_abs_diff(p)?;
    if idem > tol {
        return Err(QdtError::InvalidProjector(format!("not idempotent: max |P² - P| = {idem:.3e}")));
    }
    let rank = p.trace()?.re;
    if (rank - 1.0).abs() > tol {
        return Err(QdtError::InvalidProjector(format!(
            "rank {rank:.3} projector; only rank-1 projectors are supported"
        )));
    }
    Ok(())
}

impl ProjectorMeasure {
    pub fn new(labels: Vec<String>, projectors: Vec<ComplexMatrix>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(QdtError::InvalidProjector("measure has no projectors".into()));
        }
        if labels.len() != projectors.len() {
            return Err(QdtError::InvalidProjector(format!(
                "{} labels for {} projectors",
                labels.len(),
                projectors.len()
            )));
        }
        check_unique_labels(&labels)?;
        let dim = projectors[0].rows();
        for (i, p) in projectors.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(QdtError::Dimension(format!(
                    "projector {i} is {}x{}, expected {dim}x{dim}",
                    p.rows(),
                    p.cols()
                )));
            }
            validate_rank_one_projector(p, tol::STRUCTURAL)
                .map_err(|e| QdtError::InvalidProjector(format!("projector {i}: {e}")))?;
        }
        for m in 0..projectors.len() {
            for n in m + 1..projectors.len() {
                let prod = projectors[m].matmul(&projectors[n])?.max_abs();
                if prod > tol::STRUCTURAL {
                    return Err(QdtError::InvalidProjector(format!(
                        "projectors {m},{n} not orthogonal: max |P{m}P{n}| = {prod:.3e}"
                    )));
                }
            }
        }
        Ok(Self { labels, projectors })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn projector(&self, index: usize) -> Result<&ComplexMatrix> {
        self.projectors.get(index).ok_or(QdtError::Index {
            index,
            len: self.projectors.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Max-norm of `Σ P_n - I`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .projectors
            .iter()
            .fold(ComplexMatrix::zeros(self.dim(), self.dim()), |acc, p| {
                acc.add(p).expect("same shape")
            });
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim()))
            .expect("same shape")
    }

    pub fn is_complete(&self, tol: f64) -> bool {
        self.completeness_deviation() <= tol
    }

    pub fn require_complete(&self, tol: f64) -> Result<()> {
        let dev = self.completeness_deviation();
        if dev > tol {
            return Err(QdtError::IncompleteMeasure(format!(
                "{} projectors in dimension {}; max |ΣP - I| = {dev:.3e}",
                self.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `|v⟩⟨v|` for a unit vector `v`.
pub fn projector_from_vector(v: &ComplexVector) -> Result<ComplexMatrix> {
    v.require_unit(tol::STRUCTURAL)?;
    Ok(ComplexMatrix::outer(v, v))
}

pub fn measure_from_basis(basis: &AlternativeBasis) -> Result<ProjectorMeasure> {
    let projectors = basis
        .vectors()
        .iter()
        .map(projector_from_vector)
        .collect::<Result<Vec<_>>>()?;
    ProjectorMeasure::new(basis.labels().to_vec(), projectors)
}

/// Maps a raw probability onto `[0, 1]`.
///
/// Values within [`tol::STRUCTURAL`] of the interval are clamped; anything
/// further out is reported as an error.
pub fn clamp_probability(raw: f64) -> Result<f64> {
    if !raw.is_finite() || !(-tol::STRUCTURAL..=1.0 + tol::STRUCTURAL).contains(&raw) {
        return Err(QdtError::ProbabilityOutOfRange { value: raw });
    }
    if !(0.0..=1.0).contains(&raw) {
        debug!("clamping probability {raw:e} into [0, 1]");
    }
    Ok(raw.clamp(0.0, 1.0))
}

pub(crate) fn require_same_dim(state: &DensityState, m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.rows() != state.dim() || m.cols() != state.dim() {
        return Err(QdtError::Dimension(format!(
            "{what} is {}x{} but the state has dimension {}",
            m.rows(),
            m.cols(),
            state.dim()
        )));
    }
    Ok(())
}

/// Raw `Tr(ρP)` without clamping.
pub(crate) fn born_raw(state: &DensityState, projector: &ComplexMatrix) -> Result<f64> {
    require_same_dim(state, projector, "projector")?;
    Ok(linalg::trace_of_product(state.matrix(), projector)?.re)
}

/// Born rule `Tr(ρ P_index)`.
pub fn choice_probability(state: &DensityState, measure: &ProjectorMeasure, index: usize) -> Result<f64> {
    let p = measure.projector(index)?;
    clamp_probability(born_raw(state, p)?)
}

pub fn all_probabilities(state: &DensityState, measure: &ProjectorMeasure) -> Result<Vec<f64>> {
    (0..measure.len())
        .map(|n| choice_probability(state, measure, n))
        .collect()
}

/// `U ρ U†`.
pub fn evolve(state: &DensityState, u: &ComplexMatrix) -> Result<DensityState> {
    require_same_dim(state, u, "evolution operator")?;
    u.require_unitary(tol::STRUCTURAL)?;
    let m = u.matmul(state.matrix())?.matmul(&u.adjoint())?;
    DensityState::new(m)
}

/// `G G† / Tr(G G†)` with `G` a `dim × rank` complex Gaussian matrix.
pub fn random_state_with<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityState> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(QdtError::InvalidArgument(format!(
            "random state needs 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let g = linalg::gaussian_matrix(dim, rank, rng);
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace()?.re;
    // exact Hermitian symmetrization keeps the validator's check at rounding level
    let m = gg.hermitian_part()?.scale(C64::new(1.0 / tr, 0.0));
    DensityState::new(m)
}

pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<DensityState> {
    random_state_with(dim, rank, &mut rng::stream(seed, "random_state", 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, ONE, ZERO};

    fn h(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hadamard_basis() -> AlternativeBasis {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        AlternativeBasis::new(
            vec!["B1".into(), "B2".into()],
            vec![
                ComplexVector::from_real(&[s, s]).unwrap(),
                ComplexVector::from_real(&[s, -s]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn projector_examples() {
        let p = projector_from_vector(&ComplexVector::from_real(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(p, ComplexMatrix::from_diag(&[ONE, ZERO]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = projector_from_vector(&ComplexVector::from_real(&[s, s]).unwrap()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(p.max_abs_diff(&expected).unwrap() < 1e-15);
        let u = random_unitary(5, 3).unwrap();
        let p = projector_from_vector(&u.column(2)).unwrap();
        assert!(p.matmul(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-12);
        assert!(matches!(
            projector_from_vector(&ComplexVector::from_real(&[1.0, 1.0]).unwrap()),
            Err(QdtError::Normalization { .. })
        ));
    }

    #[test]
    fn measure_examples() {
        let m = measure_from_basis(&AlternativeBasis::canonical(2, "A").unwrap()).unwrap();
        assert_eq!(m.projectors()[0], ComplexMatrix::from_diag(&[ONE, ZERO]));
        assert_eq!(m.projectors()[1], ComplexMatrix::from_diag(&[ZERO, ONE]));
        let full = measure_from_basis(&AlternativeBasis::from_unitary_columns(&random_unitary(4, 1).unwrap(), "A").unwrap()).unwrap();
        assert!(full.completeness_deviation() < 1e-12);
        let had = measure_from_basis(&hadamard_basis()).unwrap();
        assert!(had.projectors()[0].matmul(&had.projectors()[1]).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn basis_validation_messages() {
        let err = AlternativeBasis::new(
            vec!["a".into(), "b".into()],
            vec![
                ComplexVector::from_real(&[1.0, 0.0]).unwrap(),
                ComplexVector::from_real(&[0.3, 0.9539392014169456]).unwrap(),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("vectors 0,1 not orthogonal"), "{err}");
        assert!(AlternativeBasis::new(
            vec!["a".into(), "a".into()],
            vec![ComplexVector::basis(2, 0).unwrap(), ComplexVector::basis(2, 1).unwrap()],
        )
        .is_err());
    }

    #[test]
    fn degenerate_projectors_rejected() {
        let p = ComplexMatrix::from_diag(&[ONE, ONE, ZERO]);
        assert!(matches!(
            ProjectorMeasure::new(vec!["x".into()], vec![p]),
            Err(QdtError::InvalidProjector(_))
        ));
    }

    #[test]
    fn choice_probability_examples() {
        let m = measure_from_basis(&AlternativeBasis::canonical(3, "A").unwrap()).unwrap();
        let mixed = DensityState::maximally_mixed(3).unwrap();
        for p in all_probabilities(&mixed, &m).unwrap() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let certain = DensityState::pure(&ComplexVector::basis(3, 0).unwrap()).unwrap();
        assert_eq!(all_probabilities(&certain, &m).unwrap(), vec![1.0, 0.0, 0.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityState::pure(&ComplexVector::from_real(&[s, s]).unwrap()).unwrap();
        let m2 = measure_from_basis(&AlternativeBasis::canonical(2, "A").unwrap()).unwrap();
        for p in all_probabilities(&plus, &m2).unwrap() {
            assert!((p - 0.5).abs() < 1e-15);
        }
        assert!(matches!(choice_probability(&plus, &m2, 2), Err(QdtError::Index { .. })));
        assert!(matches!(choice_probability(&mixed, &m2, 0), Err(QdtError::Dimension(_))));
    }

    #[test]
    fn incomplete_measure_is_subnormalized() {
        let basis = AlternativeBasis::new(
            vec!["a".into(), "b".into()],
            vec![ComplexVector::basis(4, 0).unwrap(), ComplexVector::basis(4, 3).unwrap()],
        )
        .unwrap();
        let m = measure_from_basis(&basis).unwrap();
        assert!(!m.is_complete(1e-9));
        for seed in 0..50 {
            let rho = random_state(4, 1 + (seed as usize % 4), seed).unwrap();
            let total: f64 = all_probabilities(&rho, &m).unwrap().iter().sum();
            assert!(total <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn evolve_examples() {
        let rho = random_state(3, 2, 5).unwrap();
        assert!(evolve(&rho, &ComplexMatrix::identity(3)).unwrap().matrix().max_abs_diff(rho.matrix()).unwrap() < 1e-15);
        let pure = random_state(4, 1, 6).unwrap();
        let u = random_unitary(4, 7).unwrap();
        assert!((evolve(&pure, &u).unwrap().purity() - 1.0).abs() < 1e-9);
        let mixed = random_state(4, 4, 8).unwrap();
        let before = mixed.eigenvalues();
        let after = evolve(&mixed, &u).unwrap().eigenvalues();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-9);
        }
        let not_unitary = ComplexMatrix::from_diag(&[h(1.0), h(2.0), h(1.0), h(1.0)]);
        assert!(matches!(evolve(&mixed, &not_unitary), Err(QdtError::Unitarity { .. })));
    }

    #[test]
    fn random_state_contract() {
        assert!((random_state(5, 1, 1).unwrap().purity() - 1.0).abs() < 1e-9);
        let full = random_state(5, 5, 2).unwrap();
        assert!(full.eigenvalues()[0] > 1e-6);
        assert_eq!(random_state(4, 2, 3).unwrap(), random_state(4, 2, 3).unwrap());
        assert!(random_state(3, 4, 0).is_err());
    }

    #[test]
    fn density_state_validation() {
        let bad_trace = ComplexMatrix::from_diag(&[h(0.5), h(0.4)]);
        assert!(matches!(DensityState::new(bad_trace), Err(QdtError::InvalidState(_))));
        let negative = ComplexMatrix::from_diag(&[h(1.5), h(-0.5)]);
        assert!(matches!(DensityState::new(negative), Err(QdtError::InvalidState(_))));
    }

    #[test]
    fn clamp_behaviour() {
        assert_eq!(clamp_probability(-5e-10).unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 5e-10).unwrap(), 1.0);
        assert!(clamp_probability(-1e-6).is_err());
    }
}
