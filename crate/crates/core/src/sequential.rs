//! Two time-ordered choices.
//!
//! A first choice at `t₀` reduces the state by the Lüders rule
//! `ρ ↦ PρP / Tr(ρP)`. The reduced state then evolves under the unitary that
//! acted between `t₀` and the second choice at `t`. Time itself is never
//! integrated: callers pass that unitary directly, and the immediate-choice
//! limit is simply `U = I`.
//!
//! Reverse-order quantities (B first, then A) are the same functions with the
//! projector arguments swapped.

use serde::Serialize;

use crate::error::{QdtError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::space::{self, clamp_probability, DensityState, ProjectorMeasure};
use crate::tol;

/// Position of a choice relative to the decision instant `t₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeTag {
    /// `t₀ - 0`, just before the choice.
    Before,
    At,
    /// `t₀ + 0`, just after the reduction.
    ImmediatelyAfter,
    /// Some `t > t₀` after a non-trivial evolution.
    Later,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoiceRecord {
    pub measure_label: String,
    pub outcome_index: usize,
    pub time_tag: TimeTag,
}

impl ChoiceRecord {
    pub fn new(
        measure_label: impl Into<String>,
        measure: &ProjectorMeasure,
        outcome_index: usize,
        time_tag: TimeTag,
    ) -> Result<Self> {
        if outcome_index >= measure.len() {
            return Err(QdtError::Index {
                index: outcome_index,
                len: measure.len(),
            });
        }
        Ok(Self {
            measure_label: measure_label.into(),
            outcome_index,
            time_tag,
        })
    }
}

/// Forward (A first) versus reverse (B first) probabilities.
///
/// A conditional whose conditioning event has vanishing probability is `None`
/// and makes the corresponding flag false.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub conditional_forward: Option<f64>,
    pub conditional_reverse: Option<f64>,
    pub joint_forward: f64,
    pub joint_reverse: f64,
    pub conditional_symmetric: bool,
    pub joint_symmetric: bool,
    pub tolerance: f64,
}

impl SymmetryReport {
    pub fn conditional_gap(&self) -> Option<f64> {
        Some((self.conditional_forward? - self.conditional_reverse?).abs())
    }

    pub fn joint_gap(&self) -> f64 {
        (self.joint_forward - self.joint_reverse).abs()
    }
}

/// Hermitian idempotent check (any rank).
pub(crate) fn validate_projector(p: &ComplexMatrix) -> Result<()> {
    let herm = p.hermiticity_deviation();
    if herm > tol::STRUCTURAL {
        return Err(QdtError::InvalidProjector(format!("not Hermitian: deviation {herm:.3e}")));
    }
    let idem = p.matmul(p)?.max_abs_diff(p)?;
    if idem > tol::STRUCTURAL {
        return Err(QdtError::InvalidProjector(format!("not idempotent: max |P² - P| = {idem:.3e}")));
    }
    Ok(())
}

fn conditioning_mass(state: &DensityState, projector: &ComplexMatrix) -> Result<f64> {
    let p = space::born_raw(state, projector)?;
    if p <= tol::CONDITIONING {
        return Err(QdtError::ZeroProbabilityConditioning {
            probability: p,
            threshold: tol::CONDITIONING,
            label: None,
        });
    }
    Ok(p)
}

/// Lüders state after `projector` has certainly been chosen.
pub fn luders_reduce(state: &DensityState, projector: &ComplexMatrix) -> Result<DensityState> {
    space::require_same_dim(state, projector, "projector")?;
    validate_projector(projector)?;
    let mass = conditioning_mass(state, projector)?;
    let reduced = projector
        .matmul(state.matrix())?
        .matmul(projector)?
        .scale(linalg::C64::new(1.0 / mass, 0.0));
    DensityState::new(reduced)
}

fn joint_raw(
    state0: &DensityState,
    first: &ComplexMatrix,
    u: &ComplexMatrix,
    second: &ComplexMatrix,
) -> Result<f64> {
    space::require_same_dim(state0, first, "first projector")?;
    space::require_same_dim(state0, second, "second projector")?;
    space::require_same_dim(state0, u, "evolution operator")?;
    validate_projector(first)?;
    validate_projector(second)?;
    u.require_unitary(tol::STRUCTURAL)?;
    let reduced = first.matmul(state0.matrix())?.matmul(first)?;
    let evolved = u.matmul(&reduced)?.matmul(&u.adjoint())?;
    Ok(linalg::trace_of_product(&evolved, second)?.re)
}

/// `Tr(U P_A ρ P_A U† P_B)`: probability of choosing A at `t₀` and then B.
pub fn joint_probability(
    state0: &DensityState,
    first: &ComplexMatrix,
    u: &ComplexMatrix,
    second: &ComplexMatrix,
) -> Result<f64> {
    clamp_probability(joint_raw(state0, first, u, second)?)
}

/// Joint probability divided by the prior of the first choice.
pub fn conditional_probability(
    state0: &DensityState,
    first: &ComplexMatrix,
    u: &ComplexMatrix,
    second: &ComplexMatrix,
) -> Result<f64> {
    let joint = joint_raw(state0, first, u, second)?;
    let mass = conditioning_mass(state0, first)?;
    clamp_probability(joint / mass)
}

/// Conditional probability by reduce, evolve, then measure.
pub fn conditional_by_reduction(
    state0: &DensityState,
    first: &ComplexMatrix,
    u: &ComplexMatrix,
    second: &ComplexMatrix,
) -> Result<f64> {
    let reduced = luders_reduce(state0, first)?;
    let evolved = space::evolve(&reduced, u)?;
    clamp_probability(space::born_raw(&evolved, second)?)
}

/// `|⟨second|first⟩|²`, the conditional probability when `U = I`.
pub fn immediate_conditional(first_vector: &ComplexVector, second_vector: &ComplexVector) -> Result<f64> {
    first_vector.require_unit(tol::STRUCTURAL)?;
    second_vector.require_unit(tol::STRUCTURAL)?;
    clamp_probability(second_vector.inner(first_vector)?.norm_sqr())
}

/// Residuals of the normalization identities for sequential probabilities.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MarginalResiduals {
    /// `max |Σ_k p(B_k|A_n) - 1|` over both orders.
    pub conditional_normalization: f64,
    /// `max |Σ_k p(B_k,A_n) - p(A_n)|` over both orders.
    pub joint_marginal: f64,
    /// `max |Σ_nk p(B_k,A_n) - 1|` over both orders.
    pub joint_total: f64,
    /// `|Σ_nk [p(B_k,A_n) - p(A_n,B_k)]|`.
    pub antisymmetric_total: f64,
}

impl MarginalResiduals {
    pub fn max(&self) -> f64 {
        self.conditional_normalization
            .max(self.joint_marginal)
            .max(self.joint_total)
            .max(self.antisymmetric_total)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    pub prior_first: Vec<f64>,
    pub prior_second: Vec<f64>,
    /// `[n][k] = p(B_k, t, A_n, t₀)`.
    pub joint_forward: Vec<Vec<f64>>,
    /// `[n][k] = p(A_n, t, B_k, t₀)`.
    pub joint_reverse: Vec<Vec<f64>>,
    /// `[n][k] = p(B_k, t | A_n, t₀)`; `None` where `p(A_n)` vanishes.
    pub conditional_forward: Vec<Vec<Option<f64>>>,
    /// `[n][k] = p(A_n, t | B_k, t₀)`; `None` where `p(B_k)` vanishes.
    pub conditional_reverse: Vec<Vec<Option<f64>>>,
    pub residuals: MarginalResiduals,
}

fn conditional_or_none(
    state0: &DensityState,
    first: &ComplexMatrix,
    u: &ComplexMatrix,
    second: &ComplexMatrix,
) -> Result<Option<f64>> {
    match conditional_probability(state0, first, u, second) {
        Ok(p) => Ok(Some(p)),
        Err(QdtError::ZeroProbabilityConditioning { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Evaluates both orders over two complete measures and the residual of every
/// normalization identity relating them.
pub fn marginal_check(
    state0: &DensityState,
    first_measure: &ProjectorMeasure,
    u: &ComplexMatrix,
    second_measure: &ProjectorMeasure,
) -> Result<MarginalReport> {
    first_measure.require_complete(tol::STRUCTURAL)?;
    second_measure.require_complete(tol::STRUCTURAL)?;
    let prior_first = space::all_probabilities(state0, first_measure)?;
    let prior_second = space::all_probabilities(state0, second_measure)?;
    let (na, nb) = (first_measure.len(), second_measure.len());

    let mut joint_forward = vec![vec![0.0; nb]; na];
    let mut joint_reverse = vec![vec![0.0; nb]; na];
    let mut conditional_forward = vec![vec![None; nb]; na];
    let mut conditional_reverse = vec![vec![None; nb]; na];
    for (n, pa) in first_measure.projectors().iter().enumerate() {
        for (k, pb) in second_measure.projectors().iter().enumerate() {
            joint_forward[n][k] = joint_probability(state0, pa, u, pb)?;
            joint_reverse[n][k] = joint_probability(state0, pb, u, pa)?;
            conditional_forward[n][k] = conditional_or_none(state0, pa, u, pb)?;
            conditional_reverse[n][k] = conditional_or_none(state0, pb, u, pa)?;
        }
    }

    let mut r = MarginalResiduals::default();
    for n in 0..na {
        if conditional_forward[n].iter().all(Option::is_some) {
            let s: f64 = conditional_forward[n].iter().flatten().sum();
            r.conditional_normalization = r.conditional_normalization.max((s - 1.0).abs());
        }
        let s: f64 = joint_forward[n].iter().sum();
        r.joint_marginal = r.joint_marginal.max((s - prior_first[n]).abs());
    }
    for k in 0..nb {
        if (0..na).all(|n| conditional_reverse[n][k].is_some()) {
            let s: f64 = (0..na).filter_map(|n| conditional_reverse[n][k]).sum();
            r.conditional_normalization = r.conditional_normalization.max((s - 1.0).abs());
        }
        let s: f64 = (0..na).map(|n| joint_reverse[n][k]).sum();
        r.joint_marginal = r.joint_marginal.max((s - prior_second[k]).abs());
    }
    let total_forward: f64 = joint_forward.iter().flatten().sum();
    let total_reverse: f64 = joint_reverse.iter().flatten().sum();
    r.joint_total = (total_forward - 1.0).abs().max((total_reverse - 1.0).abs());
    r.antisymmetric_total = joint_forward
        .iter()
        .flatten()
        .zip(joint_reverse.iter().flatten())
        .map(|(f, b)| f - b)
        .sum::<f64>()
        .abs();

    Ok(MarginalReport {
        prior_first,
        prior_second,
        joint_forward,
        joint_reverse,
        conditional_forward,
        conditional_reverse,
        residuals: r,
    })
}

/// Order-symmetry report for an arbitrary pair of projectors.
pub fn symmetry_report_for_projectors(
    state0: &DensityState,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    u: &ComplexMatrix,
    tolerance: f64,
) -> Result<SymmetryReport> {
    let joint_forward = joint_probability(state0, a, u, b)?;
    let joint_reverse = joint_probability(state0, b, u, a)?;
    let conditional_forward = conditional_or_none(state0, a, u, b)?;
    let conditional_reverse = conditional_or_none(state0, b, u, a)?;
    let conditional_symmetric = match (conditional_forward, conditional_reverse) {
        (Some(f), Some(r)) => (f - r).abs() < tolerance,
        _ => false,
    };
    Ok(SymmetryReport {
        conditional_forward,
        conditional_reverse,
        joint_forward,
        joint_reverse,
        conditional_symmetric,
        joint_symmetric: (joint_forward - joint_reverse).abs() < tolerance,
        tolerance,
    })
}

/// Forward (`a` first) and reverse (`b` first) probabilities for two alternatives.
pub fn symmetry_report(
    state0: &DensityState,
    a: &ComplexVector,
    b: &ComplexVector,
    u: &ComplexMatrix,
    tolerance: f64,
) -> Result<SymmetryReport> {
    let pa = space::projector_from_vector(a)?;
    let pb = space::projector_from_vector(b)?;
    symmetry_report_for_projectors(state0, &pa, &pb, u, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, ComplexMatrix, C64, ONE, ZERO};
    use crate::space::{measure_from_basis, projector_from_vector, random_state, AlternativeBasis};

    fn id(n: usize) -> ComplexMatrix {
        ComplexMatrix::identity(n)
    }

    fn hadamard_measure() -> ProjectorMeasure {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = AlternativeBasis::new(
            vec!["B1".into(), "B2".into()],
            vec![
                ComplexVector::from_real(&[s, s]).unwrap(),
                ComplexVector::from_real(&[s, -s]).unwrap(),
            ],
        )
        .unwrap();
        measure_from_basis(&basis).unwrap()
    }

    fn canonical_measure(n: usize) -> ProjectorMeasure {
        measure_from_basis(&AlternativeBasis::canonical(n, "A").unwrap()).unwrap()
    }

    /// Step-by-step oracle with explicit matrix algebra.
    fn oracle_joint(rho: &ComplexMatrix, pa: &ComplexMatrix, u: &ComplexMatrix, pb: &ComplexMatrix) -> f64 {
        let prior = rho.matmul(pa).unwrap().trace().unwrap().re;
        let post = pa.matmul(rho).unwrap().matmul(pa).unwrap().scale(C64::new(1.0 / prior, 0.0));
        let later = u.matmul(&post).unwrap().matmul(&u.adjoint()).unwrap();
        let cond = later.matmul(pb).unwrap().trace().unwrap().re;
        cond * prior
    }

    #[test]
    fn luders_examples() {
        let rho = DensityState::maximally_mixed(2).unwrap();
        let p = ComplexMatrix::from_diag(&[ONE, ZERO]);
        assert_eq!(luders_reduce(&rho, &p).unwrap().matrix(), &p);

        let v = random_unitary(3, 4).unwrap().column(1);
        let pv = projector_from_vector(&v).unwrap();
        let pure = DensityState::new(pv.clone()).unwrap();
        assert!(luders_reduce(&pure, &pv).unwrap().matrix().max_abs_diff(&pv).unwrap() < 1e-12);

        for seed in 0..20 {
            let rho = random_state(4, 2, seed).unwrap();
            let p = projector_from_vector(&random_unitary(4, seed + 100).unwrap().column(0)).unwrap();
            let post = luders_reduce(&rho, &p).unwrap();
            assert!((space::born_raw(&post, &p).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn luders_zero_probability() {
        let rho = DensityState::pure(&ComplexVector::basis(2, 0).unwrap()).unwrap();
        let p = ComplexMatrix::from_diag(&[ZERO, ONE]);
        assert!(matches!(
            luders_reduce(&rho, &p),
            Err(QdtError::ZeroProbabilityConditioning { .. })
        ));
    }

    #[test]
    fn joint_examples() {
        let rho = random_state(3, 3, 1).unwrap();
        let m = measure_from_basis(&AlternativeBasis::from_unitary_columns(&random_unitary(3, 2).unwrap(), "A").unwrap()).unwrap();
        let p0 = &m.projectors()[0];
        let same = joint_probability(&rho, p0, &id(3), p0).unwrap();
        assert!((same - space::choice_probability(&rho, &m, 0).unwrap()).abs() < 1e-12);
        let orth = joint_probability(&rho, p0, &id(3), &m.projectors()[1]).unwrap();
        assert!(orth.abs() < 1e-12);

        for seed in 0..20 {
            let rho = random_state(4, 1 + seed as usize % 4, seed).unwrap();
            let pa = projector_from_vector(&random_unitary(4, seed + 50).unwrap().column(0)).unwrap();
            let pb = projector_from_vector(&random_unitary(4, seed + 90).unwrap().column(2)).unwrap();
            let u = random_unitary(4, seed + 200).unwrap();
            let got = joint_probability(&rho, &pa, &u, &pb).unwrap();
            let want = oracle_joint(rho.matrix(), &pa, &u, &pb);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn joint_rejects_non_unitary() {
        let rho = DensityState::maximally_mixed(2).unwrap();
        let p = ComplexMatrix::from_diag(&[ONE, ZERO]);
        let bad = ComplexMatrix::from_diag(&[ONE, C64::new(2.0, 0.0)]);
        assert!(matches!(joint_probability(&rho, &p, &bad, &p), Err(QdtError::Unitarity { .. })));
        let rho3 = DensityState::maximally_mixed(3).unwrap();
        assert!(matches!(joint_probability(&rho3, &p, &id(2), &p), Err(QdtError::Dimension(_))));
    }

    #[test]
    fn conditional_examples() {
        let rho = random_state(2, 2, 9).unwrap();
        let a = canonical_measure(2);
        let b = hadamard_measure();
        let p0 = &a.projectors()[0];
        assert!((conditional_probability(&rho, p0, &id(2), p0).unwrap() - 1.0).abs() < 1e-12);
        assert!(conditional_probability(&rho, p0, &id(2), &a.projectors()[1]).unwrap().abs() < 1e-12);
        let half = conditional_probability(&rho, p0, &id(2), &b.projectors()[0]).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn immediate_examples() {
        let e0 = ComplexVector::basis(2, 0).unwrap();
        let e1 = ComplexVector::basis(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVector::from_real(&[s, s]).unwrap();
        assert!((immediate_conditional(&e0, &e0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(immediate_conditional(&e0, &e1).unwrap(), 0.0);
        assert!((immediate_conditional(&e0, &plus).unwrap() - 0.5).abs() < 1e-15);
        let bad = ComplexVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(immediate_conditional(&bad, &e0), Err(QdtError::Normalization { .. })));
    }

    #[test]
    fn marginal_check_hand_computed_two_by_two() {
        // ρ = [[.7,.2],[.2,.3]]; canonical A, Hadamard B, U = I.
        // p(A) = (.7,.3), p(B) = (.7,.3); |⟨B|A⟩|² = 1/2 everywhere.
        let rho = DensityState::new(ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]).unwrap()).unwrap();
        let report = marginal_check(&rho, &canonical_measure(2), &id(2), &hadamard_measure()).unwrap();
        let forward = [[0.35, 0.35], [0.15, 0.15]];
        let reverse = [[0.35, 0.15], [0.35, 0.15]];
        for n in 0..2 {
            for k in 0..2 {
                assert!((report.joint_forward[n][k] - forward[n][k]).abs() < 1e-12);
                assert!((report.joint_reverse[n][k] - reverse[n][k]).abs() < 1e-12);
            }
        }
        assert!(report.residuals.max() < 1e-12);
    }

    #[test]
    fn marginal_check_random_and_reproducibility() {
        for seed in 0..10 {
            let rho = random_state(3, 2, seed).unwrap();
            let a = measure_from_basis(&AlternativeBasis::from_unitary_columns(&random_unitary(3, seed + 1).unwrap(), "A").unwrap()).unwrap();
            let b = measure_from_basis(&AlternativeBasis::from_unitary_columns(&random_unitary(3, seed + 2).unwrap(), "B").unwrap()).unwrap();
            let u = random_unitary(3, seed + 3).unwrap();
            assert!(marginal_check(&rho, &a, &u, &b).unwrap().residuals.max() < 1e-9);

            let same = marginal_check(&rho, &a, &id(3), &a).unwrap();
            for n in 0..3 {
                for k in 0..3 {
                    let expected = if n == k { same.prior_first[n] } else { 0.0 };
                    assert!((same.joint_forward[n][k] - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn marginal_check_requires_complete_measures() {
        let basis = AlternativeBasis::new(vec!["a".into()], vec![ComplexVector::basis(2, 0).unwrap()]).unwrap();
        let partial = measure_from_basis(&basis).unwrap();
        let rho = DensityState::maximally_mixed(2).unwrap();
        assert!(matches!(
            marginal_check(&rho, &partial, &id(2), &canonical_measure(2)),
            Err(QdtError::IncompleteMeasure(_))
        ));
    }

    #[test]
    fn symmetry_examples() {
        let rho = random_state(2, 2, 31).unwrap();
        let a = ComplexVector::basis(2, 0).unwrap();
        let b = random_unitary(2, 32).unwrap().column(0);
        let r = symmetry_report(&rho, &a, &b, &id(2), 1e-12).unwrap();
        assert!(r.conditional_symmetric);
        assert!(!r.joint_symmetric);

        let phase = a.scale(C64::from_polar(1.0, 0.7));
        let r = symmetry_report(&rho, &a, &phase, &id(2), 1e-12).unwrap();
        assert!(r.conditional_symmetric && r.joint_symmetric);

        let u = random_unitary(2, 33).unwrap();
        let r = symmetry_report(&rho, &a, &b, &u, 1e-12).unwrap();
        assert!(!r.conditional_symmetric && !r.joint_symmetric);
    }

    #[test]
    fn symmetry_flags_zero_conditioning() {
        let rho = DensityState::pure(&ComplexVector::basis(2, 0).unwrap()).unwrap();
        let a = ComplexVector::basis(2, 0).unwrap();
        let b = ComplexVector::basis(2, 1).unwrap();
        let r = symmetry_report(&rho, &a, &b, &id(2), 1e-12).unwrap();
        assert_eq!(r.conditional_reverse, None);
        assert!(!r.conditional_symmetric);
    }

    #[test]
    fn choice_record_bounds() {
        let m = canonical_measure(2);
        assert!(ChoiceRecord::new("A", &m, 1, TimeTag::At).is_ok());
        assert!(ChoiceRecord::new("A", &m, 2, TimeTag::Before).is_err());
    }
}
