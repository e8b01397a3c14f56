use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Scenario;
use crate::behavioral::{self, EmotionVector, Prospect, ProspectMeasure};
use crate::error::{QdtError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::rng::{self, StreamRng};
use crate::sequential;
use crate::space::{self, measure_from_basis, AlternativeBasis, DensityState};
use crate::tol;

/// Random instances are drawn in at most this alternative dimension.
pub const AUDIT_MAX_AMBIENT: usize = 8;
/// And at most this subject dimension.
pub const AUDIT_MAX_SUBJECT: usize = 4;
/// Gap above which an asymmetry counts as a witness.
pub const WITNESS_GAP: f64 = 1e-6;

/// Enough to rebuild the failing instance: the trial index selects the
/// random stream under the audit seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub ambient_dim: usize,
    pub subject_dim: usize,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub identity: String,
    pub checks: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessResult {
    pub witness: String,
    pub found: bool,
    pub trials_with_witness: u64,
    pub max_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub command: String,
    pub trials: u64,
    pub seed: u64,
    pub ambient_dim: usize,
    pub subject_dim: usize,
    pub passed: bool,
    pub identities: Vec<IdentityResult>,
    pub witnesses: Vec<WitnessResult>,
}

impl AuditReport {
    pub fn identity(&self, name: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.identity == name)
    }

    pub fn witness(&self, name: &str) -> Option<&WitnessResult> {
        self.witnesses.iter().find(|w| w.witness == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.identities.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
struct Observation {
    name: &'static str,
    value: f64,
    detail: String,
}

#[derive(Default)]
struct Trial {
    identities: Vec<Observation>,
    witnesses: Vec<Observation>,
}

impl Trial {
    fn check(&mut self, name: &'static str, value: f64, detail: impl FnOnce() -> String) {
        match self.identities.iter_mut().find(|o| o.name == name) {
            Some(o) if value <= o.value && !value.is_nan() => {}
            Some(o) => {
                o.value = value;
                o.detail = detail();
            }
            None => self.identities.push(Observation {
                name,
                value,
                detail: detail(),
            }),
        }
    }

    fn witness(&mut self, name: &'static str, gap: f64, detail: impl FnOnce() -> String) {
        match self.witnesses.iter_mut().find(|o| o.name == name) {
            Some(o) if gap <= o.value => {}
            Some(o) => {
                o.value = gap;
                o.detail = detail();
            }
            None => self.witnesses.push(Observation {
                name,
                value: gap,
                detail: detail(),
            }),
        }
    }
}

/// Identities in report order.
const IDENTITIES: &[&str] = &[
    "born_normalization",
    "luders_posterior_certainty",
    "conditional_normalization",
    "joint_marginal",
    "joint_total",
    "antisymmetric_total",
    "immediate_conditional_overlap",
    "factorized_immediate_joint",
    "choice_reproducibility",
    "immediate_conditional_symmetry",
    "commuting_joint_symmetry",
    "commuting_conditional_symmetry",
    "commuting_prior_equality",
    "compositional_equivalence",
    "decomposition_identity",
    "quality_imaginary",
    "quality_bounds",
    "behavioral_normalization",
    "behavioral_split",
    "prospect_orthogonality",
    "behavioral_posterior_certainty",
    "immediate_behavioral_overlap",
    "immediate_behavioral_symmetry",
    "behavioral_compositional_equivalence",
    "behavioral_commuting_joint_symmetry",
    "subject_degeneracy",
];

const WITNESSES: &[&str] = &[
    "generic_joint_asymmetry",
    "generic_conditional_asymmetry",
    "immediate_joint_asymmetry",
    "behavioral_immediate_joint_asymmetry",
];

fn random_basis(dim: usize, prefix: &str, rng: &mut StreamRng) -> Result<AlternativeBasis> {
    AlternativeBasis::from_unitary_columns(&linalg::random_unitary_with(dim, rng)?, prefix)
}

fn random_emotion(dim: usize, rng: &mut StreamRng) -> Result<EmotionVector> {
    let v = ComplexVector::new((0..dim).map(|_| rng::complex_gaussian(rng)).collect())?;
    EmotionVector::new(v.normalized()?)
}

fn random_prospects(basis: &AlternativeBasis, subject_dim: usize, rng: &mut StreamRng) -> Result<ProspectMeasure> {
    let emotions = (0..basis.len())
        .map(|_| random_emotion(subject_dim, rng))
        .collect::<Result<Vec<_>>>()?;
    ProspectMeasure::from_basis(basis, &emotions)
}

fn massive(state: &DensityState, p: &ComplexMatrix) -> Result<bool> {
    Ok(space::born_raw(state, p)? > tol::CONDITIONING)
}

fn sequential_checks(t: &mut Trial, d: usize, rng: &mut StreamRng) -> Result<()> {
    let rank = rng.random_range(1..=d);
    let rho = space::random_state_with(d, rank, rng)?;
    let u = linalg::random_unitary_with(d, rng)?;
    let id = ComplexMatrix::identity(d);
    let a = random_basis(d, "A", rng)?;
    let b = random_basis(d, "B", rng)?;
    let ma = measure_from_basis(&a)?;
    let mb = measure_from_basis(&b)?;

    let priors = space::all_probabilities(&rho, &ma)?;
    let total: f64 = priors.iter().sum();
    t.check("born_normalization", (total - 1.0).abs(), || format!("Σ p = {total}"));

    let report = sequential::marginal_check(&rho, &ma, &u, &mb)?;
    let r = &report.residuals;
    t.check("conditional_normalization", r.conditional_normalization, String::new);
    t.check("joint_marginal", r.joint_marginal, String::new);
    t.check("joint_total", r.joint_total, String::new);
    t.check("antisymmetric_total", r.antisymmetric_total, String::new);

    for (n, pa) in ma.projectors().iter().enumerate() {
        let a_mass = massive(&rho, pa)?;
        if a_mass {
            let reduced = sequential::luders_reduce(&rho, pa)?;
            let certainty = space::born_raw(&reduced, pa)?;
            t.check("luders_posterior_certainty", (certainty - 1.0).abs(), || {
                format!("Tr(ρ'P) = {certainty} for A{}", n + 1)
            });
            for (m, pm) in ma.projectors().iter().enumerate() {
                let c = sequential::conditional_probability(&rho, pa, &id, pm)?;
                let delta = if n == m { 1.0 } else { 0.0 };
                t.check("choice_reproducibility", (c - delta).abs(), || {
                    format!("p(A{}|A{}) = {c}", m + 1, n + 1)
                });
                let forward = sequential::joint_probability(&rho, pa, &id, pm)?;
                let reverse = sequential::joint_probability(&rho, pm, &id, pa)?;
                t.check("commuting_joint_symmetry", (forward - reverse).abs(), || {
                    format!("A{} then A{}: {forward} vs {reverse}", n + 1, m + 1)
                });
                if massive(&rho, pm)? {
                    let back = sequential::conditional_probability(&rho, pm, &id, pa)?;
                    t.check("commuting_conditional_symmetry", (c - back).abs(), || {
                        format!("A{}, A{}: {c} vs {back}", n + 1, m + 1)
                    });
                }
            }
        }
        for (k, pb) in mb.projectors().iter().enumerate() {
            let overlap = b.vectors()[k].inner(&a.vectors()[n])?.norm_sqr();
            let joint_now = sequential::joint_probability(&rho, pa, &id, pb)?;
            let expected = priors[n] * overlap;
            t.check("factorized_immediate_joint", (joint_now - expected).abs(), || {
                format!("A{} then B{}: {joint_now} vs {expected}", n + 1, k + 1)
            });
            let joint_back = sequential::joint_probability(&rho, pb, &id, pa)?;
            t.witness("immediate_joint_asymmetry", (joint_now - joint_back).abs(), || {
                format!("U = I, A{} then B{}: {joint_now}; reverse {joint_back}", n + 1, k + 1)
            });
            let forward = sequential::joint_probability(&rho, pa, &u, pb)?;
            let reverse = sequential::joint_probability(&rho, pb, &u, pa)?;
            t.witness("generic_joint_asymmetry", (forward - reverse).abs(), || {
                format!("random U, A{} then B{}: {forward}; reverse {reverse}", n + 1, k + 1)
            });
            if !a_mass {
                continue;
            }
            let c_now = sequential::conditional_probability(&rho, pa, &id, pb)?;
            t.check("immediate_conditional_overlap", (c_now - overlap).abs(), || {
                format!("p(B{}|A{}) = {c_now}, overlap {overlap}", k + 1, n + 1)
            });
            let quotient = sequential::conditional_probability(&rho, pa, &u, pb)?;
            let composed = sequential::conditional_by_reduction(&rho, pa, &u, pb)?;
            t.check("compositional_equivalence", (quotient - composed).abs(), || {
                format!("p(B{}|A{}): {quotient} vs {composed}", k + 1, n + 1)
            });
            if massive(&rho, pb)? {
                let c_back = sequential::conditional_probability(&rho, pb, &id, pa)?;
                t.check("immediate_conditional_symmetry", (c_now - c_back).abs(), || {
                    format!("A{}, B{}: {c_now} vs {c_back}", n + 1, k + 1)
                });
                let back = sequential::conditional_probability(&rho, pb, &u, pa)?;
                t.witness("generic_conditional_asymmetry", (quotient - back).abs(), || {
                    format!("random U, p(B{}|A{}) = {quotient}; p(A{}|B{}) = {back}", k + 1, n + 1, n + 1, k + 1)
                });
            }
        }
    }

    // Commuting rank-one projectors with non-zero overlap coincide, so their
    // priors agree: relabel the A basis with a global phase.
    let phased = AlternativeBasis::new(
        a.labels().to_vec(),
        a.vectors()
            .iter()
            .map(|v| v.scale(linalg::C64::from_polar(1.0, 0.7)))
            .collect(),
    )?;
    let mp = measure_from_basis(&phased)?;
    for (n, (pa, pp)) in ma.projectors().iter().zip(mp.projectors()).enumerate() {
        if pa.commutator(pp)?.max_abs() < tol::STRUCTURAL && phased.vectors()[n].inner(&a.vectors()[n])?.norm() > 0.0 {
            let gap = (space::born_raw(&rho, pa)? - space::born_raw(&rho, pp)?).abs();
            t.check("commuting_prior_equality", gap, || format!("A{}", n + 1));
        }
    }
    Ok(())
}

fn behavioral_checks(t: &mut Trial, d: usize, s: usize, rng: &mut StreamRng) -> Result<()> {
    let n = d * s;
    let rank = rng.random_range(1..=n);
    let rho = space::random_state_with(n, rank, rng)?;
    let u = linalg::random_unitary_with(n, rng)?;
    let id = ComplexMatrix::identity(n);
    let a = random_basis(d, "A", rng)?;
    let b = random_basis(d, "B", rng)?;
    let pa = random_prospects(&a, s, rng)?;
    let pb = random_prospects(&b, s, rng)?;

    for (i, p) in pa.prospects().iter().enumerate() {
        let (total, rational, quality) = behavioral::decompose_raw(&rho, p)?;
        t.check("decomposition_identity", (total - rational - quality.re).abs(), || {
            format!("prospect {}: p = {total}, f = {rational}, q = {}", i + 1, quality.re)
        });
        t.check("quality_imaginary", quality.im.abs(), || format!("prospect {}: Im q = {}", i + 1, quality.im));
        t.check("quality_bounds", (quality.re.abs() - 1.0).max(0.0), || {
            format!("prospect {}: q = {}", i + 1, quality.re)
        });
    }

    let projectors = pa.projectors();
    for (i, pi) in projectors.iter().enumerate() {
        for (j, pj) in projectors.iter().enumerate().skip(i + 1) {
            let overlap = linalg::trace_of_product(pi, pj)?.norm();
            t.check("prospect_orthogonality", overlap, || format!("prospects {}, {}", i + 1, j + 1));
        }
    }

    // Project onto the span of the prospects to obtain a behaviorally
    // normalized state.
    let mut span = ComplexMatrix::zeros(n, n);
    for p in projectors {
        span = span.add(p)?;
    }
    if let Ok(normalized) = sequential::luders_reduce(&rho, &span) {
        let diag = behavioral::decomposition_diagnostics(&normalized, &pa)?;
        t.check("behavioral_normalization", (diag.sum_total - 1.0).abs(), || {
            format!("Σ p = {}", diag.sum_total)
        });
        t.check("behavioral_split", diag.split_residual, || {
            format!("Σ q = {}, 1 - Σ f = {}", diag.sum_quality, 1.0 - diag.sum_rational)
        });
    }

    for (i, first) in pa.prospects().iter().enumerate() {
        let first_mass = massive(&rho, &projectors[i])?;
        if first_mass {
            let reduced = behavioral::behavioral_luders(&rho, first)?;
            let certainty = behavioral::prospect_probability(&reduced, first)?;
            t.check("behavioral_posterior_certainty", (certainty - 1.0).abs(), || {
                format!("prospect {}: {certainty}", i + 1)
            });
            for (j, other) in pa.prospects().iter().enumerate() {
                let f = behavioral::behavioral_joint(&rho, first, &id, other)?;
                let r = behavioral::behavioral_joint(&rho, other, &id, first)?;
                t.check("behavioral_commuting_joint_symmetry", (f - r).abs(), || {
                    format!("prospects {}, {}: {f} vs {r}", i + 1, j + 1)
                });
            }
        }
        for (k, second) in pb.prospects().iter().enumerate() {
            let forward = behavioral::behavioral_joint(&rho, first, &id, second)?;
            let reverse = behavioral::behavioral_joint(&rho, second, &id, first)?;
            t.witness("behavioral_immediate_joint_asymmetry", (forward - reverse).abs(), || {
                format!("U = I, prospect A{} then B{}: {forward}; reverse {reverse}", i + 1, k + 1)
            });
            if !first_mass {
                continue;
            }
            let c = behavioral::behavioral_conditional(&rho, first, &id, second)?;
            let overlap = behavioral::immediate_behavioral_conditional(first, second)?;
            t.check("immediate_behavioral_overlap", (c - overlap).abs(), || {
                format!("prospect A{} then B{}: {c} vs {overlap}", i + 1, k + 1)
            });
            if massive(&rho, &pb.projectors()[k])? {
                let back = behavioral::behavioral_conditional(&rho, second, &id, first)?;
                t.check("immediate_behavioral_symmetry", (c - back).abs(), || {
                    format!("prospects A{}, B{}: {c} vs {back}", i + 1, k + 1)
                });
            }
            let quotient = behavioral::behavioral_conditional(&rho, first, &u, second)?;
            let composed = behavioral::behavioral_conditional_by_reduction(&rho, first, &u, second)?;
            t.check("behavioral_compositional_equivalence", (quotient - composed).abs(), || {
                format!("prospect A{} then B{}: {quotient} vs {composed}", i + 1, k + 1)
            });
        }
    }
    Ok(())
}

/// A one-dimensional subject space reproduces the plain sequential values.
fn degeneracy_checks(t: &mut Trial, d: usize, rng: &mut StreamRng) -> Result<()> {
    let rho = space::random_state_with(d, rng.random_range(1..=d), rng)?;
    let u = linalg::random_unitary_with(d, rng)?;
    let a = random_basis(d, "A", rng)?;
    let b = random_basis(d, "B", rng)?;
    let one = EmotionVector::elementary(1, 0)?;
    for (n, va) in a.vectors().iter().enumerate() {
        let prospect_a = Prospect::new(n, va.clone(), one.clone())?;
        let proj_a = space::projector_from_vector(va)?;
        let gap = (behavioral::prospect_probability(&rho, &prospect_a)? - space::born_raw(&rho, &proj_a)?).abs();
        t.check("subject_degeneracy", gap, || format!("prior of A{}", n + 1));
        for (k, vb) in b.vectors().iter().enumerate() {
            let prospect_b = Prospect::new(k, vb.clone(), one.clone())?;
            let proj_b = space::projector_from_vector(vb)?;
            let gap = (behavioral::behavioral_joint(&rho, &prospect_a, &u, &prospect_b)?
                - sequential::joint_probability(&rho, &proj_a, &u, &proj_b)?)
            .abs();
            t.check("subject_degeneracy", gap, || format!("joint A{} then B{}", n + 1, k + 1));
        }
    }
    Ok(())
}

fn run_trial(seed: u64, trial: u64, d: usize, s: usize) -> Result<Trial> {
    let mut t = Trial::default();
    let mut rng = rng::stream(seed, "audit", trial);
    sequential_checks(&mut t, d, &mut rng)?;
    behavioral_checks(&mut t, d, s, &mut rng)?;
    degeneracy_checks(&mut t, d, &mut rng)?;
    Ok(t)
}

/// Checks every sequential and behavioral identity over `trials` random
/// instances and collects order-asymmetry witnesses.
///
/// Instances use the scenario's dimensions, clamped to at least 2 (so that
/// asymmetries can show up) and at most [`AUDIT_MAX_AMBIENT`] and
/// [`AUDIT_MAX_SUBJECT`].
pub fn run_symmetry_audit(s: &Scenario, trials: u64) -> Result<AuditReport> {
    if trials == 0 {
        return Err(QdtError::InvalidArgument("audit needs at least one trial".into()));
    }
    let d = s.ambient_dim().clamp(2, AUDIT_MAX_AMBIENT);
    let sd = s.subject_dim().clamp(2, AUDIT_MAX_SUBJECT);
    let seed = s.seed();
    let tolerance = s.tolerances().residual;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(seed, t, d, sd))
        .collect::<Result<Vec<_>>>()?;

    let counterexample = |trial: usize, o: &Observation| Counterexample {
        trial: trial as u64,
        ambient_dim: d,
        subject_dim: sd,
        value: o.value,
        detail: o.detail.clone(),
    };

    let identities: Vec<IdentityResult> = IDENTITIES
        .iter()
        .map(|&name| {
            let mut checks = 0;
            let mut max_residual = 0.0_f64;
            let mut worst: Option<Counterexample> = None;
            for (trial, r) in results.iter().enumerate() {
                if let Some(o) = r.identities.iter().find(|o| o.name == name) {
                    checks += 1;
                    let failing = o.value.is_nan() || o.value >= tolerance;
                    if o.value > max_residual || o.value.is_nan() {
                        max_residual = o.value;
                    }
                    if failing && worst.as_ref().is_none_or(|w| o.value > w.value) {
                        worst = Some(counterexample(trial, o));
                    }
                }
            }
            IdentityResult {
                identity: name.to_string(),
                checks,
                max_residual,
                tolerance,
                passed: worst.is_none(),
                counterexample: worst,
            }
        })
        .collect();

    let witnesses = WITNESSES
        .iter()
        .map(|&name| {
            let mut found = 0;
            let mut max_gap = 0.0_f64;
            let mut example = None;
            for (trial, r) in results.iter().enumerate() {
                if let Some(o) = r.witnesses.iter().find(|o| o.name == name) {
                    if o.value > WITNESS_GAP {
                        found += 1;
                    }
                    if o.value > max_gap {
                        max_gap = o.value;
                        example = Some(counterexample(trial, o));
                    }
                }
            }
            WitnessResult {
                witness: name.to_string(),
                found: found > 0,
                trials_with_witness: found,
                max_gap,
                example: if found > 0 { example } else { None },
            }
        })
        .collect();

    Ok(AuditReport {
        command: "audit".into(),
        trials,
        seed,
        ambient_dim: d,
        subject_dim: sd,
        passed: identities.iter().all(|r| r.passed),
        identities,
        witnesses,
    })
}
