use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{alternative_state, decision_measures, prospect_projector_measure};
use super::Scenario;
use crate::error::{QdtError, Result, ScenarioError};
use crate::rng;
use crate::sequential;
use crate::space::{self, ProjectorMeasure};

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Single,
    Sequential,
    Behavioral,
}

impl Protocol {
    fn site(self) -> &'static str {
        match self {
            Protocol::Single => "sample.single",
            Protocol::Sequential => "sample.sequential",
            Protocol::Behavioral => "sample.behavioral",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = QdtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Protocol::Single),
            "sequential" => Ok(Protocol::Sequential),
            "behavioral" => Ok(Protocol::Behavioral),
            other => Err(QdtError::InvalidArgument(format!(
                "unknown protocol `{other}` (expected single, sequential or behavioral)"
            ))),
        }
    }
}

/// Observed versus expected frequency of one event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub event: String,
    /// `marginal`, `joint` or `conditional`.
    pub kind: String,
    pub count: u64,
    /// Number of makers the frequency is taken over.
    pub trials: u64,
    pub frequency: f64,
    pub expected: f64,
    pub standard_error: f64,
    /// `None` when the standard error vanishes.
    pub z: Option<f64>,
}

impl SampleRow {
    fn new(event: String, kind: &str, count: u64, trials: u64, expected: f64) -> Self {
        let frequency = if trials == 0 { 0.0 } else { count as f64 / trials as f64 };
        let standard_error = if trials == 0 {
            0.0
        } else {
            (expected * (1.0 - expected) / trials as f64).max(0.0).sqrt()
        };
        let z = (standard_error > 0.0).then(|| (frequency - expected) / standard_error);
        Self {
            event,
            kind: kind.to_string(),
            count,
            trials,
            frequency,
            expected,
            standard_error,
            z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub command: String,
    pub protocol: Protocol,
    pub makers: u64,
    pub seed: u64,
    pub rows: Vec<SampleRow>,
}

impl SampleReport {
    /// Largest `|z|` over rows with a defined z-score.
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.z).map(f64::abs).fold(0.0, f64::max)
    }

    pub fn row(&self, event: &str) -> Option<&SampleRow> {
        self.rows.iter().find(|r| r.event == event)
    }
}

fn require_distribution(probs: &[f64], what: &str, tolerance: f64) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tolerance {
        return Err(QdtError::IncompleteMeasure(format!(
            "{what} probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Categorical counts from `n` independent draws, split into seeded chunks.
fn draw_counts(weights: &[f64], n: u64, seed: u64, site: &str) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(weights)
        .map_err(|e| QdtError::IncompleteMeasure(format!("cannot sample from {weights:?}: {e}")))?;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, site, c);
            let len = CHUNK.min(n - c * CHUNK);
            let mut counts = vec![0u64; weights.len()];
            for _ in 0..len {
                counts[dist.sample(&mut rng)] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; weights.len()];
    for part in partial {
        for (acc, c) in counts.iter_mut().zip(part) {
            *acc += c;
        }
    }
    Ok(counts)
}

fn marginal_rows(labels: &[String], counts: &[u64], probs: &[f64], n: u64) -> Vec<SampleRow> {
    labels
        .iter()
        .zip(counts.iter().zip(probs))
        .map(|(l, (&c, &p))| SampleRow::new(l.clone(), "marginal", c, n, p))
        .collect()
}

fn sample_measure(
    state: &space::DensityState,
    m: &ProjectorMeasure,
    n: u64,
    seed: u64,
    site: &str,
    tolerance: f64,
) -> Result<Vec<SampleRow>> {
    let probs = space::all_probabilities(state, m)?;
    require_distribution(&probs, "choice", tolerance)?;
    let counts = draw_counts(&probs, n, seed, site)?;
    Ok(marginal_rows(m.labels(), &counts, &probs, n))
}

/// Draws `n` decision makers and compares empirical with closed-form
/// frequencies.
pub fn run_sample(s: &Scenario, n: u64, protocol: Protocol) -> Result<SampleReport> {
    if n == 0 {
        return Err(QdtError::InvalidArgument("sample size must be at least 1".into()));
    }
    let seed = s.seed();
    let tolerance = s.tolerances().residual;
    let site = protocol.site();
    let rows = match protocol {
        Protocol::Single => {
            let state = alternative_state(s)?;
            sample_measure(&state, s.alternative_measure(), n, seed, site, tolerance)?
        }
        Protocol::Behavioral => {
            let b = s.behavioral().ok_or_else(|| {
                QdtError::Scenario(ScenarioError::Invariant {
                    path: "$.subject_space".into(),
                    message: "behavioral sampling requires a subject_space".into(),
                })
            })?;
            let m = prospect_projector_measure(&b.prospects)?;
            sample_measure(s.state(), &m, n, seed, site, tolerance)?
        }
        Protocol::Sequential => sample_sequential(s, n, seed, tolerance)?,
    };
    Ok(SampleReport {
        command: "sample".into(),
        protocol,
        makers: n,
        seed,
        rows,
    })
}

/// First choice from the prior, Lüders update, evolution, second choice.
fn sample_sequential(s: &Scenario, n: u64, seed: u64, tolerance: f64) -> Result<Vec<SampleRow>> {
    let measures = decision_measures(s)?;
    let first = &measures[0].1;
    let second = measures.get(1).map_or(first, |(_, m)| m);
    let state = s.state();
    let u = s.evolution();

    let prior = space::all_probabilities(state, first)?;
    require_distribution(&prior, "first-choice", tolerance)?;
    let first_counts = draw_counts(&prior, n, seed, "sample.sequential.first")?;
    let mut rows = marginal_rows(first.labels(), &first_counts, &prior, n);

    let mut joint_rows = Vec::new();
    let mut conditional_rows = Vec::new();
    for (i, (pa, &count)) in first.projectors().iter().zip(&first_counts).enumerate() {
        if count == 0 {
            continue;
        }
        let reduced = sequential::luders_reduce(state, pa)?;
        let evolved = space::evolve(&reduced, u)?;
        let posterior = space::all_probabilities(&evolved, second)?;
        require_distribution(&posterior, "second-choice", tolerance)?;
        let counts = draw_counts(&posterior, count, seed, &format!("sample.sequential.second.{i}"))?;
        let a = &first.labels()[i];
        for (k, b) in second.labels().iter().enumerate() {
            let event = format!("{a} -> {b}");
            joint_rows.push(SampleRow::new(event.clone(), "joint", counts[k], n, prior[i] * posterior[k]));
            conditional_rows.push(SampleRow::new(event, "conditional", counts[k], count, posterior[k]));
        }
    }
    rows.extend(joint_rows);
    rows.extend(conditional_rows);
    Ok(rows)
}
