//! Kolmogorov baseline.
//!
//! A classical joint distribution over two finite event families is a single
//! table: `f(A_n B_k) = f(B_k A_n)`, so the joint is order-symmetric by
//! construction while the two conditionals generally differ. The quantum
//! counterpart, built by [`induced_joint_from_quantum`], behaves the other way
//! around.

use serde::Serialize;

use crate::error::{QdtError, Result};
use crate::linalg::ComplexMatrix;
use crate::sequential;
use crate::space::{DensityState, ProjectorMeasure};
use crate::tol;

/// Joint probabilities `f(A_n B_k)`, rows indexed by `A`, columns by `B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Vec<f64>>,
}

impl JointTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, cells: Vec<Vec<f64>>) -> Result<Self> {
        if cells.len() != row_labels.len() || cells.is_empty() {
            return Err(QdtError::Dimension(format!(
                "{} rows for {} row labels",
                cells.len(),
                row_labels.len()
            )));
        }
        if let Some(i) = cells.iter().position(|r| r.len() != col_labels.len()) {
            return Err(QdtError::Dimension(format!(
                "row {i} has {} cells for {} column labels",
                cells[i].len(),
                col_labels.len()
            )));
        }
        let mut total = 0.0;
        for (i, row) in cells.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    return Err(QdtError::InvalidArgument(format!("cell ({i},{j}) = {c} is not a probability")));
                }
                total += c;
            }
        }
        if (total - 1.0).abs() > tol::ALGEBRAIC {
            return Err(QdtError::InvalidArgument(format!("table sums to {total}, not 1")));
        }
        Ok(Self {
            row_labels,
            col_labels,
            cells,
        })
    }

    /// Unlabeled table; rows `A1..`, columns `B1..`.
    pub fn from_cells(cells: Vec<Vec<f64>>) -> Result<Self> {
        let rows = (1..=cells.len()).map(|i| format!("A{i}")).collect();
        let cols = (1..=cells.first().map_or(0, Vec::len)).map(|i| format!("B{i}")).collect();
        Self::new(rows, cols, cells)
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    /// `f(A_n B_k)`, equal to `f(B_k A_n)`.
    pub fn joint(&self, a: usize, b: usize) -> Result<f64> {
        self.cells
            .get(a)
            .and_then(|r| r.get(b))
            .copied()
            .ok_or(QdtError::Index {
                index: a.max(b),
                len: self.cells.len().min(self.col_labels.len()),
            })
    }

    pub fn row_marginal(&self, a: usize) -> Result<f64> {
        self.cells
            .get(a)
            .map(|r| r.iter().sum())
            .ok_or(QdtError::Index {
                index: a,
                len: self.cells.len(),
            })
    }

    pub fn col_marginal(&self, b: usize) -> Result<f64> {
        if b >= self.col_labels.len() {
            return Err(QdtError::Index {
                index: b,
                len: self.col_labels.len(),
            });
        }
        Ok(self.cells.iter().map(|r| r[b]).sum())
    }
}

fn conditioning(mass: f64) -> Result<f64> {
    if mass <= tol::CONDITIONING {
        return Err(QdtError::ZeroProbabilityConditioning {
            probability: mass,
            threshold: tol::CONDITIONING,
            label: None,
        });
    }
    Ok(mass)
}

/// `f(B_b | A_a) = f(B_b A_a) / f(A_a)`.
pub fn classical_conditional(table: &JointTable, given_a: usize, b: usize) -> Result<f64> {
    let joint = table.joint(given_a, b)?;
    Ok(joint / conditioning(table.row_marginal(given_a)?)?)
}

/// `f(A_a | B_b) = f(A_a B_b) / f(B_b)`.
pub fn classical_reverse_conditional(table: &JointTable, given_b: usize, a: usize) -> Result<f64> {
    let joint = table.joint(a, given_b)?;
    Ok(joint / conditioning(table.col_marginal(given_b)?)?)
}

/// Largest gap between the two conditionals of one pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymmetryWitness {
    pub max_gap: f64,
    /// `(a, b)` attaining the gap, or `None` when no pair is supported.
    pub pair: Option<(usize, usize)>,
}

/// `max |f(A_n|B_k) - f(B_k|A_n)|` over pairs whose marginals are both positive.
pub fn asymmetry_witness(table: &JointTable) -> AsymmetryWitness {
    let mut best = AsymmetryWitness {
        max_gap: 0.0,
        pair: None,
    };
    for a in 0..table.row_labels.len() {
        for b in 0..table.col_labels.len() {
            let (Ok(forward), Ok(reverse)) = (
                classical_conditional(table, a, b),
                classical_reverse_conditional(table, b, a),
            ) else {
                continue;
            };
            let gap = (forward - reverse).abs();
            if best.pair.is_none() || gap > best.max_gap {
                best = AsymmetryWitness {
                    max_gap: gap,
                    pair: Some((a, b)),
                };
            }
        }
    }
    best
}

/// Quantum joint probabilities of both choice orders.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducedJoint {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `[n][k] = p(B_k, t, A_n, t₀)`.
    pub forward: Vec<Vec<f64>>,
    /// `[n][k] = p(A_n, t, B_k, t₀)`.
    pub reverse: Vec<Vec<f64>>,
    /// `forward - reverse`.
    pub difference: Vec<Vec<f64>>,
    pub difference_total: f64,
}

impl InducedJoint {
    pub fn max_abs_difference(&self) -> f64 {
        self.difference
            .iter()
            .flatten()
            .map(|d| d.abs())
            .fold(0.0, f64::max)
    }

    /// The forward matrix as a classical table, provided both orders agree
    /// within `tol`.
    pub fn as_joint_table(&self, tol: f64) -> Result<JointTable> {
        let gap = self.max_abs_difference();
        if gap > tol {
            return Err(QdtError::InvalidArgument(format!(
                "quantum joint is not order-symmetric (max gap {gap:.3e})"
            )));
        }
        JointTable::new(self.row_labels.clone(), self.col_labels.clone(), self.forward.clone())
    }
}

pub fn induced_joint_from_quantum(
    state0: &DensityState,
    first_measure: &ProjectorMeasure,
    u: &ComplexMatrix,
    second_measure: &ProjectorMeasure,
) -> Result<InducedJoint> {
    first_measure.require_complete(tol::STRUCTURAL)?;
    second_measure.require_complete(tol::STRUCTURAL)?;
    let mut forward = Vec::with_capacity(first_measure.len());
    let mut reverse = Vec::with_capacity(first_measure.len());
    for pa in first_measure.projectors() {
        let mut f_row = Vec::with_capacity(second_measure.len());
        let mut r_row = Vec::with_capacity(second_measure.len());
        for pb in second_measure.projectors() {
            f_row.push(sequential::joint_probability(state0, pa, u, pb)?);
            r_row.push(sequential::joint_probability(state0, pb, u, pa)?);
        }
        forward.push(f_row);
        reverse.push(r_row);
    }
    let difference: Vec<Vec<f64>> = forward
        .iter()
        .zip(&reverse)
        .map(|(f, r)| f.iter().zip(r).map(|(a, b)| a - b).collect())
        .collect();
    let difference_total = difference.iter().flatten().sum();
    Ok(InducedJoint {
        row_labels: first_measure.labels().to_vec(),
        col_labels: second_measure.labels().to_vec(),
        forward,
        reverse,
        difference,
        difference_total,
    })
}
