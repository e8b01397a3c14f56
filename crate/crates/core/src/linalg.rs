//! Dense complex linear algebra.
//!
//! Every Hilbert-space object in the engine (states, projectors, evolution
//! operators) is a small dense [`ComplexMatrix`] stored row-major. Dimensions
//! stay tiny (tens of rows), so all routines are straightforward loops.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QdtError, Result};
use crate::rng;
use crate::tol;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

fn check_finite(values: &[C64], what: &str) -> Result<()> {
    if let Some(pos) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QdtError::NonFinite(format!("{what} entry {pos}")));
    }
    Ok(())
}

/// Column vector in a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<C64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(QdtError::Dimension("vector must have at least one entry".into()));
        }
        check_finite(&entries, "vector")?;
        Ok(Self { entries })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Canonical basis vector `e_k` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(QdtError::Index { index: k, len: dim });
        }
        let mut entries = vec![ZERO; dim];
        entries[k] = ONE;
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(QdtError::Dimension(format!(
                "inner product of vectors with dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, factor: C64) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<ComplexVector> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(QdtError::Normalization { norm: n });
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// Fails with [`QdtError::Normalization`] unless `‖v‖ = 1` within `tol`.
    pub fn require_unit(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(QdtError::Normalization { norm: n });
        }
        Ok(())
    }

    pub fn kron(&self, other: &ComplexVector) -> ComplexVector {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        ComplexVector { entries }
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(QdtError::Dimension("vector difference".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QdtError::Dimension(format!("{rows}x{cols} matrix is empty")));
        }
        if data.len() != rows * cols {
            return Err(QdtError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data, "matrix")?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|row| row.len() != c) {
            return Err(QdtError::Dimension(format!(
                "row {bad} has {} entries, expected {c}",
                rows[bad].len()
            )));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Self {
        let (r, c) = (a.dim(), b.dim());
        let mut data = Vec::with_capacity(r * c);
        for x in a.entries() {
            for y in b.entries() {
                data.push(x * y.conj());
            }
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn row_vecs(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(<[C64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector {
            entries: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(QdtError::Dimension(format!(
                "{what} requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(QdtError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(QdtError::Dimension(format!(
                "cannot apply {}x{} matrix to vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let entries = self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v.entries()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector { entries })
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.require_square("trace")?;
        Ok((0..n).map(|i| self.data[i * n + i]).sum())
    }

    /// Block `(i, j)` of the result equals `self[i, j] · other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QdtError::Dimension(format!(
                "elementwise operation on {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entry modulus (the max-norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Max-norm of `A - A†`; infinite for non-square input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Max-norm of `U†U - I`; infinite for non-square input.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.adjoint().matmul(self).expect("square");
        gram.max_abs_diff(&Self::identity(self.rows)).expect("same shape")
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(QdtError::Hermiticity { deviation });
        }
        Ok(())
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(QdtError::Unitarity { deviation });
        }
        Ok(())
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &ComplexVector) -> Result<C64> {
        v.inner(&self.apply(v)?)
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Result<ComplexMatrix> {
        self.require_square("hermitian part")?;
        Ok(self.add(&self.adjoint())?.scale(C64::new(0.5, 0.0)))
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> ComplexMatrix {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        ComplexMatrix { rows, cols, data }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.cols) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> Result<C64> {
    a.trace()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// `Tr(AB)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.rows != b.cols || a.cols != b.rows {
        return Err(QdtError::Dimension(format!(
            "Tr(AB) of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = ZERO;
    for i in 0..a.rows {
        for j in 0..a.cols {
            acc += a.data[i * a.cols + j] * b.data[j * b.cols + i];
        }
    }
    Ok(acc)
}

/// Eigenvalues (ascending) of the Hermitian part of a square matrix.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = a.hermitian_part()?;
    let mut values: Vec<f64> = h.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues and eigenvectors (as columns) of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = a.hermitian_part()?;
    let eig = h.to_nalgebra().symmetric_eigen();
    let values = eig.eigenvalues.iter().copied().collect();
    Ok((values, ComplexMatrix::from_nalgebra(&eig.eigenvectors)))
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square("matrix exponential")?;
    // 1-norm bound drives the number of squarings.
    let norm = (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40u32 {
        term = term.matmul(&scaled)?.scale(C64::new(1.0 / f64::from(k), 0.0));
        result = result.add(&term)?;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result)?;
    }
    Ok(result)
}

/// `exp(-i·h·t)` for a Hermitian generator `h`.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    h.require_square("hamiltonian")?;
    h.require_hermitian(tol::STRUCTURAL)?;
    if !t.is_finite() {
        return Err(QdtError::NonFinite("evolution time".into()));
    }
    expm(&h.scale(C64::new(0.0, -t)))
}

/// Haar-random unitary from a seeded generator.
pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(QdtError::InvalidArgument("unitary dimension must be at least 1".into()));
    }
    let gaussian: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng::complex_gaussian(rng)).collect())
        .collect();
    // Columns of `gaussian` are orthonormalized in order (QR with a positive
    // diagonal in R); the resulting Q is Haar distributed.
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut col: Vec<C64> = (0..dim).map(|i| gaussian[i][j]).collect();
        for _ in 0..2 {
            for prev in &q {
                let proj: C64 = prev.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= proj * p;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(QdtError::InvalidArgument("degenerate Gaussian sample".into()));
        }
        q.push(col.into_iter().map(|z| z / norm).collect());
    }
    let mut data = vec![ZERO; dim * dim];
    for (j, col) in q.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            data[i * dim + j] = *z;
        }
    }
    ComplexMatrix::new(dim, dim, data)
}

pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    random_unitary_with(dim, &mut rng::stream(seed, "random_unitary", 0))
}

/// Complex Gaussian matrix with independent entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| rng::complex_gaussian(rng)).collect();
    ComplexMatrix { rows, cols, data }
}

/// Haar-random Hermitian generator with unit-scale spectrum, for tests and audits.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    g.hermitian_part().expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn naive_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = ZERO;
                for k in 0..a.cols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out.data[i * b.cols() + j] = acc;
            }
        }
        out
    }

    #[test]
    fn matmul_identity_and_zero() {
        let m = gaussian_matrix(2, 2, &mut stream(1, "t", 0));
        assert_eq!(ComplexMatrix::identity(2).matmul(&m).unwrap(), m);
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(m.matmul(&z).unwrap(), z);
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut r = stream(2, "t", 0);
        let a = gaussian_matrix(3, 3, &mut r);
        let b = gaussian_matrix(3, 3, &mut r);
        let d = a.matmul(&b).unwrap().max_abs_diff(&naive_product(&a, &b)).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn matmul_dimension_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(QdtError::Dimension(_))));
    }

    #[test]
    fn adjoint_cases() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(m.adjoint(), expected);
        let h = random_hermitian(3, &mut stream(3, "t", 0));
        assert!(h.adjoint().max_abs_diff(&h).unwrap() == 0.0);
        let g = gaussian_matrix(3, 4, &mut stream(3, "t", 1));
        assert_eq!(g.adjoint().adjoint(), g);
    }

    #[test]
    fn trace_cases() {
        assert_eq!(ComplexMatrix::identity(5).trace().unwrap(), c(5.0, 0.0));
        let mut r = stream(4, "t", 0);
        let a = gaussian_matrix(4, 4, &mut r);
        let b = gaussian_matrix(4, 4, &mut r);
        let ab = a.matmul(&b).unwrap().trace().unwrap();
        let ba = b.matmul(&a).unwrap().trace().unwrap();
        assert!((ab - ba).norm() < 1e-12);
        let v = ComplexVector::from_real(&[0.6, 0.8]).unwrap();
        assert!((ComplexMatrix::outer(&v, &v).trace().unwrap() - ONE).norm() < 1e-15);
        assert!(matches!(ComplexMatrix::zeros(2, 3).trace(), Err(QdtError::Dimension(_))));
    }

    #[test]
    fn kron_cases() {
        assert_eq!(
            ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(3)),
            ComplexMatrix::identity(6)
        );
        let a = ComplexVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let b = ComplexVector::new(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = ComplexMatrix::outer(&a, &a).kron(&ComplexMatrix::outer(&b, &b));
        assert!(p.matmul(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-12);
        let mut r = stream(5, "t", 0);
        let x = gaussian_matrix(2, 2, &mut r);
        let y = gaussian_matrix(3, 3, &mut r);
        let lhs = x.kron(&y).trace().unwrap();
        let rhs = x.trace().unwrap() * y.trace().unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        // block layout
        assert_eq!(x.kron(&y).get(3, 4), x.get(1, 1) * y.get(0, 1));
    }

    #[test]
    fn expm_zero_time_and_diagonal() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 2.5]]).unwrap();
        assert!(unitary_from_hamiltonian(&h, 0.0)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(2))
            .unwrap()
            < 1e-15);
        let t = 3.7;
        let u = unitary_from_hamiltonian(&h, t).unwrap();
        let expected = ComplexMatrix::from_diag(&[ONE, C64::from_polar(1.0, -2.5 * t)]);
        assert!(u.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn expm_matches_eigendecomposition() {
        let h = random_hermitian(4, &mut stream(6, "t", 0));
        let t = 1.3;
        let u = unitary_from_hamiltonian(&h, t).unwrap();
        assert!(u.unitarity_deviation() < 1e-9);
        let (values, vecs) = hermitian_eigen(&h).unwrap();
        let phases: Vec<C64> = values.iter().map(|e| C64::from_polar(1.0, -e * t)).collect();
        let oracle = vecs
            .matmul(&ComplexMatrix::from_diag(&phases))
            .unwrap()
            .matmul(&vecs.adjoint())
            .unwrap();
        assert!(u.max_abs_diff(&oracle).unwrap() < 1e-10);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            unitary_from_hamiltonian(&m, 1.0),
            Err(QdtError::Hermiticity { .. })
        ));
    }

    #[test]
    fn random_unitary_contract() {
        let u1 = random_unitary(1, 9).unwrap();
        assert!((u1.get(0, 0).norm() - 1.0).abs() < 1e-12);
        for dim in 1..=8 {
            assert!(random_unitary(dim, dim as u64).unwrap().unitarity_deviation() < 1e-9);
        }
        assert_eq!(random_unitary(5, 11).unwrap(), random_unitary(5, 11).unwrap());
        assert_ne!(random_unitary(5, 11).unwrap(), random_unitary(5, 12).unwrap());
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(QdtError::NonFinite(_))
        ));
        assert!(ComplexVector::new(vec![]).is_err());
    }
}
