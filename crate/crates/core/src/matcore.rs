//! Dense complex matrices and tolerance-aware spectral helpers.
//!
//! All rank and support decisions are relative to the largest eigenvalue of the
//! matrix at hand, so results do not depend on the overall scale of the input.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute floor used by the standalone normality and commutation tests.
pub const EPS_FLOOR: f64 = 1e-300;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries((0..self.rows()).map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.get(i, j);
                        format!("{:.4}{:+.4}i", z.re, z.im)
                    })
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Builds a real matrix from row-major entries. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Self(DMatrix::from_fn(rows, cols, |i, j| re(entries[i * cols + j])))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { C64::default() })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { C64::default() })
    }

    /// Matrix unit `E_ij` (0-based) of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, re(1.0));
        m
    }

    /// Projection onto the span of `v` (which need not be normalized).
    pub fn projector(v: &[C64]) -> Self {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2)
    }

    /// `v v†` without normalization.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Sub-matrix made of the listed columns.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows(), cols.len(), |i, k| self.get(i, cols[k]))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Entrywise transpose in the standard basis (no conjugation).
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `(M − M†)/(2i)`, Hermitian for any square `M`.
    pub fn skew_part(&self) -> Self {
        let half_over_i = c(0.0, -0.5);
        Self((&self.0 - self.0.adjoint()).map(|z| z * half_over_i))
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "shape"
        );
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `V† self V`.
    pub fn compress(&self, v: &Self) -> Self {
        Self(v.0.adjoint() * &self.0 * &v.0)
    }

    /// Relative Hermiticity defect `‖M − M†‖_F / ‖M‖_F` (0 for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.norm_fro();
        if n == 0.0 {
            return 0.0;
        }
        self.dist(&self.adjoint()) / n
    }

    /// Matrix product; `None` on inner-dimension mismatch.
    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        (self.cols() == rhs.rows()).then(|| Self(&self.0 * &rhs.0))
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

impl std::iter::Sum for ComplexMatrix {
    /// Panics on an empty iterator; callers sum non-empty families.
    fn sum<I: Iterator<Item = ComplexMatrix>>(iter: I) -> Self {
        iter.reduce(|a, b| a + b).expect("sum of an empty matrix family")
    }
}

/// Numerical tolerances. All values are relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity defect allowed before symmetrization, relative to `‖M‖_F`.
    pub herm: f64,
    /// Most negative eigenvalue tolerated, relative to `λ_max`.
    pub psd: f64,
    /// Eigenvalues at or below `rank · λ_max` count as zero.
    pub rank: f64,
    /// Normality defect relative to `‖M‖_F²`.
    pub normal: f64,
    /// Commutator defect relative to `‖M‖_F‖N‖_F`.
    pub commute: f64,
    /// Eigenvalue gap that separates clusters, relative to the grid scale.
    pub cluster: f64,
    /// Reconstruction residuals relative to the input norm.
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            psd: 1e-9,
            rank: 1e-9,
            normal: 1e-8,
            commute: 1e-8,
            cluster: 1e-6,
            recon: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("herm", self.herm),
            ("psd", self.psd),
            ("rank", self.rank),
            ("normal", self.normal),
            ("commute", self.commute),
            ("cluster", self.cluster),
            ("recon", self.recon),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Numerical(format!(
                    "tolerance {name} = {v} outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|&v| re(v)).collect();
        &(&self.vectors * &ComplexMatrix::from_diagonal(&d)) * &self.vectors.adjoint()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `Σ f(λ_k) v_k v_k†` over the eigenpairs where `f` returns `Some`.
    pub fn apply(&self, mut f: impl FnMut(f64) -> Option<f64>) -> ComplexMatrix {
        let n = self.vectors.rows();
        let mut keep = Vec::new();
        let mut weights = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            if let Some(w) = f(v) {
                keep.push(k);
                weights.push(re(w));
            }
        }
        if keep.is_empty() {
            return ComplexMatrix::zeros(n, n);
        }
        let v = self.vectors.select_columns(&keep);
        &(&v * &ComplexMatrix::from_diagonal(&weights)) * &v.adjoint()
    }
}

fn require_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

/// Eigen-decomposes a Hermitian matrix after symmetrizing away a defect of at most `tol.herm`.
pub fn herm_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigenSystem> {
    require_square(m)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect > tol.herm {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigenSystem {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(m.hermitian_part().into_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors =
        ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigenSystem { values, vectors })
}

/// Eigen-decomposition of a PSD matrix: rejects eigenvalues below `−tol.psd·λ_max`
/// and clamps the remaining negative ones to zero.
pub fn psd_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigenSystem> {
    let mut eig = herm_eig(m, tol)?;
    let max = eig.max_value().max(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol.psd * max || (max == 0.0 && min < 0.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    for v in &mut eig.values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// Eigenvalue cutoff `tol.rank · λ_max` below which an eigenvalue counts as zero.
fn support_cutoff(eig: &HermitianEigenSystem, tol: &Tolerances) -> f64 {
    tol.rank * eig.max_value()
}

/// Number of eigenvalues above `tol.rank · λ_max`.
pub fn rank_tol(m: &ComplexMatrix, tol: &Tolerances) -> Result<usize> {
    let eig = psd_eig(m, tol)?;
    Ok(rank_of(&eig, tol))
}

pub(crate) fn rank_of(eig: &HermitianEigenSystem, tol: &Tolerances) -> usize {
    let cut = support_cutoff(eig, tol);
    eig.values.iter().filter(|&&v| v > cut && v > 0.0).count()
}

/// Moore–Penrose pseudo-inverse of a PSD matrix.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let cut = support_cutoff(&eig, tol);
    Ok(eig.apply(|v| (v > cut && v > 0.0).then(|| 1.0 / v)))
}

/// Principal square root of a PSD matrix, restricted to its support at `tol.rank`.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let cut = support_cutoff(&eig, tol);
    Ok(eig.apply(|v| (v > cut && v > 0.0).then(|| v.sqrt())))
}

/// `(M^#)^{1/2}`, computed in one spectral pass.
pub fn pinv_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let cut = support_cutoff(&eig, tol);
    Ok(eig.apply(|v| (v > cut && v > 0.0).then(|| 1.0 / v.sqrt())))
}

/// Orthogonal projection onto the image of a PSD matrix.
pub fn support_projection(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let cut = support_cutoff(&eig, tol);
    Ok(eig.apply(|v| (v > cut && v > 0.0).then_some(1.0)))
}

/// Orthonormal basis (as columns) of the image of a PSD matrix.
pub fn support_basis(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let r = rank_of(&eig, tol);
    let cols: Vec<usize> = (0..r).collect();
    Ok(eig.vectors.select_columns(&cols))
}

/// Absolute normality defect `‖M M† − M† M‖_F`.
pub fn normal_defect(m: &ComplexMatrix) -> f64 {
    let a = m.adjoint();
    (m * &a).dist(&(&a * m))
}

/// Absolute commutator norm `‖MN − NM‖_F`.
pub fn commutator_defect(m: &ComplexMatrix, n: &ComplexMatrix) -> f64 {
    (m * n).dist(&(n * m))
}

pub fn is_normal(m: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(m)?;
    let norm = m.norm_fro();
    Ok(normal_defect(m) <= tol.normal * (norm * norm).max(EPS_FLOOR))
}

pub fn commutes(m: &ComplexMatrix, n: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(m)?;
    if m.rows() != n.rows() || m.cols() != n.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            m.rows(),
            m.cols(),
            n.rows(),
            n.cols()
        )));
    }
    Ok(commutator_defect(m, n) <= tol.commute * (m.norm_fro() * n.norm_fro()).max(EPS_FLOOR))
}

/// Kronecker product; entry `((i·q)+k, (j·s)+l)` equals `A[i,j]·B[k,l]` for `B` of size `q×s`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of two vectors.
pub fn kron_vec(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter()
        .flat_map(|&a| y.iter().map(move |&b| a * b))
        .collect()
}

/// Rank of the column space spanned by all columns of the given matrices
/// (same row count), via the Gram matrix of the stacked columns.
pub fn joint_column_rank(mats: &[&ComplexMatrix], tol: &Tolerances) -> Result<usize> {
    let rows = mats.first().map(|m| m.rows()).unwrap_or(0);
    let mut sum = ComplexMatrix::zeros(rows, rows);
    for m in mats {
        if m.rows() != rows {
            return Err(Error::ShapeMismatch("row counts differ".into()));
        }
        sum = &sum + &(*m * &m.adjoint());
    }
    rank_tol(&sum, tol)
}
