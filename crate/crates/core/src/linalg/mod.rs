//! Dense real-symmetric spectral core.
//!
//! Everything downstream is built on [`SymmetricOperator`] and its
//! [`SpectralDecomposition`]: spectral projections onto windows, functional
//! calculus, Schatten norms and the kernel-equivalence relation
//! `C*C ≈ CC*` (equal nonzero spectra).

mod tridiagonal;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{input, numerical, LabError, Result};
use tridiagonal::Tridiagonal;

/// An eigenvalue this close to an open window endpoint is treated as outside.
pub const ENDPOINT_TIE_TOL: f64 = 1e-12;

/// Tridiagonal inputs at least this large take the bisection/inverse-iteration path.
const TRIDIAGONAL_MIN_DIM: usize = 64;

/// A dense real symmetric matrix. Construction symmetrises exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    matrix: DMatrix<f64>,
}

impl SymmetricOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return input(format!(
                "symmetric operator needs a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        if let Some(bad) = matrix.iter().find(|v| !v.is_finite()) {
            return input(format!("matrix entry {bad} is not finite"));
        }
        let mut m = matrix;
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim.max(1), dim.max(1)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim.max(1), dim.max(1)),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    /// Symmetric tridiagonal operator from its diagonal and off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        if off.len() + 1 != n {
            return input("off-diagonal must have one entry fewer than the diagonal");
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                off[j]
            } else if j == i + 1 {
                off[i]
            } else {
                0.0
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return input("dimension mismatch in operator sum");
        }
        Self::new(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return input("dimension mismatch in operator difference");
        }
        Self::new(&self.matrix - &other.matrix)
    }

    /// Symmetric product `A B A` (both symmetric).
    pub fn sandwich(&self, inner: &Self) -> Result<Self> {
        Self::new(&self.matrix * &inner.matrix * &self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(&self.matrix)
    }
}

/// Anything that carries orthonormal eigenpairs of a symmetric operator,
/// complete for every eigenvalue up to [`EigenBasis::ceiling`].
pub trait EigenBasis {
    fn eigenvalues(&self) -> &[f64];
    /// Eigenvectors as columns, in the order of [`EigenBasis::eigenvalues`].
    fn eigenvectors(&self) -> &DMatrix<f64>;
    fn source_dim(&self) -> usize;
    /// All eigenpairs with eigenvalue `<= ceiling` are present; `+∞` for a
    /// complete decomposition.
    fn ceiling(&self) -> f64;
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    source_dim: usize,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// `‖QᵀQ − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.source_dim;
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// `‖Q diag(λ) Qᵀ − A‖_max`.
    pub fn reconstruction_defect(&self, a: &SymmetricOperator) -> f64 {
        let q = &self.eigenvectors;
        let scaled = q * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        (scaled * q.transpose() - a.matrix()).amax()
    }
}

impl EigenBasis for SpectralDecomposition {
    fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }
    fn source_dim(&self) -> usize {
        self.source_dim
    }
    fn ceiling(&self) -> f64 {
        f64::INFINITY
    }
}

/// The eigenpairs of a symmetric operator with eigenvalue at most `ceiling`.
#[derive(Debug, Clone)]
pub struct LowerSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    source_dim: usize,
    ceiling: f64,
}

impl LowerSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let m = self.len();
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::<f64>::identity(m, m)).amax()
    }

    /// `max_k ‖A q_k − λ_k q_k‖₂`.
    pub fn max_residual(&self, a: &SymmetricOperator) -> f64 {
        let aq = a.matrix() * &self.eigenvectors;
        (0..self.len())
            .map(|k| (aq.column(k) - self.eigenvectors.column(k) * self.eigenvalues[k]).norm())
            .fold(0.0, f64::max)
    }
}

impl EigenBasis for LowerSpectrum {
    fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }
    fn source_dim(&self) -> usize {
        self.source_dim
    }
    fn ceiling(&self) -> f64 {
        self.ceiling
    }
}

/// Full eigendecomposition with eigenvalues ascending.
pub fn eigendecompose(a: &SymmetricOperator) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let eig = SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, 0).ok_or_else(|| {
        numerical(
            "eigendecompose",
            format!(
                "symmetric QR iteration did not converge (dim {n}, max |a_ij| {:e})",
                a.max_abs()
            ),
        )
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        source_dim: n,
    })
}

/// Eigenpairs with eigenvalue `<= ceiling`. Tridiagonal input uses Sturm
/// bisection and inverse iteration; anything else falls back to a full
/// decomposition.
pub fn eigendecompose_below(a: &SymmetricOperator, ceiling: f64) -> Result<LowerSpectrum> {
    let n = a.dim();
    if n >= TRIDIAGONAL_MIN_DIM {
        if let Some(t) = Tridiagonal::from_dense(a.matrix()) {
            let (eigenvalues, eigenvectors) = t.eigenpairs_below(ceiling, n as u64)?;
            return Ok(LowerSpectrum {
                eigenvalues,
                eigenvectors,
                source_dim: n,
                ceiling,
            });
        }
    }
    let full = eigendecompose(a)?;
    let m = full.eigenvalues.iter().take_while(|&&v| v <= ceiling).count();
    Ok(LowerSpectrum {
        eigenvalues: full.eigenvalues[..m].to_vec(),
        eigenvectors: full.eigenvectors.columns(0, m).into_owned(),
        source_dim: n,
        ceiling,
    })
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
        return Err(numerical("symmetric_eigenvalues", format!("entry {bad} is not finite")));
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are clipped.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let op = SymmetricOperator::new(m.clone())?;
    let d = eigendecompose(&op)?;
    let roots: Vec<f64> = d.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(weighted_outer(&d.eigenvectors, &roots))
}

/// `Q diag(w) Qᵀ`.
pub(crate) fn weighted_outer(q: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut scaled = q.clone();
    for (mut col, &wk) in scaled.column_iter_mut().zip(w) {
        col *= wk;
    }
    scaled * q.transpose()
}

/// An interval of the real line, endpoints possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl SpectralWindow {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return input(format!("window needs lo < hi, got ({lo}, {hi})"));
        }
        Ok(Self {
            lo,
            hi,
            lo_open,
            hi_open,
        })
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn below(hi: f64) -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn above(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn whole_line() -> Self {
        Self::below(f64::INFINITY)
    }

    /// Membership test; eigenvalues within [`ENDPOINT_TIE_TOL`] of an open
    /// endpoint are excluded.
    pub fn contains(&self, x: f64) -> bool {
        let above_lo = if self.lo == f64::NEG_INFINITY {
            true
        } else if self.lo_open {
            x > self.lo + ENDPOINT_TIE_TOL
        } else {
            x >= self.lo
        };
        let below_hi = if self.hi == f64::INFINITY {
            true
        } else if self.hi_open {
            x < self.hi - ENDPOINT_TIE_TOL
        } else {
            x <= self.hi
        };
        above_lo && below_hi
    }

    pub fn indicator(&self, x: f64) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }
}

/// Orthogonal projection onto the eigenvectors whose eigenvalue lies in `w`.
pub fn spectral_projection(d: &SpectralDecomposition, w: &SpectralWindow) -> SymmetricOperator {
    let weights: Vec<f64> = d.eigenvalues.iter().map(|&v| w.indicator(v)).collect();
    SymmetricOperator::new(weighted_outer(&d.eigenvectors, &weights))
        .expect("projection of a finite decomposition is finite")
}

/// `Q diag(f(λᵢ)) Qᵀ`.
pub fn apply_function(d: &SpectralDecomposition, f: impl Fn(f64) -> f64) -> Result<SymmetricOperator> {
    let mut values = Vec::with_capacity(d.eigenvalues.len());
    for &lam in &d.eigenvalues {
        let v = f(lam);
        if !v.is_finite() {
            return Err(LabError::Domain {
                at: lam,
                detail: format!("f evaluates to {v} at eigenvalue {lam}"),
            });
        }
        values.push(v);
    }
    SymmetricOperator::new(weighted_outer(&d.eigenvectors, &values))
}

/// Schatten index `q ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SchattenIndex {
    Finite(f64),
    Infinity,
}

impl SchattenIndex {
    pub fn new(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            Ok(Self::Infinity)
        } else if q.is_finite() && q >= 1.0 {
            Ok(Self::Finite(q))
        } else {
            input(format!("Schatten index must satisfy q >= 1, got {q}"))
        }
    }

    /// `(Σ σᵢ^q)^{1/q}`, or `max σᵢ` for `q = ∞`.
    pub fn norm_of(&self, singular_values: &[f64]) -> f64 {
        match *self {
            Self::Infinity => singular_values.iter().fold(0.0, |a, s| a.max(s.abs())),
            Self::Finite(q) => {
                let scale = singular_values.iter().fold(0.0f64, |a, s| a.max(s.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let sum: f64 = singular_values.iter().map(|s| (s.abs() / scale).powf(q)).sum();
                scale * sum.powf(1.0 / q)
            }
        }
    }

    /// `Σ σᵢ^q` (only for finite `q`).
    pub fn power_sum(&self, singular_values: &[f64]) -> f64 {
        match *self {
            Self::Infinity => f64::INFINITY,
            Self::Finite(q) => singular_values.iter().map(|s| s.abs().powf(q)).sum(),
        }
    }
}

pub fn schatten_norm(a: &SymmetricOperator, q: SchattenIndex) -> Result<f64> {
    Ok(q.norm_of(&a.eigenvalues()?))
}

/// Schatten norm of a general rectangular matrix via its singular values.
pub fn schatten_norm_general(a: &DMatrix<f64>, q: SchattenIndex) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sv = a.clone().singular_values();
    q.norm_of(sv.as_slice())
}

/// `Σ f(λᵢ)` for `f(0) = 0`.
pub fn trace_function(a: &SymmetricOperator, f: impl Fn(f64) -> f64) -> Result<f64> {
    let at_zero = f(0.0);
    if at_zero.is_nan() || at_zero.abs() > 1e-14 {
        return Err(LabError::Contract(format!(
            "trace functional needs f(0) = 0, got f(0) = {at_zero}"
        )));
    }
    let mut acc = 0.0;
    for lam in a.eigenvalues()? {
        let v = f(lam);
        if !v.is_finite() {
            return Err(LabError::Domain {
                at: lam,
                detail: format!("f evaluates to {v}"),
            });
        }
        acc += v;
    }
    Ok(acc)
}

/// Nonzero spectra of `CᵀC` and `CCᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEquivReport {
    /// Nonzero eigenvalues of `CᵀC`, descending.
    pub gram_left: Vec<f64>,
    /// Nonzero eigenvalues of `CCᵀ`, descending.
    pub gram_right: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Compare the nonzero spectra of `CᵀC` and `CCᵀ`. A singular value counts as
/// nonzero above `1e-10` times the largest one.
pub fn kernel_equiv_check(c: &DMatrix<f64>) -> Result<KernelEquivReport> {
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return input(format!("entry {bad} is not finite"));
    }
    if c.is_empty() {
        return Ok(KernelEquivReport {
            gram_left: vec![],
            gram_right: vec![],
            max_discrepancy: 0.0,
        });
    }
    let sv = c.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax && s > 0.0).count();
    let top = |m: DMatrix<f64>| -> Result<Vec<f64>> {
        let mut v = symmetric_eigenvalues(&m)?;
        v.reverse();
        v.truncate(rank);
        Ok(v)
    };
    let gram_left = top(c.transpose() * c)?;
    let gram_right = top(c * c.transpose())?;
    let max_discrepancy = gram_left
        .iter()
        .zip(&gram_right)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(KernelEquivReport {
        gram_left,
        gram_right,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn swap2() -> SymmetricOperator {
        SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn construction_symmetrises_and_rejects_bad_input() {
        let a = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, 3.0])).unwrap();
        assert_eq!(a.matrix()[(0, 1)], a.matrix()[(1, 0)]);
        assert_eq!(a.matrix()[(0, 1)], 3.0);
        assert!(SymmetricOperator::new(DMatrix::from_row_slice(1, 1, &[f64::NAN])).is_err());
        assert!(SymmetricOperator::new(DMatrix::zeros(2, 3)).is_err());
        assert!(SymmetricOperator::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn eigendecompose_identity_and_diagonal() {
        let d = eigendecompose(&SymmetricOperator::identity(2)).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 1.0]);
        assert!(d.orthogonality_defect() < 1e-14);

        let d = eigendecompose(&SymmetricOperator::from_diagonal(&[3.0, -1.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(d.eigenvalues()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eigenvalues()[1], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn eigendecompose_swap_matrix() {
        let d = eigendecompose(&swap2()).unwrap();
        assert_abs_diff_eq!(d.eigenvalues()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eigenvalues()[1], 1.0, epsilon = 1e-15);
        let v0 = d.eigenvectors().column(0);
        let v1 = d.eigenvectors().column(1);
        // (1, -1)/√2 and (1, 1)/√2 up to sign
        assert_abs_diff_eq!((v0[0] * v0[1]), -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!((v1[0] * v1[1]), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(v1[0].abs(), FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn projection_examples() {
        let d = eigendecompose(&SymmetricOperator::from_diagonal(&[-2.0, 5.0]).unwrap()).unwrap();
        let p = spectral_projection(&d, &SpectralWindow::below(0.0));
        assert_abs_diff_eq!(p.matrix()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.matrix()[(1, 1)], 0.0, epsilon = 1e-15);
        let p = spectral_projection(&d, &SpectralWindow::whole_line());
        assert!((p.matrix() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);

        let d = eigendecompose(&swap2()).unwrap();
        let p = spectral_projection(&d, &SpectralWindow::above(0.0));
        assert!((p.matrix() - DMatrix::from_element(2, 2, 0.5)).amax() < 1e-15);
    }

    #[test]
    fn open_endpoint_tie_excludes() {
        let w = SpectralWindow::open(0.0, 1.0).unwrap();
        assert!(!w.contains(1e-13));
        assert!(!w.contains(1.0 - 1e-13));
        assert!(w.contains(1e-11));
        let closed = SpectralWindow::new(0.0, 1.0, false, false).unwrap();
        assert!(closed.contains(0.0) && closed.contains(1.0));
        assert!(SpectralWindow::open(1.0, 1.0).is_err());
    }

    #[test]
    fn functional_calculus_examples() {
        let a = swap2();
        let d = eigendecompose(&a).unwrap();
        let id = apply_function(&d, |t| t).unwrap();
        assert!((id.matrix() - a.matrix()).amax() < 1e-8);
        let sq = apply_function(&d, |t| t * t).unwrap();
        assert!((sq.matrix() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        let ind = apply_function(&d, |t| if t > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let proj = spectral_projection(&d, &SpectralWindow::above(0.0));
        assert!((ind.matrix() - proj.matrix()).amax() < 1e-15);
        let err = apply_function(&d, |t| 1.0 / (t + 1.0)).unwrap_err();
        assert!(matches!(err, LabError::Domain { at, .. } if at == -1.0 || (at + 1.0).abs() < 1e-14));
    }

    #[test]
    fn schatten_examples() {
        let z = SymmetricOperator::zeros(3);
        assert_eq!(schatten_norm(&z, SchattenIndex::new(2.0).unwrap()).unwrap(), 0.0);
        let a = SymmetricOperator::from_diagonal(&[3.0, -4.0]).unwrap();
        assert_abs_diff_eq!(
            schatten_norm(&a, SchattenIndex::new(1.0).unwrap()).unwrap(),
            7.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            schatten_norm(&a, SchattenIndex::new(2.0).unwrap()).unwrap(),
            5.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            schatten_norm(&a, SchattenIndex::Infinity).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        assert!(SchattenIndex::new(0.5).is_err());
    }

    #[test]
    fn trace_function_examples() {
        let d = eigendecompose(&swap2()).unwrap();
        let p = spectral_projection(&d, &SpectralWindow::above(0.0));
        assert_abs_diff_eq!(trace_function(&p, |t| t).unwrap(), 1.0, epsilon = 1e-14);
        let a = SymmetricOperator::from_diagonal(&[0.5, 0.25]).unwrap();
        assert_abs_diff_eq!(trace_function(&a, |t| t * t).unwrap(), 0.3125, epsilon = 1e-15);
        assert_eq!(trace_function(&SymmetricOperator::zeros(2), |t| t).unwrap(), 0.0);
        assert!(matches!(trace_function(&a, |t| t + 1.0), Err(LabError::Contract(_))));
    }

    #[test]
    fn kernel_equivalence_examples() {
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let r = kernel_equiv_check(&c).unwrap();
        assert_eq!(r.gram_left.len(), 1);
        assert_eq!(r.gram_right.len(), 1);
        assert_abs_diff_eq!(r.gram_left[0], 5.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.gram_right[0], 5.0, epsilon = 1e-13);

        let r = kernel_equiv_check(&DMatrix::zeros(3, 2)).unwrap();
        assert!(r.gram_left.is_empty() && r.gram_right.is_empty());
    }

    #[test]
    fn lower_spectrum_tridiagonal_matches_dense() {
        let n = 80;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.3 * ((i as f64) * 0.7).sin()).collect();
        let off = vec![-1.0; n - 1];
        let a = SymmetricOperator::tridiagonal(&diag, &off).unwrap();
        let lower = eigendecompose_below(&a, 1.0).unwrap();
        let full = eigendecompose(&a).unwrap();
        let expected: Vec<f64> = full.eigenvalues().iter().copied().filter(|&v| v <= 1.0).collect();
        assert_eq!(lower.len(), expected.len());
        for (x, y) in lower.eigenvalues().iter().zip(&expected) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(lower.orthogonality_defect() < 1e-12);
        assert!(lower.max_residual(&a) < 1e-12);
    }

    #[test]
    fn lower_spectrum_dense_fallback() {
        let a = SymmetricOperator::from_fn(5, |i, j| 1.0 / (1.0 + i as f64 + j as f64)).unwrap();
        let lower = eigendecompose_below(&a, 0.01).unwrap();
        let full = eigendecompose(&a).unwrap();
        let m = full.eigenvalues().iter().filter(|&&v| v <= 0.01).count();
        assert_eq!(lower.len(), m);
        assert_eq!(lower.ceiling(), 0.01);
    }
}
