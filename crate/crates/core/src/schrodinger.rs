//! Finite-difference 1D Schrödinger operators in a Dirichlet box and products
//! of their spectral projections.
//!
//! A projection product `G₀ g(H) G₀` (with `G₀ = outer(H₀)`) is stored in the
//! basis of the `H₀` eigenvectors on which `outer` is nonzero. That reduced
//! matrix has the same nonzero spectrum as the full product and only needs the
//! low-lying eigenpairs of both operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, numerical, LabError, Result};
use crate::linalg::{EigenBasis, SpectralWindow, SymmetricOperator, ENDPOINT_TIE_TOL};

/// `[-L, L]` with `n_points` interior unknowns; the endpoints carry Dirichlet
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub half_length: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return input(format!("grid half_length must be positive, got {half_length}"));
        }
        if n_points < 3 {
            return input(format!("grid needs n_points >= 3, got {n_points}"));
        }
        Ok(Self { half_length, n_points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.n_points + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + self.spacing() * (i + 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Energies up to `energy` must sit below a quarter of the discrete band
    /// top `4/h²`.
    pub fn check_band_edge(&self, energy: f64) -> Result<()> {
        let h = self.spacing();
        let edge = 1.0 / (h * h);
        if energy <= edge {
            return Ok(());
        }
        let suggested = (2.0 * self.half_length * energy.sqrt()).ceil() as usize;
        input(format!(
            "energy {energy} exceeds the resolved band {edge:.4} at spacing {h}; use n_points >= {suggested}"
        ))
    }
}

/// Short-range potentials with compact support or Gaussian decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    /// `−depth` on `|x| < half_width`.
    SquareWell {
        depth: f64,
        half_width: f64,
    },
    /// `amplitude · exp(−x²/(2 width²))`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
}

/// Gaussian tails below this magnitude are dropped.
const GAUSSIAN_CUTOFF: f64 = 1e-18;

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Zero => Ok(()),
            Potential::SquareWell { depth, half_width } => {
                if depth.is_finite() && half_width > 0.0 && half_width.is_finite() {
                    Ok(())
                } else {
                    input(format!(
                        "square well needs finite depth and half_width > 0, got ({depth}, {half_width})"
                    ))
                }
            }
            Potential::Gaussian { amplitude, width } => {
                if amplitude.is_finite() && width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    input(format!(
                        "gaussian needs finite amplitude and width > 0, got ({amplitude}, {width})"
                    ))
                }
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { depth, half_width } => {
                if x.abs() < half_width {
                    -depth
                } else {
                    0.0
                }
            }
            Potential::Gaussian { amplitude, width } => amplitude * (-0.5 * (x / width).powi(2)).exp(),
        }
    }

    /// Half-width of the region outside which `V` vanishes (or is negligible).
    pub fn support_radius(&self) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { half_width, depth } => {
                if depth == 0.0 {
                    0.0
                } else {
                    half_width
                }
            }
            Potential::Gaussian { amplitude, width } => {
                let a = amplitude.abs();
                if a <= GAUSSIAN_CUTOFF {
                    0.0
                } else {
                    width * (2.0 * (a / GAUSSIAN_CUTOFF).ln()).sqrt()
                }
            }
        }
    }

    /// Exponent `ρ` with `|V(x)| ≤ C(1+|x|)^{−ρ}`; infinite for compact or
    /// Gaussian decay.
    pub fn decay_exponent(&self) -> f64 {
        f64::INFINITY
    }

    /// Piecewise-constant description `(length, value)` of `V` on
    /// `[−R, R]`, `R` the support radius, with cells no longer than `step`.
    pub fn segments(&self, step: f64) -> Vec<(f64, f64)> {
        match *self {
            Potential::Zero => vec![],
            Potential::SquareWell { depth, half_width } => {
                if depth == 0.0 {
                    vec![]
                } else {
                    vec![(2.0 * half_width, -depth)]
                }
            }
            Potential::Gaussian { .. } => {
                let r = self.support_radius();
                if r == 0.0 {
                    return vec![];
                }
                let n = (2.0 * r / step).ceil().max(1.0) as usize;
                let len = 2.0 * r / n as f64;
                (0..n).map(|i| (len, self.value(-r + len * (i as f64 + 0.5)))).collect()
            }
        }
    }
}

/// Free and perturbed Hamiltonians: three-point Laplacian with Dirichlet ends,
/// plus `diag(V(xᵢ))`.
pub fn build_hamiltonians(g: &Grid1D, v: &Potential) -> Result<(SymmetricOperator, SymmetricOperator)> {
    v.validate()?;
    let h = g.spacing();
    let inv = 1.0 / (h * h);
    let n = g.n_points;
    let diag0 = vec![2.0 * inv; n];
    let off = vec![-inv; n - 1];
    let h0 = SymmetricOperator::tridiagonal(&diag0, &off)?;
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * inv + v.value(g.x(i))).collect();
    let hv = SymmetricOperator::tridiagonal(&diag, &off)?;
    Ok((h0, hv))
}

/// Shape of the cut-off pair `ψ±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerShape {
    /// Linear ramp between `ε` and `2ε`.
    Linear,
    /// Sharp cut at `ε`; reproduces the plain projections.
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    pub eps: f64,
    pub shape: RegularizerShape,
}

impl Regularizer {
    pub fn new(eps: f64, shape: RegularizerShape) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return input(format!("regularizer needs eps > 0, got {eps}"));
        }
        Ok(Self { eps, shape })
    }

    pub fn linear(eps: f64) -> Result<Self> {
        Self::new(eps, RegularizerShape::Linear)
    }

    /// `ψ⁺`: 0 up to `ε`, 1 from `2ε`.
    pub fn plus(&self, x: f64) -> f64 {
        match self.shape {
            RegularizerShape::Linear => ((x - self.eps) / self.eps).clamp(0.0, 1.0),
            RegularizerShape::Step => SpectralWindow::above(self.eps).indicator(x),
        }
    }

    /// `ψ⁻(x) = ψ⁺(−x)`.
    pub fn minus(&self, x: f64) -> f64 {
        match self.shape {
            RegularizerShape::Linear => ((-self.eps - x) / self.eps).clamp(0.0, 1.0),
            RegularizerShape::Step => SpectralWindow::below(-self.eps).indicator(x),
        }
    }

    /// Where `ψ⁺` reaches 1.
    fn plus_saturation(&self) -> f64 {
        match self.shape {
            RegularizerShape::Linear => 2.0 * self.eps,
            RegularizerShape::Step => self.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductVariant {
    Pi1,
    Pi2,
    Pi1Windowed,
}

/// A projection product in the basis of the selected `H₀` eigenvectors.
#[derive(Debug, Clone)]
pub struct ProjectionProduct {
    reduced: SymmetricOperator,
    basis: DMatrix<f64>,
    h0_indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    pub lambda_star: f64,
    pub eps: f64,
    pub delta: Option<f64>,
    pub variant: ProductVariant,
    pub regularizer: Option<RegularizerShape>,
    /// Eigenvalues found within the tie tolerance of a window endpoint.
    pub tie_warnings: Vec<String>,
}

/// Allowed excursion of product eigenvalues outside `[0, 1]`.
const RANGE_TOL: f64 = 1e-9;

impl ProjectionProduct {
    /// Reduced matrix `D (tail·I + Y diag(g − tail) Yᵀ) D`.
    pub fn reduced(&self) -> &SymmetricOperator {
        &self.reduced
    }

    /// `H₀` eigenvectors spanning the range, as columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Indices (into the `H₀` eigenbasis) of the basis columns.
    pub fn h0_indices(&self) -> &[usize] {
        &self.h0_indices
    }

    /// Nonzero-spectrum carrier: eigenvalues of the reduced matrix, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rank_bound(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The full `n × n` product.
    pub fn to_dense(&self) -> Result<SymmetricOperator> {
        if self.basis.ncols() == 0 {
            return Ok(SymmetricOperator::zeros(self.basis.nrows()));
        }
        SymmetricOperator::new(&self.basis * self.reduced.matrix() * self.basis.transpose())
    }

    /// `Σ f(λᵢ)` over the spectrum; requires `f(0) = 0`.
    pub fn trace_function(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let z = f(0.0);
        if z.is_nan() || z.abs() > 1e-14 {
            return Err(LabError::Contract(format!("trace functional needs f(0) = 0, got {z}")));
        }
        let mut acc = 0.0;
        for &v in &self.eigenvalues {
            let y = f(v);
            if !y.is_finite() {
                return Err(LabError::Domain {
                    at: v,
                    detail: format!("f evaluates to {y}"),
                });
            }
            acc += y;
        }
        Ok(acc)
    }

    /// `tr Π^q` with eigenvalues clipped to `[0, 1]`.
    pub fn power_trace(&self, q: f64) -> f64 {
        self.eigenvalues.iter().map(|v| v.clamp(0.0, 1.0).powf(q)).sum()
    }
}

struct Assembly<'a> {
    outer: &'a dyn Fn(f64) -> f64,
    /// `outer` vanishes above this energy.
    outer_support_hi: f64,
    inner: &'a dyn Fn(f64) -> f64,
    /// Value of `inner` above `inner_flat_from`.
    tail: f64,
    inner_flat_from: f64,
}

/// Product operator, its basis, the retained H₀ indices and their eigenvalues.
type Assembled = (SymmetricOperator, DMatrix<f64>, Vec<usize>, Vec<f64>);

fn assemble(h0: &impl EigenBasis, h: &impl EigenBasis, spec: Assembly<'_>) -> Result<Assembled> {
    let n = h0.source_dim();
    if h.source_dim() != n {
        return input(format!("H0 and H act on different spaces ({n} vs {})", h.source_dim()));
    }
    if h0.ceiling() < spec.outer_support_hi {
        return Err(LabError::Contract(format!(
            "H0 eigenpairs are only known up to {}, need {}",
            h0.ceiling(),
            spec.outer_support_hi
        )));
    }
    if h.ceiling() < spec.inner_flat_from {
        return Err(LabError::Contract(format!(
            "H eigenpairs are only known up to {}, need {}",
            h.ceiling(),
            spec.inner_flat_from
        )));
    }
    let (mut sel0, mut d) = (Vec::new(), Vec::new());
    for (j, &mu) in h0.eigenvalues().iter().enumerate() {
        let w = (spec.outer)(mu);
        if w != 0.0 {
            sel0.push(j);
            d.push(w);
        }
    }
    let (mut sel, mut g) = (Vec::new(), Vec::new());
    for (k, &nu) in h.eigenvalues().iter().enumerate() {
        let w = (spec.inner)(nu) - spec.tail;
        if w != 0.0 {
            sel.push(k);
            g.push(w);
        }
    }
    let q0 = h0.eigenvectors();
    let basis = q0.select_columns(&sel0);
    let m = sel0.len();
    if m == 0 {
        return Ok((SymmetricOperator::zeros(1), basis, sel0, vec![0.0]));
    }
    let mut core = DMatrix::<f64>::identity(m, m) * spec.tail;
    if !sel.is_empty() {
        let w = h.eigenvectors().select_columns(&sel);
        let y = basis.transpose() * &w;
        let mut yg = y.clone();
        for (mut col, &gk) in yg.column_iter_mut().zip(&g) {
            col *= gk;
        }
        core += yg * y.transpose();
    }
    let reduced = DMatrix::from_fn(m, m, |i, j| d[i] * core[(i, j)] * d[j]);
    let reduced = SymmetricOperator::new(reduced)?;
    let eigenvalues = reduced.eigenvalues()?;
    let (lo, hi) = (eigenvalues[0], eigenvalues[m - 1]);
    if lo < -RANGE_TOL || hi > 1.0 + RANGE_TOL {
        return Err(numerical(
            "projection product",
            format!("spectrum [{lo:e}, {hi}] leaves [0, 1]; eigenbases are not orthonormal or incomplete"),
        ));
    }
    Ok((reduced, basis, sel0, eigenvalues))
}

fn tie_warnings(values: &[f64], cuts: &[f64], label: &str) -> Vec<String> {
    let mut out = Vec::new();
    for &c in cuts {
        for &v in values {
            if (v - c).abs() <= 1e-9 {
                out.push(format!("{label} eigenvalue {v} within 1e-9 of window endpoint {c}"));
            }
        }
    }
    out
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        input(format!("eps must be positive and finite, got {eps}"))
    }
}

/// `𝟙(−∞, λ*−ε)(H₀) 𝟙(λ*+ε, ∞)(H) 𝟙(−∞, λ*−ε)(H₀)`.
pub fn build_pi1(h0: &impl EigenBasis, h: &impl EigenBasis, lambda_star: f64, eps: f64) -> Result<ProjectionProduct> {
    check_eps(eps)?;
    let below = SpectralWindow::below(lambda_star - eps);
    let above = SpectralWindow::above(lambda_star + eps);
    let outer = |x: f64| below.indicator(x);
    let inner = |x: f64| above.indicator(x);
    let (reduced, basis, idx, eigenvalues) = assemble(
        h0,
        h,
        Assembly {
            outer: &outer,
            outer_support_hi: lambda_star - eps,
            inner: &inner,
            tail: 1.0,
            inner_flat_from: lambda_star + eps + ENDPOINT_TIE_TOL,
        },
    )?;
    let mut warnings = tie_warnings(h0.eigenvalues(), &[lambda_star - eps], "H0");
    warnings.extend(tie_warnings(h.eigenvalues(), &[lambda_star + eps], "H"));
    Ok(ProjectionProduct {
        reduced,
        basis,
        h0_indices: idx,
        eigenvalues,
        lambda_star,
        eps,
        delta: None,
        variant: ProductVariant::Pi1,
        regularizer: None,
        tie_warnings: warnings,
    })
}

/// `ψ⁻(H₀ − λ*) ψ⁺(H − λ*) ψ⁻(H₀ − λ*)`.
pub fn build_pi2(
    h0: &impl EigenBasis,
    h: &impl EigenBasis,
    lambda_star: f64,
    r: &Regularizer,
) -> Result<ProjectionProduct> {
    check_eps(r.eps)?;
    let outer = |x: f64| r.minus(x - lambda_star);
    let inner = |x: f64| r.plus(x - lambda_star);
    let (reduced, basis, idx, eigenvalues) = assemble(
        h0,
        h,
        Assembly {
            outer: &outer,
            outer_support_hi: lambda_star - r.eps,
            inner: &inner,
            tail: 1.0,
            inner_flat_from: lambda_star + r.plus_saturation() + ENDPOINT_TIE_TOL,
        },
    )?;
    let mut warnings = Vec::new();
    if r.shape == RegularizerShape::Step {
        warnings = tie_warnings(h0.eigenvalues(), &[lambda_star - r.eps], "H0");
        warnings.extend(tie_warnings(h.eigenvalues(), &[lambda_star + r.eps], "H"));
    }
    Ok(ProjectionProduct {
        reduced,
        basis,
        h0_indices: idx,
        eigenvalues,
        lambda_star,
        eps: r.eps,
        delta: None,
        variant: ProductVariant::Pi2,
        regularizer: Some(r.shape),
        tie_warnings: warnings,
    })
}

/// `𝟙(λ*−δ, λ*−ε)(H₀) 𝟙(λ*+ε, λ*+δ)(H) 𝟙(λ*−δ, λ*−ε)(H₀)`; `δ = ∞` gives
/// [`build_pi1`].
pub fn build_pi1_windowed(
    h0: &impl EigenBasis,
    h: &impl EigenBasis,
    lambda_star: f64,
    eps: f64,
    delta: f64,
) -> Result<ProjectionProduct> {
    check_eps(eps)?;
    if delta.is_nan() || eps >= delta {
        return input(format!("windowed product needs eps < delta, got ({eps}, {delta})"));
    }
    if delta == f64::INFINITY {
        let mut p = build_pi1(h0, h, lambda_star, eps)?;
        p.delta = Some(delta);
        p.variant = ProductVariant::Pi1Windowed;
        return Ok(p);
    }
    let lower = SpectralWindow::open(lambda_star - delta, lambda_star - eps)?;
    let upper = SpectralWindow::open(lambda_star + eps, lambda_star + delta)?;
    let outer = |x: f64| lower.indicator(x);
    let inner = |x: f64| upper.indicator(x);
    let (reduced, basis, idx, eigenvalues) = assemble(
        h0,
        h,
        Assembly {
            outer: &outer,
            outer_support_hi: lambda_star - eps,
            inner: &inner,
            tail: 0.0,
            inner_flat_from: lambda_star + delta,
        },
    )?;
    let mut warnings = tie_warnings(h0.eigenvalues(), &[lambda_star - delta, lambda_star - eps], "H0");
    warnings.extend(tie_warnings(
        h.eigenvalues(),
        &[lambda_star + eps, lambda_star + delta],
        "H",
    ));
    Ok(ProjectionProduct {
        reduced,
        basis,
        h0_indices: idx,
        eigenvalues,
        lambda_star,
        eps,
        delta: Some(delta),
        variant: ProductVariant::Pi1Windowed,
        regularizer: None,
        tie_warnings: warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigendecompose, eigendecompose_below, spectral_projection};
    use std::f64::consts::PI;

    fn small_system(v: Potential) -> (SymmetricOperator, SymmetricOperator) {
        let g = Grid1D::new(20.0, 200).unwrap();
        build_hamiltonians(&g, &v).unwrap()
    }

    #[test]
    fn free_box_spectrum() {
        let g = Grid1D::new(20.0, 799).unwrap();
        assert!(g.spacing() <= 0.05);
        let (h0, h) = build_hamiltonians(&g, &Potential::Zero).unwrap();
        assert_eq!(h0, h);
        let d = eigendecompose_below(&h0, 3.0).unwrap();
        for k in 1..=20 {
            let exact = (k as f64 * PI / 40.0).powi(2);
            let rel = (d.eigenvalues()[k - 1] - exact).abs() / exact;
            assert!(rel < 0.01, "k = {k}: {rel}");
        }
    }

    #[test]
    fn attractive_well_binds() {
        let (_, h) = small_system(Potential::SquareWell {
            depth: 1.0,
            half_width: 1.0,
        });
        assert!(h.eigenvalues().unwrap()[0] < 0.0);
    }

    #[test]
    fn band_edge_check_suggests_grid() {
        let g = Grid1D::new(300.0, 600).unwrap();
        assert!(g.check_band_edge(0.9).is_ok());
        let err = g.check_band_edge(500.0).unwrap_err().to_string();
        assert!(err.contains("n_points >= 13417"), "{err}");
    }

    #[test]
    fn potential_config_is_tagged() {
        let v: Potential = serde_json::from_str(r#"{"kind":"square_well","depth":2.0,"half_width":1.0}"#).unwrap();
        assert_eq!(
            v,
            Potential::SquareWell {
                depth: 2.0,
                half_width: 1.0
            }
        );
        assert!(serde_json::from_str::<Potential>(r#"{"kind":"square_well","depth":2.0}"#).is_err());
        assert_eq!(v.value(0.999), -2.0);
        assert_eq!(v.value(1.0), 0.0);
    }

    #[test]
    fn regularizer_plateaus() {
        let r = Regularizer::linear(0.1).unwrap();
        assert_eq!(r.plus(0.1), 0.0);
        assert_eq!(r.plus(0.2), 1.0);
        assert!((r.plus(0.15) - 0.5).abs() < 1e-12);
        assert_eq!(r.minus(-0.25), 1.0);
        assert_eq!(r.minus(0.0), 0.0);
    }

    #[test]
    fn free_products_vanish() {
        let (h0, h) = small_system(Potential::Zero);
        let d0 = eigendecompose(&h0).unwrap();
        let d = eigendecompose(&h).unwrap();
        let p = build_pi1(&d0, &d, 1.0, 0.1).unwrap();
        assert!(p.eigenvalues().iter().all(|v| v.abs() < 1e-12));
        let p = build_pi2(&d0, &d, 1.0, &Regularizer::linear(0.1).unwrap()).unwrap();
        assert!(p.eigenvalues().iter().all(|v| v.abs() < 1e-12));
        let p = build_pi1_windowed(&d0, &d, 1.0, 0.1, 0.5).unwrap();
        assert!(p.eigenvalues().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn reduced_form_matches_dense_product() {
        let v = Potential::SquareWell {
            depth: 2.0,
            half_width: 1.0,
        };
        let (h0, h) = small_system(v);
        let d0 = eigendecompose(&h0).unwrap();
        let d = eigendecompose(&h).unwrap();
        let (lam, eps) = (1.0, 0.1);
        let p0 = spectral_projection(&d0, &SpectralWindow::below(lam - eps));
        let q = spectral_projection(&d, &SpectralWindow::above(lam + eps));
        let dense = p0.sandwich(&q).unwrap();
        let prod = build_pi1(&d0, &d, lam, eps).unwrap();
        assert!((prod.to_dense().unwrap().matrix() - dense.matrix()).amax() < 1e-10);
        assert!(prod.power_trace(1.0) > 0.0);

        // partial spectra reproduce the full-basis product
        let l0 = eigendecompose_below(&h0, 2.0).unwrap();
        let l = eigendecompose_below(&h, 2.0).unwrap();
        let partial = build_pi1(&l0, &l, lam, eps).unwrap();
        let a = partial.power_trace(2.0);
        let b = prod.power_trace(2.0);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn insufficient_ceiling_is_a_contract_error() {
        let (h0, h) = small_system(Potential::SquareWell {
            depth: 2.0,
            half_width: 1.0,
        });
        let l0 = eigendecompose_below(&h0, 0.5).unwrap();
        let l = eigendecompose_below(&h, 0.5).unwrap();
        assert!(matches!(build_pi1(&l0, &l, 1.0, 0.1), Err(LabError::Contract(_))));
    }

    #[test]
    fn step_regularizer_reproduces_pi1() {
        let (h0, h) = small_system(Potential::SquareWell {
            depth: 2.0,
            half_width: 1.0,
        });
        let d0 = eigendecompose(&h0).unwrap();
        let d = eigendecompose(&h).unwrap();
        let p1 = build_pi1(&d0, &d, 1.0, 0.1).unwrap();
        let p2 = build_pi2(&d0, &d, 1.0, &Regularizer::new(0.1, RegularizerShape::Step).unwrap()).unwrap();
        assert_eq!(p1.eigenvalues(), p2.eigenvalues());
    }

    #[test]
    fn windowed_limits() {
        let (h0, h) = small_system(Potential::SquareWell {
            depth: 2.0,
            half_width: 1.0,
        });
        let d0 = eigendecompose(&h0).unwrap();
        let d = eigendecompose(&h).unwrap();
        let p = build_pi1(&d0, &d, 1.0, 0.05).unwrap();
        let w = build_pi1_windowed(&d0, &d, 1.0, 0.05, f64::INFINITY).unwrap();
        assert_eq!(p.eigenvalues(), w.eigenvalues());
        assert!(build_pi1_windowed(&d0, &d, 1.0, 0.5, 0.5).is_err());
        let w = build_pi1_windowed(&d0, &d, 1.0, 0.05, 0.5).unwrap();
        let diff = (w.to_dense().unwrap().matrix() - p.to_dense().unwrap().matrix()).clone();
        let sv = diff.singular_values();
        assert!(sv.iter().sum::<f64>().is_finite());
    }
}
