//! Model Hankel operators on the half-line and their log-variable images.
//!
//! The Hankel operator with kernel `γ(t) = ∫_ε^δ e^{-tλ} dλ` is unitarily
//! equivalent (away from its kernel) to the window-restricted convolution with
//! `1/(2cosh(x/2))` on `[ln ε, ln δ]`, whose symbol is `π/cosh(πξ)`. Everything
//! here works in that log variable.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, LabError, Result};
use crate::linalg::{eigendecompose, schatten_norm_general, symmetric_eigenvalues, SchattenIndex, SymmetricOperator};
use crate::quadrature::{gauss_legendre_on, integrate_even_real_line};

/// Largest log-grid spacing accepted by [`build_gamma_operator`].
pub const MAX_LOG_SPACING: f64 = 0.05;

/// `(e^{-tε} − e^{-tδ}) / t`, with the limit `δ − ε` at `t = 0`.
pub fn gamma_kernel(t: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(eps.is_finite() && delta.is_finite()) || eps > delta {
        return input(format!("kernel window needs eps <= delta, got ({eps}, {delta})"));
    }
    if t < 0.0 || t.is_nan() {
        return input(format!("kernel argument must be nonnegative, got {t}"));
    }
    if t == 0.0 {
        return Ok(delta - eps);
    }
    // e^{-tε}(1 − e^{-t(δ−ε)}) keeps full precision for small t(δ − ε)
    Ok((-t * eps).exp() * -(-t * (delta - eps)).exp_m1() / t)
}

/// `π / cosh(πξ)`.
pub fn carleman_symbol(xi: f64) -> f64 {
    let c = (PI * xi).cosh();
    if c.is_infinite() {
        0.0
    } else {
        PI / c
    }
}

/// One sample of the Carleman symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSymbolSample {
    pub xi: f64,
    pub value: f64,
}

impl OperatorSymbolSample {
    pub fn at(xi: f64) -> Self {
        Self {
            xi,
            value: carleman_symbol(xi),
        }
    }
}

/// Convolution kernel `1/(2cosh(z/2))` of the log-variable model.
pub fn log_kernel(z: f64) -> f64 {
    let c = (0.5 * z).cosh();
    if c.is_infinite() {
        0.0
    } else {
        0.5 / c
    }
}

/// Γ on the window `(eps, delta)` with a uniform grid of `n_grid` points in
/// `[ln eps, ln delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HankelModel {
    pub eps: f64,
    pub delta: f64,
    pub n_grid: usize,
}

impl HankelModel {
    pub fn new(eps: f64, delta: f64, n_grid: usize) -> Result<Self> {
        if !(eps > 0.0 && delta.is_finite() && eps <= delta) {
            return input(format!("model needs 0 < eps <= delta < ∞, got ({eps}, {delta})"));
        }
        if n_grid < 2 {
            return input(format!("model grid needs at least 2 points, got {n_grid}"));
        }
        Ok(Self { eps, delta, n_grid })
    }

    /// Smallest grid with spacing at most `h`.
    pub fn from_spacing(eps: f64, delta: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return input(format!("spacing must be positive, got {h}"));
        }
        let n = if eps > 0.0 && delta >= eps {
            ((delta / eps).ln() / h).ceil() as usize + 1
        } else {
            2
        };
        Self::new(eps, delta, n.max(2))
    }

    /// `ln(δ/ε)`.
    pub fn log_width(&self) -> f64 {
        (self.delta / self.eps).ln()
    }

    pub fn spacing(&self) -> f64 {
        self.log_width() / (self.n_grid - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let a = self.eps.ln();
        let h = self.spacing();
        (0..self.n_grid).map(|i| a + h * i as f64).collect()
    }

    /// Trapezoid weights (`h`, with `h/2` at both ends).
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_grid];
        w[0] *= 0.5;
        w[self.n_grid - 1] *= 0.5;
        w
    }
}

/// Symmetric quadrature matrix `√(wᵢwⱼ)/(2cosh((uᵢ−uⱼ)/2))`.
pub fn log_kernel_matrix(nodes: &[f64], weights: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| roots[i] * roots[j] * log_kernel(nodes[i] - nodes[j]))
}

/// The discretised model operator. Zero when `eps == delta`.
pub fn build_gamma_operator(m: &HankelModel) -> Result<SymmetricOperator> {
    if m.eps == m.delta {
        return Ok(SymmetricOperator::zeros(1));
    }
    let h = m.spacing();
    if h > MAX_LOG_SPACING {
        let needed = (m.log_width() / MAX_LOG_SPACING).ceil() as usize + 1;
        return input(format!(
            "log-grid spacing {h:.4} exceeds {MAX_LOG_SPACING}; use n_grid >= {needed}"
        ));
    }
    SymmetricOperator::new(log_kernel_matrix(&m.nodes(), &m.weights()))
}

/// Eigenvalues of the discretised model operator, ascending.
pub fn gamma_spectrum(m: &HankelModel) -> Result<Vec<f64>> {
    build_gamma_operator(m)?.eigenvalues()
}

/// `tr Γ^q` with negative eigenvalues clipped at zero.
pub fn gamma_trace_moment(m: &HankelModel, q: f64) -> Result<f64> {
    check_moment_order(q)?;
    Ok(power_trace(&gamma_spectrum(m)?, q))
}

pub(crate) fn power_trace(eigenvalues: &[f64], q: f64) -> f64 {
    eigenvalues.iter().map(|&v| v.max(0.0).powf(q)).sum()
}

fn check_moment_order(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        input(format!("moment order must satisfy q >= 1, got {q}"))
    }
}

/// `(1/2π) ∫ (π/cosh πx)^q dx`.
pub fn gamma_moment_constant(q: f64) -> Result<f64> {
    check_moment_order(q)?;
    let r = integrate_even_real_line(|x| carleman_symbol(x).powf(q), 1e-10)?;
    Ok(r.value / (2.0 * PI))
}

/// `(n/2π²)((n−1)!)² 4ⁿ/(2n)!`, evaluated by a ratio recurrence that stays
/// finite for large `n`.
pub fn pi_moment_constant(n: u32) -> Result<f64> {
    if n == 0 {
        return input("moment order n must be at least 1");
    }
    // r_n = n((n−1)!)² 4ⁿ/(2n)!
    let mut r = 2.0;
    for k in 1..n {
        let k = k as f64;
        r *= 2.0 * k / (2.0 * k + 1.0);
    }
    Ok(r / (2.0 * PI * PI))
}

/// `(1/2π) ∫ cosh(πx)^{-2n} dx` by adaptive quadrature.
pub fn pi_moment_constant_quadrature(n: u32) -> Result<f64> {
    if n == 0 {
        return input("moment order n must be at least 1");
    }
    let r = integrate_even_real_line(|x| (PI * x).cosh().powi(-2 * n as i32), 1e-13)?;
    Ok(r.value / (2.0 * PI))
}

/// Number of model eigenvalues above `tau` and the predicted growth rate
/// `arccosh(π/τ)/π²` of that count in `ln(δ/ε)`.
pub fn gamma_eigen_counting(m: &HankelModel, tau: f64) -> Result<(usize, f64)> {
    if !(tau > 0.0) {
        return input(format!("threshold must be positive, got {tau}"));
    }
    let count = gamma_spectrum(m)?.iter().filter(|&&v| v > tau).count();
    Ok((count, counting_slope(tau)))
}

pub fn counting_slope(tau: f64) -> f64 {
    if tau >= PI {
        0.0
    } else {
        (PI / tau).acosh() / (PI * PI)
    }
}

/// Uniform grid on ln-window `[lo, hi]` for the Laplace transform.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LaplaceGrid {
    /// Zero weights are allowed and switch the corresponding node off.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return input("Laplace grid needs matching, non-empty nodes and weights");
        }
        if nodes.iter().any(|&x| !(x > 0.0 && x.is_finite())) || nodes.windows(2).any(|p| p[0] >= p[1]) {
            return input("Laplace nodes must be positive and strictly increasing");
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return input("Laplace weights must be finite and nonnegative");
        }
        Ok(Self { nodes, weights })
    }

    /// Log-spaced nodes on `[lo, hi]` with trapezoid weights for `dx = x du`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
            return input(format!(
                "log grid needs 0 < lo < hi and count >= 2, got ({lo}, {hi}, {count})"
            ));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / (count - 1) as f64;
        let nodes: Vec<f64> = (0..count).map(|i| (a + h * i as f64).exp()).collect();
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, x)| if i == 0 || i + 1 == count { 0.5 * h * x } else { h * x })
            .collect();
        Self::new(nodes, weights)
    }

    /// `[1e-20, 1e20]` with 1200 nodes.
    pub fn standard() -> Self {
        Self::log_spaced(1e-20, 1e20, 1200).expect("static grid is valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }
}

/// `√(wᵢwⱼ) e^{-xᵢxⱼ}`.
pub fn build_laplace_matrix(g: &LaplaceGrid) -> DMatrix<f64> {
    let n = g.count();
    DMatrix::from_fn(n, n, |i, j| {
        (g.weights[i] * g.weights[j]).sqrt() * (-g.nodes[i] * g.nodes[j]).exp()
    })
}

/// Largest singular value of the discretised Laplace transform.
pub fn laplace_norm(g: &LaplaceGrid) -> f64 {
    schatten_norm_general(&build_laplace_matrix(g), SchattenIndex::Infinity)
}

/// Both sides of the Schatten bound for an operator-valued Hankel operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchattenBoundReport {
    pub q: f64,
    /// `‖K‖_q^q`.
    pub lhs: f64,
    /// `π^{q−1} ∫ ‖σ(λ)‖_q^q dλ/(2λ)`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Log-variable quadrature of an operator-valued Hankel operator
/// `K = L σ L` with `σ` supported on `[lo, hi]`.
///
/// `K` is represented through `σ^{1/2} (M ⊗ I) σ^{1/2}`, which has the same
/// nonzero spectrum; `M` is the log-kernel matrix on Gauss–Legendre nodes.
#[derive(Debug, Clone)]
pub struct OperatorHankel {
    pub log_nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub samples: Vec<DMatrix<f64>>,
    pub block: usize,
}

impl OperatorHankel {
    pub fn sample(sigma: impl Fn(f64) -> DMatrix<f64>, lo: f64, hi: f64, n_nodes: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return input(format!("support window must satisfy 0 < lo < hi < ∞, got ({lo}, {hi})"));
        }
        if n_nodes == 0 {
            return input("need at least one quadrature node");
        }
        let (log_nodes, log_weights) = gauss_legendre_on(lo.ln(), hi.ln(), n_nodes);
        let mut samples = Vec::with_capacity(n_nodes);
        let mut block = None;
        for &u in &log_nodes {
            let lambda = u.exp();
            let s = sigma(lambda);
            if s.nrows() != s.ncols() || s.nrows() == 0 {
                return input(format!("σ({lambda}) is not a non-empty square matrix"));
            }
            if *block.get_or_insert(s.nrows()) != s.nrows() {
                return input("σ changes dimension across the window");
            }
            if let Some(bad) = s.iter().find(|v| !v.is_finite()) {
                return input(format!("σ is unbounded on the window: entry {bad} at λ = {lambda}"));
            }
            let s = SymmetricOperator::new(s)?;
            let floor = -1e-12 * s.max_abs().max(1.0);
            if s.eigenvalues()?[0] < floor {
                return input(format!("σ({lambda}) is not positive semidefinite"));
            }
            samples.push(s.into_matrix());
        }
        Ok(Self {
            log_nodes,
            log_weights,
            samples,
            block: block.unwrap_or(1),
        })
    }

    /// Dense `σ^{1/2} (M ⊗ I) σ^{1/2}`.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        let m = log_kernel_matrix(&self.log_nodes, &self.log_weights);
        let roots = self
            .samples
            .iter()
            .map(crate::linalg::psd_sqrt)
            .collect::<Result<Vec<_>>>()?;
        let d = self.block;
        let n = self.samples.len();
        let mut k = DMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                let blk = &roots[i] * &roots[j] * m[(i, j)];
                k.view_mut((i * d, j * d), (d, d)).copy_from(&blk);
            }
        }
        Ok(k)
    }

    /// `π^{q−1} Σ wᵢ ‖σᵢ‖_q^q / 2`.
    pub fn bound(&self, q: f64) -> Result<f64> {
        let idx = SchattenIndex::new(q)?;
        let mut acc = 0.0;
        for (w, s) in self.log_weights.iter().zip(&self.samples) {
            acc += w * idx.power_sum(&symmetric_eigenvalues(s)?) / 2.0;
        }
        Ok(PI.powf(q - 1.0) * acc)
    }
}

/// Compare `‖K‖_q^q` against `π^{q−1} ∫ ‖σ‖_q^q dλ/(2λ)`.
pub fn hankel_schatten_bound_check(
    sigma: impl Fn(f64) -> DMatrix<f64>,
    lo: f64,
    hi: f64,
    n_nodes: usize,
    q: f64,
) -> Result<SchattenBoundReport> {
    let idx = SchattenIndex::new(q)?;
    if idx == SchattenIndex::Infinity {
        return input("the Schatten bound check needs finite q");
    }
    let op = OperatorHankel::sample(sigma, lo, hi, n_nodes)?;
    let lhs = idx.power_sum(&symmetric_eigenvalues(&op.matrix()?)?);
    let rhs = op.bound(q)?;
    let ratio = if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    };
    Ok(SchattenBoundReport { q, lhs, rhs, ratio })
}

/// `4 ln 2 = ∫ |z| / (2cosh²(z/2)) dz`.
pub fn commutator_bound() -> f64 {
    4.0 * std::f64::consts::LN_2
}

/// Padding of the commutator grid beyond the window, in log units.
const COMMUTATOR_PAD: f64 = 40.0;

/// `‖[P, B]‖₂²` for `P` the indicator of `[ln ε, ln δ]` and `B` the
/// convolution by `1/(2cosh(·/2))`, on a cell-centred grid of spacing
/// `ln(δ/ε)/(n_grid − 1)` padded on both sides. Returns `(value, 4 ln 2)`.
pub fn commutator_hs_check(m: &HankelModel) -> (f64, f64) {
    let bound = commutator_bound();
    let width = m.log_width();
    if width == 0.0 {
        return (0.0, bound);
    }
    let h = m.spacing();
    let inside = m.n_grid - 1;
    let pad = (COMMUTATOR_PAD / h).ceil() as usize;
    // squared kernel by lag, h² K(kh)²
    let total = inside + 2 * pad;
    let lag: Vec<f64> = (0..total).map(|k| (h * log_kernel(h * k as f64)).powi(2)).collect();
    let mut value = 0.0;
    for i in pad..pad + inside {
        for (j, _) in (0..total).enumerate().filter(|&(j, _)| j < pad || j >= pad + inside) {
            value += lag[i.abs_diff(j)];
        }
    }
    (2.0 * value, bound)
}

/// Both sides of `|tr f(PBP) − tr P f(B) P| ≤ ½‖f''‖_∞ ‖PB(1−P)‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaptevSafarovReport {
    pub lhs: f64,
    pub rhs: f64,
    pub second_derivative_sup: f64,
    pub holds: bool,
}

/// Samples used to estimate `‖f''‖_∞` on `[0, ‖B‖]`.
const F2_SAMPLES: usize = 4096;

/// Check the inequality for a projection `P`, symmetric `B` and `f` with
/// `f(0) = 0` and second derivative `f2`.
pub fn laptev_safarov_check(
    p: &SymmetricOperator,
    b: &SymmetricOperator,
    f: impl Fn(f64) -> f64,
    f2: impl Fn(f64) -> f64,
) -> Result<LaptevSafarovReport> {
    let n = p.dim();
    if b.dim() != n {
        return input("projection and operator dimensions differ");
    }
    let pm = p.matrix();
    if (pm * pm - pm).amax() > 1e-9 {
        return input("P is not a projection (‖P² − P‖ > 1e-9)");
    }
    let bm = b.matrix();
    let pbp = SymmetricOperator::new(pm * bm * pm)?;
    let lhs_a = crate::linalg::trace_function(&pbp, &f)?;
    let db = eigendecompose(b)?;
    let fb = crate::linalg::apply_function(&db, &f)?;
    let lhs_b = (pm * fb.matrix() * pm).trace();
    let lhs = (lhs_a - lhs_b).abs();

    let norm_b = db.eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut sup = 0.0f64;
    for k in 0..F2_SAMPLES {
        let t = norm_b * k as f64 / (F2_SAMPLES - 1) as f64;
        for v in [f2(t), f2(-t)] {
            if !v.is_finite() {
                return Err(LabError::Domain {
                    at: t,
                    detail: "second derivative is not finite".into(),
                });
            }
            sup = sup.max(v.abs());
        }
    }
    let off = pm * bm * (DMatrix::<f64>::identity(n, n) - pm);
    let rhs = 0.5 * sup * off.norm_squared();
    Ok(LaptevSafarovReport {
        lhs,
        rhs,
        second_derivative_sup: sup,
        holds: lhs <= rhs + 1e-9,
    })
}

/// One row of a moment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub eps: f64,
    pub delta: f64,
    pub q: f64,
    pub trace: f64,
    /// `trace / ln(δ/ε)`.
    pub trace_over_ln: f64,
    pub predicted_constant: f64,
}

pub const MOMENT_COLUMNS: [&str; 6] = ["eps", "delta", "q", "trace", "trace_over_ln", "predicted_constant"];

impl MomentRow {
    pub fn values(&self) -> [f64; 6] {
        [
            self.eps,
            self.delta,
            self.q,
            self.trace,
            self.trace_over_ln,
            self.predicted_constant,
        ]
    }
}

/// Moment table over `eps_list × q_list` on grids of spacing at most `h`.
pub fn moment_table(eps_list: &[f64], delta: f64, q_list: &[f64], h: f64) -> Result<Vec<MomentRow>> {
    let constants = q_list
        .iter()
        .map(|&q| gamma_moment_constant(q))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(eps_list.len() * q_list.len());
    for &eps in eps_list {
        let model = HankelModel::from_spacing(eps, delta, h)?;
        let spectrum = gamma_spectrum(&model)?;
        let width = model.log_width();
        for (&q, &c) in q_list.iter().zip(&constants) {
            let trace = power_trace(&spectrum, q);
            rows.push(MomentRow {
                eps,
                delta,
                q,
                trace,
                trace_over_ln: if width > 0.0 { trace / width } else { 0.0 },
                predicted_constant: c,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_values() {
        assert_abs_diff_eq!(gamma_kernel(0.0, 1.0, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_kernel(1e-300, 1.0, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        let exact = (-1f64).exp() - (-2f64).exp();
        assert_abs_diff_eq!(gamma_kernel(1.0, 1.0, 2.0).unwrap(), exact, epsilon = 1e-15);
        assert_abs_diff_eq!(exact, 0.232544, epsilon = 1e-6);
        assert_eq!(gamma_kernel(3.0, 0.5, 0.5).unwrap(), 0.0);
        assert!(gamma_kernel(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn symbol_values() {
        assert_eq!(carleman_symbol(0.0), PI);
        assert_abs_diff_eq!(carleman_symbol(1.0), 0.2710150, epsilon = 1e-7);
        assert_eq!(carleman_symbol(1e6), 0.0);
        assert_eq!(carleman_symbol(-1e6), 0.0);
        assert_eq!(OperatorSymbolSample::at(0.0).value, PI);
    }

    #[test]
    fn trapezoid_trace_is_exact() {
        let m = HankelModel::from_spacing(1e-6, 1.0, 0.05).unwrap();
        let g = build_gamma_operator(&m).unwrap();
        assert_abs_diff_eq!(g.trace(), 0.5 * 1e6f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(gamma_trace_moment(&m, 1.0).unwrap(), 6.907755, epsilon = 1e-3);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let m = HankelModel::new(1e-6, 1.0, 10).unwrap();
        let err = build_gamma_operator(&m).unwrap_err().to_string();
        assert!(err.contains("n_grid >= 278"), "{err}");
    }

    #[test]
    fn empty_window_is_zero() {
        let m = HankelModel::new(0.5, 0.5, 2).unwrap();
        assert_eq!(build_gamma_operator(&m).unwrap().max_abs(), 0.0);
        assert_eq!(commutator_hs_check(&m).0, 0.0);
    }

    #[test]
    fn spectrum_within_symbol_bounds() {
        let m = HankelModel::from_spacing(1e-4, 1.0, 0.02).unwrap();
        let ev = gamma_spectrum(&m).unwrap();
        assert!(ev[0] >= -1e-10);
        assert!(*ev.last().unwrap() <= PI + 1e-6);
    }

    #[test]
    fn moment_constants() {
        assert_abs_diff_eq!(gamma_moment_constant(1.0).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma_moment_constant(2.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma_moment_constant(3.0).unwrap(), PI * PI / 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma_moment_constant(4.0).unwrap(), 2.0 * PI * PI / 3.0, epsilon = 1e-9);
        assert!(gamma_moment_constant(0.5).is_err());
    }

    #[test]
    fn pi_moments() {
        assert_abs_diff_eq!(pi_moment_constant(1).unwrap(), 1.0 / (PI * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(pi_moment_constant(2).unwrap(), 2.0 / (3.0 * PI * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(pi_moment_constant(3).unwrap(), 0.0540380, epsilon = 1e-7);
        for n in 1..=8 {
            let closed = pi_moment_constant(n).unwrap();
            let quad = pi_moment_constant_quadrature(n).unwrap();
            assert_abs_diff_eq!(closed, quad, epsilon = 1e-10);
        }
        assert!(pi_moment_constant(400).unwrap().is_finite());
        assert!(pi_moment_constant(0).is_err());
    }

    #[test]
    fn counting_slope_values() {
        let tau = PI / (PI / 2.0).cosh();
        assert_abs_diff_eq!(counting_slope(tau), 1.0 / (2.0 * PI), epsilon = 1e-12);
        assert!(counting_slope(PI * (1.0 - 1e-12)) < 1e-4);
        assert_eq!(counting_slope(PI), 0.0);
        assert_eq!(counting_slope(4.0), 0.0);
    }

    #[test]
    fn laplace_grid_validation() {
        assert!(LaplaceGrid::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(LaplaceGrid::new(vec![1.0, 2.0], vec![-1.0, 1.0]).is_err());
        let zero = LaplaceGrid::new(vec![0.5, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert_eq!(build_laplace_matrix(&zero).amax(), 0.0);
    }

    #[test]
    fn laptev_safarov_equality_case() {
        let p = SymmetricOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let r = laptev_safarov_check(&p, &b, |t| t * t, |_| 2.0).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-12);
        assert!(r.holds);

        let r = laptev_safarov_check(&SymmetricOperator::identity(2), &b, |t| t * t, |_| 2.0).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-14);

        let not_proj = SymmetricOperator::from_diagonal(&[0.5, 0.0]).unwrap();
        assert!(laptev_safarov_check(&not_proj, &b, |t| t, |_| 0.0).is_err());
    }

    #[test]
    fn scalar_bound_equality_at_q1() {
        let r = hankel_schatten_bound_check(|_| DMatrix::from_element(1, 1, 1.0), 1e-4, 1.0, 120, 1.0).unwrap();
        assert_abs_diff_eq!(r.rhs, 0.5 * 1e4f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-10);
        let r = hankel_schatten_bound_check(|_| DMatrix::zeros(2, 2), 1e-4, 1.0, 40, 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(hankel_schatten_bound_check(|_| DMatrix::from_element(1, 1, f64::INFINITY), 0.1, 1.0, 8, 1.0).is_err());
    }

    #[test]
    fn commutator_values() {
        let m = HankelModel::from_spacing(1e-4, 1.0, 0.05).unwrap();
        let (v, bound) = commutator_hs_check(&m);
        assert_abs_diff_eq!(bound, 2.772589, epsilon = 1e-6);
        assert!(v <= 2.78, "{v}");
        assert!(v > 2.0, "{v}");
    }

    #[test]
    fn moment_rows_have_fixed_schema() {
        let rows = moment_table(&[1e-2, 1e-3], 1.0, &[1.0, 2.0], 0.05).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].values().len(), MOMENT_COLUMNS.len());
        assert_abs_diff_eq!(rows[0].trace_over_ln, 0.5, epsilon = 1e-12);
    }
}
