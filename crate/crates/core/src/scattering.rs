//! One-dimensional scattering: transfer matrices, the 2×2 S-matrix, its
//! eigenphases and the limiting spectral density built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, numerical, LabError, Result};
use crate::hankel::pi_moment_constant;
use crate::quadrature::{integrate, integrate_even_real_line};
use crate::schrodinger::Potential;

/// Tolerance on `‖S*S − I‖_max`.
pub const UNITARITY_TOL: f64 = 1e-9;

/// Successive S-matrices closer than this end the step refinement.
const REFINE_TOL: f64 = 1e-10;
const INITIAL_STEP: f64 = 0.01;
const MAX_REFINEMENTS: usize = 10;

type C2 = [[Complex64; 2]; 2];
type R2 = [[f64; 2]; 2];

fn mul_r(a: &R2, b: &R2) -> R2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mul_c(a: &C2, b: &C2) -> C2 {
    let z = Complex64::new(0.0, 0.0);
    let mut c = [[z; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Propagator of `(ψ, ψ')` across a cell of length `len` where `ψ'' = (v − k²)ψ`.
fn cell(len: f64, v: f64, k2: f64) -> R2 {
    let q2 = k2 - v;
    if q2 > 0.0 {
        let q = q2.sqrt();
        let (s, c) = (q * len).sin_cos();
        [[c, s / q], [-q * s, c]]
    } else if q2 < 0.0 {
        let kap = (-q2).sqrt();
        let (s, c) = ((kap * len).sinh(), (kap * len).cosh());
        [[c, s / kap], [kap * s, c]]
    } else {
        [[1.0, len], [0.0, 1.0]]
    }
}

/// Transmission and reflection amplitudes at wavenumber `k` for a
/// piecewise-constant potential starting at `x0`.
fn amplitudes(segments: &[(f64, f64)], x0: f64, k: f64) -> (Complex64, Complex64, Complex64) {
    let k2 = k * k;
    let mut m: R2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut x1 = x0;
    for &(len, v) in segments {
        m = mul_r(&cell(len, v, k2), &m);
        x1 += len;
    }
    let i = Complex64::i();
    // (ψ, ψ') = P(x)(A, B) for ψ = A e^{ikx} + B e^{-ikx}
    let p = |x: f64| -> C2 {
        let e = (i * k * x).exp();
        let f = (-i * k * x).exp();
        [[e, f], [i * k * e, -i * k * f]]
    };
    let p_inv = |x: f64| -> C2 {
        let e = (i * k * x).exp();
        let f = (-i * k * x).exp();
        let det = -2.0 * i * k;
        [[-i * k * f / det, -f / det], [-i * k * e / det, e / det]]
    };
    let mc: C2 = [
        [Complex64::from(m[0][0]), Complex64::from(m[0][1])],
        [Complex64::from(m[1][0]), Complex64::from(m[1][1])],
    ];
    let t_mat = mul_c(&mul_c(&p_inv(x1), &mc), &p(x0));
    let t = 1.0 / t_mat[1][1];
    let r = -t_mat[1][0] / t_mat[1][1];
    let r_right = t_mat[0][1] / t_mat[1][1];
    (t, r, r_right)
}

/// S-matrix data at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub lambda: f64,
    /// `[[t, r'], [r, t]]`.
    pub s_matrix: C2,
    /// Eigenphases in `(−π, π]`, ordered by descending amplitude.
    pub eigenphases: [f64; 2],
    /// `|sin(θ/2)|`, descending.
    pub amplitudes: [f64; 2],
    pub unitarity_defect: f64,
}

impl ScatteringData {
    pub fn transmission(&self) -> Complex64 {
        self.s_matrix[0][0]
    }

    pub fn reflection(&self) -> Complex64 {
        self.s_matrix[1][0]
    }
}

pub fn unitarity_defect(s: &C2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for row in s.iter() {
                acc += row[i].conj() * row[j];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

fn s_matrix_at(segments: &[(f64, f64)], x0: f64, k: f64) -> C2 {
    let (t, r, rp) = amplitudes(segments, x0, k);
    [[t, rp], [r, t]]
}

fn max_diff(a: &C2, b: &C2) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

fn combine(a: &C2, b: &C2, fa: f64, fb: f64) -> C2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][j] * fa + b[i][j] * fb;
        }
    }
    out
}

/// Halves the cell width and extrapolates in even powers of the step until
/// successive diagonal estimates agree to `REFINE_TOL`.
fn romberg_smatrix(v: &Potential, x0: f64, k: f64, lambda: f64) -> Result<C2> {
    let mut step = INITIAL_STEP;
    let mut row = vec![s_matrix_at(&v.segments(step), x0, k)];
    for _ in 0..MAX_REFINEMENTS {
        step *= 0.5;
        let mut next = vec![s_matrix_at(&v.segments(step), x0, k)];
        let mut factor = 1.0;
        for prev in &row {
            factor *= 4.0;
            let last = next[next.len() - 1];
            next.push(combine(&last, prev, factor / (factor - 1.0), -1.0 / (factor - 1.0)));
        }
        let change = max_diff(&next[next.len() - 1], &row[row.len() - 1]);
        row = next;
        if change <= REFINE_TOL {
            return Ok(row[row.len() - 1]);
        }
    }
    Err(numerical(
        "transfer matrix",
        format!("S-matrix did not settle at λ = {lambda} down to step {step:e}"),
    ))
}

/// S-matrix of `V` at energy `λ = k²` from transfer matrices across the
/// support of `V`. Smooth potentials are resampled on halved cells with
/// Richardson extrapolation until the S-matrix settles.
pub fn transfer_matrix_smatrix(v: &Potential, lambda: f64) -> Result<ScatteringData> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return input(format!("energy must be positive, got {lambda}"));
    }
    v.validate()?;
    let k = lambda.sqrt();
    let x0 = -v.support_radius();
    let s = match v {
        Potential::Zero | Potential::SquareWell { .. } => s_matrix_at(&v.segments(INITIAL_STEP), x0, k),
        Potential::Gaussian { .. } => romberg_smatrix(v, x0, k, lambda)?,
    };
    let defect = unitarity_defect(&s);
    if !(defect <= UNITARITY_TOL) {
        return Err(numerical(
            "transfer matrix",
            format!("S-matrix unitarity defect {defect:e} at λ = {lambda}"),
        ));
    }
    let (theta, a) = eigenphases(&s);
    Ok(ScatteringData {
        lambda,
        s_matrix: s,
        eigenphases: theta,
        amplitudes: a,
        unitarity_defect: defect,
    })
}

/// Eigenphases `θ` and amplitudes `|sin(θ/2)|` of a 2×2 unitary matrix,
/// ordered by descending amplitude.
pub fn eigenphases(s: &C2) -> ([f64; 2], [f64; 2]) {
    let tr = s[0][0] + s[1][1];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let mut pairs: Vec<(f64, f64)> = [(tr + disc) * 0.5, (tr - disc) * 0.5]
        .iter()
        .map(|z| {
            let theta = z.arg();
            (theta, (0.5 * theta).sin().abs())
        })
        .collect();
    pairs.sort_by(|x, y| y.1.total_cmp(&x.1));
    ([pairs[0].0, pairs[1].0], [pairs[0].1, pairs[1].1])
}

/// Amplitudes from eigenphases.
pub fn amplitudes_from_phases(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| (0.5 * t).sin().abs()).collect()
}

fn check_amplitudes(a: &[f64]) -> Result<()> {
    match a.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        Some(bad) => input(format!("amplitudes must lie in [0, 1], got {bad}")),
        None => Ok(()),
    }
}

/// `(1/2π²) Σ 𝟙(0, a²)(t) / (t √(1 − t/a²))`; points within `1e-12` of a band
/// top contribute nothing.
pub fn limit_density(amplitudes: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(LabError::Domain {
            at: t,
            detail: "density is defined on (0, 1)".into(),
        });
    }
    check_amplitudes(amplitudes)?;
    let mut acc = 0.0;
    for &a in amplitudes {
        let top = a * a;
        if t < top - 1e-12 {
            acc += 1.0 / (t * (1.0 - t / top).sqrt());
        }
    }
    Ok(acc / (2.0 * PI * PI))
}

/// The two equal expressions of the limiting constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstant {
    /// `(1/2π) Σ ∫ f(a²/cosh²(πx)) dx`.
    pub cosh_form: f64,
    /// `∫₀¹ f μ`.
    pub density_form: f64,
}

/// `(1/2π) Σ ∫ f(a²/cosh²(πx)) dx` and `∫₀¹ f μ`, each to `1e-10`.
pub fn limit_constant(f: impl Fn(f64) -> f64, amplitudes: &[f64]) -> Result<LimitConstant> {
    check_amplitudes(amplitudes)?;
    let z = f(0.0);
    if z.is_nan() || z.abs() > 1e-14 {
        return Err(LabError::Contract(format!("limit constant needs f(0) = 0, got {z}")));
    }
    let mut cosh_form = 0.0;
    let mut density_form = 0.0;
    for &a in amplitudes {
        if a == 0.0 {
            continue;
        }
        let a2 = a * a;
        let c = integrate_even_real_line(
            |x| {
                let ch = (PI * x).cosh();
                if ch.is_infinite() {
                    0.0
                } else {
                    f(a2 / (ch * ch))
                }
            },
            1e-10,
        )?;
        cosh_form += c.value / (2.0 * PI);
        // t = a²(1 − s²) removes the band-top singularity
        let d = integrate(
            |s| {
                let u = 1.0 - s * s;
                if u <= 0.0 {
                    return 0.0;
                }
                2.0 * f(a2 * u) / u
            },
            0.0,
            1.0,
            1e-10,
            0.0,
        )?;
        density_form += d.value / (2.0 * PI * PI);
    }
    Ok(LimitConstant {
        cosh_form,
        density_form,
    })
}

/// `Σ a^{2n} · (1/2π)∫cosh(πx)^{-2n} dx`, the constant for `f(t) = tⁿ`.
pub fn power_limit_constant(amplitudes: &[f64], n: u32) -> Result<f64> {
    check_amplitudes(amplitudes)?;
    let c = pi_moment_constant(n)?;
    Ok(amplitudes.iter().map(|a| a.powi(2 * n as i32)).sum::<f64>() * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogdetConstant {
    /// `(1/2π) Σ ∫ ln(1 − a²/cosh²(πx)) dx`.
    pub quadrature: f64,
    /// `−(1/π²) Σ arcsin² a`.
    pub closed_form: f64,
}

pub fn logdet_constant(amplitudes: &[f64]) -> Result<LogdetConstant> {
    check_amplitudes(amplitudes)?;
    let mut quadrature = 0.0;
    for &a in amplitudes {
        if a == 0.0 {
            continue;
        }
        let gap = (1.0 - a) * (1.0 + a);
        // 1 − a²/cosh² = (sinh² + 1 − a²)/cosh², free of cancellation near x = 0
        let r = integrate_even_real_line(
            |x| {
                let y = PI * x;
                if y > 350.0 {
                    return 0.0;
                }
                let (sh, ch) = (y.sinh(), y.cosh());
                (sh * sh + gap).ln() - 2.0 * ch.ln()
            },
            1e-11,
        )?;
        quadrature += r.value / (2.0 * PI);
    }
    Ok(LogdetConstant {
        quadrature,
        closed_form: logdet_closed_form(amplitudes),
    })
}

pub fn logdet_closed_form(amplitudes: &[f64]) -> f64 {
    -amplitudes.iter().map(|a| a.asin().powi(2)).sum::<f64>() / (PI * PI)
}

/// `−Σₙ (1/n) a^{2n} c_n` over the first `terms` powers, `c_n` the moment
/// constant for `tⁿ`.
pub fn logdet_series(a: f64, terms: u32) -> Result<f64> {
    let mut acc = 0.0;
    for n in 1..=terms {
        acc += a.powi(2 * n as i32) * pi_moment_constant(n)? / n as f64;
    }
    Ok(-acc)
}

/// One row of the scattering table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringRow {
    pub lambda: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub a1: f64,
    pub a2: f64,
    pub logdet_constant: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_3: f64,
}

pub const SCATTERING_COLUMNS: [&str; 9] = [
    "lambda",
    "theta1",
    "theta2",
    "a1",
    "a2",
    "logdet_constant",
    "delta_1",
    "delta_2",
    "delta_3",
];

impl ScatteringRow {
    pub fn at(v: &Potential, lambda: f64) -> Result<Self> {
        let s = transfer_matrix_smatrix(v, lambda)?;
        let a = s.amplitudes;
        let moment = |n: i32| limit_constant(|t| t.powi(n), &a).map(|c| c.cosh_form);
        Ok(Self {
            lambda,
            theta1: s.eigenphases[0],
            theta2: s.eigenphases[1],
            a1: a[0],
            a2: a[1],
            logdet_constant: logdet_closed_form(&a),
            delta_1: moment(1)?,
            delta_2: moment(2)?,
            delta_3: moment(3)?,
        })
    }

    pub fn values(&self) -> [f64; 9] {
        [
            self.lambda,
            self.theta1,
            self.theta2,
            self.a1,
            self.a2,
            self.logdet_constant,
            self.delta_1,
            self.delta_2,
            self.delta_3,
        ]
    }
}

/// `|t|²` for the well `−V₀` on `|x| < a`.
pub fn square_well_transmission(depth: f64, half_width: f64, lambda: f64) -> f64 {
    let k2 = lambda;
    let kp2 = k2 + depth;
    let s = if kp2 > 0.0 {
        (2.0 * kp2.sqrt() * half_width).sin()
    } else {
        // evanescent inside: sin → i·sinh
        (2.0 * (-kp2).sqrt() * half_width).sinh()
    };
    let sign = if kp2 > 0.0 { 1.0 } else { -1.0 };
    1.0 / (1.0 + sign * depth * depth / (4.0 * k2 * kp2) * s * s)
}
