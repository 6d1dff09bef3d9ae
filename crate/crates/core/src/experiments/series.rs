use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::system::SchrodingerSystem;
use crate::error::{input, LabError, Result};
use crate::hankel::{counting_slope, gamma_moment_constant, gamma_spectrum, HankelModel};
use crate::scattering::{limit_constant, logdet_closed_form};

/// Scalar functionals `f` with `f(0) = 0` applied to spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `tⁿ`.
    Power(f64),
    /// `𝟙(α, β)(t)` with `0 ≤ α < β`.
    Indicator(f64, f64),
    /// `ln(1 − t)`.
    Log1m,
}

impl Functional {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Functional::Power(q) => t.max(0.0).powf(q),
            Functional::Indicator(a, b) => {
                if t > a && t < b {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::Log1m => (-t.min(1.0)).ln_1p(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Functional::Power(q) if !(q.is_finite() && q >= 1.0) => input(format!("power t^{q} needs exponent >= 1")),
            Functional::Indicator(a, b) if !(a >= 0.0 && b > a) => {
                input(format!("indicator({a},{b}) needs 0 <= alpha < beta"))
            }
            _ => Ok(()),
        }
    }

    /// `Σ f(λᵢ)`.
    pub fn trace(&self, spectrum: &[f64]) -> f64 {
        spectrum.iter().map(|&v| self.eval(v)).sum()
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Power(q) => write!(f, "t^{q}"),
            Functional::Indicator(a, b) => write!(f, "indicator({a},{b})"),
            Functional::Log1m => write!(f, "log1m"),
        }
    }
}

impl FromStr for Functional {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = if s == "log1m" {
            Functional::Log1m
        } else if let Some(q) = s.strip_prefix("t^") {
            Functional::Power(
                q.parse()
                    .map_err(|_| LabError::Input(format!("bad exponent in functional '{s}'")))?,
            )
        } else if let Some(args) = s.strip_prefix("indicator(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').collect();
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| LabError::Input(format!("bad bound in functional '{s}'")))
            };
            if parts.len() != 2 {
                return input(format!("indicator takes two bounds, got '{s}'"));
            }
            Functional::Indicator(num(parts[0])?, num(parts[1])?)
        } else {
            return input(format!(
                "unknown functional '{s}' (expected t^n, indicator(a,b) or log1m)"
            ));
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

impl Serialize for Functional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Least-squares line `value ≈ slope·|ln ε| + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub n_points: usize,
}

impl Regression {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return input(format!("regression needs at least 3 points, got {n}"));
        }
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        if sxx == 0.0 {
            return input("regression abscissae are all equal");
        }
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_residual = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - slope * a - intercept).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            slope,
            intercept,
            max_residual,
            n_points: n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub eps: f64,
    pub ln_eps_abs: f64,
    pub value: f64,
}

/// Number of smallest-ε points used for the headline slope.
pub const TAIL_POINTS: usize = 3;

/// `(ε, tr f)` samples with the slope against `|ln ε|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub functional: Functional,
    pub points: Vec<SeriesPoint>,
    /// Fit over the three smallest ε.
    pub regression: Regression,
    /// Fit over every point.
    pub full_regression: Regression,
    pub predicted_slope: f64,
}

impl TraceSeries {
    pub fn from_points(functional: Functional, points: Vec<SeriesPoint>, predicted_slope: f64) -> Result<Self> {
        if points.len() < TAIL_POINTS {
            return input(format!(
                "a sweep needs at least {TAIL_POINTS} points, got {}",
                points.len()
            ));
        }
        if points.windows(2).any(|p| p[1].eps >= p[0].eps) {
            return input("eps values must be strictly decreasing");
        }
        let xs: Vec<f64> = points.iter().map(|p| p.ln_eps_abs).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
        let k = xs.len() - TAIL_POINTS;
        let regression = Regression::fit(&xs[k..], &ys[k..])?;
        let full_regression = Regression::fit(&xs, &ys)?;
        Ok(Self {
            functional,
            points,
            regression,
            full_regression,
            predicted_slope,
        })
    }

    pub fn slope(&self) -> f64 {
        self.regression.slope
    }

    /// `|slope − predicted| / |predicted|`; absolute when the prediction is 0.
    pub fn relative_error(&self) -> f64 {
        let d = (self.slope() - self.predicted_slope).abs();
        if self.predicted_slope == 0.0 {
            d
        } else {
            d / self.predicted_slope.abs()
        }
    }
}

/// Something that yields a spectrum for each ε and a predicted slope per
/// functional.
pub trait SweepSource {
    fn spectrum(&self, eps: f64) -> Result<Vec<f64>>;
    fn predicted_slope(&self, f: &Functional) -> Result<f64>;
    /// Possibly adjusted ε actually used.
    fn snap(&self, eps: f64) -> f64 {
        eps
    }
}

impl SweepSource for SchrodingerSystem {
    fn spectrum(&self, eps: f64) -> Result<Vec<f64>> {
        Ok(self.pi1(eps)?.eigenvalues().to_vec())
    }

    fn predicted_slope(&self, f: &Functional) -> Result<f64> {
        predicted_for_amplitudes(f, &self.amplitudes)
    }

    fn snap(&self, eps: f64) -> f64 {
        self.snap_eps(eps)
    }
}

/// Limiting coefficient of `|ln ε|` for `tr f(Π)` given scattering amplitudes.
pub fn predicted_for_amplitudes(f: &Functional, amplitudes: &[f64]) -> Result<f64> {
    match *f {
        Functional::Power(_) => Ok(limit_constant(|t| f.eval(t), amplitudes)?.cosh_form),
        Functional::Indicator(a, b) => Ok(amplitudes
            .iter()
            .map(|&amp| band_mass(amp, a) - band_mass(amp, b))
            .sum()),
        Functional::Log1m => Ok(logdet_closed_form(amplitudes)),
    }
}

/// `∫_x^{a²} μ_a = arccosh(a/√x)/π²` for one band, 0 above the band top.
fn band_mass(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x >= a * a {
        0.0
    } else {
        (a / x.sqrt()).acosh() / (std::f64::consts::PI * std::f64::consts::PI)
    }
}

/// The model operator Γ on `(ε, δ)` with log spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSource {
    pub delta: f64,
    pub spacing: f64,
}

impl SweepSource for GammaSource {
    fn spectrum(&self, eps: f64) -> Result<Vec<f64>> {
        gamma_spectrum(&HankelModel::from_spacing(eps, self.delta, self.spacing)?)
    }

    fn predicted_slope(&self, f: &Functional) -> Result<f64> {
        match *f {
            Functional::Power(q) => gamma_moment_constant(q),
            Functional::Indicator(a, b) => Ok(counting_slope(a.max(f64::MIN_POSITIVE)) - counting_slope(b)),
            Functional::Log1m => input("log1m is undefined on the model spectrum, which reaches above 1"),
        }
    }
}

/// Evaluate each functional along a strictly decreasing ε list (at least three
/// points) and regress against `|ln ε|`.
pub fn epsilon_sweep(
    source: &(impl SweepSource + ?Sized),
    f_list: &[Functional],
    eps_list: &[f64],
) -> Result<Vec<TraceSeries>> {
    if eps_list.len() < TAIL_POINTS {
        return input(format!(
            "a sweep needs at least {TAIL_POINTS} eps values, got {}",
            eps_list.len()
        ));
    }
    if eps_list.windows(2).any(|p| p[1] >= p[0]) || eps_list.iter().any(|&e| !(e > 0.0)) {
        return input("eps_list must be positive and strictly decreasing");
    }
    for f in f_list {
        f.validate()?;
    }
    let mut points: Vec<Vec<SeriesPoint>> = vec![Vec::with_capacity(eps_list.len()); f_list.len()];
    for &eps in eps_list {
        let eps = source.snap(eps);
        let spec = source.spectrum(eps)?;
        for (f, pts) in f_list.iter().zip(points.iter_mut()) {
            pts.push(SeriesPoint {
                eps,
                ln_eps_abs: eps.ln().abs(),
                value: f.trace(&spec),
            });
        }
    }
    f_list
        .iter()
        .zip(points)
        .map(|(f, pts)| TraceSeries::from_points(*f, pts, source.predicted_slope(f)?))
        .collect()
}
