use nalgebra::DMatrix;
use rand::Rng;
use serde_json::json;

use super::report::VerificationReport;
use crate::error::{input, Result};
use crate::hankel::{gamma_moment_constant, OperatorHankel};
use crate::linalg::{schatten_norm_general, symmetric_eigenvalues, SchattenIndex};

/// Gauss–Legendre nodes in the log variable for the λ-quadrature.
pub const TOY_NODES: usize = 200;
/// Samples used to estimate the Hölder constant.
pub const HOLDER_SAMPLES: usize = 64;
/// Default auxiliary dimension.
pub const TOY_DIM: usize = 4;

/// Matrix-valued densities `F′(λ) = F′(0) + λ^κ E` and `F₀′(λ) = F₀′(0) + λ^κ E₀`
/// with positive semidefinite coefficients.
#[derive(Debug, Clone)]
pub struct ToyFlowModel {
    pub kappa: f64,
    pub f_prime_zero: DMatrix<f64>,
    pub f_prime_slope: DMatrix<f64>,
    pub f0_prime_zero: DMatrix<f64>,
    pub f0_prime_slope: DMatrix<f64>,
    pub p: f64,
}

fn random_psd(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let x = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    (&x * x.transpose()) / dim as f64
}

impl ToyFlowModel {
    pub fn new(
        kappa: f64,
        f_prime_zero: DMatrix<f64>,
        f_prime_slope: DMatrix<f64>,
        f0_prime_zero: DMatrix<f64>,
        f0_prime_slope: DMatrix<f64>,
        p: f64,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return input(format!("Hölder exponent must be positive, got {kappa}"));
        }
        SchattenIndex::new(p)?;
        let d = f_prime_zero.nrows();
        for m in [&f_prime_zero, &f_prime_slope, &f0_prime_zero, &f0_prime_slope] {
            if m.nrows() != d || m.ncols() != d {
                return input("all coefficient matrices must share one square shape");
            }
            if (m - m.transpose()).amax() > 1e-12 {
                return input("coefficient matrices must be symmetric");
            }
            let ev = symmetric_eigenvalues(m)?;
            if ev.first().is_some_and(|&v| v < -1e-12) {
                return input("coefficient matrices must be positive semidefinite");
            }
        }
        Ok(Self {
            kappa,
            f_prime_zero,
            f_prime_slope,
            f0_prime_zero,
            f0_prime_slope,
            p,
        })
    }

    pub fn random(rng: &mut impl Rng, dim: usize, kappa: f64, p: f64) -> Result<Self> {
        let a = random_psd(rng, dim);
        let e = random_psd(rng, dim);
        let a0 = random_psd(rng, dim);
        let e0 = random_psd(rng, dim);
        Self::new(kappa, a, e, a0, e0, p)
    }

    pub fn dim(&self) -> usize {
        self.f_prime_zero.nrows()
    }

    pub fn f_prime(&self, lambda: f64) -> DMatrix<f64> {
        &self.f_prime_zero + &self.f_prime_slope * lambda.powf(self.kappa)
    }

    pub fn f0_prime(&self, lambda: f64) -> DMatrix<f64> {
        &self.f0_prime_zero + &self.f0_prime_slope * lambda.powf(self.kappa)
    }

    /// `sup ‖F′(λ) − F′(0)‖ / λ^κ` over log-spaced samples in `[lo, hi]`,
    /// for both families.
    pub fn holder_constant(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = (lo.ln(), hi.ln());
        let mut sup = 0.0f64;
        for k in 0..HOLDER_SAMPLES {
            let lam = (a + (b - a) * k as f64 / (HOLDER_SAMPLES - 1) as f64).exp();
            let scale = lam.powf(self.kappa);
            for (f, z) in [
                (self.f_prime(lam), &self.f_prime_zero),
                (self.f0_prime(lam), &self.f0_prime_zero),
            ] {
                let d = schatten_norm_general(&(f - z), SchattenIndex::Infinity);
                sup = sup.max(d / scale);
            }
        }
        sup
    }
}

fn power_sum(ev: &[f64], p: f64) -> f64 {
    ev.iter().map(|v| v.abs().powf(p)).sum()
}

/// Per-ε measurements for one density family.
fn family_point(
    sample: &dyn Fn(f64) -> DMatrix<f64>,
    zero: &DMatrix<f64>,
    eps: f64,
    delta: f64,
    p: f64,
) -> Result<(f64, f64, f64)> {
    let k = OperatorHankel::sample(sample, eps, delta, TOY_NODES)?;
    let k_pp = power_sum(&symmetric_eigenvalues(&k.matrix()?)?, p);
    let diff = OperatorHankel::sample(|l| sample(l) - zero, eps, delta, TOY_NODES)?;
    let diff_pp = power_sum(&symmetric_eigenvalues(&diff.matrix()?)?, p);
    Ok((k_pp, diff_pp, diff.bound(p)?))
}

/// `‖K_ε − Γ_ε ⊗ F′(0)‖_p` stays bounded along the sweep while `‖K_ε‖_p^p`
/// grows like `|ln ε|`, and never exceeds `π^{p−1}∫‖F′(λ) − F′(0)‖_p^p dλ/(2λ)`.
pub fn toy_kernel_check(model: &ToyFlowModel, eps_list: &[f64], delta: f64) -> Result<VerificationReport> {
    if eps_list.len() < 2 {
        return input("toy sweep needs at least two eps values");
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|&e| !(e > 0.0 && e < delta)) {
        return input("toy eps values must decrease strictly inside (0, delta)");
    }
    let p = model.p;
    let idx = SchattenIndex::new(p)?;
    let inputs = json!({
        "kappa": model.kappa,
        "p": p,
        "dim": model.dim(),
        "eps": eps_list,
        "delta": delta,
        "nodes": TOY_NODES,
    });
    let holder = model.holder_constant(eps_list[eps_list.len() - 1], delta);
    let c_p = gamma_moment_constant(p)?;
    let mut report = VerificationReport::new("toy_kernel", inputs)
        .measured("holder_constant", holder)
        .tolerance("growth_factor", 1.1)
        .tolerance("band", [0.5, 2.0]);
    let mut all_ok = holder.is_finite();
    for (label, zero, sample) in [
        (
            "F'",
            &model.f_prime_zero,
            Box::new(|l| model.f_prime(l)) as Box<dyn Fn(f64) -> DMatrix<f64>>,
        ),
        ("F0'", &model.f0_prime_zero, Box::new(|l| model.f0_prime(l))),
    ] {
        let asymptote = c_p * idx.power_sum(&symmetric_eigenvalues(zero)?);
        let mut rows = Vec::new();
        let mut diffs = Vec::new();
        let mut ok = true;
        for &eps in eps_list {
            let (k_pp, diff_pp, bound_pp) = family_point(&*sample, zero, eps, delta, p)?;
            let ln = eps.ln().abs();
            let band_ratio = k_pp / ln / asymptote;
            let within_bound = diff_pp <= bound_pp * (1.0 + 1e-9) + 1e-14;
            ok &= within_bound && (0.5..=2.0).contains(&band_ratio);
            diffs.push(diff_pp.powf(1.0 / p));
            rows.push(json!({
                "eps": eps,
                "k_norm_pp": k_pp,
                "k_norm_pp_over_ln": k_pp / ln,
                "difference_norm": diff_pp.powf(1.0 / p),
                "explicit_bound_pp": bound_pp,
                "difference_norm_pp": diff_pp,
            }));
        }
        let half = diffs.len().div_ceil(2);
        let cap = 1.1 * diffs[..half].iter().fold(0.0f64, |a, &b| a.max(b));
        ok &= diffs[half..].iter().all(|&d| d <= cap);
        all_ok &= ok;
        report = report
            .measured(label, rows)
            .predicted(&format!("{label}_growth_rate"), asymptote)
            .predicted(&format!("{label}_difference_cap"), cap);
    }
    Ok(report.require(all_ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_density_has_zero_difference() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5]));
        let z = DMatrix::zeros(2, 2);
        let m = ToyFlowModel::new(0.5, a.clone(), z.clone(), a, z, 1.0).unwrap();
        let (_, diff, bound) = family_point(&|l| m.f_prime(l), &m.f_prime_zero, 1e-3, 1.0, 1.0).unwrap();
        assert_eq!(diff, 0.0);
        assert_eq!(bound, 0.0);
        assert_eq!(m.holder_constant(1e-3, 1.0), 0.0);
    }

    #[test]
    fn holder_constant_of_power_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ToyFlowModel::random(&mut rng, 3, 0.5, 2.0).unwrap();
        let e = schatten_norm_general(&m.f_prime_slope, SchattenIndex::Infinity)
            .max(schatten_norm_general(&m.f0_prime_slope, SchattenIndex::Infinity));
        assert!((m.holder_constant(1e-4, 1.0) - e).abs() < 1e-12 * e.max(1.0));
    }

    #[test]
    fn rejects_indefinite_coefficients() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -0.5]));
        let z = DMatrix::zeros(2, 2);
        assert!(ToyFlowModel::new(0.5, a, z.clone(), z.clone(), z, 1.0).is_err());
    }
}
