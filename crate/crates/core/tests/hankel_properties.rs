use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use spectral_lab::experiments::{epsilon_sweep, Functional, GammaSource};
use spectral_lab::hankel::{
    build_laplace_matrix, commutator_hs_check, gamma_eigen_counting, gamma_moment_constant, gamma_spectrum,
    gamma_trace_moment, hankel_schatten_bound_check, laplace_norm, HankelModel, LaplaceGrid,
};
use spectral_lab::linalg::symmetric_eigenvalues;

const SWEEP: [f64; 6] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_stays_in_symbol_range(log_eps in 1.0f64..8.0, delta in 0.5f64..4.0, h in 0.01f64..0.05) {
        let eps = delta * 10f64.powf(-log_eps);
        let m = HankelModel::from_spacing(eps, delta, h).unwrap();
        let ev = gamma_spectrum(&m).unwrap();
        prop_assert!(ev[0] >= -1e-10);
        prop_assert!(ev[ev.len() - 1] <= PI + 1e-6);
        let tr: f64 = ev.iter().sum();
        let width = (delta / eps).ln();
        prop_assert!((tr - 0.5 * width).abs() <= 1e-3 * width);
    }
}

#[test]
fn berezin_lieb_upper_bound() {
    for eps in [1e-3, 1e-5, 1e-8] {
        let m = HankelModel::from_spacing(eps, 1.0, 0.02).unwrap();
        let width = (1.0 / eps).ln();
        for q in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0] {
            let tr = gamma_trace_moment(&m, q).unwrap();
            let bound = width * gamma_moment_constant(q).unwrap() * 1.02;
            assert!(tr <= bound, "eps {eps}, q {q}: {tr} > {bound}");
        }
    }
}

#[test]
fn higher_moment_slopes() {
    let src = GammaSource {
        delta: 1.0,
        spacing: 0.02,
    };
    let series = epsilon_sweep(&src, &[Functional::Power(2.0), Functional::Power(4.0)], &SWEEP).unwrap();
    assert!((series[0].slope() - 1.0).abs() <= 0.02, "{}", series[0].slope());
    let c4 = 2.0 * PI * PI / 3.0;
    assert!((series[1].slope() - c4).abs() <= 0.02 * c4, "{}", series[1].slope());
}

#[test]
fn eigenvalue_counting_rate() {
    let m = HankelModel::from_spacing(1e-8, 1.0, 0.02).unwrap();
    let ln = 1e8f64.ln();
    let (count, slope) = gamma_eigen_counting(&m, PI / (PI / 2.0).cosh()).unwrap();
    assert!((slope - 1.0 / (2.0 * PI)).abs() < 1e-12);
    assert!((count as f64 / ln - slope).abs() <= 0.1 * slope, "{count}");
    for tau in [0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0] {
        let (count, slope) = gamma_eigen_counting(&m, tau).unwrap();
        assert!(
            (count as f64 - slope * ln).abs() <= 2.0,
            "tau {tau}: {count} vs {}",
            slope * ln
        );
    }
}

#[test]
fn laplace_norm_on_wide_grid() {
    let g = LaplaceGrid::standard();
    let n = laplace_norm(&g);
    assert!((n - PI.sqrt()).abs() <= 0.01 * PI.sqrt(), "{n}");
    let l = build_laplace_matrix(&g);
    let top = *symmetric_eigenvalues(&(l.transpose() * &l)).unwrap().last().unwrap();
    assert!((top - PI).abs() <= 0.02 * PI, "{top}");
}

#[test]
fn laplace_norm_on_narrow_grid_falls_short() {
    // Truncating to [1e-6, 1e6] loses the slowly decaying tail of the top
    // singular vector; the deficit is about 2.7%.
    let n = laplace_norm(&LaplaceGrid::log_spaced(1e-6, 1e6, 400).unwrap());
    assert!(n < PI.sqrt() - 0.04 && n > 1.7, "{n}");
}

#[test]
fn commutator_grows_and_saturates() {
    let mut prev = 0.0;
    for eps in [1e-1, 1e-2, 1e-4, 1e-8, 1e-12] {
        let (v, bound) = commutator_hs_check(&HankelModel::from_spacing(eps, 1.0, 0.05).unwrap());
        // Each ε gets its own grid spacing; near saturation the true increment
        // is below that discretization error.
        assert!(v >= prev - 1e-6, "{eps}: {v} < {prev}");
        assert!(v <= bound);
        prev = v;
    }
    assert!(prev > 2.77);
}

#[test]
fn random_block_densities_obey_q2_bound() {
    for seed in 0..10u32 {
        let s = seed as f64;
        let sigma = |l: f64| {
            let r = DMatrix::from_fn(3, 3, |i, j| {
                ((i * 3 + j) as f64 + s).sin() + (l.ln() * (1.0 + s / 7.0)).cos() * (i == j) as u8 as f64
            });
            &r * r.transpose()
        };
        let r = hankel_schatten_bound_check(sigma, 1e-4, 1.0, 48, 2.0).unwrap();
        assert!(r.ratio <= 1.0, "seed {seed}: {}", r.ratio);
    }
}
