//! Sweeps on the reference square-well system (box half-length 300, 6000
//! points, λ* = 1).

use std::sync::OnceLock;

use spectral_lab::experiments::{
    epsilon_sweep, localization_check, logdet_experiment, product_difference_spectrum, sandwich_check, Functional,
    SchrodingerSystem, SystemConfig,
};
use spectral_lab::hankel::pi_moment_constant;
use spectral_lab::schrodinger::{Potential, RegularizerShape};

const EPS: [f64; 7] = [0.4, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05];

fn reference() -> &'static SchrodingerSystem {
    static SYS: OnceLock<SchrodingerSystem> = OnceLock::new();
    SYS.get_or_init(|| SchrodingerSystem::build(SystemConfig::reference(), 2.0).unwrap())
}

fn free() -> &'static SchrodingerSystem {
    static SYS: OnceLock<SchrodingerSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        let cfg = SystemConfig {
            potential: Potential::Zero,
            ..SystemConfig::reference()
        };
        SchrodingerSystem::build(cfg, 2.0).unwrap()
    })
}

#[test]
fn free_system_sweep_is_flat() {
    let series = epsilon_sweep(free(), &[Functional::Power(1.0), Functional::Power(2.0)], &EPS).unwrap();
    for s in &series {
        assert_eq!(s.predicted_slope, 0.0);
        assert!(s.points.iter().all(|p| p.value.abs() <= 1e-10));
        assert!(s.slope().abs() <= 1e-10);
    }
    let r = logdet_experiment(free(), &EPS).unwrap();
    assert!(r.pass);
    assert_eq!(r.predicted["logdet_constant"].as_f64(), Some(0.0));
    assert!(r.measured["slope"].as_f64().unwrap().abs() <= 1e-10);
}

#[test]
fn square_well_second_moment_slope() {
    let sys = reference();
    let s = &epsilon_sweep(sys, &[Functional::Power(2.0)], &EPS).unwrap()[0];
    let predicted: f64 = sys.amplitudes.iter().map(|a| a.powi(4)).sum::<f64>() * pi_moment_constant(2).unwrap();
    assert!((s.predicted_slope - predicted).abs() <= 1e-10);
    assert!(s.relative_error() <= 0.2, "slope {} vs {}", s.slope(), predicted);
}

#[test]
fn square_well_moment_slope_ratio() {
    let series = epsilon_sweep(reference(), &[Functional::Power(1.0), Functional::Power(2.0)], &EPS).unwrap();
    let measured = series[1].slope() / series[0].slope();
    let predicted = series[1].predicted_slope / series[0].predicted_slope;
    assert!(
        (measured - predicted).abs() <= 0.15 * predicted,
        "ratio {measured} vs {predicted}"
    );
}

#[test]
fn square_well_first_moment_slope() {
    let s = &epsilon_sweep(reference(), &[Functional::Power(1.0)], &EPS).unwrap()[0];
    assert!(
        s.relative_error() <= 0.2,
        "slope {} vs {}",
        s.slope(),
        s.predicted_slope
    );
    assert!(s.points.iter().all(|p| p.value > 0.0));
}

#[test]
fn square_well_sandwich_is_strict() {
    let r = sandwich_check(reference(), 0.1, &[2.0], RegularizerShape::Linear).unwrap();
    assert!(r.pass);
    let row = &r.measured["traces"][0];
    let (lo, mid, hi) = (
        row["lower"].as_f64().unwrap(),
        row["middle"].as_f64().unwrap(),
        row["upper"].as_f64().unwrap(),
    );
    assert!(lo < mid && mid < hi, "{lo} {mid} {hi}");
}

#[test]
fn free_sandwich_is_zero() {
    let r = sandwich_check(free(), 0.1, &[1.0, 2.0, 3.0], RegularizerShape::Linear).unwrap();
    assert!(r.pass);
}

#[test]
fn windowed_difference_is_recorded() {
    let sys = reference();
    let full = sys.pi1(0.05).unwrap();
    let windowed = sys.pi1_windowed(0.05, 0.5).unwrap();
    let d = product_difference_spectrum(&windowed, &full).unwrap();
    let trace_norm: f64 = d.iter().map(|v| v.abs()).sum();
    assert!(trace_norm.is_finite() && trace_norm > 0.0);
    assert!(full.power_trace(1.0) > 0.0);
}

#[test]
fn localization_ratio_stays_bounded() {
    let r = localization_check(reference(), &[0.2, 0.1, 0.05, 0.025], 0.5, 1.0).unwrap();
    assert!(r.pass, "{}", r.measured);
    let free = localization_check(free(), &[0.2, 0.1], 0.5, 1.0).unwrap();
    assert!(free.measured["points"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["difference_norm_q"].as_f64().unwrap() <= 1e-10));
}

#[test]
fn square_well_logdet_slope_respects_bound() {
    let r = logdet_experiment(reference(), &EPS).unwrap();
    assert!(r.pass, "{} vs {}", r.measured["slope"], r.predicted["slope_bound"]);
}
