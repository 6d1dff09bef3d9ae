//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its measurements. Run with `--nocapture` to see the lines.

use std::sync::OnceLock;
use std::time::Instant;

use spectral_lab::experiments::suite::{self, CheckFn, SuiteContext};

const SEED: u64 = 20240601;

fn context() -> &'static SuiteContext {
    static CTX: OnceLock<SuiteContext> = OnceLock::new();
    CTX.get_or_init(|| SuiteContext::reference(SEED))
}

/// Runs one check; `budget` is a wall-clock limit in seconds.
fn run(label: &str, check: CheckFn, budget: Option<f64>) {
    let start = Instant::now();
    let report = check(context()).unwrap_or_else(|e| panic!("{label}: check errored: {e}"));
    let secs = start.elapsed().as_secs_f64();
    println!("{label} {} ({secs:.2}s)", report.line());
    println!("  measured:  {}", report.measured);
    println!("  predicted: {}", report.predicted);
    println!("  tolerance: {}", report.tolerance);
    for n in &report.notes {
        println!("  note: {n}");
    }
    if let Some(limit) = budget {
        println!("  runtime budget: {limit}s");
        assert!(secs < limit, "{label} took {secs:.2}s, budget {limit}s");
    }
    assert!(report.pass, "{label} {} failed", report.name);
}

#[test]
fn criterion_01_gamma_moment_slopes() {
    run("01", suite::gamma_moment_slopes, Some(30.0));
}

#[test]
fn criterion_02_gamma_first_moment() {
    run("02", suite::gamma_first_moment, None);
}

#[test]
fn criterion_03_gamma_bounds_and_laplace_norm() {
    run("03", suite::gamma_bounds_and_laplace_norm, None);
}

#[test]
fn criterion_04_laptev_safarov() {
    run("04", suite::laptev_safarov, None);
}

#[test]
fn criterion_05_hankel_schatten_bound() {
    run("05", suite::hankel_schatten_bound, None);
}

#[test]
fn criterion_06_factorization_identity() {
    run("06", suite::factorization_identity, Some(5.0));
}

#[test]
fn criterion_07_scattering_oracle() {
    run("07", suite::scattering_oracle, None);
}

#[test]
fn criterion_08_constant_identities() {
    run("08", suite::constant_identities, None);
}

#[test]
fn criterion_09_end_to_end_slopes() {
    run("09", suite::end_to_end_slopes, Some(600.0));
}

#[test]
fn criterion_10_sandwich_inequalities() {
    run("10", suite::sandwich_inequalities, None);
}

#[test]
fn criterion_11_toy_kernel_approximation() {
    run("11", suite::toy_kernel_approximation, None);
}

#[test]
fn criterion_12_logdet_bound() {
    run("12", suite::logdet_bound, None);
}
