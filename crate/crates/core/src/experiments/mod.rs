//! End-to-end drivers: ε-sweeps with regression against predicted constants,
//! inequality monitors, exact factorization checks, the toy kernel model and
//! the verification suite.

mod checks;
mod report;
mod series;
pub mod suite;
mod system;
mod toy;

pub use checks::{
    factorization_check, localization_check, log_det_one_minus, logdet_experiment, product_difference_spectrum,
    random_gapped_instance, sandwich_check, FactorizedPerturbation, EXACT_SLACK,
};
pub use report::{digest, VerificationReport};
pub use series::{
    epsilon_sweep, predicted_for_amplitudes, Functional, GammaSource, Regression, SeriesPoint, SweepSource,
    TraceSeries, TAIL_POINTS,
};
pub use system::{SchrodingerSystem, SystemConfig};
pub use toy::{toy_kernel_check, ToyFlowModel, HOLDER_SAMPLES, TOY_DIM, TOY_NODES};
