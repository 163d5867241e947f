//! The Kakutani–Parry nearest-neighbour chain on `ℤ`: kernel, stationary
//! vector, reversibility and cylinder checks, return probabilities, and a
//! decay-exponent diagnostic for products.

mod kernel;
mod montecarlo;
mod stationary;
mod walk;

pub use kernel::{BandedKernel, MarkovChainSpec};
pub use montecarlo::{monte_carlo_returns, MonteCarloEstimate, MonteCarloReport, BATCH};
pub use stationary::{
    check_flip, check_reversible, cylinder_measure, lambda, ln_gamma_ratio, random_words,
    stationary, stationary_report, CylinderMeasure, CylinderWord, FlipReport,
    ReversibilityReport, StationaryReport, StationaryVector, RELATIVE_TOL, RESIDUAL_TOL,
    ROW_SUM_TOL,
};
pub use walk::{
    fit_decay, fit_line, product_conservativity_diagnostic, required_radius,
    return_probabilities, DiagnosticReport, LineFit, ReturnSeries, CAVEAT,
    MIN_DIAGNOSTIC_STEPS, WINDOW_MARGIN,
};
