//! Exact Poisson machinery, false-accept/false-reject rates, threshold
//! optimization, the (S, rounds) security sweep, and Monte Carlo histograms.

mod histogram;
mod poisson;
mod rates;
mod sweep;

pub use histogram::{monte_carlo_histogram, Histogram};
pub use poisson::{
    poisson_at_least, poisson_below, poisson_cdf, poisson_pmf, poisson_quantile, poisson_sf,
    sample_poisson,
};
pub use rates::{error_rates, optimal_error_rates, optimal_threshold, ErrorRates};
pub use sweep::{
    default_rounds_values, default_s_values, log_spaced, sweep_security, SweepCell, SweepGrid,
    SweepParams,
};
