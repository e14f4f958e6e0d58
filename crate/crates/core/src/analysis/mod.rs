//! Detector characterization: timing-jitter fits with the exponentially
//! modified Gaussian, photon rates, efficiency and polarization metrics
//! with k = 1 uncertainties.

mod emg;
mod fit;
mod histogram;
mod metrics;

use thiserror::Error;

pub use emg::{emg_fwhm, emg_mode, emg_pdf, erfcx, sample_emg, EmgParams, GAUSS_FWHM};
pub use fit::{fit_emg, FitDiagnostics, FitOptions, FitResult};
pub use histogram::Histogram;
pub use metrics::{
    compute_sde, photon_rate, polarization_sensitivity, sde_budget, Bounded, DetectionMetrics, PsResult,
    SdeBudget, SdeInputs, SdeResult, Uncertain,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid EMG parameters: {0}")]
    Params(String),
    #[error("histogram: {0}")]
    Histogram(String),
    #[error("fit needs at least {need} nonzero bins, found {found}")]
    TooFewBins { need: usize, found: usize },
    #[error("fit did not converge after {iterations} iterations (last mu={mu:.4}, sigma={sigma:.4}, tau={tau:.4})")]
    NonConvergence { iterations: usize, mu: f64, sigma: f64, tau: f64 },
    #[error("count rate {count} below false-count rate {false_rate}")]
    Rates { count: f64, false_rate: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
