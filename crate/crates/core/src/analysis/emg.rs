use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};

/// Gaussian of mean `mu` and width `sigma` convolved with an exponential
/// tail `tau`; times in ps. `amplitude` scales the unit-area density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmgParams {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    pub amplitude: f64,
}

impl EmgParams {
    pub fn new(mu: f64, sigma: f64, tau: f64, amplitude: f64) -> Result<Self> {
        let p = EmgParams { mu, sigma, tau, amplitude };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.tau > 0.0) || !self.mu.is_finite() || !self.sigma.is_finite() || !self.tau.is_finite() {
            return Err(AnalysisError::Params(format!("sigma {} and tau {} must be positive and finite", self.sigma, self.tau)));
        }
        Ok(())
    }
}

/// Scaled complementary error function `exp(z^2) erfc(z)`.
pub fn erfcx(z: f64) -> f64 {
    if z < 5.0 {
        // erfc keeps full relative accuracy here and exp(z^2) stays small
        return (z * z).exp() * libm::erfc(z);
    }
    // continued fraction erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let mut tail = z;
    for k in (1..=60).rev() {
        tail = z + (k as f64 / 2.0) / tail;
    }
    1.0 / (PI.sqrt() * tail)
}

/// Unit-area EMG density times `amplitude`.
pub fn emg_pdf(p: &EmgParams, t: f64) -> f64 {
    let (s, tau) = (p.sigma, p.tau);
    let u = (t - p.mu) / s;
    let z = (s / tau - u) * FRAC_1_SQRT_2;
    let v = if z >= 0.0 {
        // exp(s^2/(2 tau^2) - (t - mu)/tau) erfc(z) rewritten as exp(-u^2/2) erfcx(z)
        (-0.5 * u * u).exp() * erfcx(z)
    } else {
        (0.5 * (s / tau).powi(2) - (t - p.mu) / tau).exp() * libm::erfc(z)
    };
    p.amplitude * v / (2.0 * tau)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Location of the density maximum.
pub fn emg_mode(p: &EmgParams) -> f64 {
    let unit = EmgParams { amplitude: 1.0, ..*p };
    // the mode lies between mu - sigma and mu + tau
    golden_max(|t| emg_pdf(&unit, t), p.mu - p.sigma, p.mu + p.tau + p.sigma, 1e-10 * (p.sigma + p.tau))
}

fn bisect(f: impl Fn(f64) -> bool, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if f(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Full width at half maximum, by bisection on each flank.
pub fn emg_fwhm(p: &EmgParams) -> f64 {
    let unit = EmgParams { amplitude: 1.0, ..*p };
    let mode = emg_mode(&unit);
    let half = 0.5 * emg_pdf(&unit, mode);
    let above = |t: f64| emg_pdf(&unit, t) >= half;
    let span = p.sigma + p.tau;
    let tol = 1e-9 * span;
    let left = bisect(above, mode, mode - 10.0 * span, tol);
    let right = bisect(above, mode, mode + 60.0 * span, tol);
    right - left
}

/// `n` deterministic draws: Gaussian plus exponential.
pub fn sample_emg(p: &EmgParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    let normal = Normal::new(p.mu, p.sigma).map_err(|e| AnalysisError::Params(e.to_string()))?;
    let exp = Exp::new(1.0 / p.tau).map_err(|e| AnalysisError::Params(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng) + exp.sample(&mut rng)).collect())
}

/// Gaussian FWHM factor `2 sqrt(2 ln 2)`.
pub const GAUSS_FWHM: f64 = 2.354_820_045_030_949;
