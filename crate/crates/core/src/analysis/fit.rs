use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::emg::{emg_fwhm, emg_pdf, EmgParams};
use super::histogram::Histogram;
use super::{AnalysisError, Result};

/// Minimum number of nonzero bins for a fit.
pub const MIN_NONZERO_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when every parameter moves by less than this relative amount.
    pub rel_step_tol: f64,
    /// Lower bound for sigma and tau as a fraction of the bin width.
    pub width_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 500, rel_step_tol: 1e-8, width_floor: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub sigma_pinned: bool,
    pub tau_pinned: bool,
    pub initial: EmgParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: EmgParams,
    pub fwhm_ps: f64,
    pub diagnostics: FitDiagnostics,
}

struct Problem<'a> {
    x: Vec<f64>,
    y: &'a [u64],
    inv_sd: Vec<f64>,
    width: f64,
}

impl Problem<'_> {
    fn model(&self, th: &Vector4<f64>, t: f64) -> f64 {
        let p = EmgParams { mu: th[0], sigma: th[1], tau: th[2], amplitude: th[3] };
        emg_pdf(&p, t) * self.width
    }

    fn residuals(&self, th: &Vector4<f64>) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.y)
            .zip(&self.inv_sd)
            .map(|((&t, &c), &w)| (c as f64 - self.model(th, t)) * w)
            .collect()
    }

    fn cost(&self, th: &Vector4<f64>) -> f64 {
        self.residuals(th).iter().map(|r| r * r).sum()
    }
}

/// Moment estimates: mean, variance and skewness mapped onto the EMG family.
fn initial_guess(h: &Histogram) -> EmgParams {
    let c = h.centers();
    let n = h.total() as f64;
    let mean = c.iter().zip(&h.counts).map(|(&x, &k)| x * k as f64).sum::<f64>() / n;
    let m2 = c.iter().zip(&h.counts).map(|(&x, &k)| (x - mean).powi(2) * k as f64).sum::<f64>() / n;
    let m3 = c.iter().zip(&h.counts).map(|(&x, &k)| (x - mean).powi(3) * k as f64).sum::<f64>() / n;
    let sd = m2.sqrt().max(h.bin_width());
    let skew = m3 / sd.powi(3);
    let tau = if skew > 0.0 { sd * (skew / 2.0).cbrt() } else { 0.1 * sd };
    let tau = tau.min(0.95 * sd);
    let sigma = (sd * sd - tau * tau).max((0.1 * sd).powi(2)).sqrt();
    EmgParams { mu: mean - tau, sigma, tau, amplitude: n }
}

/// Levenberg-Marquardt fit of the EMG to binned counts with Poisson
/// weights `1 / max(count, 1)`.
pub fn fit_emg(h: &Histogram, opts: &FitOptions) -> Result<FitResult> {
    h.validate()?;
    let nonzero = h.counts.iter().filter(|&&c| c > 0).count();
    if nonzero < MIN_NONZERO_BINS {
        return Err(AnalysisError::TooFewBins { need: MIN_NONZERO_BINS, found: nonzero });
    }
    let width = h.bin_width();
    let prob = Problem {
        x: h.centers(),
        y: &h.counts,
        inv_sd: h.counts.iter().map(|&c| 1.0 / (c.max(1) as f64).sqrt()).collect(),
        width,
    };
    let init = initial_guess(h);
    let floor = opts.width_floor * width;
    let clamp = |mut t: Vector4<f64>| {
        t[1] = t[1].max(floor);
        t[2] = t[2].max(floor);
        t[3] = t[3].max(f64::MIN_POSITIVE);
        t
    };
    let mut th = clamp(Vector4::new(init.mu, init.sigma, init.tau, init.amplitude));
    let mut cost = prob.cost(&th);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let r = prob.residuals(&th);
        let scale = [th[1] + th[2], th[1], th[2], th[3]];
        let mut jac = vec![Vector4::zeros(); r.len()];
        for k in 0..4 {
            let step = 1e-6 * scale[k].max(th[k].abs()).max(floor);
            let (mut up, mut dn) = (th, th);
            up[k] += step;
            dn[k] -= step;
            // one-sided at the floors so the density stays defined
            let (dn, span) = if k == 1 || k == 2 { if dn[k] < floor { (th, step) } else { (dn, 2.0 * step) } } else { (dn, 2.0 * step) };
            let (ru, rd) = (prob.residuals(&up), prob.residuals(&dn));
            for i in 0..r.len() {
                // residual is data - model, so the model Jacobian is its negative
                jac[i][k] = -(ru[i] - rd[i]) / span;
            }
        }
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (j, &ri) in jac.iter().zip(&r) {
            jtj += j * j.transpose();
            jtr += j * ri;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let Some(delta) = a.lu().solve(&jtr) else {
                lambda *= 4.0;
                continue;
            };
            let cand = clamp(th + delta);
            let c = prob.cost(&cand);
            if c.is_finite() && c <= cost {
                let rel = (0..4).map(|k| (cand[k] - th[k]).abs() / th[k].abs().max(scale[k]).max(floor)).fold(0.0, f64::max);
                th = cand;
                cost = c;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel < opts.rel_step_tol {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        // no descent direction left: at a minimum to working precision
        if converged || !improved {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AnalysisError::NonConvergence { iterations, mu: th[0], sigma: th[1], tau: th[2] });
    }
    let params = EmgParams { mu: th[0], sigma: th[1], tau: th[2], amplitude: th[3] };
    let dof = (h.counts.len().saturating_sub(4)).max(1) as f64;
    Ok(FitResult {
        params,
        fwhm_ps: emg_fwhm(&params),
        diagnostics: FitDiagnostics {
            iterations,
            chi2: cost,
            reduced_chi2: cost / dof,
            sigma_pinned: th[1] <= floor * (1.0 + 1e-9),
            tau_pinned: th[2] <= floor * (1.0 + 1e-9),
            initial: init,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sample_emg;

    #[test]
    fn recovers_synthetic_parameters() {
        let truth = EmgParams::new(100.0, 7.0, 6.0, 1.0).unwrap();
        let s = sample_emg(&truth, 100_000, 7).unwrap();
        let h = Histogram::from_samples(&s, 40.0, 1.0, 160).unwrap();
        let f = fit_emg(&h, &FitOptions::default()).unwrap();
        let p = f.params;
        for (got, want) in [(p.mu, 100.0), (p.sigma, 7.0), (p.tau, 6.0)] {
            assert!((got / want - 1.0).abs() < 0.03, "{p:?}");
        }
        assert!(!f.diagnostics.sigma_pinned && !f.diagnostics.tau_pinned);
    }

    #[test]
    fn too_few_bins() {
        let h = Histogram::uniform(0.0, 1.0, vec![5; 10]).unwrap();
        assert!(matches!(fit_emg(&h, &FitOptions::default()), Err(AnalysisError::TooFewBins { .. })));
    }
}
