use fracsnap_core::analysis::{emg_fwhm, emg_pdf, fit_emg, sample_emg, EmgParams, FitOptions, FitResult, Histogram};
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, num, svg};
use crate::plot::{Axes, Series, Style};
use crate::{compute, Artifacts, CliError, Command, Result};

/// Histogram drawn from known EMG parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub mu_ps: f64,
    pub sigma_ps: f64,
    pub tau_ps: f64,
    pub events: usize,
    pub start_ps: f64,
    pub bin_ps: f64,
    pub bins: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { mu_ps: 100.0, sigma_ps: 7.0, tau_ps: 6.0, events: 100_000, start_ps: 40.0, bin_ps: 1.0, bins: 160 }
    }
}

impl SyntheticSpec {
    pub fn params(&self) -> Result<EmgParams> {
        EmgParams::new(self.mu_ps, self.sigma_ps, self.tau_ps, 1.0).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn histogram(&self, seed: u64) -> Result<Histogram> {
        let s = sample_emg(&self.params()?, self.events, seed).map_err(compute)?;
        Histogram::from_samples(&s, self.start_ps, self.bin_ps, self.bins).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitJitterConfig {
    /// `bin_start_ps,count` CSV or `{"edges_ps", "counts"}` JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    /// Used when no histogram is given.
    pub synthetic: SyntheticSpec,
    pub seed: u64,
    pub fit: FitOptions,
}

#[derive(Serialize)]
struct FitSummary<'a> {
    fit: &'a FitResult,
    /// Generating parameters when the histogram is synthetic.
    truth: Option<EmgParams>,
    truth_fwhm_ps: Option<f64>,
    total_counts: u64,
}

/// Fit outputs for one histogram, file names prefixed with `prefix`.
pub(crate) fn fit_artifacts(h: &Histogram, opts: &FitOptions, truth: Option<EmgParams>, prefix: &str, title: &str) -> Result<Artifacts> {
    let f = fit_emg(h, opts).map_err(compute)?;
    let centers = h.centers();
    let w = h.bin_width();
    let model: Vec<f64> = centers.iter().map(|&t| emg_pdf(&f.params, t) * w).collect();
    let mut out = Artifacts::new();
    out.insert(format!("{prefix}histogram.csv"), h.to_csv());
    out.insert(
        format!("{prefix}fit.csv"),
        csv_bytes(
            &["center_ps", "count", "model"],
            centers.iter().zip(&h.counts).zip(&model).map(|((&c, &k), &m)| vec![num(c), k.to_string(), num(m)]),
        ),
    );
    let counts: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
    let series = [
        Series::new("counts", centers.clone(), counts, Style::Scatter),
        Series::new(&format!("EMG fit, FWHM {:.2} ps", f.fwhm_ps), centers, model, Style::Line),
    ];
    out.insert(format!("{prefix}fit.svg"), svg(&series, &Axes::new(title, "delay (ps)", "counts per bin"))?);
    out.json(
        &format!("{prefix}fit.json"),
        &FitSummary { fit: &f, truth, truth_fwhm_ps: truth.as_ref().map(emg_fwhm), total_counts: h.total() },
    )?;
    Ok(out)
}

impl Command for FitJitterConfig {
    fn resolve(&mut self) -> Result<()> {
        if let Some(f) = self.histogram_file.take() {
            if self.histogram.is_some() {
                return Err(CliError::Usage("give either histogram or histogram_file, not both".into()));
            }
            let data = std::fs::read(&f).map_err(|e| CliError::Usage(format!("cannot read histogram {f}: {e}")))?;
            let h = if f.to_ascii_lowercase().ends_with(".json") { Histogram::from_json(&data) } else { Histogram::from_csv(&data) };
            self.histogram = Some(h.map_err(|e| CliError::Usage(format!("{f}: {e}")))?);
        }
        Ok(())
    }

    fn execute(&self) -> Result<Artifacts> {
        let (h, truth) = match &self.histogram {
            Some(h) => {
                h.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                (h.clone(), None)
            }
            None => (self.synthetic.histogram(self.seed)?, Some(self.synthetic.params()?)),
        };
        fit_artifacts(&h, &self.fit, truth, "", "Timing jitter")
    }
}
