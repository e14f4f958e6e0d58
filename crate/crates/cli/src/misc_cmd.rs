use fracsnap_core::analysis::{
    compute_sde, photon_rate, polarization_sensitivity, sde_budget, PsResult, SdeBudget, SdeInputs, SdeResult, Uncertain,
};
use fracsnap_core::coupling::{
    coupling_efficiency, misalignment_budget, monte_carlo_efficiency, offset_sweep, CouplingProblem, MonteCarloEstimate,
};
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, grid, num, svg};
use crate::plot::{Axes, Series, Style};
use crate::{compute, Artifacts, CliError, Command, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleConfig {
    pub mfd_um: f64,
    pub side_um: f64,
    pub offset_um: (f64, f64),
    /// Offset sweep along x up to this value; zero disables it.
    pub sweep_max_um: f64,
    pub sweep_step_um: f64,
    /// Samples for the Monte-Carlo cross-check; zero disables it.
    pub oracle_samples: u64,
    pub seed: u64,
    /// Efficiency for the misalignment budget; omitted to skip it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_target: Option<f64>,
}

impl Default for CoupleConfig {
    fn default() -> Self {
        CoupleConfig {
            mfd_um: 6.8,
            side_um: 10.2,
            offset_um: (0.0, 0.0),
            sweep_max_um: 0.0,
            sweep_step_um: 0.1,
            oracle_samples: 0,
            seed: 1,
            budget_target: None,
        }
    }
}

#[derive(Serialize)]
struct CoupleSummary {
    efficiency: f64,
    monte_carlo: Option<MonteCarloEstimate>,
    /// Deviation of the analytic value from the estimate in standard errors.
    monte_carlo_sigma: Option<f64>,
    misalignment_budget_um: Option<f64>,
}

impl Command for CoupleConfig {
    fn execute(&self) -> Result<Artifacts> {
        let p = CouplingProblem::new(self.mfd_um, self.side_um, self.offset_um).map_err(|e| CliError::Usage(e.to_string()))?;
        let eta = coupling_efficiency(&p);
        let mc = if self.oracle_samples > 0 {
            Some(monte_carlo_efficiency(&p, self.oracle_samples, self.seed).map_err(compute)?)
        } else {
            None
        };
        let sigma = mc.as_ref().map(|m| if m.std_error > 0.0 { (eta - m.efficiency).abs() / m.std_error } else { 0.0 });
        let budget = match self.budget_target {
            Some(t) => Some(misalignment_budget(self.mfd_um, self.side_um, t).map_err(compute)?),
            None => None,
        };
        let mut out = Artifacts::new();
        if self.sweep_max_um > 0.0 {
            let offsets = grid(0.0, self.sweep_max_um, self.sweep_step_um, "offset sweep")?;
            let pts = offset_sweep(self.mfd_um, self.side_um, &offsets).map_err(compute)?;
            out.insert("sweep.csv", csv_bytes(&["offset_um", "efficiency"], pts.iter().map(|&(d, e)| vec![num(d), num(e)])));
            let (x, y) = pts.into_iter().unzip();
            let axes = Axes::new("Coupling efficiency", "offset (µm)", "efficiency");
            out.insert("sweep.svg", svg(&[Series::new(&format!("MFD {} µm", num(self.mfd_um)), x, y, Style::Line)], &axes)?);
        }
        out.json(
            "coupling.json",
            &CoupleSummary { efficiency: eta, monte_carlo: mc, monte_carlo_sigma: sigma, misalignment_budget_um: budget },
        )?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsInputs {
    pub sde_max: Uncertain,
    pub sde_min: Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetInputs {
    pub fiber_transmittance: f64,
    pub coupling: f64,
    pub absorptance: f64,
    #[serde(default = "one")]
    pub p_r: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonInputs {
    pub power_w: f64,
    pub wavelength_nm: f64,
}

/// Each section is optional; at least one must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon: Option<PhotonInputs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sde: Option<SdeInputs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ps: Option<PsInputs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetInputs>,
}

#[derive(Serialize)]
struct Metrics {
    photon_rate_per_s: Option<f64>,
    sde: Option<SdeResult>,
    ps: Option<PsSummary>,
    budget: Option<SdeBudget>,
}

#[derive(Serialize)]
struct PsSummary {
    result: PsResult,
    lower: f64,
    upper: f64,
}

impl Command for SdeConfig {
    fn execute(&self) -> Result<Artifacts> {
        if self.photon.is_none() && self.sde.is_none() && self.ps.is_none() && self.budget.is_none() {
            return Err(CliError::Usage("sde needs at least one of [photon], [sde], [ps], [budget]".into()));
        }
        let m = Metrics {
            photon_rate_per_s: match self.photon {
                Some(p) => Some(photon_rate(p.power_w, p.wavelength_nm).map_err(compute)?),
                None => None,
            },
            sde: match &self.sde {
                Some(s) => Some(compute_sde(s).map_err(compute)?),
                None => None,
            },
            ps: match self.ps {
                Some(p) => {
                    let r = polarization_sensitivity(p.sde_max, p.sde_min).map_err(compute)?;
                    Some(PsSummary { lower: r.ps.lower(), upper: r.ps.upper(), result: r })
                }
                None => None,
            },
            budget: match self.budget {
                Some(b) => Some(sde_budget(b.fiber_transmittance, b.coupling, b.absorptance, b.p_r).map_err(compute)?),
                None => None,
            },
        };
        let mut out = Artifacts::new();
        out.json("metrics.json", &m)?;
        Ok(out)
    }
}
