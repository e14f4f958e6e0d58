use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const LIGHT_SPEED: f64 = 299_792_458.0;

/// Value with a symmetric k = 1 uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Uncertain {
    pub value: f64,
    #[serde(default)]
    pub u: f64,
}

impl Uncertain {
    pub fn new(value: f64, u: f64) -> Self {
        Uncertain { value, u }
    }
}

/// Value with separate k = 1 distances to the lower and upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub u_k1_lo: f64,
    pub u_k1_hi: f64,
}

impl Bounded {
    pub fn lower(&self) -> f64 {
        self.value - self.u_k1_lo
    }

    pub fn upper(&self) -> f64 {
        self.value + self.u_k1_hi
    }
}

/// Photons per second carried by `power_w` at `wavelength_nm`.
pub fn photon_rate(power_w: f64, wavelength_nm: f64) -> Result<f64> {
    if !(power_w >= 0.0) || !(wavelength_nm > 0.0) {
        return Err(AnalysisError::Invalid(format!("power {power_w} W and wavelength {wavelength_nm} nm must be non-negative and positive")));
    }
    Ok(power_w * wavelength_nm * 1e-9 / (PLANCK * LIGHT_SPEED))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeInputs {
    /// Detector count rate, counts/s.
    pub count_rate: f64,
    /// Dark plus background count rate, counts/s.
    #[serde(default)]
    pub false_rate: f64,
    /// Photon rate entering the system fiber, before the corrections below.
    pub photon_rate: f64,
    /// Relative k = 1 uncertainty of `photon_rate`.
    #[serde(default)]
    pub photon_rate_rel_u: f64,
    /// Counting time for the Poisson term; omitted means no counting error.
    #[serde(default)]
    pub integration_time_s: Option<f64>,
    /// Fraction reflected at the fiber end facet; removed from the photon rate.
    #[serde(default)]
    pub end_facet_reflectance: Option<Uncertain>,
    /// Net attenuation applied to `photon_rate`.
    #[serde(default)]
    pub attenuation: Option<Uncertain>,
    /// Further named relative k = 1 uncertainties.
    #[serde(default)]
    pub components: Vec<(String, f64)>,
}

impl SdeInputs {
    pub fn new(count_rate: f64, false_rate: f64, photon_rate: f64) -> Self {
        SdeInputs {
            count_rate,
            false_rate,
            photon_rate,
            photon_rate_rel_u: 0.0,
            integration_time_s: None,
            end_facet_reflectance: None,
            attenuation: None,
            components: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdeResult {
    pub sde: Bounded,
    pub corrected_photon_rate: f64,
    /// Relative contribution of each uncertainty component.
    pub budget: Vec<(String, f64)>,
    /// Corrections that were not supplied.
    pub warnings: Vec<String>,
}

/// `(count - false) / corrected photon rate` with first-order propagation
/// of the relative uncertainties, combined in quadrature.
pub fn compute_sde(inp: &SdeInputs) -> Result<SdeResult> {
    if !(inp.photon_rate > 0.0) {
        return Err(AnalysisError::Invalid(format!("photon rate {} must be positive", inp.photon_rate)));
    }
    if !(inp.count_rate >= 0.0 && inp.false_rate >= 0.0) {
        return Err(AnalysisError::Invalid("rates must be non-negative".into()));
    }
    if inp.count_rate < inp.false_rate {
        return Err(AnalysisError::Rates { count: inp.count_rate, false_rate: inp.false_rate });
    }
    let mut warnings = Vec::new();
    let mut budget = vec![("photon_rate".to_string(), inp.photon_rate_rel_u.abs())];
    let mut rate = inp.photon_rate;
    match inp.end_facet_reflectance {
        Some(r) => {
            if !(0.0..1.0).contains(&r.value) {
                return Err(AnalysisError::Invalid(format!("end-facet reflectance {} outside [0, 1)", r.value)));
            }
            rate *= 1.0 - r.value;
            budget.push(("end_facet_reflectance".into(), r.u.abs() / (1.0 - r.value)));
        }
        None => warnings.push("end_facet_reflectance not supplied; no facet correction applied".into()),
    }
    match inp.attenuation {
        Some(a) => {
            if !(a.value > 0.0) {
                return Err(AnalysisError::Invalid(format!("attenuation {} must be positive", a.value)));
            }
            rate *= a.value;
            budget.push(("attenuation".into(), a.u.abs() / a.value));
        }
        None => warnings.push("attenuation not supplied; photon rate used as given".into()),
    }
    let net = inp.count_rate - inp.false_rate;
    let sde = net / rate;
    if sde > 1.0 {
        return Err(AnalysisError::Invalid(format!("efficiency {sde} exceeds 1; check the photon rate and corrections")));
    }
    if let Some(t) = inp.integration_time_s {
        if !(t > 0.0) {
            return Err(AnalysisError::Invalid(format!("integration time {t} must be positive")));
        }
        // Poisson error on both counted quantities
        let u_net = ((inp.count_rate + inp.false_rate) * t).sqrt() / t;
        budget.push(("counting".into(), if net > 0.0 { u_net / net } else { 0.0 }));
    }
    for (name, u) in &inp.components {
        budget.push((name.clone(), u.abs()));
    }
    let rel = budget.iter().map(|(_, u)| u * u).sum::<f64>().sqrt();
    let u = sde * rel;
    Ok(SdeResult { sde: Bounded { value: sde, u_k1_lo: u, u_k1_hi: u }, corrected_photon_rate: rate, budget, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsResult {
    /// `sde_max / sde_min`; the lower bound is presented clamped at 1.
    pub ps: Bounded,
    /// The two inputs arrived in the wrong order and were swapped.
    pub swapped: bool,
}

/// Polarization sensitivity with bounds from interval propagation of the
/// two k = 1 intervals.
pub fn polarization_sensitivity(sde_max: Uncertain, sde_min: Uncertain) -> Result<PsResult> {
    let (mut hi, mut lo) = (sde_max, sde_min);
    let swapped = hi.value < lo.value;
    if swapped {
        std::mem::swap(&mut hi, &mut lo);
    }
    if !(lo.value > 0.0) || hi.u < 0.0 || lo.u < 0.0 {
        return Err(AnalysisError::Invalid("sde_min must be positive and uncertainties non-negative".into()));
    }
    if !(lo.value - lo.u > 0.0) {
        return Err(AnalysisError::Invalid("sde_min interval reaches zero; ratio unbounded".into()));
    }
    let value = hi.value / lo.value;
    let upper = (hi.value + hi.u) / (lo.value - lo.u);
    let lower = ((hi.value - hi.u) / (lo.value + lo.u)).max(1.0);
    Ok(PsResult { ps: Bounded { value, u_k1_lo: value - lower, u_k1_hi: upper - value }, swapped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdeBudget {
    pub fiber_transmittance: f64,
    pub coupling: f64,
    pub absorptance: f64,
    /// Probability that an absorbed photon produces a count.
    pub p_r: f64,
    pub product: f64,
}

/// Upper bound on the system efficiency as a product of its factors.
pub fn sde_budget(fiber_transmittance: f64, coupling: f64, absorptance: f64, p_r: f64) -> Result<SdeBudget> {
    for (name, v) in [("fiber_transmittance", fiber_transmittance), ("coupling", coupling), ("absorptance", absorptance), ("p_r", p_r)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(AnalysisError::Invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(SdeBudget { fiber_transmittance, coupling, absorptance, p_r, product: fiber_transmittance * coupling * absorptance * p_r })
}

/// Summary record of one operating point; measured values pass through.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub sde: Option<Bounded>,
    pub sde_max: Option<f64>,
    pub sde_min: Option<f64>,
    pub ps: Option<Bounded>,
    pub dcr_cps: Option<f64>,
    pub fcr_cps: Option<f64>,
    pub bias_ua: Option<f64>,
    pub wavelength_nm: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_rate_values() {
        assert_eq!(photon_rate(0.0, 1550.0).unwrap(), 0.0);
        let r = photon_rate(1.261e-13, 1575.0).unwrap();
        assert!((r / 1.0e6 - 1.0).abs() < 1e-3, "{r}");
        let back = r * PLANCK * LIGHT_SPEED / (1575.0e-9);
        assert!((back / 1.261e-13 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sde_arithmetic() {
        let r = compute_sde(&SdeInputs::new(84_000.0, 0.0, 100_000.0)).unwrap();
        assert!((r.sde.value - 0.84).abs() < 1e-12);
        assert_eq!(r.warnings.len(), 2);
        let d = compute_sde(&SdeInputs::new(84_000.0, 0.0, 200_000.0)).unwrap();
        assert_eq!(d.sde.value, r.sde.value / 2.0);
        assert!(compute_sde(&SdeInputs::new(10.0, 20.0, 100.0)).is_err());
    }

    #[test]
    fn ps_examples() {
        let p = polarization_sensitivity(Uncertain::new(0.84, 0.03), Uncertain::new(0.82, 0.03)).unwrap();
        assert!((p.ps.value - 1.0244).abs() < 1e-4);
        assert!(p.ps.lower() <= 1.0 && p.ps.upper() >= 1.08);
        let e = polarization_sensitivity(Uncertain::new(0.85, 0.0), Uncertain::new(0.85, 0.0)).unwrap();
        assert_eq!((e.ps.value, e.ps.lower()), (1.0, 1.0));
        let s = polarization_sensitivity(Uncertain::new(0.82, 0.03), Uncertain::new(0.84, 0.03)).unwrap();
        assert!(s.swapped && s.ps == p.ps);
    }

    #[test]
    fn budget() {
        let b = sde_budget(0.98, 0.99, 0.96, 1.0).unwrap();
        assert!((b.product - 0.931).abs() < 0.001);
        assert_eq!(sde_budget(0.98, 0.0, 0.96, 1.0).unwrap().product, 0.0);
        assert!(sde_budget(1.1, 1.0, 1.0, 1.0).is_err());
    }
}
