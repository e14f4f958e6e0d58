//! Figure pipelines kept as regression anchors.

use fracsnap_core::analysis::{emg_fwhm, EmgParams, FitOptions, Histogram};
use fracsnap_core::current::{sweep_fill_factor, SweepPoint, UnitOptions, DEFAULT_XI_NM};
use fracsnap_core::geometry::PathKind;
use fracsnap_core::optics::{
    design_stack, device_absorptance, device_point, optimize_stack, reference_stack, spectrum_csv, FractalMixing, FreeParam,
    GratingKind, MaterialLibrary, OptimizeOptions, Polarization, StackDesign, POLARIZATION_WAVELENGTHS_NM,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::jitter_cmd::{fit_artifacts, SyntheticSpec};
use crate::optics_cmd::{field_artifacts, spectrum_svg, summarize};
use crate::output::{csv_bytes, grid, num, svg};
use crate::plot::{Axes, Series, Style};
use crate::{compute, Artifacts, CliError, Command, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1aConfig {
    pub device: GratingKind,
    pub fill_factor: f64,
    pub wavelength_nm: f64,
    pub z_step_nm: f64,
    pub margin_nm: f64,
}

impl Default for Fig1aConfig {
    fn default() -> Self {
        Fig1aConfig { device: GratingKind::Fractal, fill_factor: 0.31, wavelength_nm: 1550.0, z_step_nm: 1.0, margin_nm: 300.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1eConfig {
    pub width_nm: f64,
    pub fill_factors: Vec<f64>,
    pub xi_nm: f64,
    /// Grid cells across the wire width.
    pub cells_per_width: f64,
    pub tol: f64,
}

impl Default for Fig1eConfig {
    fn default() -> Self {
        Fig1eConfig { width_nm: 40.0, fill_factors: vec![0.2, 0.25, 0.31, 0.4, 0.5], xi_nm: DEFAULT_XI_NM, cells_per_width: 10.0, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1fConfig {
    pub fill_factor: f64,
    pub lambda_start_nm: f64,
    pub lambda_stop_nm: f64,
    pub lambda_step_nm: f64,
    pub mixing: FractalMixing,
}

impl Default for Fig1fConfig {
    fn default() -> Self {
        Fig1fConfig { fill_factor: 0.31, lambda_start_nm: 1300.0, lambda_stop_nm: 1800.0, lambda_step_nm: 1.0, mixing: FractalMixing::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Config {
    pub wavelengths_nm: Vec<f64>,
    /// Cavity template; `kind` is replaced by each device in turn.
    pub design: StackDesign,
    /// Defect search window as multiples of the half-wave thickness.
    pub defect_window: (f64, f64),
    pub mixing: FractalMixing,
    pub options: OptimizeOptions,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Fig4Config {
            wavelengths_nm: POLARIZATION_WAVELENGTHS_NM.to_vec(),
            design: StackDesign::default(),
            defect_window: (0.5, 1.5),
            mixing: FractalMixing::default(),
            options: OptimizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterDemo {
    pub name: String,
    /// FWHM of the generating distribution, ps.
    pub fwhm_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JitterConfig {
    pub demos: Vec<JitterDemo>,
    pub tau_over_sigma: f64,
    pub mu_ps: f64,
    pub events: usize,
    pub bin_ps: f64,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for JitterConfig {
    fn default() -> Self {
        JitterConfig {
            demos: vec![
                JitterDemo { name: "a".into(), fwhm_ps: 20.8 },
                JitterDemo { name: "b".into(), fwhm_ps: 25.6 },
            ],
            tau_over_sigma: 0.6,
            mu_ps: 100.0,
            events: 100_000,
            bin_ps: 1.0,
            seed: 7,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceConfig {
    /// Pipeline name, taken from the command line.
    pub target: String,
    pub fig1a: Fig1aConfig,
    pub fig1e: Fig1eConfig,
    pub fig1f: Fig1fConfig,
    pub fig4: Fig4Config,
    pub jitter: JitterConfig,
}

impl Command for ReproduceConfig {
    fn execute(&self) -> Result<Artifacts> {
        let mut out = Artifacts::new();
        let all = self.target == "all";
        let known = ["fig1a", "fig1e", "fig1f", "fig4", "jitter", "all"];
        if !known.contains(&self.target.as_str()) {
            return Err(CliError::Usage(format!("unknown target '{}'", self.target)));
        }
        let lib = MaterialLibrary::builtin();
        if all || self.target == "fig1a" {
            out.extend(fig1a(&self.fig1a, &lib)?);
        }
        if all || self.target == "fig1e" {
            out.extend(fig1e(&self.fig1e)?);
        }
        if all || self.target == "fig1f" {
            out.extend(fig1f(&self.fig1f, &lib)?);
        }
        if all || self.target == "fig4" {
            out.extend(fig4(&self.fig4, &lib)?);
        }
        if all || self.target == "jitter" {
            out.extend(jitter(&self.jitter)?);
        }
        Ok(out)
    }
}

fn fig1a(c: &Fig1aConfig, lib: &MaterialLibrary) -> Result<Artifacts> {
    let stack = reference_stack(c.device, c.fill_factor);
    field_artifacts(&stack, lib, c.wavelength_nm, c.z_step_nm, c.margin_nm, "fig1a_")
}

/// Allowed excess of the arced ratio over the meander ratio. The two share
/// the same U-turn shape, so their difference is grid-alignment noise.
pub const ARCED_MEANDER_TOLERANCE: f64 = 0.05;

const UNIT_KINDS: [PathKind; 3] = [PathKind::Meander, PathKind::StandardFractal, PathKind::ArcedFractal];

#[derive(Serialize)]
struct Fig1eRow {
    fill_factor: f64,
    meander: Option<f64>,
    standard_fractal: Option<f64>,
    arced_fractal: Option<f64>,
    /// standard < arced <= meander + ARCED_MEANDER_TOLERANCE at this fill factor.
    ordering_holds: Option<bool>,
    errors: Vec<String>,
}

fn fig1e(c: &Fig1eConfig) -> Result<Artifacts> {
    if !(c.cells_per_width > 0.0) {
        return Err(CliError::Usage("cells_per_width must be positive".into()));
    }
    let opts = UnitOptions { cell_size: Some(c.width_nm / c.cells_per_width), xi: c.xi_nm, tol: c.tol, ..UnitOptions::default() };
    let sweeps: Vec<Vec<SweepPoint>> = UNIT_KINDS.par_iter().map(|&k| sweep_fill_factor(k, &c.fill_factors, c.width_nm, &opts)).collect();
    let rows: Vec<Fig1eRow> = c
        .fill_factors
        .iter()
        .enumerate()
        .map(|(i, &ff)| {
            let [m, s, a] = [0, 1, 2].map(|k| sweeps[k][i].ratio_isw_ic);
            let ordering_holds = match (m, s, a) {
                (Some(m), Some(s), Some(a)) => Some(s < a && a <= m + ARCED_MEANDER_TOLERANCE),
                _ => None,
            };
            let errors = sweeps.iter().filter_map(|sw| sw[i].error.clone()).collect();
            Fig1eRow { fill_factor: ff, meander: m, standard_fractal: s, arced_fractal: a, ordering_holds, errors }
        })
        .collect();
    let mut out = Artifacts::new();
    let cell = |v: Option<f64>| v.map_or(String::new(), num);
    out.insert(
        "fig1e.csv",
        csv_bytes(
            &["fill_factor", "meander", "standard_fractal", "arced_fractal"],
            rows.iter().map(|r| vec![num(r.fill_factor), cell(r.meander), cell(r.standard_fractal), cell(r.arced_fractal)]),
        ),
    );
    let series: Vec<Series> = UNIT_KINDS
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            let y = sweeps[k].iter().map(|p| p.ratio_isw_ic.unwrap_or(f64::NAN)).collect();
            Series::new(kind.label(), c.fill_factors.clone(), y, Style::LineScatter)
        })
        .collect();
    out.insert("fig1e.svg", svg(&series, &Axes::new("Current crowding", "fill factor", "I_sw / I_c"))?);
    out.json("fig1e.json", &rows)?;
    Ok(out)
}

#[derive(Serialize)]
struct Fig1fSummary {
    fractal: crate::optics_cmd::SpectrumSummary,
    meander: crate::optics_cmd::SpectrumSummary,
}

fn fig1f(c: &Fig1fConfig, lib: &MaterialLibrary) -> Result<Artifacts> {
    let wl = grid(c.lambda_start_nm, c.lambda_stop_nm, c.lambda_step_nm, "wavelength grid")?;
    let frac = device_absorptance(&reference_stack(GratingKind::Fractal, c.fill_factor), lib, &wl, c.mixing).map_err(compute)?;
    let mean = device_absorptance(&reference_stack(GratingKind::Meander, c.fill_factor), lib, &wl, c.mixing).map_err(compute)?;
    let mut out = Artifacts::new();
    out.insert("fig1f_spectrum.csv", spectrum_csv(&frac));
    out.insert("fig1f_meander_spectrum.csv", spectrum_csv(&mean));
    out.insert("fig1f.svg", spectrum_svg(&frac, "Fractal device absorptance")?);
    out.insert("fig1f_meander.svg", spectrum_svg(&mean, "Meander device absorptance")?);
    out.json("fig1f.json", &Fig1fSummary { fractal: summarize(&frac), meander: summarize(&mean) })?;
    Ok(out)
}

#[derive(Serialize)]
struct Fig4Row {
    wavelength_nm: f64,
    device: &'static str,
    defect_nm: f64,
    a_te: f64,
    a_tm: f64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct Fig4Summary {
    rows: Vec<Fig4Row>,
    /// Fractal TE and TM absorptance agree bit for bit at every wavelength.
    fractal_identical: bool,
    /// Meander ratio strictly increases over wavelengths from 1300 nm up.
    meander_increasing_from_1300: bool,
}

fn fig4_point(c: &Fig4Config, lib: &MaterialLibrary, kind: GratingKind, l: f64) -> Result<Fig4Row> {
    let design = StackDesign { kind, ..c.design.clone() };
    let template = design_stack(&design, l, lib).map_err(compute)?;
    let half_wave = l / (2.0 * lib.index(&design.low, l).map_err(compute)?.re);
    let bounds = (c.defect_window.0 * half_wave, c.defect_window.1 * half_wave);
    let free = FreeParam::defect(&template, bounds).map_err(compute)?;
    let opt = optimize_stack(&template, lib, &[free], l, Polarization::Te, c.mixing, &c.options).map_err(compute)?;
    let te = device_point(&opt.stack, lib, l, Polarization::Te, c.mixing).map_err(compute)?.a_nanowire;
    let tm = device_point(&opt.stack, lib, l, Polarization::Tm, c.mixing).map_err(compute)?.a_nanowire;
    let device = match kind {
        GratingKind::Meander => "meander",
        GratingKind::Fractal => "fractal",
    };
    Ok(Fig4Row { wavelength_nm: l, device, defect_nm: opt.params[0], a_te: te, a_tm: tm, ratio: (tm > 0.0).then(|| te / tm) })
}

fn fig4(c: &Fig4Config, lib: &MaterialLibrary) -> Result<Artifacts> {
    if c.wavelengths_nm.is_empty() {
        return Err(CliError::Usage("fig4 needs at least one wavelength".into()));
    }
    let jobs: Vec<(GratingKind, f64)> =
        [GratingKind::Meander, GratingKind::Fractal].iter().flat_map(|&k| c.wavelengths_nm.iter().map(move |&l| (k, l))).collect();
    let rows: Vec<Fig4Row> = jobs.par_iter().map(|&(k, l)| fig4_point(c, lib, k, l)).collect::<Result<_>>()?;
    let (meander, fractal): (Vec<&Fig4Row>, Vec<&Fig4Row>) = rows.iter().partition(|r| r.device == "meander");
    let fractal_identical = fractal.iter().all(|r| r.a_te.to_bits() == r.a_tm.to_bits());
    let tail: Vec<f64> = meander.iter().filter(|r| r.wavelength_nm >= 1300.0).map(|r| r.ratio.unwrap_or(f64::NAN)).collect();
    let meander_increasing_from_1300 = tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0]);

    let mut out = Artifacts::new();
    out.insert(
        "fig4.csv",
        csv_bytes(
            &["wavelength_nm", "device", "defect_nm", "a_te", "a_tm", "ratio"],
            rows.iter().map(|r| {
                vec![num(r.wavelength_nm), r.device.into(), num(r.defect_nm), num(r.a_te), num(r.a_tm), r.ratio.map_or(String::new(), num)]
            }),
        ),
    );
    let line = |rs: &[&Fig4Row], label: &str| {
        Series::new(label, rs.iter().map(|r| r.wavelength_nm).collect(), rs.iter().map(|r| r.ratio.unwrap_or(f64::NAN)).collect(), Style::LineScatter)
    };
    let mut axes = Axes::new("Polarization ratio", "wavelength (nm)", "A_TE / A_TM");
    axes.log_y = true;
    out.insert("fig4.svg", svg(&[line(&meander, "meander"), line(&fractal, "fractal")], &axes)?);
    out.json("fig4.json", &Fig4Summary { rows, fractal_identical, meander_increasing_from_1300 })?;
    Ok(out)
}

/// EMG with `tau = ratio * sigma` whose FWHM equals `fwhm`.
fn demo_params(mu: f64, fwhm: f64, ratio: f64) -> Result<EmgParams> {
    let at = |s: f64| emg_fwhm(&EmgParams { mu, sigma: s, tau: ratio * s, amplitude: 1.0 });
    let (mut lo, mut hi) = (1e-6 * fwhm, fwhm);
    if !(fwhm > 0.0 && ratio > 0.0) || at(hi) < fwhm {
        return Err(CliError::Usage(format!("cannot build a demo with FWHM {fwhm} ps and tau/sigma {ratio}")));
    }
    // FWHM scales linearly with sigma at fixed ratio, so bisection is safe
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    EmgParams::new(mu, s, ratio * s, 1.0).map_err(compute)
}

#[derive(Serialize)]
struct JitterSummaryRow {
    name: String,
    target_fwhm_ps: f64,
    generating: EmgParams,
}

fn jitter(c: &JitterConfig) -> Result<Artifacts> {
    let mut out = Artifacts::new();
    let mut rows = Vec::new();
    for (k, d) in c.demos.iter().enumerate() {
        if d.name.is_empty() || !d.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
            return Err(CliError::Usage(format!("demo name '{}' must be alphanumeric", d.name)));
        }
        let p = demo_params(c.mu_ps, d.fwhm_ps, c.tau_over_sigma)?;
        let start = ((p.mu - 6.0 * p.sigma) / c.bin_ps).floor() * c.bin_ps;
        let bins = ((6.0 * p.sigma + 12.0 * p.tau + (p.mu - start)) / c.bin_ps).ceil() as usize;
        let spec = SyntheticSpec { mu_ps: p.mu, sigma_ps: p.sigma, tau_ps: p.tau, events: c.events, start_ps: start, bin_ps: c.bin_ps, bins };
        let h: Histogram = spec.histogram(c.seed.wrapping_add(k as u64))?;
        out.extend(fit_artifacts(&h, &c.fit, Some(p), &format!("jitter_{}_", d.name), &format!("Jitter demo {}", d.name))?);
        rows.push(JitterSummaryRow { name: d.name.clone(), target_fwhm_ps: d.fwhm_ps, generating: p });
    }
    out.json("jitter.json", &rows)?;
    Ok(out)
}
