use std::collections::BTreeMap;
use std::path::Path;

use fracsnap_core::optics::{
    device_absorptance, field_profile, optimize_stack, reference_stack, spectrum_csv, FractalMixing, FreeParam,
    GratingKind, LayerStack, MaterialLibrary, OptimizeOptions, OptimizeResult, Polarization, Spectrum,
    ThicknessLink,
};
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, grid, num, svg};
use crate::plot::{Axes, Series, Style};
use crate::{compute, Artifacts, CliError, Command, Result};

/// Stack selection shared by the optics commands: an inline `[stack]`,
/// a `stack_file`, or the reference device built from `device` and
/// `fill_factor`. Resolution inlines the chosen stack.
fn resolve_stack(stack: &mut Option<LayerStack>, stack_file: &mut Option<String>, device: GratingKind, ff: f64) -> Result<()> {
    if let Some(f) = stack_file.take() {
        if stack.is_some() {
            return Err(CliError::Usage("give either stack or stack_file, not both".into()));
        }
        let text = std::fs::read_to_string(&f).map_err(|e| CliError::Usage(format!("cannot read stack file {f}: {e}")))?;
        let s: LayerStack = toml::from_str(&text).map_err(|e| CliError::Usage(format!("stack file {f}: {}", e.message())))?;
        *stack = Some(s);
    }
    if stack.is_none() {
        if !(0.0..=1.0).contains(&ff) {
            return Err(CliError::Usage(format!("fill_factor {ff} outside [0, 1]")));
        }
        *stack = Some(reference_stack(device, ff));
    }
    stack.as_ref().expect("set above").validate().map_err(|e| CliError::Usage(e.to_string()))
}

fn library(extra: &BTreeMap<String, String>) -> Result<MaterialLibrary> {
    let mut lib = MaterialLibrary::builtin();
    for (name, path) in extra {
        lib.load_csv(name, Path::new(path)).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(lib)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorptanceConfig {
    pub device: GratingKind,
    pub fill_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack: Option<LayerStack>,
    /// Extra materials: name to `wavelength_nm,n,k` CSV path.
    pub materials: BTreeMap<String, String>,
    pub lambda_start_nm: f64,
    pub lambda_stop_nm: f64,
    pub lambda_step_nm: f64,
    pub mixing: FractalMixing,
}

impl Default for AbsorptanceConfig {
    fn default() -> Self {
        AbsorptanceConfig {
            device: GratingKind::Fractal,
            fill_factor: 0.31,
            stack_file: None,
            stack: None,
            materials: BTreeMap::new(),
            lambda_start_nm: 1300.0,
            lambda_stop_nm: 1800.0,
            lambda_step_nm: 1.0,
            mixing: FractalMixing::default(),
        }
    }
}

#[derive(Serialize)]
pub(crate) struct PolSummary {
    peak_wavelength_nm: Option<f64>,
    peak_a_nanowire: Option<f64>,
    fwhm_nm: Option<f64>,
}

#[derive(Serialize)]
pub(crate) struct SpectrumSummary {
    te: PolSummary,
    tm: PolSummary,
    /// Every TE value equals its TM counterpart bit for bit.
    te_tm_identical: bool,
    max_energy_error: f64,
}

pub(crate) fn summarize(s: &Spectrum) -> SpectrumSummary {
    let pol = |p| {
        let peak = s.peak(p);
        PolSummary { peak_wavelength_nm: peak.map(|x| x.0), peak_a_nanowire: peak.map(|x| x.1), fwhm_nm: s.fwhm(p) }
    };
    let identical = s.te.iter().zip(&s.tm).all(|(a, b)| {
        a.a_nanowire.to_bits() == b.a_nanowire.to_bits()
            && a.reflectance.to_bits() == b.reflectance.to_bits()
            && a.transmittance.to_bits() == b.transmittance.to_bits()
    });
    let err = s
        .te
        .iter()
        .chain(&s.tm)
        .map(|p| (p.reflectance + p.transmittance + p.a_total - 1.0).abs())
        .fold(0.0, f64::max);
    SpectrumSummary { te: pol(Polarization::Te), tm: pol(Polarization::Tm), te_tm_identical: identical, max_energy_error: err }
}

pub(crate) fn spectrum_svg(s: &Spectrum, title: &str) -> Result<Vec<u8>> {
    let series: Vec<Series> = Polarization::BOTH
        .iter()
        .map(|&p| {
            let (x, y) = s.series(p).into_iter().unzip();
            Series::new(&format!("{} nanowire", p.label()), x, y, Style::Line)
        })
        .collect();
    let mut axes = Axes::new(title, "wavelength (nm)", "absorptance");
    axes.y_range = Some((0.0, 1.0));
    svg(&series, &axes)
}

impl Command for AbsorptanceConfig {
    fn resolve(&mut self) -> Result<()> {
        resolve_stack(&mut self.stack, &mut self.stack_file, self.device, self.fill_factor)
    }

    fn execute(&self) -> Result<Artifacts> {
        let lib = library(&self.materials)?;
        let stack = self.stack.as_ref().expect("resolved");
        let wl = grid(self.lambda_start_nm, self.lambda_stop_nm, self.lambda_step_nm, "wavelength grid")?;
        let spec = device_absorptance(stack, &lib, &wl, self.mixing).map_err(compute)?;
        let mut out = Artifacts::new();
        out.insert("spectrum.csv", spectrum_csv(&spec));
        out.insert("spectrum.svg", spectrum_svg(&spec, "Nanowire absorptance")?);
        out.json("absorptance.json", &summarize(&spec))?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub device: GratingKind,
    pub fill_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack: Option<LayerStack>,
    pub materials: BTreeMap<String, String>,
    pub wavelength_nm: f64,
    pub z_step_nm: f64,
    /// Extent sampled into the incidence medium and the substrate.
    pub margin_nm: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            device: GratingKind::Fractal,
            fill_factor: 0.31,
            stack_file: None,
            stack: None,
            materials: BTreeMap::new(),
            wavelength_nm: 1550.0,
            z_step_nm: 1.0,
            margin_nm: 300.0,
        }
    }
}

#[derive(Serialize)]
pub(crate) struct LayerRow {
    index: usize,
    material: String,
    z_top_nm: f64,
    z_bottom_nm: f64,
    grating: bool,
}

#[derive(Serialize)]
pub(crate) struct FieldSummary {
    wavelength_nm: f64,
    layers: Vec<LayerRow>,
    peak_z_nm: f64,
    peak_intensity: f64,
    /// Intensity at the middle of the grating layer, if there is one.
    film_center_intensity: Option<f64>,
}

pub(crate) fn field_artifacts(stack: &LayerStack, lib: &MaterialLibrary, wavelength: f64, step: f64, margin: f64, prefix: &str) -> Result<Artifacts> {
    let z = grid(-margin, stack.total_thickness() + margin, step, "z grid")?;
    let samples = field_profile(stack, lib, wavelength, &z).map_err(compute)?;
    let zs = stack.interfaces();
    let layers: Vec<LayerRow> = stack
        .layers
        .iter()
        .enumerate()
        .map(|(k, l)| LayerRow { index: k, material: l.material.clone(), z_top_nm: zs[k], z_bottom_nm: zs[k + 1], grating: l.grating.is_some() })
        .collect();
    let peak = samples.iter().max_by(|a, b| a.intensity.total_cmp(&b.intensity)).expect("non-empty grid");
    let film_center_intensity = match stack.grating_index() {
        Some(g) => {
            let mid = 0.5 * (zs[g] + zs[g + 1]);
            Some(field_profile(stack, lib, wavelength, &[mid]).map_err(compute)?[0].intensity)
        }
        None => None,
    };
    let mut out = Artifacts::new();
    out.insert(
        format!("{prefix}field.csv"),
        csv_bytes(&["z_nm", "intensity"], samples.iter().map(|s| vec![num(s.z), num(s.intensity)])),
    );
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s.z, s.intensity)).unzip();
    let ymax = y.iter().cloned().fold(0.0, f64::max);
    let mut series = vec![Series::new("|E|^2", x, y, Style::Line)];
    if let Some(g) = stack.grating_index() {
        series.push(Series::new("nanowire film", vec![zs[g], zs[g + 1]], vec![ymax, ymax], Style::Scatter));
    }
    let axes = Axes::new(&format!("Field intensity at {} nm", num(wavelength)), "depth z (nm)", "|E|^2 / |E0|^2");
    out.insert(format!("{prefix}field.svg"), svg(&series, &axes)?);
    out.json(
        &format!("{prefix}field.json"),
        &FieldSummary { wavelength_nm: wavelength, layers, peak_z_nm: peak.z, peak_intensity: peak.intensity, film_center_intensity },
    )?;
    Ok(out)
}

impl Command for FieldConfig {
    fn resolve(&mut self) -> Result<()> {
        resolve_stack(&mut self.stack, &mut self.stack_file, self.device, self.fill_factor)
    }

    fn execute(&self) -> Result<Artifacts> {
        let lib = library(&self.materials)?;
        let stack = self.stack.as_ref().expect("resolved");
        field_artifacts(stack, &lib, self.wavelength_nm, self.z_step_nm, self.margin_nm, "")
    }
}

/// One free thickness: either the defect around the grating or a shared
/// thickness for the listed layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSpec {
    pub name: String,
    #[serde(default)]
    pub defect: bool,
    #[serde(default)]
    pub layers: Vec<usize>,
    pub bounds: (f64, f64),
}

impl FreeSpec {
    fn build(&self, stack: &LayerStack) -> Result<FreeParam> {
        if self.defect == !self.layers.is_empty() {
            return Err(CliError::Usage(format!("free parameter '{}' needs exactly one of defect or layers", self.name)));
        }
        if self.defect {
            let mut p = FreeParam::defect(stack, self.bounds).map_err(|e| CliError::Usage(e.to_string()))?;
            p.name = self.name.clone();
            return Ok(p);
        }
        if let Some(&bad) = self.layers.iter().find(|&&l| l >= stack.layers.len()) {
            return Err(CliError::Usage(format!("free parameter '{}': no layer {bad}", self.name)));
        }
        let links = self.layers.iter().map(|&layer| ThicknessLink { layer, scale: 1.0, offset: 0.0 }).collect();
        Ok(FreeParam { name: self.name.clone(), links, bounds: self.bounds })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub device: GratingKind,
    pub fill_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack: Option<LayerStack>,
    pub materials: BTreeMap<String, String>,
    pub wavelength_nm: f64,
    pub polarization: Polarization,
    pub mixing: FractalMixing,
    pub free: Vec<FreeSpec>,
    pub options: OptimizeOptions,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            device: GratingKind::Fractal,
            fill_factor: 0.31,
            stack_file: None,
            stack: None,
            materials: BTreeMap::new(),
            wavelength_nm: 1550.0,
            polarization: Polarization::Te,
            mixing: FractalMixing::default(),
            free: vec![FreeSpec { name: "defect_nm".into(), defect: true, layers: Vec::new(), bounds: (300.0, 800.0) }],
            options: OptimizeOptions::default(),
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    names: Vec<&'a str>,
    params: &'a [f64],
    achieved_a_nanowire: f64,
    evaluations: usize,
    degenerate: bool,
    at_bound: &'a [bool],
}

impl Command for OptimizeConfig {
    fn resolve(&mut self) -> Result<()> {
        resolve_stack(&mut self.stack, &mut self.stack_file, self.device, self.fill_factor)
    }

    fn execute(&self) -> Result<Artifacts> {
        let lib = library(&self.materials)?;
        let stack = self.stack.as_ref().expect("resolved");
        let params = self.free.iter().map(|f| f.build(stack)).collect::<Result<Vec<_>>>()?;
        let r: OptimizeResult =
            optimize_stack(stack, &lib, &params, self.wavelength_nm, self.polarization, self.mixing, &self.options)
                .map_err(compute)?;
        let mut out = Artifacts::new();
        let text = toml::to_string(&r.stack).map_err(compute)?;
        out.insert("optimized_stack.toml", text.into_bytes());
        out.json(
            "optimize.json",
            &OptimizeSummary {
                names: self.free.iter().map(|f| f.name.as_str()).collect(),
                params: &r.params,
                achieved_a_nanowire: r.achieved,
                evaluations: r.evaluations,
                degenerate: r.degenerate,
                at_bound: &r.at_bound,
            },
        )?;
        Ok(out)
    }
}
