use serde::{Deserialize, Serialize};

use super::materials::MaterialLibrary;
use super::{OpticsError, Result, FILM_THICKNESS_NM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GratingKind {
    /// Parallel wires: TE has E along the wires.
    Meander,
    /// Wire length split equally between two orthogonal orientations.
    Fractal,
}

impl std::str::FromStr for GratingKind {
    type Err = OpticsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "meander" => Ok(GratingKind::Meander),
            "fractal" | "standard_fractal" | "arced_fractal" => Ok(GratingKind::Fractal),
            _ => Err(OpticsError::Invalid(format!("unknown grating kind '{s}'"))),
        }
    }
}

/// Sub-wavelength wire grating: the layer material is the wire metal,
/// `host` fills the gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grating {
    pub fill_factor: f64,
    pub kind: GratingKind,
    #[serde(default = "default_host")]
    pub host: String,
}

fn default_host() -> String {
    "sio2".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub material: String,
    pub thickness_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grating: Option<Grating>,
}

impl Layer {
    pub fn plain(material: &str, thickness_nm: f64) -> Self {
        Layer { material: material.into(), thickness_nm, grating: None }
    }
}

/// Incidence medium, layers from the top down, semi-infinite substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    pub incidence: String,
    pub substrate: String,
    #[serde(rename = "layer")]
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(incidence: &str, layers: Vec<Layer>, substrate: &str) -> Result<Self> {
        let s = LayerStack { incidence: incidence.into(), layers, substrate: substrate.into() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(OpticsError::Stack("at least one layer required".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness_nm > 0.0 && l.thickness_nm.is_finite()) {
                return Err(OpticsError::Stack(format!("layer {i} thickness {} must be positive", l.thickness_nm)));
            }
            if let Some(g) = &l.grating {
                if !(0.0..=1.0).contains(&g.fill_factor) {
                    return Err(OpticsError::FillFactor(g.fill_factor));
                }
            }
        }
        if self.layers.iter().filter(|l| l.grating.is_some()).count() > 1 {
            return Err(OpticsError::Stack("at most one grating layer allowed".into()));
        }
        Ok(())
    }

    /// Checks that every material is known to `lib`.
    pub fn check_materials(&self, lib: &MaterialLibrary) -> Result<()> {
        lib.get(&self.incidence)?;
        lib.get(&self.substrate)?;
        for l in &self.layers {
            lib.get(&l.material)?;
            if let Some(g) = &l.grating {
                lib.get(&g.host)?;
            }
        }
        Ok(())
    }

    pub fn grating_index(&self) -> Option<usize> {
        self.layers.iter().position(|l| l.grating.is_some())
    }

    pub fn grating(&self) -> Option<&Grating> {
        self.layers.iter().find_map(|l| l.grating.as_ref())
    }

    /// Copy with the grating layer replaced by its host material.
    pub fn without_grating(&self) -> LayerStack {
        let mut s = self.clone();
        for l in &mut s.layers {
            if let Some(g) = l.grating.take() {
                l.material = g.host;
            }
        }
        s
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// z of the top of each layer, plus the substrate interface at the end.
    pub fn interfaces(&self) -> Vec<f64> {
        let mut z = vec![0.0];
        for l in &self.layers {
            z.push(z[z.len() - 1] + l.thickness_nm);
        }
        z
    }
}

/// Cavity layout: `top_pairs` of (low, high) above a half-wave low-index
/// defect that holds the film at its centre, `bottom_pairs` of (high, low)
/// below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackDesign {
    pub incidence: String,
    pub substrate: String,
    pub low: String,
    pub high: String,
    pub film: String,
    pub film_thickness_nm: f64,
    pub top_pairs: usize,
    pub bottom_pairs: usize,
    pub fill_factor: f64,
    pub kind: GratingKind,
}

impl Default for StackDesign {
    fn default() -> Self {
        StackDesign {
            incidence: "air".into(),
            substrate: "si".into(),
            low: "sio2".into(),
            high: "ta2o5".into(),
            film: "nbtin".into(),
            film_thickness_nm: FILM_THICKNESS_NM,
            top_pairs: 3,
            bottom_pairs: 6,
            fill_factor: 0.31,
            kind: GratingKind::Fractal,
        }
    }
}

impl StackDesign {
    fn build(&self, d_low: f64, d_high: f64, half_defect: f64) -> Result<LayerStack> {
        let mut layers = Vec::new();
        for _ in 0..self.top_pairs {
            layers.push(Layer::plain(&self.low, d_low));
            layers.push(Layer::plain(&self.high, d_high));
        }
        layers.push(Layer::plain(&self.low, half_defect));
        layers.push(Layer {
            material: self.film.clone(),
            thickness_nm: self.film_thickness_nm,
            grating: Some(Grating { fill_factor: self.fill_factor, kind: self.kind, host: self.low.clone() }),
        });
        layers.push(Layer::plain(&self.low, half_defect));
        for _ in 0..self.bottom_pairs {
            layers.push(Layer::plain(&self.high, d_high));
            layers.push(Layer::plain(&self.low, d_low));
        }
        LayerStack::new(&self.incidence, layers, &self.substrate)
    }
}

/// Quarter-wave mirrors and a half-wave defect at `wavelength`, using the
/// real parts of the tabulated indices there.
pub fn design_stack(design: &StackDesign, wavelength: f64, lib: &MaterialLibrary) -> Result<LayerStack> {
    let nl = lib.index(&design.low, wavelength)?.re;
    let nh = lib.index(&design.high, wavelength)?.re;
    let half = (wavelength / (2.0 * nl) - design.film_thickness_nm) / 2.0;
    if !(half > 0.0) {
        return Err(OpticsError::Stack(format!("film too thick for a half-wave defect at {wavelength} nm")));
    }
    design.build(wavelength / (4.0 * nl), wavelength / (4.0 * nh), half)
}

/// Reference device stack: three SiO2/Ta2O5 pairs (264/180 nm), a 529 nm
/// defect with the 9 nm NbTiN film at its centre, six Ta2O5/SiO2 pairs and
/// a silicon substrate.
pub fn reference_stack(kind: GratingKind, fill_factor: f64) -> LayerStack {
    let design = StackDesign { kind, fill_factor, ..StackDesign::default() };
    design.build(264.0, 180.0, 260.0).expect("reference stack is valid")
}
