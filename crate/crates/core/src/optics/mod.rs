//! Thin-film optics of the detector stack: transfer matrices with complex
//! indices, an effective-medium model of the nanowire film, field profiles
//! and thickness optimization.
//!
//! Distances are in nm, `z = 0` is the top of the first layer and `z`
//! grows into the stack. Time dependence is `exp(-i w t)`, so absorbing
//! media have `k >= 0`.

mod device;
mod emt;
mod field;
mod materials;
mod optimize;
mod stack;
mod tmm;

use thiserror::Error;

pub use device::{
    device_absorptance, device_point, polarization_ratio, spectrum_csv, FractalMixing, RatioPoint,
    Spectrum, SpectrumPoint,
};
pub use emt::emt_indices;
pub use field::{field_profile, FieldSample};
pub use materials::{Material, MaterialLibrary, MaterialTable};
pub use optimize::{optimize_stack, FreeParam, OptimizeOptions, OptimizeResult, ThicknessLink};
pub use stack::{design_stack, reference_stack, Grating, GratingKind, Layer, LayerStack, StackDesign};
pub use tmm::{tmm, tmm_raw, RawLayer, TmmResult};

/// Nanowire film thickness of the reference device.
pub const FILM_THICKNESS_NM: f64 = 9.0;
/// Wavelengths at which the polarization comparison is reported.
pub const POLARIZATION_WAVELENGTHS_NM: [f64; 7] = [600.0, 900.0, 1300.0, 2000.0, 3000.0, 4000.0, 5000.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];

    pub fn label(self) -> &'static str {
        match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = OpticsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "te" | "s" => Ok(Polarization::Te),
            "tm" | "p" => Ok(Polarization::Tm),
            _ => Err(OpticsError::Invalid(format!("unknown polarization '{s}'"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("wavelength {wavelength} nm outside the table range [{min}, {max}] nm of material '{material}'")]
    Range { material: String, wavelength: f64, min: f64, max: f64 },
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),
    #[error("material table '{name}': {reason}")]
    Table { name: String, reason: String },
    #[error("invalid stack: {0}")]
    Stack(String),
    #[error("incidence medium must be lossless (k = {0})")]
    LossyIncidence(f64),
    #[error("angle of incidence {0} rad outside [0, pi/2)")]
    Angle(f64),
    #[error("fill factor {0} outside [0, 1]")]
    FillFactor(f64),
    #[error("{0}")]
    Invalid(String),
    #[error("optimizer: {0}")]
    Optimize(String),
}

pub type Result<T> = std::result::Result<T, OpticsError>;
