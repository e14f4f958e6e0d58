use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::materials::MaterialLibrary;
use super::stack::LayerStack;
use super::tmm::tmm;
use super::{OpticsError, Polarization, Result};

/// How a fractal grating, with wires in two orthogonal orientations, is
/// reduced to a single isotropic response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalMixing {
    /// Film permittivity `(eps_parallel + eps_perp) / 2`.
    #[default]
    PermittivityAverage,
    /// Absorptance averaged over the two pure orientations,
    /// `(A(eps_parallel) + A(eps_perp)) / 2`.
    AbsorptanceAverage,
}

impl std::str::FromStr for FractalMixing {
    type Err = OpticsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "permittivity_average" => Ok(FractalMixing::PermittivityAverage),
            "absorptance_average" => Ok(FractalMixing::AbsorptanceAverage),
            _ => Err(OpticsError::Invalid(format!("unknown fractal mixing '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub reflectance: f64,
    pub transmittance: f64,
    pub a_total: f64,
    /// Absorptance in the grating layer; zero without one.
    pub a_nanowire: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub wavelengths: Vec<f64>,
    pub te: Vec<SpectrumPoint>,
    pub tm: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn points(&self, pol: Polarization) -> &[SpectrumPoint] {
        match pol {
            Polarization::Te => &self.te,
            Polarization::Tm => &self.tm,
        }
    }

    /// `(wavelength, A_nanowire)` pairs.
    pub fn series(&self, pol: Polarization) -> Vec<(f64, f64)> {
        self.wavelengths.iter().zip(self.points(pol)).map(|(&l, p)| (l, p.a_nanowire)).collect()
    }

    /// Wavelength and value of the largest nanowire absorptance.
    pub fn peak(&self, pol: Polarization) -> Option<(f64, f64)> {
        let pts = self.points(pol);
        let k = (0..pts.len()).max_by(|&a, &b| pts[a].a_nanowire.total_cmp(&pts[b].a_nanowire))?;
        Some((self.wavelengths[k], pts[k].a_nanowire))
    }

    /// Full width at half maximum of the nanowire absorptance peak, with
    /// linear interpolation of the half-maximum crossings. `None` if the
    /// peak is not bracketed on both sides.
    pub fn fwhm(&self, pol: Polarization) -> Option<f64> {
        let pts = self.points(pol);
        let wl = &self.wavelengths;
        let k = (0..pts.len()).max_by(|&a, &b| pts[a].a_nanowire.total_cmp(&pts[b].a_nanowire))?;
        let half = pts[k].a_nanowire / 2.0;
        let cross = |a: usize, b: usize| {
            let (ya, yb) = (pts[a].a_nanowire, pts[b].a_nanowire);
            wl[a] + (half - ya) / (yb - ya) * (wl[b] - wl[a])
        };
        let left = (1..=k).rev().find(|&i| pts[i - 1].a_nanowire < half).map(|i| cross(i - 1, i))?;
        let right = (k..pts.len() - 1).find(|&i| pts[i + 1].a_nanowire < half).map(|i| cross(i, i + 1))?;
        Some(right - left)
    }
}

/// Device response at one wavelength, normal incidence.
pub fn device_point(
    stack: &LayerStack,
    lib: &MaterialLibrary,
    wavelength: f64,
    pol: Polarization,
    mixing: FractalMixing,
) -> Result<SpectrumPoint> {
    let r = tmm(stack, lib, wavelength, pol, 0.0, mixing)?;
    let a_nanowire = stack.grating_index().map_or(0.0, |g| r.layer_absorptance[g]);
    Ok(SpectrumPoint { reflectance: r.reflectance, transmittance: r.transmittance, a_total: r.absorptance, a_nanowire })
}

/// TE and TM spectra over `wavelengths`, evaluated in parallel.
pub fn device_absorptance(
    stack: &LayerStack,
    lib: &MaterialLibrary,
    wavelengths: &[f64],
    mixing: FractalMixing,
) -> Result<Spectrum> {
    stack.validate()?;
    stack.check_materials(lib)?;
    let rows: Vec<(SpectrumPoint, SpectrumPoint)> = wavelengths
        .par_iter()
        .map(|&l| {
            Ok((
                device_point(stack, lib, l, Polarization::Te, mixing)?,
                device_point(stack, lib, l, Polarization::Tm, mixing)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (te, tm) = rows.into_iter().unzip();
    Ok(Spectrum { wavelengths: wavelengths.to_vec(), te, tm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub wavelength: f64,
    /// `A_TE / A_TM`; `None` where `A_TM` is zero.
    pub ratio: Option<f64>,
}

/// Pointwise `A_TE / A_TM` from `(wavelength, A)` series on one grid.
pub fn polarization_ratio(te: &[(f64, f64)], tm: &[(f64, f64)]) -> Result<Vec<RatioPoint>> {
    if te.len() != tm.len() || te.iter().zip(tm).any(|(a, b)| a.0 != b.0) {
        return Err(OpticsError::Invalid("TE and TM series are on different wavelength grids".into()));
    }
    Ok(te
        .iter()
        .zip(tm)
        .map(|(&(l, a), &(_, b))| RatioPoint { wavelength: l, ratio: (b != 0.0).then(|| a / b) })
        .collect())
}

fn fmt(v: f64, digits: usize) -> String {
    let s = format!("{v:.digits$}");
    if s.starts_with('-') && s[1..].bytes().all(|c| c == b'0' || c == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// CSV with columns `lambda_nm,pol,R,T,A_total,A_nanowire`, TE before TM
/// at each wavelength.
pub fn spectrum_csv(spec: &Spectrum) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda_nm", "pol", "R", "T", "A_total", "A_nanowire"]).expect("in-memory write");
    for (k, &l) in spec.wavelengths.iter().enumerate() {
        for pol in Polarization::BOTH {
            let p = spec.points(pol)[k];
            w.write_record([
                fmt(l, 3),
                pol.label().to_string(),
                fmt(p.reflectance, 9),
                fmt(p.transmittance, 9),
                fmt(p.a_total, 9),
                fmt(p.a_nanowire, 9),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}
