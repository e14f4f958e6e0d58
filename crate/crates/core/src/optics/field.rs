use num_complex::Complex64;
use serde::Serialize;

use super::materials::MaterialLibrary;
use super::stack::LayerStack;
use super::tmm::{resolve, solve, GratingEps, RawLayer};
use super::{Polarization, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub z: f64,
    /// `|E|^2` relative to the incident wave.
    pub intensity: f64,
}

pub(crate) fn profile_raw(
    n_inc: Complex64,
    layers: &[RawLayer],
    n_sub: Complex64,
    wavelength: f64,
    z_grid: &[f64],
) -> Result<Vec<FieldSample>> {
    let sol = solve(n_inc, layers, n_sub, wavelength, Polarization::Te, 0.0)?;
    let mut bounds = vec![0.0];
    for l in layers {
        bounds.push(bounds[bounds.len() - 1] + l.d);
    }
    let nl = layers.len();
    let i = Complex64::i();
    let k0 = sol.k0;
    let fields: Vec<(Complex64, Complex64)> = (0..=nl).map(|j| sol.fields_at(j)).collect();
    let out = z_grid
        .iter()
        .map(|&z| {
            let e = if z < 0.0 {
                let p = i * sol.q[0] * (k0 * z);
                p.exp() + sol.r * (-p).exp()
            } else if z >= bounds[nl] {
                fields[nl].0 * (i * sol.q[nl + 1] * (k0 * (z - bounds[nl]))).exp()
            } else {
                let j = bounds.partition_point(|&b| b <= z) - 1;
                let (q, eta) = (sol.q[j + 1], sol.eta[j + 1]);
                // forward wave referenced to the layer top, backward to the bottom,
                // so neither exponential grows
                let fwd = (fields[j].0 + fields[j].1 / eta) * 0.5;
                let bwd = (fields[j + 1].0 - fields[j + 1].1 / eta) * 0.5;
                fwd * (i * q * (k0 * (z - bounds[j]))).exp() + bwd * (i * q * (k0 * (bounds[j + 1] - z))).exp()
            };
            FieldSample { z, intensity: e.norm_sqr() }
        })
        .collect();
    Ok(out)
}

/// Normal-incidence `|E(z)|^2` with the grating layer replaced by its host.
pub fn field_profile(
    stack: &LayerStack,
    lib: &MaterialLibrary,
    wavelength: f64,
    z_grid: &[f64],
) -> Result<Vec<FieldSample>> {
    let bare = stack.without_grating();
    bare.validate()?;
    let (ni, raw, ns) = resolve(&bare, lib, wavelength, GratingEps::Mean)?;
    profile_raw(ni, &raw, ns, wavelength, z_grid)
}
