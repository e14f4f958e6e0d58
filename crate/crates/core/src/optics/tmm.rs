use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::device::FractalMixing;
use super::emt::{emt_indices, index_of};
use super::materials::MaterialLibrary;
use super::stack::{GratingKind, LayerStack};
use super::{OpticsError, Polarization, Result};

/// Growth factor `|exp(i kz d)|` above which a layer is propagated in the
/// rescaled amplitude form instead of the cos/sin matrix.
const OVERFLOW_GUARD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawLayer {
    /// Complex index `n + ik`.
    pub n: Complex64,
    /// Thickness in nm; zero is allowed.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TmmResult {
    pub reflectance: f64,
    pub transmittance: f64,
    pub absorptance: f64,
    /// Absorbed fraction in each layer, top first.
    pub layer_absorptance: Vec<f64>,
}

/// Tangential fields at every interface, scaled so that the true field is
/// `value * exp(log_scale)`.
pub(crate) struct Solution {
    pub k0: f64,
    /// Normal wavevector component over `k0`, per medium: incidence, layers, substrate.
    pub q: Vec<Complex64>,
    /// Tilted admittance per medium.
    pub eta: Vec<Complex64>,
    pub e: Vec<Complex64>,
    pub h: Vec<Complex64>,
    pub log_scale: Vec<f64>,
    /// Incident amplitude in the scaling of interface 0.
    pub a0: Complex64,
    pub r: Complex64,
}

fn normal_component(n: Complex64, kx: f64) -> Complex64 {
    let q = (n * n - kx * kx).sqrt();
    // forward wave: decaying, or carrying power downward when lossless
    if q.im < -1e-15 * q.norm() || (q.im.abs() <= 1e-15 * q.norm() && q.re < 0.0) {
        -q
    } else {
        q
    }
}

pub(crate) fn solve(
    n_inc: Complex64,
    layers: &[RawLayer],
    n_sub: Complex64,
    wavelength: f64,
    pol: Polarization,
    aoi: f64,
) -> Result<Solution> {
    if n_inc.im != 0.0 {
        return Err(OpticsError::LossyIncidence(n_inc.im));
    }
    if !(0.0..PI / 2.0).contains(&aoi) {
        return Err(OpticsError::Angle(aoi));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(OpticsError::Invalid(format!("wavelength {wavelength} nm")));
    }
    if let Some(l) = layers.iter().find(|l| !(l.d >= 0.0 && l.d.is_finite())) {
        return Err(OpticsError::Stack(format!("layer thickness {}", l.d)));
    }
    let k0 = 2.0 * PI / wavelength;
    let kx = n_inc.re * aoi.sin();
    let media: Vec<Complex64> =
        std::iter::once(n_inc).chain(layers.iter().map(|l| l.n)).chain(std::iter::once(n_sub)).collect();
    let q: Vec<Complex64> = media.iter().map(|&n| normal_component(n, kx)).collect();
    // at normal incidence both polarizations share one admittance, so
    // isotropic results are bit-identical between TE and TM
    let eta: Vec<Complex64> = media
        .iter()
        .zip(&q)
        .map(|(&n, &q)| if pol == Polarization::Tm && aoi != 0.0 { n * n / q } else { q })
        .collect();

    let nl = layers.len();
    let mut e = vec![Complex64::new(0.0, 0.0); nl + 1];
    let mut h = e.clone();
    let mut log_scale = vec![0.0; nl + 1];
    let (mut ec, mut hc, mut ell) = (Complex64::new(1.0, 0.0), eta[nl + 1], 0.0);
    e[nl] = ec;
    h[nl] = hc;
    let i = Complex64::i();
    for j in (0..nl).rev() {
        let et = eta[j + 1];
        let delta = q[j + 1] * (k0 * layers[j].d);
        if delta.im.abs() > OVERFLOW_GUARD.ln() {
            // forward and backward amplitudes at the layer bottom, carried up
            // with the common real growth factor removed
            let fwd = (ec + hc / et) * 0.5;
            let bwd = (ec - hc / et) * 0.5;
            let phase = Complex64::from_polar(1.0, -delta.re);
            let a = fwd * phase;
            let b = bwd * phase.conj() * (-2.0 * delta.im).exp();
            ec = a + b;
            hc = et * (a - b);
            ell += delta.im;
        } else {
            let (c, s) = (delta.cos(), delta.sin());
            let en = ec * c - i * s * hc / et;
            let hn = -i * et * s * ec + c * hc;
            ec = en;
            hc = hn;
        }
        let m = ec.norm().max(hc.norm());
        if m > 0.0 && m.is_finite() {
            ec /= m;
            hc /= m;
            ell += m.ln();
        }
        e[j] = ec;
        h[j] = hc;
        log_scale[j] = ell;
    }
    let a0 = (e[0] + h[0] / eta[0]) * 0.5;
    let b0 = (e[0] - h[0] / eta[0]) * 0.5;
    Ok(Solution { k0, q, eta, e, h, log_scale, a0, r: b0 / a0 })
}

impl Solution {
    /// Power flux through interface `j` relative to the incident flux.
    pub fn flux(&self, j: usize) -> f64 {
        let s = (self.e[j] * self.h[j].conj()).re;
        let rel = 2.0 * (self.log_scale[j] - self.log_scale[0]);
        s * rel.exp() / (self.eta[0].re * self.a0.norm_sqr())
    }

    /// True tangential field at interface `j`, incident amplitude 1.
    pub fn fields_at(&self, j: usize) -> (Complex64, Complex64) {
        let f = (self.log_scale[j] - self.log_scale[0]).exp() / self.a0;
        (self.e[j] * f, self.h[j] * f)
    }
}

/// Characteristic-matrix solution for explicit complex indices.
pub fn tmm_raw(
    n_inc: Complex64,
    layers: &[RawLayer],
    n_sub: Complex64,
    wavelength: f64,
    pol: Polarization,
    aoi: f64,
) -> Result<TmmResult> {
    let sol = solve(n_inc, layers, n_sub, wavelength, pol, aoi)?;
    let fluxes: Vec<f64> = (0..=layers.len()).map(|j| sol.flux(j)).collect();
    let reflectance = sol.r.norm_sqr();
    let transmittance = fluxes[layers.len()];
    let layer_absorptance: Vec<f64> = fluxes.windows(2).map(|w| w[0] - w[1]).collect();
    Ok(TmmResult { reflectance, transmittance, absorptance: layer_absorptance.iter().sum(), layer_absorptance })
}

/// Which effective permittivity the grating layer takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GratingEps {
    Parallel,
    Perp,
    /// In-plane average of the two.
    Mean,
}

pub(crate) fn resolve(
    stack: &LayerStack,
    lib: &MaterialLibrary,
    wavelength: f64,
    choice: GratingEps,
) -> Result<(Complex64, Vec<RawLayer>, Complex64)> {
    let n_inc = lib.index(&stack.incidence, wavelength)?;
    let n_sub = lib.index(&stack.substrate, wavelength)?;
    let mut raw = Vec::with_capacity(stack.layers.len());
    for l in &stack.layers {
        let n_m = lib.index(&l.material, wavelength)?;
        let n = match &l.grating {
            None => n_m,
            Some(g) => {
                let (par, perp) = emt_indices(g.fill_factor, n_m, lib.index(&g.host, wavelength)?)?;
                index_of(match choice {
                    GratingEps::Parallel => par,
                    GratingEps::Perp => perp,
                    GratingEps::Mean => (par + perp) * 0.5,
                })
            }
        };
        raw.push(RawLayer { n, d: l.thickness_nm });
    }
    Ok((n_inc, raw, n_sub))
}

fn mix(a: &TmmResult, b: &TmmResult) -> TmmResult {
    let avg = |x: f64, y: f64| 0.5 * (x + y);
    TmmResult {
        reflectance: avg(a.reflectance, b.reflectance),
        transmittance: avg(a.transmittance, b.transmittance),
        absorptance: avg(a.absorptance, b.absorptance),
        layer_absorptance: a.layer_absorptance.iter().zip(&b.layer_absorptance).map(|(&x, &y)| avg(x, y)).collect(),
    }
}

/// Solves a stack whose grating layer is modelled as an effective medium.
/// Meander gratings use the parallel permittivity for TE and the
/// perpendicular one for TM; fractal gratings treat both polarizations
/// alike according to `mixing`.
pub fn tmm(
    stack: &LayerStack,
    lib: &MaterialLibrary,
    wavelength: f64,
    pol: Polarization,
    aoi: f64,
    mixing: FractalMixing,
) -> Result<TmmResult> {
    stack.validate()?;
    let run = |choice: GratingEps, pol: Polarization| {
        let (ni, raw, ns) = resolve(stack, lib, wavelength, choice)?;
        tmm_raw(ni, &raw, ns, wavelength, pol, aoi)
    };
    match stack.grating().map(|g| g.kind) {
        None => run(GratingEps::Mean, pol),
        Some(GratingKind::Meander) => {
            run(if pol == Polarization::Te { GratingEps::Parallel } else { GratingEps::Perp }, pol)
        }
        Some(GratingKind::Fractal) => match mixing {
            FractalMixing::PermittivityAverage => run(GratingEps::Mean, pol),
            FractalMixing::AbsorptanceAverage => Ok(mix(&run(GratingEps::Parallel, pol)?, &run(GratingEps::Perp, pol)?)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_interface_fresnel() {
        let r = tmm_raw(c(1.0, 0.0), &[], c(1.5, 0.0), 1000.0, Polarization::Te, 0.0).unwrap();
        assert!((r.reflectance - 0.04).abs() < 1e-14);
        assert!((r.transmittance - 0.96).abs() < 1e-14);
    }

    #[test]
    fn oblique_fresnel_both_polarizations() {
        let (n1, n2, th) = (1.0f64, 1.5f64, 0.6f64);
        let ct = (1.0 - (n1 * th.sin() / n2).powi(2)).sqrt();
        let rs = (n1 * th.cos() - n2 * ct) / (n1 * th.cos() + n2 * ct);
        let rp = (n2 * th.cos() - n1 * ct) / (n2 * th.cos() + n1 * ct);
        let s = tmm_raw(c(n1, 0.0), &[], c(n2, 0.0), 800.0, Polarization::Te, th).unwrap();
        let p = tmm_raw(c(n1, 0.0), &[], c(n2, 0.0), 800.0, Polarization::Tm, th).unwrap();
        assert!((s.reflectance - rs * rs).abs() < 1e-14);
        assert!((p.reflectance - rp * rp).abs() < 1e-14);
        assert!((s.reflectance + s.transmittance - 1.0).abs() < 1e-14);
        assert!((p.reflectance + p.transmittance - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thick_absorber_takes_fallback_without_overflow() {
        // k = 5 over 20 um gives |exp(i kz d)| near e^(400)
        let layers = [RawLayer { n: c(1.5, 0.0), d: 100.0 }, RawLayer { n: c(3.0, 5.0), d: 20_000.0 }];
        let r = tmm_raw(c(1.0, 0.0), &layers, c(1.5, 0.0), 1500.0, Polarization::Te, 0.0).unwrap();
        assert!(r.reflectance.is_finite() && r.transmittance >= 0.0 && r.transmittance < 1e-100);
        assert!((r.reflectance + r.transmittance + r.absorptance - 1.0).abs() < 1e-12);
        // half-space limit
        let half = tmm_raw(c(1.0, 0.0), &layers[..1], c(3.0, 5.0), 1500.0, Polarization::Te, 0.0).unwrap();
        assert!((half.reflectance - r.reflectance).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(tmm_raw(c(1.0, 0.1), &[], c(1.5, 0.0), 1000.0, Polarization::Te, 0.0).is_err());
        assert!(tmm_raw(c(1.0, 0.0), &[], c(1.5, 0.0), 1000.0, Polarization::Te, PI / 2.0).is_err());
        let bad = [RawLayer { n: c(1.5, 0.0), d: -1.0 }];
        assert!(tmm_raw(c(1.0, 0.0), &bad, c(1.5, 0.0), 1000.0, Polarization::Te, 0.0).is_err());
    }
}
