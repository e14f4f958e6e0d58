use num_complex::Complex64;

use super::{OpticsError, Result};

/// Zeroth-order effective permittivities of a wire grating with metal
/// fraction `f`, from permittivities: E along the wires sees the arithmetic
/// mean, E across them the harmonic mean.
pub fn emt_permittivities(f: f64, eps_m: Complex64, eps_h: Complex64) -> Result<(Complex64, Complex64)> {
    if !(0.0..=1.0).contains(&f) {
        return Err(OpticsError::FillFactor(f));
    }
    let par = eps_m * f + eps_h * (1.0 - f);
    // exact at the end points, where the harmonic form would lose bits
    let perp = if f == 0.0 {
        eps_h
    } else if f == 1.0 {
        eps_m
    } else {
        1.0 / (f / eps_m + (1.0 - f) / eps_h)
    };
    Ok((par, perp))
}

/// As [`emt_permittivities`], taking complex refractive indices `n + ik`.
/// Returns permittivities `(eps_parallel, eps_perp)`.
pub fn emt_indices(f: f64, metal: Complex64, host: Complex64) -> Result<(Complex64, Complex64)> {
    emt_permittivities(f, metal * metal, host * host)
}

/// Complex index with non-negative imaginary part for a permittivity.
pub(crate) fn index_of(eps: Complex64) -> Complex64 {
    let n = eps.sqrt();
    if n.im < 0.0 {
        -n
    } else {
        n
    }
}
