//! Design and analysis toolkit for superconducting nanowire single-photon
//! detectors with fractal layouts.

pub mod geometry;
pub mod current;
pub mod optics;
pub mod coupling;
pub mod circuit;
pub mod analysis;
