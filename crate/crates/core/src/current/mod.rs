//! Thin-film current flow in a nanowire domain via the stream function.
//!
//! The wire is rasterized onto a square grid. Inside the wire the stream
//! function obeys Laplace's equation, the two insulating banks carry the
//! values 0 and 1, and the contacts are Neumann faces. The sheet current is
//! `J = (dpsi/dy, -dpsi/dx)`, normalized to unit total current, so a straight
//! wire of width `w` carries `|J| = 1/w`.

mod crowding;
mod export;
mod raster;
mod solve;
mod units;

use thiserror::Error;

use crate::geometry::{GeometryError, Point};

pub use crowding::{crowding, CrowdingResult};
pub use export::{field_csv, field_svg};
pub use raster::{rasterize, Cell, ContactSpec, DomainGrid, Side};
pub use solve::{solve_stream, solve_stream_with, FieldGrid, SolverMethod, SolverOptions};
pub use units::{
    representative_unit, sweep_fill_factor, unit_crowding, SweepPoint, UnitOptions,
};

/// Default disc radius for peak-current regularization.
pub const DEFAULT_XI_NM: f64 = 5.0;
/// Smallest allowed number of cells across the wire width.
pub const MIN_CELLS_PER_WIDTH: f64 = 8.0;

#[derive(Debug, Error)]
pub enum CurrentError {
    #[error("cell size {cell} nm too coarse for width {width} nm (need at least 8 cells across)")]
    Resolution { width: f64, cell: f64 },
    #[error("invalid cell size {0}")]
    CellSize(f64),
    #[error("domain is disconnected: {0}")]
    Disconnected(String),
    #[error("contact error: {0}")]
    Contact(String),
    #[error("expected exactly two insulating banks, found {0}")]
    Banks(usize),
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize, history: Vec<f64> },
    #[error("tolerance {0} outside (0, 1e-3]")]
    Tolerance(f64),
    #[error("regularization length {xi} nm smaller than cell size {cell} nm")]
    Xi { xi: f64, cell: f64 },
    #[error("fill factor {0} outside (0.05, 0.8)")]
    SweepFillFactor(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, CurrentError>;

/// Grid coordinates and physical position of a cell.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridLocation {
    pub i: usize,
    pub j: usize,
    pub position: Point,
}
