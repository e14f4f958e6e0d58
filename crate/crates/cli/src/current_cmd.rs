use fracsnap_core::current::{
    field_csv, field_svg, sweep_fill_factor, unit_crowding, SolverMethod, SolverOptions, SweepPoint, UnitOptions,
    DEFAULT_XI_NM,
};
use fracsnap_core::geometry::{
    export_layout, gen_fractal, gen_meander, inflate, LayoutFormat, PathKind, DEFAULT_ARC_RADIUS_FRAC,
    DEFAULT_ARC_TOLERANCE_NM,
};
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, num};
use crate::{compute, Artifacts, CliError, Command, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: PathKind,
    /// Side of the square active area, nm.
    pub side_nm: f64,
    pub width_nm: f64,
    /// Sets the pitch as `width / fill_factor`.
    pub fill_factor: f64,
    /// Peano cell order for fractal layouts.
    pub order: u32,
    pub arc_radius_frac: f64,
    pub arc_tolerance_nm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            kind: PathKind::ArcedFractal,
            side_nm: 10_200.0,
            width_nm: 40.0,
            fill_factor: 0.31,
            order: 2,
            arc_radius_frac: DEFAULT_ARC_RADIUS_FRAC,
            arc_tolerance_nm: DEFAULT_ARC_TOLERANCE_NM,
        }
    }
}

#[derive(Serialize)]
struct GeometrySummary {
    kind: &'static str,
    pitch_nm: f64,
    fill_factor_nominal: f64,
    fill_factor_layout: f64,
    centerline_length_nm: f64,
    corner_count: usize,
    corner_radius_nm: f64,
    polygon_area_nm2: f64,
    vertex_count: usize,
}

impl Command for GeometryConfig {
    fn execute(&self) -> Result<Artifacts> {
        if !(self.fill_factor > 0.0 && self.fill_factor < 1.0) {
            return Err(CliError::Usage(format!("fill_factor {} outside (0, 1)", self.fill_factor)));
        }
        let pitch = self.width_nm / self.fill_factor;
        let path = match self.kind {
            PathKind::Meander => gen_meander(self.side_nm, self.width_nm, pitch),
            PathKind::StandardFractal => gen_fractal(self.side_nm, self.width_nm, pitch, self.order, false, 0.0),
            PathKind::ArcedFractal => {
                gen_fractal(self.side_nm, self.width_nm, pitch, self.order, true, self.arc_radius_frac)
            }
        }
        .map_err(compute)?;
        let polys = inflate(&path, self.arc_tolerance_nm).map_err(compute)?;
        let mut out = Artifacts::new();
        out.insert("layout.svg", export_layout(&polys, LayoutFormat::svg()));
        out.insert("layout.json", export_layout(&polys, LayoutFormat::LayoutJson));
        out.json(
            "geometry.json",
            &GeometrySummary {
                kind: self.kind.label(),
                pitch_nm: pitch,
                fill_factor_nominal: self.fill_factor,
                fill_factor_layout: polys.area() / path.bounding_box.area(),
                centerline_length_nm: path.centerline_length(),
                corner_count: path.corner_count(),
                corner_radius_nm: path.corner_radius,
                polygon_area_nm2: polys.area(),
                vertex_count: polys.vertex_count(),
            },
        )?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveCurrentConfig {
    pub kind: PathKind,
    pub width_nm: f64,
    pub fill_factor: f64,
    /// Grid spacing; `width / 10` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_size_nm: Option<f64>,
    pub xi_nm: f64,
    pub tol: f64,
    pub solver: SolverMethod,
    pub arc_radius_frac: f64,
    pub arc_tolerance_nm: f64,
    /// Extra fill factors to sweep; empty for none.
    pub sweep: Vec<f64>,
}

impl Default for SolveCurrentConfig {
    fn default() -> Self {
        SolveCurrentConfig {
            kind: PathKind::ArcedFractal,
            width_nm: 40.0,
            fill_factor: 0.31,
            cell_size_nm: None,
            xi_nm: DEFAULT_XI_NM,
            tol: 1e-8,
            solver: SolverMethod::Auto,
            arc_radius_frac: DEFAULT_ARC_RADIUS_FRAC,
            arc_tolerance_nm: DEFAULT_ARC_TOLERANCE_NM,
            sweep: Vec::new(),
        }
    }
}

impl SolveCurrentConfig {
    fn unit_options(&self) -> UnitOptions {
        UnitOptions {
            cell_size: self.cell_size_nm,
            xi: self.xi_nm,
            tol: self.tol,
            arc_tolerance: self.arc_tolerance_nm,
            arc_radius_frac: self.arc_radius_frac,
            solver: SolverOptions { method: self.solver, ..SolverOptions::default() },
        }
    }
}

#[derive(Serialize)]
struct CrowdingSummary<'a> {
    kind: &'static str,
    width_nm: f64,
    pitch_nm: f64,
    fill_factor: f64,
    crowding: &'a fracsnap_core::current::CrowdingResult,
    nx: usize,
    ny: usize,
    wire_cells: usize,
    iterations: usize,
    residual: f64,
    solver: SolverMethod,
}

pub(crate) fn sweep_csv(points: &[SweepPoint]) -> Vec<u8> {
    csv_bytes(
        &["fill_factor", "ratio_isw_ic", "j_peak", "error"],
        points.iter().map(|p| {
            vec![
                num(p.fill_factor),
                p.ratio_isw_ic.map_or(String::new(), num),
                p.j_peak.map_or(String::new(), num),
                p.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

impl Command for SolveCurrentConfig {
    fn resolve(&mut self) -> Result<()> {
        if self.cell_size_nm.is_none() {
            self.cell_size_nm = Some(self.width_nm / 10.0);
        }
        Ok(())
    }

    fn execute(&self) -> Result<Artifacts> {
        if !(self.fill_factor > 0.0 && self.fill_factor < 1.0) {
            return Err(CliError::Usage(format!("fill_factor {} outside (0, 1)", self.fill_factor)));
        }
        let opts = self.unit_options();
        let pitch = self.width_nm / self.fill_factor;
        let (res, field) = unit_crowding(self.kind, self.width_nm, pitch, &opts).map_err(compute)?;
        let mut out = Artifacts::new();
        out.json(
            "crowding.json",
            &CrowdingSummary {
                kind: self.kind.label(),
                width_nm: self.width_nm,
                pitch_nm: pitch,
                fill_factor: self.fill_factor,
                crowding: &res,
                nx: field.grid.nx,
                ny: field.grid.ny,
                wire_cells: field.grid.wire_count(),
                iterations: field.iterations,
                residual: field.residual,
                solver: field.method,
            },
        )?;
        out.insert("field.csv", field_csv(&field, self.width_nm));
        out.insert("field.svg", field_svg(&field, self.width_nm));
        if !self.sweep.is_empty() {
            let pts = sweep_fill_factor(self.kind, &self.sweep, self.width_nm, &opts);
            out.insert("sweep.csv", sweep_csv(&pts));
        }
        Ok(out)
    }
}
