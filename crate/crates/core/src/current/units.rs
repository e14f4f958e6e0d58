use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{
    compress_collinear, inflate, meander_skeleton, peano_cell_points, NanowirePath, PathKind,
    Point, Rect, DEFAULT_ARC_RADIUS_FRAC, DEFAULT_ARC_TOLERANCE_NM,
};

use super::crowding::{crowding, CrowdingResult};
use super::raster::{rasterize, ContactSpec};
use super::solve::{solve_stream_with, FieldGrid, SolverOptions};
use super::{CurrentError, Result, DEFAULT_XI_NM};

#[derive(Debug, Clone, Copy)]
pub struct UnitOptions {
    /// Defaults to `width / 10`.
    pub cell_size: Option<f64>,
    pub xi: f64,
    pub tol: f64,
    pub arc_tolerance: f64,
    pub arc_radius_frac: f64,
    pub solver: SolverOptions,
}

impl Default for UnitOptions {
    fn default() -> Self {
        UnitOptions {
            cell_size: None,
            xi: DEFAULT_XI_NM,
            tol: 1e-8,
            arc_tolerance: DEFAULT_ARC_TOLERANCE_NM,
            arc_radius_frac: DEFAULT_ARC_RADIUS_FRAC,
            solver: SolverOptions::default(),
        }
    }
}

fn lead_length(width: f64, pitch: f64) -> f64 {
    (4.0 * pitch).max(10.0 * width)
}

fn bbox_of(pts: &[Point], width: f64) -> Rect {
    let r = Rect::from_points(pts.iter()).expect("non-empty skeleton");
    let h = width / 2.0;
    Rect { min: Point::new(r.min.x - h, r.min.y - h), max: Point::new(r.max.x + h, r.max.y + h) }
}

/// Smallest periodic piece of each geometry with straight leads on both
/// ends: one meander period (three lines, two U-turns) or one second-order
/// Peano cell entered from below and left upward.
pub fn representative_unit(
    kind: PathKind,
    width: f64,
    pitch: f64,
    arc_radius_frac: f64,
) -> Result<NanowirePath> {
    let lead = lead_length(width, pitch);
    let (pts, radius) = match kind {
        PathKind::Meander => {
            let run = 4.0 * pitch;
            let mut pts = meander_skeleton(3, pitch, 0.0, run);
            // outer lines run past the opposite U-turn before reaching the contacts
            let overhang = lead + pitch / 2.0;
            pts[0].x = -overhang;
            let last = pts.len() - 1;
            pts[last].x = run + overhang;
            (pts, pitch / 2.0)
        }
        PathKind::StandardFractal | PathKind::ArcedFractal => {
            let cell: Vec<Point> = peano_cell_points(2)
                .into_iter()
                .map(|(i, j)| Point::new((i as f64 + 0.5) * pitch, (j as f64 + 0.5) * pitch))
                .collect();
            let first = cell[0];
            let last = cell[cell.len() - 1];
            let mut pts = Vec::with_capacity(cell.len() + 2);
            pts.push(Point::new(first.x, first.y - lead));
            pts.extend(cell);
            pts.push(Point::new(last.x, last.y + lead));
            let radius = if kind == PathKind::ArcedFractal { arc_radius_frac * pitch } else { 0.0 };
            (compress_collinear(&pts), radius)
        }
    };
    let bbox = bbox_of(&pts, width);
    Ok(NanowirePath::from_skeleton(pts, radius, width, pitch, kind, bbox)?)
}

/// Solve the representative unit and return its crowding figure and field.
pub fn unit_crowding(
    kind: PathKind,
    width: f64,
    pitch: f64,
    opts: &UnitOptions,
) -> Result<(CrowdingResult, FieldGrid)> {
    let path = representative_unit(kind, width, pitch, opts.arc_radius_frac)?;
    let polys = inflate(&path, opts.arc_tolerance)?;
    let (inlet, outlet) = ContactSpec::for_path(&path);
    let cell = opts.cell_size.unwrap_or(width / 10.0);
    let grid = rasterize(&polys, cell, inlet, outlet)?;
    let field = solve_stream_with(&grid, opts.tol, opts.solver)?;
    let result = crowding(&field, width, opts.xi)?;
    Ok((result, field))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub fill_factor: f64,
    pub ratio_isw_ic: Option<f64>,
    pub j_peak: Option<f64>,
    /// Set when this point failed; the sweep continues past it.
    pub error: Option<String>,
}

/// Crowding ratio versus fill factor at fixed width. Points are solved in
/// parallel and returned in input order.
pub fn sweep_fill_factor(
    kind: PathKind,
    ff_list: &[f64],
    width: f64,
    opts: &UnitOptions,
) -> Vec<SweepPoint> {
    ff_list
        .par_iter()
        .map(|&ff| {
            let outcome = if ff > 0.05 && ff < 0.8 {
                unit_crowding(kind, width, width / ff, opts).map(|(r, _)| r)
            } else {
                Err(CurrentError::SweepFillFactor(ff))
            };
            match outcome {
                Ok(r) => SweepPoint {
                    fill_factor: ff,
                    ratio_isw_ic: Some(r.ratio_isw_ic),
                    j_peak: Some(r.j_peak),
                    error: None,
                },
                Err(e) => SweepPoint { fill_factor: ff, ratio_isw_ic: None, j_peak: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_have_leads_and_inflate_cleanly() {
        for kind in [PathKind::Meander, PathKind::StandardFractal, PathKind::ArcedFractal] {
            let p = representative_unit(kind, 40.0, 129.0, 0.5).unwrap();
            let polys = inflate(&p, 0.5).unwrap();
            assert_eq!(polys.loops.len(), 1);
            let lead = p.segments[0].length();
            assert!(lead >= 400.0, "{kind:?} lead {lead}");
        }
    }

    #[test]
    fn sweep_flags_out_of_range_points() {
        let pts = sweep_fill_factor(PathKind::Meander, &[0.9], 40.0, &UnitOptions::default());
        assert!(pts[0].error.is_some() && pts[0].ratio_isw_ic.is_none());
    }
}
