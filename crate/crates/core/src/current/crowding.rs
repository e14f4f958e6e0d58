use serde::Serialize;

use super::raster::Cell;
use super::solve::FieldGrid;
use super::{CurrentError, GridLocation, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CrowdingResult {
    /// Peak disc-averaged |J| (1/nm per unit current).
    pub j_peak: f64,
    /// |J| of a straight wire of the same width, `1 / width`.
    pub j_uniform: f64,
    /// `j_uniform / j_peak`, capped at 1.
    pub ratio_isw_ic: f64,
    pub peak_location: GridLocation,
    pub xi: f64,
}

/// Point samples covering a disc of radius `xi` on a square lattice.
fn disc_samples(xi: f64, spacing: f64) -> Vec<(f64, f64)> {
    let n = (xi / spacing).ceil() as i64;
    let mut out = Vec::new();
    for b in -n..=n {
        for a in -n..=n {
            let (x, y) = ((a as f64) * spacing, (b as f64) * spacing);
            if x * x + y * y <= xi * xi {
                out.push((x, y));
            }
        }
    }
    out
}

/// |J| at a point, or `None` outside the wire. The wire edge inside each
/// cell is rebuilt from the sub-cell boundary distances, so samples in a
/// non-wire cell can still fall on the wire side of the edge.
fn sample(field: &FieldGrid, x: f64, y: f64) -> Option<f64> {
    let g = &field.grid;
    let h = g.cell_size;
    let fi = ((x - g.origin.x) / h).floor();
    let fj = ((y - g.origin.y) / h).floor();
    if fi < 0.0 || fj < 0.0 || fi >= g.nx as f64 || fj >= g.ny as f64 {
        return None;
    }
    let (i, j) = (fi as usize, fj as usize);
    let k = g.idx(i, j);
    let c = g.center(i, j);
    let (ox, oy) = (x - c.x, y - c.y);
    if g.is_wire(k) {
        let fd = &g.face_dist[k];
        let outside = |dir: usize, along: f64| {
            along > fd[dir] && g.neighbor(k, dir).is_some_and(|m| !g.is_wire(m))
        };
        if outside(0, -ox) || outside(1, ox) || outside(2, -oy) || outside(3, oy) {
            return None;
        }
        return Some(field.j_mag(k));
    }
    // non-wire cell: claimed by a wire neighbour whose edge lies beyond the sample
    for (dir, along) in [(0usize, -ox), (1, ox), (2, -oy), (3, oy)] {
        let Some(m) = g.neighbor(k, dir) else { continue };
        if !g.is_wire(m) {
            continue;
        }
        // the neighbour faces back toward this cell through the opposite direction
        let back = dir ^ 1;
        if h - along <= g.face_dist[m][back] {
            return Some(field.j_mag(m));
        }
    }
    None
}

/// Peak of |J| averaged over discs of radius `xi` centred on every wire
/// cell that touches an insulating bank. The average is taken over the part
/// of the disc covered by the wire.
pub fn crowding(field: &FieldGrid, width: f64, xi: f64) -> Result<CrowdingResult> {
    let g = &field.grid;
    let h = g.cell_size;
    if !(xi >= h) {
        return Err(CurrentError::Xi { xi, cell: h });
    }
    if !(width > 0.0) {
        return Err(CurrentError::Resolution { width, cell: h });
    }
    let offsets = disc_samples(xi, (h / 4.0).min(xi / 8.0));
    let mut best = (f64::NEG_INFINITY, 0usize);
    for k in 0..g.cells.len() {
        if !g.is_wire(k) {
            continue;
        }
        let edge = (0..4).any(|d| matches!(g.neighbor(k, d).map(|m| g.cells[m]), Some(Cell::Bank(_))));
        if !edge {
            continue;
        }
        let (i, j) = g.coords(k);
        let c = g.center(i, j);
        let mut sum = 0.0;
        let mut count = 0usize;
        for &(dx, dy) in &offsets {
            if let Some(v) = sample(field, c.x + dx, c.y + dy) {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let avg = sum / count as f64;
        if avg > best.0 {
            best = (avg, k);
        }
    }
    if !best.0.is_finite() {
        return Err(CurrentError::Disconnected("no wire cell borders an insulating bank".into()));
    }
    let (j_peak, k) = best;
    let (i, j) = g.coords(k);
    let j_uniform = 1.0 / width;
    Ok(CrowdingResult {
        j_peak,
        j_uniform,
        ratio_isw_ic: (j_uniform / j_peak).min(1.0),
        peak_location: GridLocation { i, j, position: g.center(i, j) },
        xi,
    })
}
