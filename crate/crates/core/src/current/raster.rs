use std::collections::VecDeque;

use crate::geometry::{NanowirePath, Point, PolygonSet};

use super::{CurrentError, Result, MIN_CELLS_PER_WIDTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl std::str::FromStr for Side {
    type Err = CurrentError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            other => Err(CurrentError::Contact(format!("unknown side `{other}`"))),
        }
    }
}

/// A wire end that current enters or leaves through. `span` is the extent
/// of the end face along the side (x for bottom/top, y for left/right).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContactSpec {
    pub side: Side,
    pub span: (f64, f64),
}

impl ContactSpec {
    fn from_end(p: Point, outward: Point, width: f64) -> Self {
        let h = width / 2.0;
        if outward.y.abs() >= outward.x.abs() {
            let side = if outward.y < 0.0 { Side::Bottom } else { Side::Top };
            ContactSpec { side, span: (p.x - h, p.x + h) }
        } else {
            let side = if outward.x < 0.0 { Side::Left } else { Side::Right };
            ContactSpec { side, span: (p.y - h, p.y + h) }
        }
    }

    /// Inlet and outlet at the two ends of `path`.
    pub fn for_path(path: &NanowirePath) -> (ContactSpec, ContactSpec) {
        let first = path.segments[0];
        let last = path.segments[path.segments.len() - 1];
        (
            Self::from_end(path.start(), first.start_tangent() * -1.0, path.width),
            Self::from_end(path.end(), last.end_tangent(), path.width),
        )
    }

    /// Guess contacts from the extreme vertices of a layout: the opposite
    /// pair of sides whose extreme edges are narrowest.
    pub fn auto(polys: &PolygonSet) -> Result<(ContactSpec, ContactSpec)> {
        let bbox = polys
            .bounding_box()
            .ok_or_else(|| CurrentError::Contact("empty layout".into()))?;
        let verts: Vec<Point> = polys.loops.iter().flat_map(|l| l.vertices.iter().copied()).collect();
        let span_at = |pick: &dyn Fn(&Point) -> Option<f64>| -> (f64, f64) {
            let vals: Vec<f64> = verts.iter().filter_map(pick).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let eps = 1e-6;
        let bottom = span_at(&|p| ((p.y - bbox.min.y).abs() < eps).then_some(p.x));
        let top = span_at(&|p| ((p.y - bbox.max.y).abs() < eps).then_some(p.x));
        let left = span_at(&|p| ((p.x - bbox.min.x).abs() < eps).then_some(p.y));
        let right = span_at(&|p| ((p.x - bbox.max.x).abs() < eps).then_some(p.y));
        let len = |s: (f64, f64)| s.1 - s.0;
        let vertical = len(bottom).max(len(top));
        let horizontal = len(left).max(len(right));
        let (a, b) = if vertical <= horizontal {
            (ContactSpec { side: Side::Bottom, span: bottom }, ContactSpec { side: Side::Top, span: top })
        } else {
            (ContactSpec { side: Side::Left, span: left }, ContactSpec { side: Side::Right, span: right })
        };
        if !(len(a.span) > 0.0 && len(b.span) > 0.0) {
            return Err(CurrentError::Contact("no wire end faces on the layout extremes".into()));
        }
        Ok((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Wire,
    /// Insulating background, labeled by bank (0 or 1).
    Bank(u8),
    /// Background beyond a contact; wire faces toward it are Neumann.
    Barrier,
}

/// Neighbour directions in `face_dist` order.
pub const DIRS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub nx: usize,
    pub ny: usize,
    pub cell_size: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: Point,
    pub cells: Vec<Cell>,
    /// Distance from each cell centre to the wire edge toward the
    /// neighbours `[-x, +x, -y, +y]`. Equal to `cell_size` across wire-wire
    /// links; meaningful only for wire cells.
    pub face_dist: Vec<[f64; 4]>,
    pub inlet: Vec<usize>,
    pub outlet: Vec<usize>,
    pub width: f64,
}

impl DomainGrid {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_size,
            self.origin.y + (j as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn is_wire(&self, k: usize) -> bool {
        self.cells[k] == Cell::Wire
    }

    pub fn mask(&self) -> Vec<bool> {
        self.cells.iter().map(|c| *c == Cell::Wire).collect()
    }

    pub fn wire_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Wire).count()
    }

    pub fn neighbor(&self, k: usize, dir: usize) -> Option<usize> {
        let (i, j) = self.coords(k);
        let (di, dj) = DIRS[dir];
        let ni = i as i64 + di;
        let nj = j as i64 + dj;
        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
            None
        } else {
            Some(self.idx(ni as usize, nj as usize))
        }
    }
}

/// Bucket edge crossings of the scanlines `c0 + (k + 0.5) h` along one axis.
fn crossings(polys: &PolygonSet, c0: f64, h: f64, n: usize, horizontal: bool) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); n];
    for lp in &polys.loops {
        for (a, b) in lp.edges() {
            // project so that the scan coordinate is `s` and the crossing is `t`
            let (sa, ta, sb, tb) = if horizontal { (a.y, a.x, b.y, b.x) } else { (a.x, a.y, b.x, b.y) };
            if sa == sb {
                continue;
            }
            let (lo, hi) = (sa.min(sb), sa.max(sb));
            let k0 = ((lo - c0) / h - 0.5).ceil().max(0.0) as usize;
            let k1 = ((hi - c0) / h - 0.5).floor();
            if k1 < 0.0 {
                continue;
            }
            let k1 = (k1 as usize).min(n.saturating_sub(1));
            for (k, row) in out.iter_mut().enumerate().take(k1 + 1).skip(k0) {
                let s = c0 + (k as f64 + 0.5) * h;
                if (sa <= s) != (sb <= s) {
                    row.push(ta + (s - sa) * (tb - ta) / (sb - sa));
                }
            }
        }
    }
    for row in &mut out {
        row.sort_by(f64::total_cmp);
    }
    out
}

/// Rasterize `polys` by cell-centre containment and label contacts and banks.
pub fn rasterize(
    polys: &PolygonSet,
    cell_size: f64,
    inlet: ContactSpec,
    outlet: ContactSpec,
) -> Result<DomainGrid> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(CurrentError::CellSize(cell_size));
    }
    if polys.width > 0.0 && polys.width / cell_size < MIN_CELLS_PER_WIDTH - 1e-9 {
        return Err(CurrentError::Resolution { width: polys.width, cell: cell_size });
    }
    let bbox = polys
        .bounding_box()
        .ok_or_else(|| CurrentError::Disconnected("empty layout".into()))?;
    let h = cell_size;
    let pad = 2usize;
    let nx = (bbox.width() / h).ceil() as usize + 2 * pad;
    let ny = (bbox.height() / h).ceil() as usize + 2 * pad;
    let origin = Point::new(bbox.min.x - pad as f64 * h, bbox.min.y - pad as f64 * h);

    let rows = crossings(polys, origin.y, h, ny, true);
    let cols = crossings(polys, origin.x, h, nx, false);

    let mut cells = vec![Cell::Bank(0); nx * ny];
    let mut face_dist = vec![[h; 4]; nx * ny];
    let cx = |i: usize| origin.x + (i as f64 + 0.5) * h;
    let cy = |j: usize| origin.y + (j as f64 + 0.5) * h;
    for (j, xs) in rows.iter().enumerate() {
        let mut p = 0;
        for i in 0..nx {
            let x = cx(i);
            while p < xs.len() && xs[p] < x {
                p += 1;
            }
            if p % 2 == 1 {
                cells[j * nx + i] = Cell::Wire;
            }
        }
    }
    let clamp = |d: f64| d.clamp(1e-3 * h, h);
    for (j, xs) in rows.iter().enumerate() {
        for i in 0..nx {
            let k = j * nx + i;
            if cells[k] != Cell::Wire {
                continue;
            }
            let x = cx(i);
            let p = xs.partition_point(|&v| v < x);
            if i > 0 && cells[k - 1] != Cell::Wire {
                face_dist[k][0] = if p > 0 { clamp(x - xs[p - 1]) } else { h / 2.0 };
            }
            if i + 1 < nx && cells[k + 1] != Cell::Wire {
                face_dist[k][1] = if p < xs.len() { clamp(xs[p] - x) } else { h / 2.0 };
            }
        }
    }
    for (i, ys) in cols.iter().enumerate() {
        for j in 0..ny {
            let k = j * nx + i;
            if cells[k] != Cell::Wire {
                continue;
            }
            let y = cy(j);
            let p = ys.partition_point(|&v| v < y);
            if j > 0 && cells[k - nx] != Cell::Wire {
                face_dist[k][2] = if p > 0 { clamp(y - ys[p - 1]) } else { h / 2.0 };
            }
            if j + 1 < ny && cells[k + nx] != Cell::Wire {
                face_dist[k][3] = if p < ys.len() { clamp(ys[p] - y) } else { h / 2.0 };
            }
        }
    }

    let mut grid = DomainGrid {
        nx,
        ny,
        cell_size: h,
        origin,
        cells,
        face_dist,
        inlet: Vec::new(),
        outlet: Vec::new(),
        width: polys.width,
    };
    grid.inlet = place_contact(&mut grid, inlet)?;
    grid.outlet = place_contact(&mut grid, outlet)?;
    check_wire_connected(&grid)?;
    label_banks(&mut grid)?;
    Ok(grid)
}

/// Mark the outermost wire cell of every row/column inside the span as a
/// contact cell and everything beyond it as barrier.
fn place_contact(grid: &mut DomainGrid, spec: ContactSpec) -> Result<Vec<usize>> {
    let (lo, hi) = (spec.span.0.min(spec.span.1), spec.span.0.max(spec.span.1));
    let (nx, ny) = (grid.nx, grid.ny);
    let along_x = matches!(spec.side, Side::Bottom | Side::Top);
    let lines: Vec<usize> = if along_x {
        (0..nx).filter(|&i| (lo..=hi).contains(&grid.center(i, 0).x)).collect()
    } else {
        (0..ny).filter(|&j| (lo..=hi).contains(&grid.center(0, j).y)).collect()
    };
    if lines.is_empty() {
        return Err(CurrentError::Contact(format!(
            "{:?} contact span [{lo}, {hi}] covers no grid line",
            spec.side
        )));
    }
    let mut out = Vec::with_capacity(lines.len());
    for &l in &lines {
        let walk: Vec<usize> = match spec.side {
            Side::Bottom => (0..ny).map(|j| grid.idx(l, j)).collect(),
            Side::Top => (0..ny).rev().map(|j| grid.idx(l, j)).collect(),
            Side::Left => (0..nx).map(|i| grid.idx(i, l)).collect(),
            Side::Right => (0..nx).rev().map(|i| grid.idx(i, l)).collect(),
        };
        let first = walk.iter().position(|&k| grid.cells[k] == Cell::Wire);
        let Some(first) = first else { continue };
        for &k in &walk[..first] {
            grid.cells[k] = Cell::Barrier;
        }
        out.push(walk[first]);
    }
    if out.is_empty() {
        return Err(CurrentError::Contact(format!(
            "{:?} contact span [{lo}, {hi}] touches no wire cell",
            spec.side
        )));
    }
    Ok(out)
}

fn check_wire_connected(grid: &DomainGrid) -> Result<()> {
    let mut seen = vec![false; grid.cells.len()];
    let mut queue: VecDeque<usize> = grid.inlet.iter().copied().collect();
    for &k in &grid.inlet {
        seen[k] = true;
    }
    let mut reached = grid.inlet.len();
    while let Some(k) = queue.pop_front() {
        for dir in 0..4 {
            if let Some(n) = grid.neighbor(k, dir) {
                if !seen[n] && grid.cells[n] == Cell::Wire {
                    seen[n] = true;
                    reached += 1;
                    queue.push_back(n);
                }
            }
        }
    }
    if !grid.outlet.iter().any(|&k| seen[k]) {
        return Err(CurrentError::Disconnected("outlet is not reachable from the inlet".into()));
    }
    let total = grid.wire_count();
    if reached != total {
        return Err(CurrentError::Disconnected(format!(
            "{} of {} wire cells are not connected to the contacts",
            total - reached,
            total
        )));
    }
    Ok(())
}

/// Label 8-connected background components; exactly two are required.
fn label_banks(grid: &mut DomainGrid) -> Result<()> {
    let n = grid.cells.len();
    let mut label = vec![usize::MAX; n];
    let mut count = 0usize;
    for start in 0..n {
        if label[start] != usize::MAX || !matches!(grid.cells[start], Cell::Bank(_)) {
            continue;
        }
        label[start] = count;
        let mut stack = vec![start];
        while let Some(k) = stack.pop() {
            let (i, j) = grid.coords(k);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let ni = i as i64 + di;
                    let nj = j as i64 + dj;
                    if ni < 0 || nj < 0 || ni >= grid.nx as i64 || nj >= grid.ny as i64 {
                        continue;
                    }
                    let m = grid.idx(ni as usize, nj as usize);
                    if label[m] == usize::MAX && matches!(grid.cells[m], Cell::Bank(_)) {
                        label[m] = count;
                        stack.push(m);
                    }
                }
            }
        }
        count += 1;
    }
    if count != 2 {
        return Err(CurrentError::Banks(count));
    }
    for k in 0..n {
        if label[k] != usize::MAX {
            grid.cells[k] = Cell::Bank(label[k] as u8);
        }
    }
    Ok(())
}
