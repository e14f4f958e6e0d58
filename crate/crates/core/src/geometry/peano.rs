//! Peano space-filling curves and their tiling into a full active area.

use super::{
    check_width_pitch, compress_collinear, GeometryError, NanowirePath, PathKind, Point, Rect,
    Result,
};

/// Grid points of an order-`order` Peano curve on a `3^order` square grid,
/// starting at (0, 0) and ending at (s-1, s-1). The first step points up.
pub fn peano_cell_points(order: u32) -> Vec<(i64, i64)> {
    let mut pts = vec![(0i64, 0i64)];
    let mut side = 1i64;
    for _ in 0..order {
        let mut next = Vec::with_capacity(pts.len() * 9);
        // Blocks in column-wise serpentine order.
        for bx in 0..3i64 {
            for k in 0..3i64 {
                let by = if bx % 2 == 0 { k } else { 2 - k };
                let flip_x = by % 2 == 1;
                let flip_y = bx % 2 == 1;
                for &(x, y) in &pts {
                    let lx = if flip_x { side - 1 - x } else { x };
                    let ly = if flip_y { side - 1 - y } else { y };
                    next.push((bx * side + lx, by * side + ly));
                }
            }
        }
        pts = next;
        side *= 3;
    }
    pts
}

/// Entry corner of a cell plus the exit corner it implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellVisit {
    pub cx: usize,
    pub cy: usize,
    /// Exit corner: `true` = right / top.
    pub exit_right: bool,
    pub exit_top: bool,
}

/// Order in which to visit an `n x n` array of cells so that every cell is
/// traversed corner-to-opposite-corner and consecutive cells touch at the
/// exit corner.
pub fn tile_order(n: usize) -> Result<Vec<CellVisit>> {
    if n == 0 {
        return Err(GeometryError::NoTilingOrder(0));
    }
    if n % 2 == 1 {
        return Ok(serpentine(n));
    }
    let mut budget = 2_000_000usize;
    for sx in 0..n {
        for sy in 0..n {
            for &(h, v) in &[(false, false), (false, true), (true, false), (true, true)] {
                let mut seen = vec![false; n * n];
                seen[sy * n + sx] = true;
                let mut path = vec![CellVisit { cx: sx, cy: sy, exit_right: h, exit_top: v }];
                if dfs(n, &mut seen, &mut path, &mut budget) {
                    return Ok(path);
                }
                if budget == 0 {
                    return Err(GeometryError::NoTilingOrder(n));
                }
            }
        }
    }
    Err(GeometryError::NoTilingOrder(n))
}

/// Row serpentine; with an even number of horizontal steps per row the
/// vertical exit side returns to the top before each upward move.
fn serpentine(n: usize) -> Vec<CellVisit> {
    let mut out = Vec::with_capacity(n * n);
    for cy in 0..n {
        let rightward = cy % 2 == 0;
        for k in 0..n {
            let cx = if rightward { k } else { n - 1 - k };
            out.push(CellVisit { cx, cy, exit_right: rightward, exit_top: k % 2 == 0 });
        }
    }
    out
}

fn dfs(n: usize, seen: &mut [bool], path: &mut Vec<CellVisit>, budget: &mut usize) -> bool {
    if path.len() == n * n {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let cur = *path.last().unwrap();
    let (x, y) = (cur.cx as i64, cur.cy as i64);
    // Horizontal moves keep the horizontal side and flip the vertical one;
    // vertical moves do the opposite.
    let mut moves = [(0i64, 0i64, false, false); 2];
    moves[0] = if cur.exit_right {
        (x + 1, y, cur.exit_right, !cur.exit_top)
    } else {
        (x - 1, y, cur.exit_right, !cur.exit_top)
    };
    moves[1] = if cur.exit_top {
        (x, y + 1, !cur.exit_right, cur.exit_top)
    } else {
        (x, y - 1, !cur.exit_right, cur.exit_top)
    };
    for &(nx, ny, h, v) in &moves {
        if nx < 0 || ny < 0 || nx >= n as i64 || ny >= n as i64 {
            continue;
        }
        let idx = ny as usize * n + nx as usize;
        if seen[idx] {
            continue;
        }
        seen[idx] = true;
        path.push(CellVisit { cx: nx as usize, cy: ny as usize, exit_right: h, exit_top: v });
        if dfs(n, seen, path, budget) {
            return true;
        }
        path.pop();
        seen[idx] = false;
    }
    false
}

/// Generate a tiling of Peano cells covering the square `area_side`.
///
/// The number of cells per side is `floor(area_side / span)` with
/// `span = 3^order * pitch`; the tiling starts at the origin. With
/// `arced = true`, every corner is filleted with radius
/// `arc_radius_frac * pitch`.
pub fn gen_fractal(
    area_side: f64,
    width: f64,
    pitch: f64,
    order: u32,
    arced: bool,
    arc_radius_frac: f64,
) -> Result<NanowirePath> {
    check_width_pitch(width, pitch)?;
    if !(1..=2).contains(&order) {
        return Err(GeometryError::UnsupportedOrder(order));
    }
    if !(0.0..=0.5).contains(&arc_radius_frac) {
        return Err(GeometryError::ArcRadius(arc_radius_frac));
    }
    let side = 3i64.pow(order);
    let span = side as f64 * pitch;
    let cells = (area_side / span + 1e-9).floor();
    if !area_side.is_finite() || cells < 1.0 {
        return Err(GeometryError::InvalidDimensions(format!(
            "area side {area_side} nm is smaller than one Peano cell span {span} nm"
        )));
    }
    let cells = cells as usize;
    let order_visits = tile_order(cells)?;
    let local = peano_cell_points(order);
    let mut grid_pts: Vec<(i64, i64)> = Vec::with_capacity(local.len() * cells * cells);
    for visit in &order_visits {
        // Entry corner is opposite the exit corner.
        let flip_x = !visit.exit_right;
        let flip_y = !visit.exit_top;
        let ox = visit.cx as i64 * side;
        let oy = visit.cy as i64 * side;
        for &(x, y) in &local {
            let lx = if flip_x { side - 1 - x } else { x };
            let ly = if flip_y { side - 1 - y } else { y };
            grid_pts.push((ox + lx, oy + ly));
        }
    }
    let pts: Vec<Point> = grid_pts
        .iter()
        .map(|&(i, j)| Point::new((i as f64 + 0.5) * pitch, (j as f64 + 0.5) * pitch))
        .collect();
    let skeleton = compress_collinear(&pts);
    let extent = cells as f64 * span;
    let bbox = Rect { min: Point::new(0.0, 0.0), max: Point::new(extent, extent) };
    let (kind, radius) = if arced {
        (PathKind::ArcedFractal, arc_radius_frac * pitch)
    } else {
        (PathKind::StandardFractal, 0.0)
    };
    NanowirePath::from_skeleton(skeleton, radius, width, pitch, kind, bbox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn first_order_visits_every_point_once() {
        let pts = peano_cell_points(1);
        assert_eq!(pts.len(), 9);
        let set: HashSet<_> = pts.iter().collect();
        assert_eq!(set.len(), 9);
        for x in 0..3 {
            assert_eq!(pts.iter().filter(|p| p.0 == x).count(), 3);
            assert_eq!(pts.iter().filter(|p| p.1 == x).count(), 3);
        }
        for w in pts.windows(2) {
            assert_eq!((w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs(), 1);
        }
    }

    #[test]
    fn second_order_is_a_unit_step_walk_corner_to_corner() {
        let pts = peano_cell_points(2);
        assert_eq!(pts.len(), 81);
        assert_eq!(pts[0], (0, 0));
        assert_eq!(pts[80], (8, 8));
        assert_eq!(pts.iter().collect::<HashSet<_>>().len(), 81);
        for w in pts.windows(2) {
            assert_eq!((w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs(), 1);
        }
    }

    /// Every move leaves through the shared exit corner.
    fn chains(order: &[CellVisit]) -> bool {
        order.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let ex = a.cx + a.exit_right as usize;
            let ey = a.cy + a.exit_top as usize;
            let nx = b.cx + !b.exit_right as usize;
            let ny = b.cy + !b.exit_top as usize;
            (ex, ey) == (nx, ny)
        })
    }

    #[test]
    fn tile_orders_exist_and_chain() {
        for n in 1..=10 {
            let order = tile_order(n).unwrap();
            assert_eq!(order.len(), n * n);
            let distinct: HashSet<_> = order.iter().map(|v| (v.cx, v.cy)).collect();
            assert_eq!(distinct.len(), n * n);
            assert!(chains(&order), "n = {n}");
            for w in order.windows(2) {
                let dx = w[1].cx as i64 - w[0].cx as i64;
                let dy = w[1].cy as i64 - w[0].cy as i64;
                assert_eq!(dx.abs() + dy.abs(), 1);
            }
        }
        let one = tile_order(1).unwrap();
        assert!(one[0].exit_right && one[0].exit_top);
    }

    #[test]
    fn full_device_has_64_cells() {
        let path = gen_fractal(10_200.0, 40.0, 129.0, 2, true, 0.5).unwrap();
        assert_eq!(path.kind, PathKind::ArcedFractal);
        assert!((path.fill_factor() - 0.31).abs() < 1e-3);
        let span = 9.0 * 129.0;
        assert!((path.bounding_box.width() - 8.0 * span).abs() < 1e-9);
        // 64 cells of 81 points each, every consecutive pair of points one pitch apart
        let std = gen_fractal(10_200.0, 40.0, 129.0, 2, false, 0.0).unwrap();
        let steps = std.centerline_length() / 129.0;
        assert!((steps - (64.0 * 81.0 - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            gen_fractal(1000.0, 40.0, 129.0, 3, true, 0.5),
            Err(GeometryError::UnsupportedOrder(3))
        ));
        assert!(matches!(
            gen_fractal(10_200.0, 40.0, 129.0, 2, true, 0.6),
            Err(GeometryError::ArcRadius(_))
        ));
        assert!(gen_fractal(1000.0, 40.0, 129.0, 2, true, 0.5).is_err());
    }
}
