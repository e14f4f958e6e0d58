//! Offset a centerline by ±width/2 into a closed outline.

use std::collections::HashMap;

use super::{GeometryError, Loop, NanowirePath, Point, PolygonSet, Result, Segment};

/// Vertices are snapped to 0.001 nm, computed as k / 1000 so the result is
/// the double nearest the decimal; fixed 3-decimal layout files then
/// round-trip exactly.
fn snap(v: f64) -> f64 {
    let s = (v * 1000.0).round() / 1000.0;
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// One side of the outline: vertices plus the centerline segment that owns
/// the edge leaving each vertex.
struct Side {
    pts: Vec<Point>,
    owner: Vec<usize>,
}

impl Side {
    fn push(&mut self, p: Point, owner: usize) {
        self.pts.push(p);
        self.owner.push(owner);
    }
}

fn arc_steps(radius: f64, sweep: f64, tol: f64) -> usize {
    let ratio = (1.0 - tol / radius).clamp(-1.0, 1.0);
    let max_step = 2.0 * ratio.acos();
    if max_step <= 0.0 {
        return 1;
    }
    ((sweep.abs() / max_step).ceil() as usize).max(1)
}

fn offset_side(path: &NanowirePath, sign: f64, tol: f64) -> Result<Side> {
    let h = 0.5 * path.width * sign;
    let segs = &path.segments;
    let mut side = Side { pts: Vec::new(), owner: Vec::new() };
    let first = &segs[0];
    side.push(first.start() + first.start_tangent().perp() * h, 0);
    for (i, seg) in segs.iter().enumerate() {
        if let Segment::Arc { center, radius, start_angle, sweep } = *seg {
            // Left offset shrinks counter-clockwise arcs.
            let r_off = radius - h * sweep.signum();
            if r_off <= 0.0 {
                return Err(GeometryError::ArcCollapse(i));
            }
            let n = arc_steps(r_off, sweep, tol);
            for k in 1..n {
                let a = start_angle + sweep * k as f64 / n as f64;
                side.push(center + Point::new(a.cos(), a.sin()) * r_off, i);
            }
        }
        if i + 1 < segs.len() {
            let next = &segs[i + 1];
            let t1 = seg.end_tangent();
            let t2 = next.start_tangent();
            let joint = seg.end();
            let n1 = t1.perp();
            let n2 = t2.perp();
            if t1.cross(t2).abs() < 1e-9 && t1.dot(t2) > 0.0 {
                side.push(joint + n1 * h, i + 1);
            } else {
                let denom = 1.0 + n1.dot(n2);
                if denom < 1e-9 {
                    return Err(GeometryError::SelfIntersection(i, i + 1));
                }
                side.push(joint + (n1 + n2) * (h / denom), i + 1);
            }
        }
    }
    let last = &segs[segs.len() - 1];
    side.push(last.end() + last.end_tangent().perp() * h, segs.len() - 1);
    Ok(side)
}

/// Inflate `path` into a closed outline, discretizing arcs so that the
/// chordal error stays below `arc_tolerance`.
pub fn inflate(path: &NanowirePath, arc_tolerance: f64) -> Result<PolygonSet> {
    if !(arc_tolerance > 0.0 && arc_tolerance.is_finite()) {
        return Err(GeometryError::ArcTolerance(arc_tolerance));
    }
    path.check_connected()?;
    let left = offset_side(path, 1.0, arc_tolerance)?;
    let right = offset_side(path, -1.0, arc_tolerance)?;

    // Right side forward, then left side backward: counter-clockwise.
    let mut pts = Vec::with_capacity(left.pts.len() + right.pts.len());
    let mut owner = Vec::with_capacity(pts.capacity());
    let last_seg = path.segments.len() - 1;
    for (k, &p) in right.pts.iter().enumerate() {
        pts.push(p);
        owner.push(if k + 1 == right.pts.len() { last_seg } else { right.owner[k] });
    }
    for k in (0..left.pts.len()).rev() {
        pts.push(left.pts[k]);
        // edge from left[k] to left[k-1] belongs to the segment owning left[k-1]
        owner.push(if k == 0 { 0 } else { left.owner[k - 1] });
    }

    let mut verts: Vec<Point> = Vec::with_capacity(pts.len());
    let mut owners: Vec<usize> = Vec::with_capacity(pts.len());
    for (p, o) in pts.into_iter().zip(owner) {
        let q = Point::new(snap(p.x), snap(p.y));
        if verts.last() == Some(&q) {
            continue;
        }
        verts.push(q);
        owners.push(o);
    }
    while verts.len() > 1 && verts.first() == verts.last() {
        verts.pop();
        owners.pop();
    }
    if super::signed_area(&verts) < 0.0 {
        verts.reverse();
        owners.reverse();
    }
    check_simple(&verts, &owners)?;
    Ok(PolygonSet {
        loops: vec![Loop { vertices: verts, hole: false }],
        arc_tolerance,
        width: path.width,
    })
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - 1e-9
        && p.x <= a.x.max(b.x) + 1e-9
        && p.y >= a.y.min(b.y) - 1e-9
        && p.y <= a.y.max(b.y) + 1e-9
}

/// Closed-segment intersection test.
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let eps = 1e-9 * (1.0 + a.norm().max(c.norm()));
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    (d1.abs() <= eps && on_segment(c, d, a))
        || (d2.abs() <= eps && on_segment(c, d, b))
        || (d3.abs() <= eps && on_segment(a, b, c))
        || (d4.abs() <= eps && on_segment(a, b, d))
}

/// Reject outlines where two non-adjacent edges touch or cross.
fn check_simple(verts: &[Point], owners: &[usize]) -> Result<()> {
    let n = verts.len();
    if n < 4 {
        return Ok(());
    }
    let bbox = super::Rect::from_points(verts.iter()).unwrap();
    let mean_len = (0..n).map(|i| verts[i].dist(verts[(i + 1) % n])).sum::<f64>() / n as f64;
    let cell = (mean_len * 2.0).max(1e-6).max(bbox.width().max(bbox.height()) / 4096.0);
    let key = |x: f64, y: f64| {
        (((x - bbox.min.x) / cell).floor() as i64, ((y - bbox.min.y) / cell).floor() as i64)
    };
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let (x0, y0) = key(a.x.min(b.x), a.y.min(b.y));
        let (x1, y1) = key(a.x.max(b.x), a.y.max(b.y));
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                buckets.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        let list = &buckets[&k];
        for (ai, &i) in list.iter().enumerate() {
            for &j in &list[ai + 1..] {
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if adjacent || i == j {
                    continue;
                }
                let (a, b) = (verts[i], verts[(i + 1) % n]);
                let (c, d) = (verts[j], verts[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    let (s1, s2) = (owners[i].min(owners[j]), owners[i].max(owners[j]));
                    return Err(GeometryError::SelfIntersection(s1, s2));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fillet_polyline, PathKind, Rect};
    use std::f64::consts::PI;

    fn path_from(pts: Vec<Point>, radius: f64, width: f64) -> NanowirePath {
        let bb = Rect::from_points(pts.iter()).unwrap();
        NanowirePath::from_skeleton(pts, radius, width, 3.0 * width, PathKind::Meander, bb).unwrap()
    }

    #[test]
    fn straight_segment_is_rectangle() {
        let p = path_from(vec![Point::new(0.0, 0.0), Point::new(1000.0, 0.0)], 0.0, 40.0);
        let poly = inflate(&p, 0.5).unwrap();
        assert_eq!(poly.loops[0].vertices.len(), 4);
        assert!((poly.area() - 40_000.0).abs() < 1e-9);
        assert!(!poly.loops[0].hole && poly.loops[0].signed_area() > 0.0);
    }

    #[test]
    fn quarter_arc_area_is_annular_sector() {
        let r = 200.0;
        let w = 40.0;
        let seg = Segment::Arc { center: Point::new(0.0, 0.0), radius: r, start_angle: 0.0, sweep: PI / 2.0 };
        let path = NanowirePath {
            segments: vec![seg],
            width: w,
            pitch: 3.0 * w,
            kind: PathKind::ArcedFractal,
            bounding_box: Rect { min: Point::new(0.0, 0.0), max: Point::new(r + w, r + w) },
            skeleton: vec![],
            corner_radius: r,
        };
        let poly = inflate(&path, 0.01).unwrap();
        let exact = PI / 2.0 * r * w;
        assert!((poly.area() - exact).abs() / exact < 1e-3, "{} vs {}", poly.area(), exact);
    }

    #[test]
    fn sharp_l_turn_uses_miter_joins() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(200.0, 0.0), Point::new(200.0, 200.0)];
        let p = path_from(pts, 0.0, 40.0);
        let poly = inflate(&p, 0.5).unwrap();
        assert_eq!(poly.loops[0].vertices.len(), 6);
        // inner corner at (180, 20), outer at (220, -20)
        let v = &poly.loops[0].vertices;
        assert!(v.contains(&Point::new(180.0, 20.0)));
        assert!(v.contains(&Point::new(220.0, -20.0)));
        assert!((poly.area() - 40.0 * 400.0).abs() < 1e-9);
    }

    #[test]
    fn overlapping_path_reports_segments() {
        // spiral that crosses back over its first leg
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(300.0, 0.0),
            Point::new(300.0, 300.0),
            Point::new(150.0, 300.0),
            Point::new(150.0, -200.0),
        ];
        let p = path_from(pts, 0.0, 40.0);
        match inflate(&p, 0.5) {
            Err(GeometryError::SelfIntersection(a, b)) => assert!(a < b),
            other => panic!("expected self-intersection, got {other:?}"),
        }
    }

    #[test]
    fn arc_collapse_detected() {
        let segs = fillet_polyline(
            &[Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(100.0, 100.0)],
            10.0,
        )
        .unwrap();
        let path = NanowirePath {
            segments: segs,
            width: 40.0,
            pitch: 120.0,
            kind: PathKind::ArcedFractal,
            bounding_box: Rect { min: Point::new(0.0, 0.0), max: Point::new(100.0, 100.0) },
            skeleton: vec![],
            corner_radius: 10.0,
        };
        assert!(matches!(inflate(&path, 0.5), Err(GeometryError::ArcCollapse(1))));
    }

    #[test]
    fn bad_tolerance_rejected() {
        let p = path_from(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)], 0.0, 4.0);
        assert!(inflate(&p, 0.0).is_err());
    }
}
