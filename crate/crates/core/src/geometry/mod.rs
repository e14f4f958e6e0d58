//! Nanowire layouts: meanders and (arced) Peano fractals as width-annotated
//! centerline paths, plus their inflated polygon outlines.
//!
//! All lengths are in nanometres. A path is built from a rectilinear
//! "skeleton" polyline on the pitch grid; corners are optionally replaced by
//! circular fillets, which is what distinguishes the arced fractal from the
//! standard one.

mod inflate;
mod layout;
mod meander;
mod peano;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use inflate::inflate;
pub use layout::{export_layout, read_layout_json, write_layout, LayoutFormat};
pub use meander::{gen_meander, meander_skeleton};
pub use peano::{gen_fractal, peano_cell_points, tile_order};

/// Default chordal tolerance for arc discretization.
pub const DEFAULT_ARC_TOLERANCE_NM: f64 = 0.5;
/// Default corner radius of the arced fractal, as a fraction of the pitch.
pub const DEFAULT_ARC_RADIUS_FRAC: f64 = 0.5;
/// Endpoint continuity tolerance.
pub const JOIN_TOLERANCE_NM: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("fill factor {0:.6} must lie strictly inside (0, 1)")]
    FillFactor(f64),
    #[error("unsupported Peano order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),
    #[error("arc radius fraction {0} outside [0, 0.5]")]
    ArcRadius(f64),
    #[error("segment {index} of length {length:.3} nm cannot hold corner fillets of total {needed:.3} nm")]
    FilletTooLarge { index: usize, length: f64, needed: f64 },
    #[error("inner offset of arc segment {0} collapses (radius <= width/2)")]
    ArcCollapse(usize),
    #[error("inflated outline self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("path is disconnected between segments {0} and {1}")]
    Disconnected(usize, usize),
    #[error("no Hamiltonian ordering found for a {0}x{0} cell tiling")]
    NoTilingOrder(usize),
    #[error("layout parse error: {0}")]
    Parse(String),
    #[error("invalid arc tolerance {0}")]
    ArcTolerance(f64),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn unit(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<Rect> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut r = Rect { min: first, max: first };
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }
}

/// One piece of a centerline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Line { start: Point, end: Point },
    /// Circular arc; positive `sweep` is counter-clockwise.
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn start(&self) -> Point {
        match *self {
            Segment::Line { start, .. } => start,
            Segment::Arc { center, radius, start_angle, .. } => {
                center + Point::new(start_angle.cos(), start_angle.sin()) * radius
            }
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Segment::Line { end, .. } => end,
            Segment::Arc { center, radius, start_angle, sweep } => {
                let a = start_angle + sweep;
                center + Point::new(a.cos(), a.sin()) * radius
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.dist(end),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Unit tangent at the start of the segment.
    pub fn start_tangent(&self) -> Point {
        match *self {
            Segment::Line { start, end } => (end - start).unit(),
            Segment::Arc { start_angle, sweep, .. } => arc_tangent(start_angle, sweep),
        }
    }

    /// Unit tangent at the end of the segment.
    pub fn end_tangent(&self) -> Point {
        match *self {
            Segment::Line { start, end } => (end - start).unit(),
            Segment::Arc { start_angle, sweep, .. } => arc_tangent(start_angle + sweep, sweep),
        }
    }
}

fn arc_tangent(angle: f64, sweep: f64) -> Point {
    let t = Point::new(-angle.sin(), angle.cos());
    if sweep >= 0.0 {
        t
    } else {
        t * -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Meander,
    StandardFractal,
    ArcedFractal,
}

impl PathKind {
    pub fn label(self) -> &'static str {
        match self {
            PathKind::Meander => "meander",
            PathKind::StandardFractal => "standard_fractal",
            PathKind::ArcedFractal => "arced_fractal",
        }
    }
}

impl std::str::FromStr for PathKind {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meander" => Ok(PathKind::Meander),
            "standard_fractal" | "standard" => Ok(PathKind::StandardFractal),
            "arced_fractal" | "arced" => Ok(PathKind::ArcedFractal),
            other => Err(GeometryError::Parse(format!("unknown geometry kind `{other}`"))),
        }
    }
}

/// Width-annotated centerline of a nanowire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NanowirePath {
    pub segments: Vec<Segment>,
    pub width: f64,
    pub pitch: f64,
    pub kind: PathKind,
    pub bounding_box: Rect,
    /// Rectilinear polyline the segments were filleted from.
    pub skeleton: Vec<Point>,
    /// Corner fillet radius (0 for sharp corners).
    pub corner_radius: f64,
}

impl NanowirePath {
    /// Build a path by filleting every corner of `skeleton` with `radius`.
    pub fn from_skeleton(
        skeleton: Vec<Point>,
        radius: f64,
        width: f64,
        pitch: f64,
        kind: PathKind,
        bounding_box: Rect,
    ) -> Result<Self> {
        check_width_pitch(width, pitch)?;
        let segments = fillet_polyline(&skeleton, radius)?;
        let path = NanowirePath {
            segments,
            width,
            pitch,
            kind,
            bounding_box,
            skeleton,
            corner_radius: radius,
        };
        path.check_connected()?;
        Ok(path)
    }

    pub fn fill_factor(&self) -> f64 {
        fill_factor(self)
    }

    pub fn centerline_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn start(&self) -> Point {
        self.segments[0].start()
    }

    pub fn end(&self) -> Point {
        self.segments[self.segments.len() - 1].end()
    }

    /// Number of direction changes of the skeleton.
    pub fn corner_count(&self) -> usize {
        self.skeleton.len().saturating_sub(2)
    }

    pub fn check_connected(&self) -> Result<()> {
        for (i, pair) in self.segments.windows(2).enumerate() {
            if pair[0].end().dist(pair[1].start()) > JOIN_TOLERANCE_NM {
                return Err(GeometryError::Disconnected(i, i + 1));
            }
        }
        Ok(())
    }
}

/// Ratio of wire width to winding pitch.
pub fn fill_factor(path: &NanowirePath) -> f64 {
    path.width / path.pitch
}

pub(crate) fn check_width_pitch(width: f64, pitch: f64) -> Result<()> {
    if !(width.is_finite() && pitch.is_finite()) || width <= 0.0 || pitch <= 0.0 {
        return Err(GeometryError::InvalidDimensions(format!(
            "width {width} and pitch {pitch} must be positive"
        )));
    }
    let ff = width / pitch;
    if ff >= 1.0 {
        return Err(GeometryError::FillFactor(ff));
    }
    Ok(())
}

/// Drop interior points of collinear runs, keeping only corners and ends.
pub fn compress_collinear(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if let Some(&last) = out.last() {
            if last.dist(p) < 1e-12 {
                continue;
            }
        }
        if out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let d1 = b - a;
            let d2 = p - b;
            if d1.cross(d2).abs() <= 1e-9 * d1.norm() * d2.norm() && d1.dot(d2) > 0.0 {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// Replace each interior vertex of a polyline by a tangent circular arc.
pub fn fillet_polyline(vertices: &[Point], radius: f64) -> Result<Vec<Segment>> {
    if vertices.len() < 2 {
        return Err(GeometryError::InvalidDimensions("path needs at least two vertices".into()));
    }
    let n = vertices.len();
    // Tangent length consumed at each vertex.
    let mut tangent = vec![0.0; n];
    let mut arcs: Vec<Option<Segment>> = vec![None; n];
    if radius > 0.0 {
        for i in 1..n - 1 {
            let d1 = (vertices[i] - vertices[i - 1]).unit();
            let d2 = (vertices[i + 1] - vertices[i]).unit();
            let cross = d1.cross(d2);
            let dot = d1.dot(d2).clamp(-1.0, 1.0);
            let theta = cross.atan2(dot);
            if theta.abs() < 1e-12 {
                continue;
            }
            if (theta.abs() - std::f64::consts::PI).abs() < 1e-9 {
                return Err(GeometryError::InvalidDimensions(format!(
                    "path reverses on itself at vertex {i}"
                )));
            }
            let t = radius * (theta.abs() / 2.0).tan();
            tangent[i] = t;
            let start = vertices[i] - d1 * t;
            let normal = if theta > 0.0 { d1.perp() } else { d1.perp() * -1.0 };
            let center = start + normal * radius;
            let sv = start - center;
            arcs[i] = Some(Segment::Arc {
                center,
                radius,
                start_angle: sv.y.atan2(sv.x),
                sweep: theta,
            });
        }
    }
    let mut segments = Vec::with_capacity(2 * n);
    for i in 0..n - 1 {
        let a = vertices[i];
        let b = vertices[i + 1];
        let len = a.dist(b);
        let needed = tangent[i] + tangent[i + 1];
        if needed > len + 1e-9 {
            return Err(GeometryError::FilletTooLarge { index: i, length: len, needed });
        }
        let d = (b - a).unit();
        let s = a + d * tangent[i];
        let e = b - d * tangent[i + 1];
        if s.dist(e) > 1e-9 {
            segments.push(Segment::Line { start: s, end: e });
        }
        if let Some(arc) = arcs[i + 1] {
            segments.push(arc);
        }
    }
    // Snap arc/line joints so consecutive endpoints coincide exactly.
    for i in 1..segments.len() {
        let prev_end = segments[i - 1].end();
        if let Segment::Line { start, .. } = &mut segments[i] {
            *start = prev_end;
        }
    }
    Ok(segments)
}

/// Closed outline loop; `hole` loops are clockwise, outer loops counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub vertices: Vec<Point>,
    pub hole: bool,
}

impl Loop {
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSet {
    pub loops: Vec<Loop>,
    pub arc_tolerance: f64,
    /// Nominal wire width the outline was inflated from.
    pub width: f64,
}

impl PolygonSet {
    pub fn empty() -> Self {
        PolygonSet { loops: Vec::new(), arc_tolerance: DEFAULT_ARC_TOLERANCE_NM, width: 0.0 }
    }

    /// Axis-aligned rectangle with the narrow side taken as the wire width.
    pub fn rectangle(min: Point, max: Point) -> Self {
        let vertices = vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)];
        PolygonSet {
            loops: vec![Loop { vertices, hole: false }],
            arc_tolerance: DEFAULT_ARC_TOLERANCE_NM,
            width: (max.x - min.x).min(max.y - min.y),
        }
    }

    /// Build from raw loops, deriving the hole flags from orientation.
    pub fn from_loops(raw: Vec<Vec<Point>>, width: f64) -> Self {
        let loops = raw
            .into_iter()
            .map(|vertices| {
                let hole = signed_area(&vertices) < 0.0;
                Loop { vertices, hole }
            })
            .collect();
        PolygonSet { loops, arc_tolerance: DEFAULT_ARC_TOLERANCE_NM, width }
    }

    pub fn area(&self) -> f64 {
        self.loops.iter().map(Loop::signed_area).sum()
    }

    pub fn bounding_box(&self) -> Option<Rect> {
        Rect::from_points(self.loops.iter().flat_map(|l| l.vertices.iter()))
    }

    pub fn vertex_count(&self) -> usize {
        self.loops.iter().map(|l| l.vertices.len()).sum()
    }

    pub fn union(mut self, other: PolygonSet) -> PolygonSet {
        self.loops.extend(other.loops);
        self.width = self.width.max(other.width);
        self
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for lp in &self.loops {
            for (a, b) in lp.edges() {
                if (a.y <= p.y) != (b.y <= p.y) {
                    let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                    if x > p.x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }
}
