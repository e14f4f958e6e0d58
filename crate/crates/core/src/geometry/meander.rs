use super::{check_width_pitch, GeometryError, NanowirePath, PathKind, Point, Rect, Result};

/// Boustrophedon skeleton: `lines` horizontal runs at `(i + 0.5) * pitch`
/// between `x0` and `x1`.
pub fn meander_skeleton(lines: usize, pitch: f64, x0: f64, x1: f64) -> Vec<Point> {
    let mut pts = Vec::with_capacity(2 * lines);
    for i in 0..lines {
        let y = (i as f64 + 0.5) * pitch;
        if i % 2 == 0 {
            pts.push(Point::new(x0, y));
            pts.push(Point::new(x1, y));
        } else {
            pts.push(Point::new(x1, y));
            pts.push(Point::new(x0, y));
        }
    }
    pts
}

/// Meander filling an `area_side` square: `floor(area_side / pitch)`
/// parallel lines joined by semicircular U-turns of radius `pitch / 2`.
pub fn gen_meander(area_side: f64, width: f64, pitch: f64) -> Result<NanowirePath> {
    check_width_pitch(width, pitch)?;
    if !area_side.is_finite() || pitch > area_side {
        return Err(GeometryError::InvalidDimensions(format!(
            "pitch {pitch} nm exceeds area side {area_side} nm"
        )));
    }
    let lines = (area_side / pitch + 1e-9).floor() as usize;
    let half = pitch / 2.0;
    let (x0, x1) = if area_side - pitch > 1e-9 { (half, area_side - half) } else { (0.0, area_side) };
    let skeleton = meander_skeleton(lines, pitch, x0, x1);
    let bbox = Rect { min: Point::new(0.0, 0.0), max: Point::new(area_side, area_side) };
    NanowirePath::from_skeleton(skeleton, half, width, pitch, PathKind::Meander, bbox)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_meander_line_count() {
        let m = gen_meander(10_200.0, 40.0, 129.0).unwrap();
        // 79 straights, 78 U-turns of two quarter arcs each
        let lines = m
            .segments
            .iter()
            .filter(|s| matches!(s, crate::geometry::Segment::Line { .. }))
            .count();
        assert_eq!(lines, 79);
        assert_eq!(m.segments.len(), 79 + 2 * 78);
        assert!((m.fill_factor() - 0.31).abs() < 1e-3);
    }

    #[test]
    fn tiny_area_single_line() {
        let m = gen_meander(100.0, 40.0, 80.0).unwrap();
        assert_eq!(m.segments.len(), 1);
        assert_eq!(m.fill_factor(), 0.5);
    }

    #[test]
    fn degenerate_dimensions_rejected() {
        assert!(gen_meander(129.0, 129.0, 129.0).is_err());
        assert!(gen_meander(100.0, -1.0, 50.0).is_err());
        assert!(gen_meander(100.0, 40.0, 150.0).is_err());
    }
}
