//! Deterministic layout writers (SVG 1.1 and layout-json) and the
//! layout-json reader.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{GeometryError, Point, PolygonSet, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayoutFormat {
    Svg { user_units_per_nm: f64 },
    LayoutJson,
}

impl LayoutFormat {
    pub fn svg() -> Self {
        LayoutFormat::Svg { user_units_per_nm: 1.0 }
    }
}

fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

pub fn export_layout(polys: &PolygonSet, format: LayoutFormat) -> Vec<u8> {
    match format {
        LayoutFormat::LayoutJson => layout_json(polys).into_bytes(),
        LayoutFormat::Svg { user_units_per_nm } => svg(polys, user_units_per_nm).into_bytes(),
    }
}

fn layout_json(polys: &PolygonSet) -> String {
    let mut out = String::from("{\"unit\":\"nm\",\"polygons\":[");
    for (i, lp) in polys.loops.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for (k, p) in lp.vertices.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{},{}]", fmt3(p.x), fmt3(p.y));
        }
        out.push(']');
    }
    out.push_str("]}\n");
    out
}

fn svg(polys: &PolygonSet, scale: f64) -> String {
    let bbox = polys.bounding_box();
    let (min, w, h) = match bbox {
        Some(b) => (b.min, b.width(), b.height()),
        None => (Point::new(0.0, 0.0), 0.0, 0.0),
    };
    let (sw, sh) = (w * scale, h * scale);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt3(sw),
        fmt3(sh),
        fmt3(sw),
        fmt3(sh)
    );
    let _ = writeln!(
        out,
        "<metadata>{{\"unit\":\"nm\",\"user_units_per_nm\":{},\"origin_nm\":[{},{}]}}</metadata>",
        fmt3(scale),
        fmt3(min.x),
        fmt3(min.y)
    );
    for lp in &polys.loops {
        let fill = if lp.hole { "#ffffff" } else { "#b03a2e" };
        out.push_str("<polygon points=\"");
        for (k, p) in lp.vertices.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            // SVG y grows downward
            let x = (p.x - min.x) * scale;
            let y = (min.y + h - p.y) * scale;
            let _ = write!(out, "{},{}", fmt3(x), fmt3(y));
        }
        let _ = writeln!(out, "\" fill=\"{fill}\" stroke=\"none\"/>");
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_layout(path: &Path, polys: &PolygonSet, format: LayoutFormat) -> Result<()> {
    std::fs::write(path, export_layout(polys, format)).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutDoc {
    unit: String,
    polygons: Vec<Vec<[f64; 2]>>,
}

/// Parse a layout-json document. Loop orientation determines the hole flag;
/// `width` is carried through for downstream resolution checks.
pub fn read_layout_json(bytes: &[u8], width: f64) -> Result<PolygonSet> {
    let doc: LayoutDoc =
        serde_json::from_slice(bytes).map_err(|e| GeometryError::Parse(e.to_string()))?;
    if doc.unit != "nm" {
        return Err(GeometryError::Parse(format!("unsupported unit `{}`", doc.unit)));
    }
    let raw = doc
        .polygons
        .into_iter()
        .map(|lp| lp.into_iter().map(|[x, y]| Point::new(x, y)).collect())
        .collect();
    Ok(PolygonSet::from_loops(raw, width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_is_valid_document() {
        let e = PolygonSet::empty();
        let json = export_layout(&e, LayoutFormat::LayoutJson);
        assert_eq!(json, b"{\"unit\":\"nm\",\"polygons\":[]}\n");
        let back = read_layout_json(&json, 0.0).unwrap();
        assert!(back.loops.is_empty());
        let svg = String::from_utf8(export_layout(&e, LayoutFormat::svg())).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<polygon"));
    }

    #[test]
    fn rectangle_is_four_vertex_polygon() {
        let r = PolygonSet::rectangle(Point::new(0.0, 0.0), Point::new(40.0, 1000.0));
        let svg = String::from_utf8(export_layout(&r, LayoutFormat::svg())).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 4);
        assert!(svg.contains("\"user_units_per_nm\":1.000"));
        let json = String::from_utf8(export_layout(&r, LayoutFormat::LayoutJson)).unwrap();
        assert_eq!(
            json,
            "{\"unit\":\"nm\",\"polygons\":[[[0.000,0.000],[40.000,0.000],[40.000,1000.000],[0.000,1000.000]]]}\n"
        );
    }

    #[test]
    fn rejects_foreign_units_and_keys() {
        assert!(read_layout_json(br#"{"unit":"um","polygons":[]}"#, 1.0).is_err());
        assert!(read_layout_json(br#"{"unit":"nm","polygons":[],"x":1}"#, 1.0).is_err());
    }

    #[test]
    fn io_errors_carry_path() {
        let r = PolygonSet::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let err = write_layout(Path::new("/nonexistent-dir/x.json"), &r, LayoutFormat::LayoutJson)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.json"));
    }
}
