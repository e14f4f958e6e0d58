use std::fmt::Write as _;

use super::solve::FieldGrid;

/// |J| map as a CSV grid: one row per grid row from the bottom (y
/// ascending), empty fields outside the wire. Values are |J| * width, i.e.
/// normalized to the straight-wire density.
pub fn field_csv(field: &FieldGrid, width: f64) -> Vec<u8> {
    let g = &field.grid;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let mut row: Vec<String> = Vec::with_capacity(g.nx);
    for j in 0..g.ny {
        row.clear();
        for i in 0..g.nx {
            let k = g.idx(i, j);
            row.push(if g.is_wire(k) { format!("{:.6}", field.j_mag(k) * width) } else { String::new() });
        }
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn color(t: f64) -> (u8, u8, u8) {
    // piecewise-linear dark blue -> teal -> yellow -> red
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [30.0, 40.0, 120.0]),
        (0.4, [30.0, 150.0, 150.0]),
        (0.75, [240.0, 220.0, 60.0]),
        (1.0, [200.0, 30.0, 30.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    for w in STOPS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let f = (t - t0) / (t1 - t0);
            let mix = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
            return (mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]));
        }
    }
    (200, 30, 30)
}

/// SVG heatmap of |J| normalized to the straight-wire value; the colour
/// scale spans [0, 1.5].
pub fn field_svg(field: &FieldGrid, width: f64) -> Vec<u8> {
    let g = &field.grid;
    let h = g.cell_size;
    let (w_nm, h_nm) = (g.nx as f64 * h, g.ny as f64 * h);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w_nm:.3}\" height=\"{h_nm:.3}\" viewBox=\"0 0 {w_nm:.3} {h_nm:.3}\" shape-rendering=\"crispEdges\">"
    );
    let _ = writeln!(
        out,
        "<metadata>{{\"unit\":\"nm\",\"user_units_per_nm\":1.000,\"quantity\":\"|J|*width\",\"scale_max\":1.5}}</metadata>"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{w_nm:.3}\" height=\"{h_nm:.3}\" fill=\"#ffffff\"/>");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if !g.is_wire(k) {
                continue;
            }
            let (r, gg, b) = color(field.j_mag(k) * width / 1.5);
            let x = i as f64 * h;
            let y = (g.ny - 1 - j) as f64 * h;
            let _ = writeln!(
                out,
                "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{h:.3}\" height=\"{h:.3}\" fill=\"#{r:02x}{gg:02x}{b:02x}\"/>"
            );
        }
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}
