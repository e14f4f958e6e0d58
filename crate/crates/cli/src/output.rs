//! Serialization helpers shared by the commands.

use serde::Serialize;

use crate::plot::{emit_plot, Axes, Series};
use crate::{CliError, Result};

/// Pretty JSON with sorted keys and a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    // serde_json::Value keeps object keys in a BTreeMap, so this sorts them
    let v = serde_json::to_value(value).map_err(|e| CliError::Compute(format!("json: {e}")))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Compute(format!("json: {e}")))?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Shortest round-trip decimal form; empty for non-finite values.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return String::new();
    }
    if v == 0.0 {
        return "0".into();
    }
    format!("{v}")
}

/// RFC 4180 CSV from a header and rows of cells.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn svg(series: &[Series], axes: &Axes) -> Result<Vec<u8>> {
    emit_plot(series, axes).map_err(|e| CliError::Compute(e.to_string()))
}

/// `start, start + step, ...` up to `stop` inclusive, computed by index so
/// the grid is reproducible.
pub fn grid(start: f64, stop: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage(format!("{what}: need start <= stop and step > 0")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(CliError::Usage(format!("{what}: {n} points is too many")));
    }
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_keys() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = String::from_utf8(json_bytes(&S { zeta: 1, alpha: 2 }).unwrap()).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn grid_inclusive() {
        assert_eq!(grid(1.0, 2.0, 0.5, "g").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(grid(1300.0, 1800.0, 1.0, "g").unwrap().len(), 501);
        assert!(grid(2.0, 1.0, 0.5, "g").is_err());
    }
}
