use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};

/// Uniformly binned counts; `edges.len() == counts.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Histogram {
    pub edges_ps: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(edges_ps: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        let h = Histogram { edges_ps, counts };
        h.validate()?;
        Ok(h)
    }

    /// `n` bins of width `width` starting at `start`.
    pub fn uniform(start: f64, width: f64, counts: Vec<u64>) -> Result<Self> {
        let edges = (0..=counts.len()).map(|k| start + width * k as f64).collect();
        Histogram::new(edges, counts)
    }

    /// Bins `samples`; values outside the range are dropped.
    pub fn from_samples(samples: &[f64], start: f64, width: f64, bins: usize) -> Result<Self> {
        if !(width > 0.0) || bins == 0 {
            return Err(AnalysisError::Histogram("need positive bin width and at least one bin".into()));
        }
        let mut counts = vec![0u64; bins];
        for &s in samples {
            let k = ((s - start) / width).floor();
            if k >= 0.0 && (k as usize) < bins {
                counts[k as usize] += 1;
            }
        }
        Histogram::uniform(start, width, counts)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() || self.edges_ps.len() != self.counts.len() + 1 {
            return Err(AnalysisError::Histogram(format!(
                "{} edges for {} bins",
                self.edges_ps.len(),
                self.counts.len()
            )));
        }
        if self.edges_ps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AnalysisError::Histogram("edges must be strictly increasing".into()));
        }
        let w = self.bin_width();
        if self.edges_ps.windows(2).any(|e| ((e[1] - e[0]) - w).abs() > 1e-9 * w.abs().max(1.0)) {
            return Err(AnalysisError::Histogram("bins must be uniform".into()));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.edges_ps[self.edges_ps.len() - 1] - self.edges_ps[0]) / self.counts.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges_ps.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Reads `bin_start_ps,count` CSV. The bin width is the spacing of the starts.
    pub fn from_csv(data: &[u8]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(data);
        let bad = |m: String| AnalysisError::Histogram(m);
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "bin_start_ps" || &headers[1] != "count" {
            return Err(bad("expected header bin_start_ps,count".into()));
        }
        let (mut starts, mut counts) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            starts.push(rec[0].parse::<f64>().map_err(|_| bad(format!("bad bin start '{}'", &rec[0])))?);
            counts.push(rec[1].parse::<u64>().map_err(|_| bad(format!("bad count '{}'", &rec[1])))?);
        }
        if starts.len() < 2 {
            return Err(bad("need at least two bins to infer the width".into()));
        }
        let w = starts[1] - starts[0];
        let mut edges = starts;
        edges.push(edges[edges.len() - 1] + w);
        Histogram::new(edges, counts)
    }

    /// Reads `{"edges_ps": [...], "counts": [...]}`.
    pub fn from_json(data: &[u8]) -> Result<Self> {
        let h: Histogram = serde_json::from_slice(data).map_err(|e| AnalysisError::Histogram(e.to_string()))?;
        h.validate()?;
        Ok(h)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bin_start_ps", "count"]).expect("in-memory write");
        for (e, c) in self.edges_ps.iter().zip(&self.counts) {
            w.write_record([format!("{e:.3}"), c.to_string()]).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}
