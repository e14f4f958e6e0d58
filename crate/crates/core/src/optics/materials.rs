use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::{OpticsError, Result};

/// Tabulated complex index `(wavelength nm, n, k)` with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    name: String,
    samples: Vec<[f64; 3]>,
}

impl MaterialTable {
    pub fn new(name: impl Into<String>, samples: Vec<[f64; 3]>) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| OpticsError::Table { name: name.clone(), reason };
        if samples.is_empty() {
            return Err(bad("no samples".into()));
        }
        for s in &samples {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(bad(format!("non-finite sample at {} nm", s[0])));
            }
            if s[0] <= 0.0 {
                return Err(bad(format!("non-positive wavelength {}", s[0])));
            }
            if s[2] < 0.0 {
                return Err(bad(format!("negative k at {} nm", s[0])));
            }
        }
        if let Some(w) = samples.windows(2).find(|w| w[1][0] <= w[0][0]) {
            return Err(bad(format!("wavelengths not strictly increasing at {} nm", w[1][0])));
        }
        Ok(MaterialTable { name, samples })
    }

    /// Parses `wavelength_nm,n,k` CSV; lines starting with `#` are comments.
    pub fn from_csv(name: impl Into<String>, data: &[u8]) -> Result<Self> {
        let name = name.into();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(data);
        let bad = |reason: String| OpticsError::Table { name: name.clone(), reason };
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        let want = ["wavelength_nm", "n", "k"];
        if headers.len() != 3 || headers.iter().zip(want).any(|(h, w)| !h.eq_ignore_ascii_case(w)) {
            return Err(bad(format!("expected header wavelength_nm,n,k, found {}", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let mut row = [0.0; 3];
            for (v, field) in row.iter_mut().zip(rec.iter()) {
                *v = field.parse().map_err(|_| bad(format!("bad number '{field}'")))?;
            }
            samples.push(row);
        }
        MaterialTable::new(name, samples)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn range(&self) -> (f64, f64) {
        (self.samples[0][0], self.samples[self.samples.len() - 1][0])
    }

    /// `n + ik` at `wavelength`; errors outside the tabulated range.
    pub fn index(&self, wavelength: f64) -> Result<Complex64> {
        let (min, max) = self.range();
        if !(wavelength >= min && wavelength <= max) {
            return Err(OpticsError::Range { material: self.name.clone(), wavelength, min, max });
        }
        let s = &self.samples;
        let hi = s.partition_point(|r| r[0] < wavelength);
        if hi == 0 {
            return Ok(Complex64::new(s[0][1], s[0][2]));
        }
        let (a, b) = (s[hi - 1], s[hi]);
        let t = (wavelength - a[0]) / (b[0] - a[0]);
        Ok(Complex64::new(a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    /// Wavelength-independent index, valid everywhere.
    Constant(Complex64),
    Table(Arc<MaterialTable>),
}

impl Material {
    pub fn index(&self, wavelength: f64) -> Result<Complex64> {
        match self {
            Material::Constant(n) => Ok(*n),
            Material::Table(t) => t.index(wavelength),
        }
    }
}

const BUILTIN_TABLES: [(&str, &str); 4] = [
    ("sio2", include_str!("../../data/sio2.csv")),
    ("ta2o5", include_str!("../../data/ta2o5.csv")),
    ("si", include_str!("../../data/si.csv")),
    ("nbtin", include_str!("../../data/nbtin.csv")),
];

/// Name-to-material map. Names are case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    materials: BTreeMap<String, Material>,
}

impl MaterialLibrary {
    pub fn empty() -> Self {
        MaterialLibrary::default()
    }

    /// Built-in data: `air`/`vacuum` (n = 1) and tables for `sio2`, `ta2o5`,
    /// `si` and `nbtin` over 500 to 5500 nm.
    pub fn builtin() -> Self {
        let mut lib = MaterialLibrary::empty();
        lib.insert("air", Material::Constant(Complex64::new(1.0, 0.0)));
        lib.insert("vacuum", Material::Constant(Complex64::new(1.0, 0.0)));
        for (name, data) in BUILTIN_TABLES {
            let table = MaterialTable::from_csv(name, data.as_bytes()).expect("built-in table parses");
            lib.insert(name, Material::Table(Arc::new(table)));
        }
        lib
    }

    /// Adds or replaces a material.
    pub fn insert(&mut self, name: &str, material: Material) {
        self.materials.insert(name.to_ascii_lowercase(), material);
    }

    /// Loads a user CSV table, replacing any material of the same name.
    pub fn load_csv(&mut self, name: &str, path: &Path) -> Result<()> {
        let data = std::fs::read(path).map_err(|e| OpticsError::Table {
            name: name.to_string(),
            reason: format!("{}: {e}", path.display()),
        })?;
        let table = MaterialTable::from_csv(name, &data)?;
        self.insert(name, Material::Table(Arc::new(table)));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials.get(&name.to_ascii_lowercase()).ok_or_else(|| OpticsError::UnknownMaterial(name.to_string()))
    }

    pub fn index(&self, name: &str, wavelength: f64) -> Result<Complex64> {
        self.get(name)?.index(wavelength)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }
}
