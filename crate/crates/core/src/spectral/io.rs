//! Coefficient tables as CSV (`n,m,value`) and as a versioned JSON envelope.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::harmonics::{ShCoeffs, SphereGrid};
use crate::error::{Error, Result};

pub const ENVELOPE_FORMAT: &str = "tumorstab.sh_coefficients";
pub const ENVELOPE_VERSION: u32 = 1;
pub const BASIS: &str = "real_orthonormal_no_condon_shortley";

fn bad(reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field: "coefficients", reason: reason.into() }
}

pub fn write_coeffs_csv<W: Write>(writer: W, coeffs: &ShCoeffs) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "m", "value"]).map_err(|e| bad(e.to_string()))?;
    for (n, m, v) in coeffs.iter() {
        w.write_record([n.to_string(), m.to_string(), format!("{v:.16e}")])
            .map_err(|e| bad(e.to_string()))?;
    }
    w.flush().map_err(|e| bad(e.to_string()))
}

/// Reads `n,m,value` rows; unlisted coefficients are zero. Truncation order
/// is the largest `n` present unless `n_max` is given.
pub fn read_coeffs_csv<R: Read>(reader: R, n_max: Option<usize>) -> Result<ShCoeffs> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.deserialize::<(usize, isize, f64)>().enumerate() {
        let (n, m, v) = record.map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        if m.unsigned_abs() > n {
            return Err(bad(format!("row {}: |m| = {} exceeds n = {n}", line + 1, m.unsigned_abs())));
        }
        if !v.is_finite() {
            return Err(bad(format!("row {}: value is not finite", line + 1)));
        }
        rows.push((n, m, v));
    }
    let top = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let n_max = n_max.unwrap_or(top);
    if top > n_max {
        return Err(bad(format!("degree {top} exceeds the truncation {n_max}")));
    }
    let mut seen = std::collections::HashSet::new();
    let mut c = ShCoeffs::zeros(n_max);
    for (n, m, v) in rows {
        if !seen.insert((n, m)) {
            return Err(bad(format!("duplicate entry ({n}, {m})")));
        }
        c.set(n, m, v);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl From<&SphereGrid> for GridMeta {
    fn from(g: &SphereGrid) -> Self {
        Self { n_lat: g.n_lat(), n_lon: g.n_lon() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub n: usize,
    pub m: isize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEnvelope {
    pub format: String,
    pub version: u32,
    pub basis: String,
    pub n_max: usize,
    pub grid: Option<GridMeta>,
    pub coefficients: Vec<CoeffRow>,
}

impl CoeffEnvelope {
    pub fn new(coeffs: &ShCoeffs, grid: Option<&SphereGrid>) -> Self {
        Self {
            format: ENVELOPE_FORMAT.into(),
            version: ENVELOPE_VERSION,
            basis: BASIS.into(),
            n_max: coeffs.n_max(),
            grid: grid.map(GridMeta::from),
            coefficients: coeffs.iter().map(|(n, m, value)| CoeffRow { n, m, value }).collect(),
        }
    }

    pub fn to_coeffs(&self) -> Result<ShCoeffs> {
        if self.format != ENVELOPE_FORMAT || self.version != ENVELOPE_VERSION || self.basis != BASIS {
            return Err(bad(format!(
                "unsupported envelope {} v{} ({})",
                self.format, self.version, self.basis
            )));
        }
        let mut c = ShCoeffs::zeros(self.n_max);
        for row in &self.coefficients {
            if row.n > self.n_max || row.m.unsigned_abs() > row.n {
                return Err(bad(format!("entry ({}, {}) outside degree {}", row.n, row.m, self.n_max)));
            }
            c.set(row.n, row.m, row.value);
        }
        Ok(c)
    }
}
