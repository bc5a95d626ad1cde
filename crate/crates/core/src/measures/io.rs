//! CSV sample ingestion and JSON moment-matrix serialization.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{MomentMatrix, Normalization, Provenance, SampleSet};
use crate::basis::{AxisMap, BasisSpec, Family};
use crate::error::{Error, Result};

/// On-disk form of a [`MomentMatrix`]; `entries` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMatrixJson {
    pub nvars: usize,
    pub degree: usize,
    pub family: Family,
    pub normalization: Normalization,
    pub entries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Vec<AxisMap>>,
}

impl MomentMatrix {
    pub fn to_json(&self) -> MomentMatrixJson {
        let n = self.size();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.entries[(i, j)]);
            }
        }
        MomentMatrixJson {
            nvars: self.spec.nvars,
            degree: self.spec.degree,
            family: self.spec.family,
            normalization: self.normalization,
            entries,
            scaling: self.spec.scaling.clone(),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json())?)
    }

    /// Rebuilds a matrix; provenance is not serialized and comes back as
    /// [`Provenance::Quadrature`].
    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: MomentMatrixJson = serde_json::from_str(s)?;
        let mut spec = BasisSpec::new(j.nvars, j.degree, j.family)?;
        if let Some(sc) = j.scaling {
            spec = spec.with_scaling(sc)?;
        }
        let n = spec.size();
        if j.entries.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: j.entries.len(),
            });
        }
        let m = DMatrix::from_row_slice(n, n, &j.entries);
        MomentMatrix::from_parts(m, spec, Provenance::Quadrature, j.normalization)
    }
}

impl SampleSet {
    /// Reads `x1,...,xn,y` CSV. Errors carry the 1-based line number.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Csv { row: 1, reason: e.to_string() })?
            .clone();
        let cols = headers.len();
        if cols < 2 {
            return Err(Error::Csv {
                row: 1,
                reason: "need at least one x column and a y column".into(),
            });
        }
        for (i, h) in headers.iter().enumerate() {
            let want = if i + 1 == cols { "y".to_string() } else { format!("x{}", i + 1) };
            if h.trim() != want {
                return Err(Error::Csv {
                    row: 1,
                    reason: format!("column {} should be `{want}`, found `{h}`", i + 1),
                });
            }
        }
        let mut points = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|e| Error::Csv { row, reason: e.to_string() })?;
            if rec.len() != cols {
                return Err(Error::Csv {
                    row,
                    reason: format!("expected {cols} fields, found {}", rec.len()),
                });
            }
            let p = rec
                .iter()
                .map(|f| {
                    let v: f64 = f.trim().parse().map_err(|_| Error::Csv {
                        row,
                        reason: format!("`{f}` is not a number"),
                    })?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Csv { row, reason: format!("`{f}` is not finite") })
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            points.push(p);
        }
        if points.is_empty() {
            return Err(Error::Csv { row: 2, reason: "no samples".into() });
        }
        SampleSet::new(points)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim() - 1;
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        writeln!(w, "{}", header.join(","))?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
