use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub d: usize,
    pub sup_global: f64,
    pub sup_masked: f64,
    pub l1: f64,
    pub max_q_on_graph: f64,
    pub runtime_ms: f64,
}

/// Which grid points count towards the masked error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskInfo {
    pub delta1: f64,
    pub critical_x: Vec<Vec<f64>>,
    pub description: String,
    pub included: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub function: String,
    pub mask: MaskInfo,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_CSV_HEADER: &str = "d,sup_global,sup_masked,l1,max_q_on_graph,runtime_ms";

/// Format used for every float in CSV output, 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl ErrorReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{REPORT_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.d,
                fmt_f64(r.sup_global),
                fmt_f64(r.sup_masked),
                fmt_f64(r.l1),
                fmt_f64(r.max_q_on_graph),
                fmt_f64(r.runtime_ms)
            )?;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Copy with every runtime set to zero, for comparing runs.
    pub fn without_timing(&self) -> ErrorReport {
        let mut out = self.clone();
        out.rows.iter_mut().for_each(|r| r.runtime_ms = 0.0);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximantSample {
    pub x: Vec<f64>,
    pub f: f64,
    pub y_star: f64,
    pub q_min: f64,
}

/// `x,f,y_star,q_min`, or `x1,...,xn,f,y_star,q_min` for several variables.
pub fn write_approximant_csv<W: Write>(samples: &[ApproximantSample], mut w: W) -> Result<()> {
    let n = samples.first().map_or(1, |s| s.x.len());
    let head = if n == 1 {
        "x".to_string()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
    };
    writeln!(w, "{head},f,y_star,q_min")?;
    for s in samples {
        let xs: Vec<String> = s.x.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(
            w,
            "{},{},{},{}",
            xs.join(","),
            fmt_f64(s.f),
            fmt_f64(s.y_star),
            fmt_f64(s.q_min)
        )?;
    }
    Ok(())
}
