//! Study reports and their serialisation.
//!
//! JSON output is pretty-printed with fields in declaration order and every
//! float written with 17 significant digits, so parsing and re-emitting a
//! report reproduces it byte for byte.
//!
//! CSV output has one row per sample size under the header
//!
//! ```text
//! n,reps,alpha,d_mean,d_var,d_se,d_q05,d_median,d_q95,norm_mean,norm_var,norm_se,norm_q05,norm_median,norm_q95,norm_pow_r_mean,tail_low_median,tail_high_median
//! ```
//!
//! where `d` is `d_r(F̂ₙ, F)`, `norm` is `n^α d_r` and `tail_*` are the
//! medians of the two edge-cell integrals (empty when not computed).

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::Format;
use crate::bridge::{LimitComparison, LimitKind};
use crate::error::{LabError, Result};
use crate::stats::{LineFit, Summary};

/// Where a report came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub model: String,
    pub r: f64,
    pub alpha: f64,
}

/// Statistics at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub n: usize,
    /// `d_r(F̂ₙ, F)`
    pub distance: Summary,
    /// `n^α d_r(F̂ₙ, F)`
    pub normalized: Summary,
    /// Mean of `(n^α d_r)^r`.
    pub normalized_pow_r_mean: f64,
}

/// Normalised distances at the largest `n` against limit-law draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitBlock {
    pub kind: LimitKind,
    pub n: usize,
    pub draws: usize,
    pub comparison: LimitComparison,
    pub limit: Summary,
    pub bias_note: Option<String>,
}

/// Edge-cell integrals `n∫₀^{1/n}(F̂ₙ⁻¹ − F⁻¹)²` and its upper mirror.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTraceRow {
    pub n: usize,
    pub low_median: f64,
    pub low_q90: f64,
    pub high_median: f64,
    pub high_q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTrace {
    pub rows: Vec<TailTraceRow>,
    /// Medians decrease at every step of the grid (reported, not asserted).
    pub low_decreasing: bool,
    pub high_decreasing: bool,
}

impl TailTrace {
    pub fn from_rows(rows: Vec<TailTraceRow>) -> Self {
        let low_decreasing = rows.windows(2).all(|w| w[1].low_median <= w[0].low_median);
        let high_decreasing = rows.windows(2).all(|w| w[1].high_median <= w[0].high_median);
        TailTrace { rows, low_decreasing, high_decreasing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub provenance: Provenance,
    pub rows: Vec<SizeRow>,
    /// OLS of `ln mean d_r` on `ln n`.
    pub slope: Option<LineFit>,
    /// OLS of `ln median d_r` on `ln n`.
    pub median_slope: Option<LineFit>,
    pub limit: Option<LimitBlock>,
    pub tail_trace: Option<TailTrace>,
    pub diagnostics: Vec<String>,
}

/// Pretty JSON with `{:.16e}` floats.
struct ReportFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for ReportFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialise any value as report-style JSON.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ReportFormatter { inner: PrettyFormatter::new() });
    value.serialize(&mut ser).map_err(|e| LabError::parse(format!("report serialisation failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub const CSV_HEADER: &str = "n,reps,alpha,d_mean,d_var,d_se,d_q05,d_median,d_q95,norm_mean,norm_var,norm_se,norm_q05,norm_median,norm_q95,norm_pow_r_mean,tail_low_median,tail_high_median";

fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(report: &StudyReport) -> Vec<u8> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, row) in report.rows.iter().enumerate() {
        let (d, z) = (&row.distance, &row.normalized);
        let mut cells = vec![row.n.to_string(), d.count.to_string(), csv_float(report.provenance.alpha)];
        for s in [d, z] {
            cells.extend([s.mean, s.variance, s.std_error, s.quantiles[1], s.median(), s.quantiles[5]].map(csv_float));
        }
        cells.push(csv_float(row.normalized_pow_r_mean));
        let tails = report.tail_trace.as_ref().and_then(|t| t.rows.get(i));
        cells.push(tails.map_or(String::new(), |t| csv_float(t.low_median)));
        cells.push(tails.map_or(String::new(), |t| csv_float(t.high_median)));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn emit_report(report: &StudyReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => Ok(to_csv(report)),
    }
}

pub fn parse_report(json: &[u8]) -> Result<StudyReport> {
    serde_json::from_slice(json).map_err(|e| LabError::parse(format!("invalid report JSON: {e}")))
}

pub fn write_report(report: &StudyReport, format: Format, path: &Path) -> Result<()> {
    let bytes = emit_report(report, format)?;
    std::fs::write(path, bytes).map_err(|source| LabError::Io { path: path.to_path_buf(), source })
}
