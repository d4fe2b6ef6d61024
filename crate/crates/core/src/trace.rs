//! CSI trace files: UTF-8 CSV with a JSON header in `#` comment lines.
//!
//! ```text
//! # cscr-sense trace v1
//! # {"sample_rate_hz":120.0,"subcarriers":[{"field":"HT-LTF","index":-58,"freq_hz":2433875000.0},...]}
//! k,timestamp_s,re_0,im_0,re_1,im_1,...
//! 0,0,0.93,-0.12,...
//! ```
//!
//! Floats are written in shortest round-trip form, so write → read is
//! lossless.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cscr::CscrStream;
use crate::error::{Error, Result};
use crate::grid::{Subcarrier, SubcarrierGrid};
use crate::sim::{CsiFrame, CsiTrace};

pub const MAGIC: &str = "cscr-sense trace v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    sample_rate_hz: f64,
    subcarriers: Vec<Subcarrier>,
}

fn column_header(m_count: usize) -> String {
    let mut s = String::from("k,timestamp_s");
    for m in 0..m_count {
        write!(s, ",re_{m},im_{m}").unwrap();
    }
    s
}

pub fn write_trace(trace: &CsiTrace) -> String {
    let header = Header {
        sample_rate_hz: trace.sample_rate_hz,
        subcarriers: trace.grid.subcarriers().to_vec(),
    };
    let mut out = format!("# {MAGIC}\n# {}\n", serde_json::to_string(&header).expect("header"));
    out.push_str(&column_header(trace.grid.len()));
    out.push('\n');
    for f in &trace.frames {
        write!(out, "{},{}", f.k, f.timestamp_s).unwrap();
        for v in &f.values {
            write!(out, ",{},{}", v.re, v.im).unwrap();
        }
        out.push('\n');
    }
    out
}

fn format_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

pub fn read_trace(text: &str) -> Result<CsiTrace> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, l)) if l.strip_prefix('#').map(str::trim) == Some(MAGIC) => {}
        _ => return Err(format_err(1, format!("expected \"# {MAGIC}\""))),
    }
    let (n, json) = lines.next().ok_or_else(|| format_err(2, "missing JSON header"))?;
    let json = json.strip_prefix('#').ok_or_else(|| format_err(n, "header must be a comment"))?;
    let header: Header = serde_json::from_str(json.trim()).map_err(|e| format_err(n, e))?;
    let grid = SubcarrierGrid::new(header.subcarriers).map_err(|e| format_err(n, e))?;
    if !(header.sample_rate_hz.is_finite() && header.sample_rate_hz > 0.0) {
        return Err(format_err(n, "sample_rate_hz must be positive"));
    }

    let m_count = grid.len();
    let expected_columns = column_header(m_count);
    let mut frames = Vec::new();
    let mut saw_columns = false;
    for (n, line) in lines {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_columns {
            if line.trim() != expected_columns {
                return Err(format_err(n, "column header does not match the grid"));
            }
            saw_columns = true;
            continue;
        }
        let mut fields = line.split(',');
        let k: usize = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format_err(n, "bad frame index"))?;
        let timestamp_s: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format_err(n, "bad timestamp"))?;
        let nums: Vec<f64> = fields
            .map(|s| s.trim().parse::<f64>().map_err(|e| format_err(n, e)))
            .collect::<Result<_>>()?;
        if nums.len() != 2 * m_count {
            return Err(format_err(n, format!("expected {} values, got {}", 2 * m_count, nums.len())));
        }
        if !timestamp_s.is_finite() {
            return Err(format_err(n, "non-finite timestamp"));
        }
        let values = nums.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        frames.push(CsiFrame { k, timestamp_s, values });
    }
    if !saw_columns {
        return Err(Error::Format("missing column header".into()));
    }
    CsiTrace::new(grid, header.sample_rate_hz, frames).map_err(|e| match e {
        Error::Config(msg) => Error::Format(msg),
        other => other,
    })
}

/// `k,re,im` rows with the pairing in a comment header.
pub fn write_stream(stream: &CscrStream) -> String {
    let desc = serde_json::json!({
        "numerator": stream.numerator,
        "denominator": stream.denominator,
        "sample_rate_hz": stream.sample_rate_hz,
        "interpolated": stream.interpolated,
    });
    let mut out = format!("# cscr-sense stream v1\n# {desc}\n");
    out.push_str(&write_complex_series(&stream.values));
    out
}

pub fn write_complex_series(values: &[Complex64]) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{k},{},{}", v.re, v.im).unwrap();
    }
    out
}

pub fn write_real_series(values: &[f64]) -> String {
    let mut out = String::from("k,value\n");
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{k},{v}").unwrap();
    }
    out
}
