//! Bound tables: one row per `n`, written as CSV or JSON.

use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use stopbound::{bound_report, solve_monopoly, MaxDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scaling {
    None,
    #[value(name = "sqrt_n")]
    SqrtN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub n: usize,
    pub lower_det: Option<f64>,
    pub lower_uniform: Option<f64>,
    pub upper_universal: Option<f64>,
    pub upper_partition: Option<f64>,
    /// `n^2 (lower_uniform/scale - Π*)`, the rescaled gap of the lower bound.
    pub lower_const: Option<f64>,
    pub upper_const: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

const HEADER: [&str; 8] = [
    "n",
    "lower_det",
    "lower_uniform",
    "upper_universal",
    "upper_partition",
    "lower_const",
    "upper_const",
    "status",
];

/// Nine significant digits in plain decimal notation where that stays short,
/// scientific otherwise.
pub fn fmt9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-5..=12).contains(&mag) {
        let decimals = (8 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

fn row_for(base: &MaxDistribution, pi_base: f64, n: usize, scaling: Scaling) -> Row {
    let scale = match scaling {
        Scaling::None => 1.0,
        Scaling::SqrtN => (n as f64).sqrt(),
    };
    let empty = |status: String| Row {
        n,
        lower_det: None,
        lower_uniform: None,
        upper_universal: None,
        upper_partition: None,
        lower_const: None,
        upper_const: None,
        status,
    };
    let d = if scale == 1.0 {
        base.clone()
    } else {
        match MaxDistribution::scaled(base.clone(), scale) {
            Ok(d) => d,
            Err(e) => return empty(format!("error: {e}")),
        }
    };
    let r = match bound_report(&d, n) {
        Ok(r) => r,
        Err(e) => return empty(format!("error: {e}")),
    };
    let n2 = (n as f64) * (n as f64);
    let rescale = |v: f64| n2 * (v / scale - pi_base);
    let skipped: Vec<&str> = r
        .meta
        .notes
        .iter()
        .map(String::as_str)
        .filter(|s| s.contains("skipped") || s.contains("fell back"))
        .collect();
    Row {
        n,
        lower_det: Some(r.lower_det),
        lower_uniform: r.lower_uniform,
        upper_universal: Some(r.upper_universal),
        upper_partition: Some(r.upper_partition),
        lower_const: r.lower_uniform.map(rescale),
        upper_const: Some(rescale(r.upper_partition)),
        status: if skipped.is_empty() {
            "ok".into()
        } else {
            skipped.join("; ")
        },
    }
}

/// Rows in the order of `ns`, computed in parallel.
pub fn bound_rows(base: &MaxDistribution, ns: &[usize], scaling: Scaling) -> Result<Vec<Row>> {
    let pi_base = solve_monopoly(base)?.pi_star;
    Ok(ns
        .par_iter()
        .map(|&n| row_for(base, pi_base, n, scaling))
        .collect())
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(HEADER)?;
            let cell = |v: Option<f64>| v.map(fmt9).unwrap_or_default();
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    cell(r.lower_det),
                    cell(r.lower_uniform),
                    cell(r.upper_universal),
                    cell(r.upper_partition),
                    cell(r.lower_const),
                    cell(r.upper_const),
                    r.status.clone(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.396260214), "0.396260214");
        assert_eq!(fmt9(1.0), "1.00000000");
        assert_eq!(fmt9(4097.29512345), "4097.29512");
        assert_eq!(fmt9(-0.00123456789), "-0.00123456789");
        assert_eq!(fmt9(1.5e-9), "1.50000000e-9");
        assert_eq!(fmt9(0.0), "0");
    }

    #[test]
    fn rows_keep_requested_order() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let ns = [2, 5, 9, 40, 41];
        let rows = bound_rows(&d, &ns, Scaling::None).unwrap();
        let got: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(got, ns);
    }

    #[test]
    fn sqrt_scaling_multiplies_bounds() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let plain = bound_rows(&d, &[16], Scaling::None).unwrap();
        let scaled = bound_rows(&d, &[16], Scaling::SqrtN).unwrap();
        let a = plain[0].upper_universal.unwrap();
        let b = scaled[0].upper_universal.unwrap();
        assert!((b - 4.0 * a).abs() < 1e-9);
        let la = plain[0].lower_const.unwrap();
        let lb = scaled[0].lower_const.unwrap();
        assert!((la - lb).abs() < 1e-5 * la.abs().max(1.0), "{la} vs {lb}");
    }

    #[test]
    fn csv_has_header_and_blank_cells() {
        let rows = vec![Row {
            n: 3,
            lower_det: Some(0.5),
            lower_uniform: None,
            upper_universal: Some(0.75),
            upper_partition: Some(0.6),
            lower_const: None,
            upper_const: Some(0.9),
            status: "lower_uniform skipped: x, y".into(),
        }];
        let mut buf = Vec::new();
        write_rows(&rows, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "3,0.500000000,,0.750000000,0.600000000,,0.900000000,\"lower_uniform skipped: x, y\""
        );
    }
}
