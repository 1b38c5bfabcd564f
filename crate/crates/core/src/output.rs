//! Plot-ready CSV and JSON artifacts.
//!
//! Floats are written with six significant digits so that reruns are
//! byte-identical and diffs stay readable.

use std::io::{Read, Write};

use serde::Serialize;

use crate::dynamics::{BootstrapConfig, TailFit};
use crate::error::{Error, Result};
use crate::metrics::CycleScores;
use crate::preprocess::PerformanceSeries;
use crate::sensitivity::SweepResult;

pub const CYCLES_CSV: &str = "cycles.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const FIT_JSON: &str = "fit.json";
pub const RANK_SIZE_CSV: &str = "rank_size.csv";
pub const EXCEEDANCE_CSV: &str = "exceedance.csv";
pub const SENSITIVITY_RR_CSV: &str = "sensitivity_rr.csv";
pub const SENSITIVITY_ET_CSV: &str = "sensitivity_et.csv";

/// `%.6g`-style formatting: six significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn date_field(series: &PerformanceSeries, t: usize) -> String {
    series.date(t).map(|d| d.to_string()).unwrap_or_default()
}

pub const CYCLES_HEADER: [&str; 10] = [
    "cycle",
    "t_pre",
    "t_event",
    "t_post",
    "date_pre",
    "date_event",
    "date_post",
    "p_pre",
    "p_event",
    "p_post",
];

pub fn write_cycles_csv<W: Write>(
    scores: &[CycleScores],
    series: &PerformanceSeries,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CYCLES_HEADER)?;
    for s in scores {
        let c = &s.cycle;
        w.write_record([
            s.index.to_string(),
            c.t_pre.to_string(),
            c.t_event.to_string(),
            c.t_post.to_string(),
            date_field(series, c.t_pre),
            date_field(series, c.t_event),
            date_field(series, c.t_post),
            fmt_g6(c.p_pre),
            fmt_g6(c.p_event),
            fmt_g6(c.p_post),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const METRICS_HEADER: [&str; 18] = [
    "cycle",
    "t_pre",
    "t_event",
    "t_post",
    "ri",
    "r_m",
    "r_e",
    "s_f",
    "s_r",
    "r_d",
    "r_s",
    "rr_width",
    "et",
    "r1",
    "r2",
    "r3",
    "recovery_type",
    "date_event",
];

pub fn write_metrics_csv<W: Write>(
    scores: &[CycleScores],
    series: &PerformanceSeries,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for s in scores {
        let c = &s.cycle;
        let mut row = vec![
            s.index.to_string(),
            c.t_pre.to_string(),
            c.t_event.to_string(),
            c.t_post.to_string(),
        ];
        row.extend(
            [
                s.ri, s.r_m, s.r_e, s.s_f, s.s_r, s.r_d, s.r_s, s.rr_width, s.et, s.r1, s.r2, s.r3,
            ]
            .into_iter()
            .map(fmt_g6),
        );
        row.push(s.recovery_type.to_string());
        row.push(date_field(series, c.t_event));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `ri` column back from a metrics table.
pub fn read_metrics_ri<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let idx = r
        .headers()?
        .iter()
        .position(|h| h == "ri")
        .ok_or_else(|| Error::Format("metrics table has no `ri` column".into()))?;
    let mut values = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let field = record.get(idx).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| Error::row(i + 2, format!("unparseable ri {field:?}")))?;
        values.push(v);
    }
    Ok(values)
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport<'a> {
    pub n_cycles: usize,
    /// Strictly positive RI values; zeros cannot enter a power-law fit.
    pub n_positive: usize,
    #[serde(flatten)]
    pub fit: &'a TailFit,
    pub reps: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl<'a> FitReport<'a> {
    pub fn new(
        n_cycles: usize,
        n_positive: usize,
        fit: &'a TailFit,
        boot: &BootstrapConfig,
    ) -> Self {
        FitReport {
            n_cycles,
            n_positive,
            fit,
            reps: boot.reps,
            seed: boot.seed,
            batch_size: boot.batch_size,
        }
    }
}

pub fn write_fit_json<W: Write>(report: &FitReport<'_>, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_rank_size_csv<W: Write>(points: &[(usize, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "value"])?;
    for (rank, value) in points {
        w.write_record([rank.to_string(), fmt_g6(*value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_exceedance_csv<W: Write>(points: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value", "prob"])?;
    for (value, prob) in points {
        w.write_record([fmt_g6(*value), fmt_g6(*prob)])?;
    }
    w.flush()?;
    Ok(())
}

/// Header is the swept parameter, then one `cycle<i>_t<t_event>` column per cycle.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![sweep.parameter.key().to_string()];
    header.extend(sweep.columns.iter().map(|(i, t)| format!("cycle{i}_t{t}")));
    w.write_record(&header)?;
    for (value, row) in sweep.rows() {
        let mut record = vec![fmt_g6(value)];
        record.extend(row.iter().map(|v| fmt_g6(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
