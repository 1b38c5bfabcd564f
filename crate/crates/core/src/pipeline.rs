//! Ingest → normalize → smooth → segment → filter → extract → score.

use std::io::Read;

use crate::config::PipelineConfig;
use crate::cycles::{extract_cycles, segment_runs, tau_filter, ResilienceCycle, Run};
use crate::error::Result;
use crate::ingest::{parse_csv, CsvOptions, ParsedSeries};
use crate::metrics::{score_all, ScoreReport};
use crate::preprocess::{normalize, rlowess, PerformanceSeries};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub dropped_rows: usize,
    pub series: PerformanceSeries,
    pub runs: Vec<Run>,
    pub cycles: Vec<ResilienceCycle>,
    pub report: ScoreReport,
}

pub fn performance_series(
    parsed: &ParsedSeries,
    cfg: &PipelineConfig,
) -> Result<PerformanceSeries> {
    let series = if cfg.normalize {
        normalize(&parsed.series)
    } else {
        PerformanceSeries::unscaled(&parsed.series)
    };
    if cfg.smooth {
        rlowess(&series, cfg.span_days)
    } else {
        Ok(series)
    }
}

pub fn analyze_series(
    series: PerformanceSeries,
    dropped_rows: usize,
    cfg: &PipelineConfig,
) -> Result<Analysis> {
    cfg.tolerance.validate()?;
    let raw_runs = segment_runs(&series);
    let runs = tau_filter(&raw_runs, &series, cfg.tau_days);
    let cycles = extract_cycles(&runs, &series);
    let report = score_all(&cycles, &series, &cfg.tolerance);
    Ok(Analysis {
        dropped_rows,
        series,
        runs,
        cycles,
        report,
    })
}

pub fn analyze_prices(parsed: &ParsedSeries, cfg: &PipelineConfig) -> Result<Analysis> {
    let series = performance_series(parsed, cfg)?;
    analyze_series(series, parsed.dropped_rows, cfg)
}

/// Parses a daily-history CSV and runs the full pipeline on it.
pub fn analyze_csv<R: Read>(raw: R, symbol: &str, cfg: &PipelineConfig) -> Result<Analysis> {
    let parsed = parse_csv(raw, symbol, CsvOptions::for_tau(cfg.tau_days))?;
    analyze_prices(&parsed, cfg)
}
