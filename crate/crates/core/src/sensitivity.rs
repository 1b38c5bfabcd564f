//! One-parameter sweeps of the tolerance thresholds.

use std::fmt;

use crate::cycles::ResilienceCycle;
use crate::error::{Error, Result};
use crate::metrics::{score_all, ToleranceConfig};
use crate::preprocess::PerformanceSeries;

/// Slack when deciding whether `hi - lo` is a whole number of steps.
const GRID_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    PRr,
    PEt,
}

impl SweepParameter {
    pub fn key(&self) -> &'static str {
        match self {
            SweepParameter::PRr => "p_rr",
            SweepParameter::PEt => "p_et",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Closed interval `lo..=hi` sampled every `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        GridSpec { lo, hi, step }
    }

    /// `lo + i * step` for each `i`. The last point is `hi` itself when the
    /// interval is a whole number of steps.
    pub fn points(&self) -> Result<Vec<f64>> {
        let GridSpec { lo, hi, step } = *self;
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if lo > hi {
            return Err(Error::Config(format!("grid lo {lo} exceeds hi {hi}")));
        }
        if step <= 0.0 {
            return Err(Error::Config(format!("grid step must be > 0, got {step}")));
        }
        let steps = (hi - lo) / step;
        let whole = steps.round();
        let exact = (steps - whole).abs() <= GRID_TOLERANCE * whole.max(1.0);
        let count = if exact { whole } else { steps.floor() } as usize + 1;
        let mut grid: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
        if exact {
            if let Some(last) = grid.last_mut() {
                *last = hi;
            }
        }
        Ok(grid)
    }
}

/// RI per grid point (rows) and scored cycle (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub grid: Vec<f64>,
    pub scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Original index and `t_event` of each scored cycle, in column order.
    pub columns: Vec<(usize, usize)>,
    pub main: SweepBlock,
    /// Optional finer grid evaluated separately.
    pub micro: Option<SweepBlock>,
}

impl SweepResult {
    /// Main rows followed by micro rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        let micro = self.micro.iter().flat_map(|b| b.grid.iter().zip(&b.scores));
        self.main
            .grid
            .iter()
            .zip(&self.main.scores)
            .chain(micro)
            .map(|(&g, row)| (g, row.as_slice()))
    }

    pub fn row_count(&self) -> usize {
        self.main.grid.len() + self.micro.as_ref().map_or(0, |b| b.grid.len())
    }
}

fn evaluate(
    cycles: &[ResilienceCycle],
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
    parameter: SweepParameter,
    grid: Vec<f64>,
) -> Result<SweepBlock> {
    let mut scores = Vec::with_capacity(grid.len());
    for &value in &grid {
        let mut row_cfg = *cfg;
        match parameter {
            SweepParameter::PRr => row_cfg.p_rr = value,
            SweepParameter::PEt => row_cfg.p_et = value,
        }
        row_cfg.validate()?;
        scores.push(score_all(cycles, series, &row_cfg).ri_values());
    }
    Ok(SweepBlock { grid, scores })
}

fn columns(
    cycles: &[ResilienceCycle],
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
) -> Vec<(usize, usize)> {
    score_all(cycles, series, cfg)
        .scores
        .iter()
        .map(|s| (s.index, s.cycle.t_event))
        .collect()
}

/// RI across a grid of `p_rr`, `p_et` held at `cfg.p_et`.
pub fn sweep_rr(
    cycles: &[ResilienceCycle],
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
    grid: GridSpec,
) -> Result<SweepResult> {
    let main = evaluate(cycles, series, cfg, SweepParameter::PRr, grid.points()?)?;
    Ok(SweepResult {
        parameter: SweepParameter::PRr,
        columns: columns(cycles, series, cfg),
        main,
        micro: None,
    })
}

/// RI across a grid of `p_et`, `p_rr` held at `cfg.p_rr`, plus an optional
/// finer grid.
pub fn sweep_et(
    cycles: &[ResilienceCycle],
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
    grid: GridSpec,
    micro: Option<GridSpec>,
) -> Result<SweepResult> {
    let main = evaluate(cycles, series, cfg, SweepParameter::PEt, grid.points()?)?;
    let micro = micro
        .map(|m| evaluate(cycles, series, cfg, SweepParameter::PEt, m.points()?))
        .transpose()?;
    Ok(SweepResult {
        parameter: SweepParameter::PEt,
        columns: columns(cycles, series, cfg),
        main,
        micro,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rr_grid_has_twenty_points() {
        let g = GridSpec::new(0.0001, 0.002, 0.0001).points().unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[19], 0.002);
    }

    #[test]
    fn default_et_grids() {
        let main = GridSpec::new(0.0, 1.0, 0.01).points().unwrap();
        assert_eq!(main.len(), 101);
        assert_eq!(main[100], 1.0);
        let micro = GridSpec::new(0.99, 1.0, 0.001).points().unwrap();
        assert_eq!(micro.len(), 11);
        assert_eq!(micro[10], 1.0);
    }

    #[test]
    fn non_multiple_excludes_endpoint() {
        let g = GridSpec::new(0.0, 1.0, 0.3).points().unwrap();
        assert_eq!(g.len(), 4);
        assert!(g[3] < 1.0);
    }

    #[test]
    fn degenerate_grid() {
        assert_eq!(GridSpec::new(0.5, 0.5, 0.1).points().unwrap(), vec![0.5]);
        assert!(GridSpec::new(0.6, 0.5, 0.1).points().is_err());
        assert!(GridSpec::new(0.0, 0.5, 0.0).points().is_err());
    }

    #[test]
    fn grid_is_strictly_increasing() {
        let g = GridSpec::new(0.0, 1.0, 0.01).points().unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
