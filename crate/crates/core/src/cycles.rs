//! Drawdown/drawup segmentation and resilience-cycle extraction.
//!
//! A series is cut into maximal weakly-monotone runs, short runs are folded
//! into their neighbours by a duration filter (τ), and each drawdown paired
//! with the drawup that follows it becomes one resilience cycle.

use std::fmt;

use crate::preprocess::PerformanceSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Up,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Down => "down",
            Direction::Up => "up",
        })
    }
}

/// A drawdown or drawup over trading days `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub direction: Direction,
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn new(direction: Direction, start: usize, end: usize) -> Self {
        Run {
            direction,
            start,
            end,
        }
    }

    /// Days spanned, `end - start`.
    pub fn duration(&self) -> usize {
        self.end - self.start
    }
}

/// One drawdown followed by its recovery.
///
/// `t_event == t_post` only for a series that ends mid-decline; such a cycle
/// has no recovery leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResilienceCycle {
    pub t_pre: usize,
    pub t_event: usize,
    pub t_post: usize,
    pub p_pre: f64,
    pub p_event: f64,
    pub p_post: f64,
}

impl ResilienceCycle {
    /// Reads the anchor LoP values from `series`.
    pub fn from_series(
        series: &PerformanceSeries,
        t_pre: usize,
        t_event: usize,
        t_post: usize,
    ) -> Self {
        ResilienceCycle {
            t_pre,
            t_event,
            t_post,
            p_pre: series.lop[t_pre],
            p_event: series.lop[t_event],
            p_post: series.lop[t_post],
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.t_post == self.t_event
    }
}

/// Partitions the series into alternating weakly-monotone runs. Flat steps
/// extend whichever run is in progress.
pub fn segment_runs(series: &PerformanceSeries) -> Vec<Run> {
    let lop = &series.lop;
    let n = lop.len();
    if n < 2 {
        return Vec::new();
    }
    let mut runs = Vec::new();
    let mut current: Option<Direction> = None;
    let mut start = 0;
    for i in 0..n - 1 {
        let step = match lop[i + 1].partial_cmp(&lop[i]) {
            Some(std::cmp::Ordering::Greater) => Direction::Up,
            Some(std::cmp::Ordering::Less) => Direction::Down,
            _ => continue,
        };
        match current {
            None => current = Some(step),
            Some(dir) if dir != step => {
                runs.push(Run::new(dir, start, i));
                start = i;
                current = Some(step);
            }
            Some(_) => {}
        }
    }
    runs.push(Run::new(current.unwrap_or(Direction::Up), start, n - 1));
    runs
}

fn net_direction(lop: &[f64], start: usize, end: usize, tie: Direction) -> Direction {
    if lop[end] > lop[start] {
        Direction::Up
    } else if lop[end] < lop[start] {
        Direction::Down
    } else {
        tie
    }
}

fn coalesce(runs: &mut Vec<Run>) {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for run in runs.drain(..) {
        match out.last_mut() {
            Some(last) if last.direction == run.direction => last.end = run.end,
            _ => out.push(run),
        }
    }
    *runs = out;
}

/// Merges runs shorter than `tau_days` into their neighbours until every
/// interior run spans at least `tau_days`.
///
/// The shortest offending run goes first (earliest start breaks ties). An
/// interior run is joined with both neighbours; the joined run takes the sign
/// of its endpoint-to-endpoint change. A short first or last run is joined with
/// its single neighbour when that neighbour is interior.
pub fn tau_filter(runs: &[Run], series: &PerformanceSeries, tau_days: usize) -> Vec<Run> {
    let lop = &series.lop;
    let mut runs = runs.to_vec();
    loop {
        coalesce(&mut runs);
        let m = runs.len();
        let victim = runs
            .iter()
            .enumerate()
            .filter(|(k, r)| {
                let interior = *k > 0 && *k + 1 < m;
                r.duration() < tau_days && (interior || m >= 3)
            })
            .min_by_key(|(_, r)| (r.duration(), r.start))
            .map(|(k, _)| k);
        let Some(k) = victim else { break };

        let (first, last) = if k == 0 {
            (0, 1)
        } else if k + 1 == m {
            (m - 2, m - 1)
        } else {
            (k - 1, k + 1)
        };
        let start = runs[first].start;
        let end = runs[last].end;
        let tie = if k == 0 {
            runs[1].direction
        } else {
            runs[k - 1].direction
        };
        let merged = Run::new(net_direction(lop, start, end, tie), start, end);
        runs.splice(first..=last, std::iter::once(merged));
    }
    runs
}

/// Pairs each drawdown with the following drawup.
///
/// Leading drawups are skipped. A trailing drawdown yields a truncated cycle
/// whose post-event point is the last observation.
pub fn extract_cycles(runs: &[Run], series: &PerformanceSeries) -> Vec<ResilienceCycle> {
    let mut cycles = Vec::new();
    let mut iter = runs.iter().peekable();
    while let Some(run) = iter.next() {
        if run.direction != Direction::Down {
            continue;
        }
        let t_post = match iter.peek() {
            Some(next) if next.direction == Direction::Up => next.end,
            _ => series.len() - 1,
        };
        cycles.push(ResilienceCycle::from_series(
            series, run.start, run.end, t_post,
        ));
    }
    cycles
}

/// `segment_runs`, then `tau_filter`, then `extract_cycles`.
pub fn identify_cycles(series: &PerformanceSeries, tau_days: usize) -> Vec<ResilienceCycle> {
    let runs = segment_runs(series);
    let filtered = tau_filter(&runs, series, tau_days);
    extract_cycles(&filtered, series)
}
