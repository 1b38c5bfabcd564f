//! Normalization to a [0, 1] level of performance (LoP) and robust local
//! linear smoothing.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;

/// Robustifying passes after the initial local fit.
pub const ROBUST_ITERATIONS: usize = 5;

/// Residuals beyond this many median absolute residuals get zero weight.
const BISQUARE_SCALE: f64 = 6.0;

/// Level-of-performance series indexed by trading day `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceSeries {
    pub symbol: String,
    pub lop: Vec<f64>,
    /// Calendar date per trading-day index; empty for synthetic series.
    pub dates: Vec<NaiveDate>,
    pub smoothed: bool,
}

impl PerformanceSeries {
    /// A series with no calendar dates attached.
    pub fn from_values(symbol: impl Into<String>, lop: Vec<f64>) -> Self {
        PerformanceSeries {
            symbol: symbol.into(),
            lop,
            dates: Vec::new(),
            smoothed: false,
        }
    }

    /// Uses the raw closes as LoP without rescaling.
    pub fn unscaled(prices: &PriceSeries) -> Self {
        PerformanceSeries {
            symbol: prices.symbol().to_string(),
            lop: prices.closes().collect(),
            dates: prices.dates().collect(),
            smoothed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.lop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lop.is_empty()
    }

    pub fn date(&self, t: usize) -> Option<NaiveDate> {
        self.dates.get(t).copied()
    }
}

/// Divides every close by the series maximum.
pub fn normalize(series: &PriceSeries) -> PerformanceSeries {
    let max = series.closes().fold(f64::NEG_INFINITY, f64::max);
    PerformanceSeries {
        symbol: series.symbol().to_string(),
        lop: series.closes().map(|c| c / max).collect(),
        dates: series.dates().collect(),
        smoothed: false,
    }
}

/// Robust LOWESS with a degree-1 local model over the `span_days` nearest
/// trading days.
pub fn rlowess(series: &PerformanceSeries, span_days: usize) -> Result<PerformanceSeries> {
    let n = series.len();
    if span_days < 2 {
        return Err(Error::Config(format!(
            "span_days must be >= 2, got {span_days}"
        )));
    }
    if span_days > n {
        return Err(Error::Config(format!(
            "span_days {span_days} exceeds series length {n}"
        )));
    }
    Ok(PerformanceSeries {
        symbol: series.symbol.clone(),
        lop: robust_lowess(&series.lop, span_days, ROBUST_ITERATIONS),
        dates: series.dates.clone(),
        smoothed: true,
    })
}

/// Indices `[lo, hi]` of the `span` points nearest to `i` on a unit grid.
/// Ties go to the earlier point.
pub(crate) fn nearest_window(i: usize, span: usize, n: usize) -> (usize, usize) {
    let (mut lo, mut hi) = (i, i);
    while hi - lo + 1 < span {
        let left = (lo > 0).then(|| i - (lo - 1));
        let right = (hi + 1 < n).then(|| hi + 1 - i);
        match (left, right) {
            (Some(l), Some(r)) if l <= r => lo -= 1,
            (Some(_), Some(_)) => hi += 1,
            (Some(_), None) => lo -= 1,
            (None, Some(_)) => hi += 1,
            (None, None) => break,
        }
    }
    (lo, hi)
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

fn bisquare(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u;
        t * t
    }
}

/// Weighted least-squares line through `(x, y)` evaluated at `x0`.
/// Returns `None` when every weight is zero.
fn local_linear(y: &[f64], lo: usize, weights: &[f64], x0: f64) -> Option<f64> {
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        let x = (lo + k) as f64;
        sw += w;
        swx += w * x;
        swy += w * y[lo + k];
    }
    if sw <= 0.0 {
        return None;
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        let dx = (lo + k) as f64 - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (y[lo + k] - ybar);
    }
    // A single effective point (or all weight on one abscissa) fits a constant.
    if sxx <= 1e-12 * sw {
        return Some(ybar);
    }
    Some(ybar + sxy / sxx * (x0 - xbar))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Local linear smoothing of `y` on the abscissa `0..n`, followed by
/// `iterations` bisquare reweighting passes.
pub fn robust_lowess(y: &[f64], span: usize, iterations: usize) -> Vec<f64> {
    let n = y.len();
    let span = span.clamp(1, n.max(1));
    let windows: Vec<(usize, usize)> = (0..n).map(|i| nearest_window(i, span, n)).collect();

    let fit = |robust: Option<&[f64]>, fallback: Option<&[f64]>| -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(span);
        for (i, &(lo, hi)) in windows.iter().enumerate() {
            let radius = (i - lo).max(hi - i) as f64;
            weights.clear();
            for j in lo..=hi {
                let d = (j as f64 - i as f64).abs();
                let mut w = if radius > 0.0 {
                    tricube(d / radius)
                } else {
                    1.0
                };
                if let Some(r) = robust {
                    w *= r[j];
                }
                weights.push(w);
            }
            let value = local_linear(y, lo, &weights, i as f64)
                .or_else(|| fallback.map(|f| f[i]))
                .unwrap_or(y[i]);
            out.push(value);
        }
        out
    };

    let initial = fit(None, None);
    let scale = y.iter().map(|v| v.abs()).sum::<f64>() / n.max(1) as f64;
    let mut smoothed = initial.clone();
    for _ in 0..iterations {
        let residuals: Vec<f64> = y.iter().zip(&smoothed).map(|(a, b)| a - b).collect();
        let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        let mad = median(&mut abs);
        if mad <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        let cutoff = BISQUARE_SCALE * mad;
        let robust: Vec<f64> = residuals
            .iter()
            .map(|r| bisquare(r.abs() / cutoff))
            .collect();
        smoothed = fit(Some(&robust), Some(&initial));
    }
    smoothed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Observation;

    fn prices(closes: &[f64]) -> PriceSeries {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let obs = closes
            .iter()
            .enumerate()
            .map(|(i, &close)| Observation {
                date: start + chrono::Days::new(i as u64),
                close,
            })
            .collect();
        PriceSeries::new("T", obs).unwrap()
    }

    #[test]
    fn normalize_divides_by_max() {
        let s = normalize(&prices(&[2.0, 4.0, 1.0]));
        assert_eq!(s.lop, vec![0.5, 1.0, 0.25]);
        assert!(!s.smoothed);
    }

    #[test]
    fn normalize_constant_is_all_ones() {
        assert_eq!(normalize(&prices(&[5.0, 5.0, 5.0])).lop, vec![1.0; 3]);
    }

    #[test]
    fn unique_max_hits_one_once() {
        let s = normalize(&prices(&[3.0, 7.0, 2.0, 6.9]));
        assert_eq!(s.lop.iter().filter(|&&v| v == 1.0).count(), 1);
    }

    #[test]
    fn windows_prefer_left_on_ties() {
        assert_eq!(nearest_window(5, 4, 10), (3, 6));
        assert_eq!(nearest_window(0, 4, 10), (0, 3));
        assert_eq!(nearest_window(9, 4, 10), (6, 9));
        assert_eq!(nearest_window(2, 5, 10), (0, 4));
        assert_eq!(nearest_window(1, 4, 4), (0, 3));
    }

    #[test]
    fn linear_data_is_reproduced() {
        let s = PerformanceSeries::from_values("L", vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let out = rlowess(&s, 4).unwrap();
        for (a, b) in out.lop.iter().zip(&s.lop) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(out.smoothed);
    }

    #[test]
    fn constant_data_is_reproduced() {
        let s = PerformanceSeries::from_values("C", vec![0.7; 12]);
        let out = rlowess(&s, 4).unwrap();
        assert!(out.lop.iter().all(|&v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn span_longer_than_series_is_config_error() {
        let s = PerformanceSeries::from_values("S", vec![0.1, 0.2, 0.3]);
        assert!(matches!(rlowess(&s, 4), Err(Error::Config(_))));
        assert!(matches!(rlowess(&s, 1), Err(Error::Config(_))));
    }
}
