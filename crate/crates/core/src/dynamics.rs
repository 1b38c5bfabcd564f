//! Distribution of per-cycle scores: rank-size and exceedance tables, a
//! continuous power-law fit to the upper tail, and a bootstrap
//! Kolmogorov-Smirnov goodness-of-fit test.
//!
//! The tail cutoff `x_min` is the candidate minimizing the K-S distance
//! between the tail's empirical CDF and the maximum-likelihood power law
//! fitted above it. The p-value follows the semi-parametric scheme: synthetic
//! samples keep the empirical body below `x_min`, draw the tail from the
//! fitted law, and are refitted from scratch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample `fit_power_law` accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha: f64,
    pub x_min: f64,
    /// Observations at or above `x_min`.
    pub n_tail: usize,
    /// Size of the fitted sample.
    pub n: usize,
    pub ks_stat: f64,
    /// Bootstrap p-values, one per batch of replicates. Empty before
    /// [`bootstrap_ks`] runs.
    pub p_values: Vec<f64>,
    /// Mean of `p_values`; `None` before bootstrapping.
    pub p_mean: Option<f64>,
}

impl TailFit {
    pub fn rejects_at(&self, significance: f64) -> Option<bool> {
        self.p_mean.map(|p| p < significance)
    }
}

/// Values sorted descending and paired with ranks `1..=n`. Equal values keep
/// their input order.
pub fn rank_size(values: &[f64]) -> Vec<(usize, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (i + 1, v))
        .collect()
}

/// Fraction of observations at or above each distinct value, ascending in value.
pub fn exceedance(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        out.push((x, (n - i) as f64 / n as f64));
        while i < n && sorted[i] == x {
            i += 1;
        }
    }
    out
}

/// Draws from a continuous power law with density `∝ x^-alpha` on `[x_min, ∞)`.
pub fn sample_power_law<R: Rng + ?Sized>(rng: &mut R, alpha: f64, x_min: f64) -> f64 {
    let u: f64 = rng.random();
    x_min * (1.0 - u).powf(-1.0 / (alpha - 1.0))
}

struct Candidate {
    start: usize,
    alpha: f64,
    ks: f64,
}

/// Tail quantiles probed for a cheap lower bound on the K-S distance.
const PROBES: [f64; 15] = [
    0.0, 0.0625, 0.125, 0.1875, 0.25, 0.3125, 0.375, 0.4375, 0.5, 0.5625, 0.625, 0.6875, 0.75,
    0.875, 1.0,
];

/// Lower bound on the K-S distance of the tail starting at `start`. Ignoring
/// ties can only shrink the deviation at a point.
fn probe_bound(logs: &[f64], start: usize, alpha: f64) -> f64 {
    let m = (logs.len() - start) as f64;
    let log_min = logs[start];
    let exponent = 1.0 - alpha;
    PROBES
        .iter()
        .map(|q| {
            let k = start + (q * (m - 1.0)) as usize;
            let cdf = 1.0 - (exponent * (logs[k] - log_min)).exp();
            let below = (k - start) as f64 / m;
            (cdf - below).max(below + 1.0 / m - cdf)
        })
        .fold(0.0, f64::max)
}

/// K-S distance between the ECDF of `logs[start..]` and the fitted CDF, or
/// `None` once it exceeds `bound` (or reaches it, when `inclusive`).
fn tail_ks(logs: &[f64], start: usize, alpha: f64, bound: f64, inclusive: bool) -> Option<f64> {
    let m = (logs.len() - start) as f64;
    let log_min = logs[start];
    let exponent = 1.0 - alpha;
    let mut d: f64 = 0.0;
    let mut k = start;
    while k < logs.len() {
        let mut end = k;
        while end + 1 < logs.len() && logs[end + 1] == logs[k] {
            end += 1;
        }
        let cdf = 1.0 - (exponent * (logs[k] - log_min)).exp();
        let below = (k - start) as f64 / m;
        let at = (end + 1 - start) as f64 / m;
        d = d.max(cdf - below).max(at - cdf);
        if d > bound || (inclusive && d >= bound) {
            return None;
        }
        k = end + 1;
    }
    Some(d)
}

/// Minimum-distance cutoff; ties go to the smaller cutoff. Candidates are
/// visited in order of their probe bound so most never need a full scan.
fn best_candidate(sorted: &[f64]) -> Option<Candidate> {
    let n = sorted.len();
    let logs: Vec<f64> = sorted.iter().map(|v| v.ln()).collect();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + logs[i];
    }

    let mut pending: Vec<(f64, usize, f64)> = Vec::new();
    for start in 0..n.saturating_sub(1) {
        if start > 0 && sorted[start] == sorted[start - 1] {
            continue;
        }
        let n_tail = n - start;
        let spread = suffix[start] - n_tail as f64 * logs[start];
        if spread <= 0.0 {
            continue;
        }
        let alpha = 1.0 + n_tail as f64 / spread;
        pending.push((probe_bound(&logs, start, alpha), start, alpha));
    }
    pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best: Option<Candidate> = None;
    for (lower, start, alpha) in pending {
        let (bound, inclusive) = match &best {
            Some(b) => {
                if lower > b.ks || (lower == b.ks && start > b.start) {
                    break;
                }
                (b.ks, start > b.start)
            }
            None => (f64::INFINITY, false),
        };
        if let Some(ks) = tail_ks(&logs, start, alpha, bound, inclusive) {
            best = Some(Candidate { start, alpha, ks });
        }
    }
    best
}

/// Maximum-likelihood power-law fit to the upper tail with K-S selection of
/// `x_min` over every distinct observed value.
pub fn fit_power_law(values: &[f64]) -> Result<TailFit> {
    if values.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientTail(format!(
            "{} values, at least {MIN_FIT_SAMPLES} required",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Config(format!(
            "power-law fit requires positive finite values, got {bad}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let best = best_candidate(&sorted).ok_or_else(|| {
        Error::InsufficientTail("no cutoff leaves two or more distinct tail values".into())
    })?;
    Ok(TailFit {
        alpha: best.alpha,
        x_min: sorted[best.start],
        n_tail: sorted.len() - best.start,
        n: sorted.len(),
        ks_stat: best.ks,
        p_values: Vec::new(),
        p_mean: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub reps: usize,
    pub seed: u64,
    /// Replicates averaged into each reported p-value.
    pub batch_size: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            reps: 1000,
            seed: 42,
            batch_size: 50,
        }
    }
}

/// Generator for replicate `rep`: one ChaCha8 stream per replicate under a
/// shared seed.
fn replicate_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Whether the refitted K-S distance of one synthetic sample reaches the
/// empirical one.
fn replicate_exceeds(
    body: &[f64],
    fit: &TailFit,
    rng: &mut ChaCha8Rng,
    buf: &mut Vec<f64>,
) -> bool {
    let tail_share = fit.n_tail as f64 / fit.n as f64;
    buf.clear();
    for _ in 0..fit.n {
        let from_tail = body.is_empty() || rng.random::<f64>() < tail_share;
        let x = if from_tail {
            sample_power_law(rng, fit.alpha, fit.x_min)
        } else {
            body[rng.random_range(0..body.len())]
        };
        buf.push(x);
    }
    match fit_power_law(buf) {
        Ok(synthetic) => synthetic.ks_stat >= fit.ks_stat,
        Err(_) => false,
    }
}

/// Bootstrap K-S p-value for `fit` on `values`.
///
/// `p_values` holds the exceedance rate of each batch of `batch_size`
/// replicates (the last batch may be short). Identical for a fixed seed
/// regardless of thread scheduling.
pub fn bootstrap_ks(values: &[f64], fit: &TailFit, cfg: &BootstrapConfig) -> Result<TailFit> {
    if cfg.reps == 0 {
        return Err(Error::Config("dynamics.reps must be >= 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("dynamics.batch_size must be >= 1".into()));
    }
    if values.len() != fit.n {
        return Err(Error::Config(format!(
            "fit was made on {} values but {} were supplied",
            fit.n,
            values.len()
        )));
    }
    let mut body: Vec<f64> = values.iter().copied().filter(|&v| v < fit.x_min).collect();
    body.sort_by(f64::total_cmp);

    let hits: Vec<bool> = (0..cfg.reps)
        .into_par_iter()
        .map_init(Vec::new, |buf, rep| {
            let mut rng = replicate_rng(cfg.seed, rep);
            replicate_exceeds(&body, fit, &mut rng, buf)
        })
        .collect();

    let p_values: Vec<f64> = hits
        .chunks(cfg.batch_size)
        .map(|batch| batch.iter().filter(|&&h| h).count() as f64 / batch.len() as f64)
        .collect();
    let p_mean = p_values.iter().sum::<f64>() / p_values.len() as f64;
    Ok(TailFit {
        p_values,
        p_mean: Some(p_mean),
        ..fit.clone()
    })
}
