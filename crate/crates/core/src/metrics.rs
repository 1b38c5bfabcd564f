//! Per-cycle resilience scoring.
//!
//! The resilience indicator (RI) multiplies four elemental functions:
//!
//! * resistance `R_m = P(t_event) + RR`
//! * re-stabilization `R_e`, the share of the drop that fell below the
//!   elasticity threshold `ET = P_ET * P(t_pre)`
//! * rebuilding `R_d = S_r / S_f`, recovery slope over failure slope
//! * reconfiguration `R_s`, LoP regained over LoP lost
//!
//! `RI = R_m * (1 - R_e) * R_d * R_s`.
//!
//! Three comparators are scored alongside: an area-loss metric (R1), an
//! area-ratio metric (R2) and a recovery-speed product (R3).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cycles::ResilienceCycle;
use crate::error::{Error, Result};
use crate::preprocess::PerformanceSeries;

/// Tolerance around 0 and 1 when classifying `R_s`.
pub const RECOVERY_TOLERANCE: f64 = 1e-9;

/// Denominator used by the re-stabilization function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestabDenominator {
    /// `(ET - p_event) / (p_pre - p_event)`.
    #[default]
    Eq4,
    /// `(ET - p_event) / ET`, as used in the worked example.
    Appendix,
}

impl fmt::Display for RestabDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestabDenominator::Eq4 => "eq4",
            RestabDenominator::Appendix => "appendix",
        })
    }
}

impl FromStr for RestabDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eq4" => Ok(RestabDenominator::Eq4),
            "appendix" => Ok(RestabDenominator::Appendix),
            other => Err(Error::Config(format!(
                "restab_denominator must be `eq4` or `appendix`, got `{other}`"
            ))),
        }
    }
}

/// The two fault-tolerance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Robustness half-range as a fraction (0.0001 is 0.01%).
    pub p_rr: f64,
    /// Elasticity threshold as a fraction of the pre-event LoP.
    pub p_et: f64,
    pub restab_denominator: RestabDenominator,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            p_rr: 0.0001,
            p_et: 0.8,
            restab_denominator: RestabDenominator::Eq4,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_rr.is_finite() && self.p_rr >= 0.0) {
            return Err(Error::Config(format!(
                "p_rr must be >= 0, got {}",
                self.p_rr
            )));
        }
        if !(0.0..=1.0).contains(&self.p_et) {
            return Err(Error::Config(format!(
                "p_et must lie in [0, 1], got {}",
                self.p_et
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryType {
    Collapse,
    Insufficient,
    Leveled,
    Adaptive,
}

impl RecoveryType {
    pub fn classify(r_s: f64) -> Self {
        if r_s.abs() <= RECOVERY_TOLERANCE {
            RecoveryType::Collapse
        } else if (r_s - 1.0).abs() <= RECOVERY_TOLERANCE {
            RecoveryType::Leveled
        } else if r_s < 1.0 {
            RecoveryType::Insufficient
        } else {
            RecoveryType::Adaptive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryType::Collapse => "collapse",
            RecoveryType::Insufficient => "insufficient",
            RecoveryType::Leveled => "leveled",
            RecoveryType::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for RecoveryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full width of the robustness band, `2 * p_rr`.
pub fn rr_width(cfg: &ToleranceConfig) -> f64 {
    2.0 * cfg.p_rr
}

/// `ET = p_et * p_pre`.
pub fn elasticity_threshold(cfg: &ToleranceConfig, cycle: &ResilienceCycle) -> f64 {
    cfg.p_et * cycle.p_pre
}

/// Resistance, `R_m`.
pub fn resistance(cycle: &ResilienceCycle, cfg: &ToleranceConfig) -> f64 {
    cycle.p_event + rr_width(cfg)
}

fn downturn(cycle: &ResilienceCycle) -> Result<f64> {
    let drop = cycle.p_pre - cycle.p_event;
    if drop == 0.0 {
        return Err(Error::DegenerateCycle { p_pre: cycle.p_pre });
    }
    Ok(drop)
}

/// Re-stabilization, `R_e`, clamped to [0, 1]. Zero when the trough stays at
/// or above ET.
pub fn restabilization(cycle: &ResilienceCycle, cfg: &ToleranceConfig) -> Result<f64> {
    let drop = downturn(cycle)?;
    let et = elasticity_threshold(cfg, cycle);
    if et <= cycle.p_event {
        return Ok(0.0);
    }
    let denominator = match cfg.restab_denominator {
        RestabDenominator::Eq4 => drop,
        RestabDenominator::Appendix => et,
    };
    Ok(((et - cycle.p_event) / denominator).clamp(0.0, 1.0))
}

/// Failure slope, recovery slope and their ratio `R_d`, per trading day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rebuilding {
    pub s_f: f64,
    pub s_r: f64,
    pub r_d: f64,
}

pub fn rebuilding(cycle: &ResilienceCycle) -> Result<Rebuilding> {
    let failure_days = cycle.t_event.saturating_sub(cycle.t_pre);
    if failure_days == 0 || cycle.p_pre == cycle.p_event {
        return Err(Error::ZeroFailureSlope {
            t_pre: cycle.t_pre,
            t_event: cycle.t_event,
        });
    }
    let s_f = (cycle.p_pre - cycle.p_event) / failure_days as f64;
    let recovery_days = cycle.t_post - cycle.t_event;
    let s_r = if recovery_days == 0 {
        0.0
    } else {
        (cycle.p_post - cycle.p_event) / recovery_days as f64
    };
    Ok(Rebuilding {
        s_f,
        s_r,
        r_d: s_r / s_f,
    })
}

/// Reconfiguration, `R_s`.
pub fn reconfiguration(cycle: &ResilienceCycle) -> Result<f64> {
    let drop = downturn(cycle)?;
    Ok((cycle.p_post - cycle.p_event) / drop)
}

/// The resilience indicator.
pub fn ri(cycle: &ResilienceCycle, cfg: &ToleranceConfig) -> Result<f64> {
    let r_m = resistance(cycle, cfg);
    let r_e = restabilization(cycle, cfg)?;
    let r_d = rebuilding(cycle)?.r_d;
    let r_s = reconfiguration(cycle)?;
    Ok(r_m * (1.0 - r_e) * r_d * r_s)
}

fn trapezoid(values: &[f64]) -> f64 {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum()
}

fn cycle_span<'a>(cycle: &ResilienceCycle, series: &'a PerformanceSeries) -> &'a [f64] {
    &series.lop[cycle.t_pre..=cycle.t_post]
}

/// Area between the pre-event level and the LoP over the cycle, in LoP-days.
pub fn r1(cycle: &ResilienceCycle, series: &PerformanceSeries) -> f64 {
    let gap: Vec<f64> = cycle_span(cycle, series)
        .iter()
        .map(|v| cycle.p_pre - v)
        .collect();
    trapezoid(&gap)
}

/// Area under the LoP over the area under the pre-event level.
pub fn r2(cycle: &ResilienceCycle, series: &PerformanceSeries) -> f64 {
    let days = (cycle.t_post - cycle.t_pre) as f64;
    if days == 0.0 {
        return 1.0;
    }
    trapezoid(cycle_span(cycle, series)) / (cycle.p_pre * days)
}

/// Recovery slope times the post/pre and trough/pre LoP ratios.
pub fn r3(cycle: &ResilienceCycle) -> f64 {
    let recovery_days = cycle.t_post - cycle.t_event;
    let speed = if recovery_days == 0 {
        0.0
    } else {
        (cycle.p_post - cycle.p_event) / recovery_days as f64
    };
    speed * (cycle.p_post / cycle.p_pre) * (cycle.p_event / cycle.p_pre)
}

/// All metric outputs for one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleScores {
    /// Position of the cycle in the input list.
    pub index: usize,
    #[serde(skip)]
    pub cycle: ResilienceCycle,
    pub rr_width: f64,
    pub et: f64,
    pub r_m: f64,
    pub r_e: f64,
    pub s_f: f64,
    pub s_r: f64,
    pub r_d: f64,
    pub r_s: f64,
    pub ri: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub recovery_type: RecoveryType,
}

pub fn score_cycle(
    index: usize,
    cycle: &ResilienceCycle,
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
) -> Result<CycleScores> {
    let r_m = resistance(cycle, cfg);
    let r_e = restabilization(cycle, cfg)?;
    let Rebuilding { s_f, s_r, r_d } = rebuilding(cycle)?;
    let r_s = reconfiguration(cycle)?;
    Ok(CycleScores {
        index,
        cycle: *cycle,
        rr_width: rr_width(cfg),
        et: elasticity_threshold(cfg, cycle),
        r_m,
        r_e,
        s_f,
        s_r,
        r_d,
        r_s,
        ri: r_m * (1.0 - r_e) * r_d * r_s,
        r1: r1(cycle, series),
        r2: r2(cycle, series),
        r3: r3(cycle),
        recovery_type: RecoveryType::classify(r_s),
    })
}

/// A cycle excluded from scoring and why.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCycle {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreReport {
    pub scores: Vec<CycleScores>,
    pub skipped: Vec<SkippedCycle>,
}

impl ScoreReport {
    pub fn ri_values(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s.ri).collect()
    }
}

/// Scores every cycle in order. Cycles without a downturn are skipped and
/// reported instead of failing the batch.
pub fn score_all(
    cycles: &[ResilienceCycle],
    series: &PerformanceSeries,
    cfg: &ToleranceConfig,
) -> ScoreReport {
    let mut report = ScoreReport::default();
    for (index, cycle) in cycles.iter().enumerate() {
        match score_cycle(index, cycle, series, cfg) {
            Ok(scores) => report.scores.push(scores),
            Err(e) => report.skipped.push(SkippedCycle {
                index,
                reason: e.to_string(),
            }),
        }
    }
    report
}
