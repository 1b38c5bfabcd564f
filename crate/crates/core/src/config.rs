//! Flat `key = value` run configuration.
//!
//! Every key has a built-in default, so a config file is optional. Lines
//! starting with `#` are comments.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::dynamics::BootstrapConfig;
use crate::error::{Error, Result};
use crate::ingest::DEFAULT_URL_TEMPLATE;
use crate::metrics::{RestabDenominator, ToleranceConfig};
use crate::sensitivity::GridSpec;

/// Settings for ingest through scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Divide closes by their maximum. Off only for pre-scaled inputs.
    pub normalize: bool,
    pub smooth: bool,
    pub span_days: usize,
    pub tau_days: usize,
    pub tolerance: ToleranceConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            normalize: true,
            smooth: true,
            span_days: 4,
            tau_days: 3,
            tolerance: ToleranceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchConfig {
    pub symbol: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub url_template: String,
    /// Where `fetch` writes the CSV; defaults to `<out_dir>/<symbol>.csv`.
    pub output: Option<PathBuf>,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            symbol: "^IXIC".into(),
            start: NaiveDate::from_ymd_opt(2013, 9, 16).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2018, 4, 16).expect("valid date"),
            url_template: DEFAULT_URL_TEMPLATE.into(),
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub rr: GridSpec,
    pub et: GridSpec,
    pub et_micro: Option<GridSpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rr: GridSpec::new(0.0001, 0.002, 0.0001),
            et: GridSpec::new(0.0, 1.0, 0.01),
            et_micro: Some(GridSpec::new(0.99, 1.0, 0.001)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub pipeline: PipelineConfig,
    pub dynamics: BootstrapConfig,
    pub sweep: SweepConfig,
    pub fetch: FetchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out_dir: PathBuf::from("out"),
            pipeline: PipelineConfig::default(),
            dynamics: BootstrapConfig::default(),
            sweep: SweepConfig::default(),
            fetch: FetchConfig::default(),
        }
    }
}

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("input", "input CSV path"),
    ("out_dir", "output directory"),
    (
        "preprocess.normalize",
        "divide closes by their maximum (bool)",
    ),
    ("preprocess.smooth", "apply robust LOWESS (bool)"),
    ("preprocess.span_days", "LOWESS window in trading days"),
    ("cycles.tau_days", "minimum run duration in days"),
    ("metric.p_rr", "robustness half-range as a fraction"),
    (
        "metric.p_et",
        "elasticity threshold as a fraction of pre-event LoP",
    ),
    ("metric.restab_denominator", "eq4 or appendix"),
    ("dynamics.reps", "bootstrap replicates"),
    ("dynamics.seed", "bootstrap seed"),
    ("dynamics.batch_size", "replicates per reported p-value"),
    ("sweep.rr_lo", "first p_rr in the RR sweep"),
    ("sweep.rr_hi", "last p_rr in the RR sweep"),
    ("sweep.rr_step", "p_rr increment"),
    ("sweep.et_lo", "first p_et in the ET sweep"),
    ("sweep.et_hi", "last p_et in the ET sweep"),
    ("sweep.et_step", "p_et increment"),
    ("sweep.et_micro", "append a fine ET grid (bool)"),
    ("sweep.et_micro_lo", "first p_et of the fine grid"),
    ("sweep.et_micro_hi", "last p_et of the fine grid"),
    ("sweep.et_micro_step", "fine grid increment"),
    ("fetch.symbol", "ticker to download"),
    ("fetch.start", "first day, YYYY-MM-DD"),
    ("fetch.end", "last day, YYYY-MM-DD"),
    (
        "fetch.url_template",
        "URL with {symbol}, {start_epoch}, {end_epoch}",
    ),
    ("fetch.output", "path for the downloaded CSV"),
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid boolean `{value}` for `{key}`"
        ))),
    }
}

fn parse_date(key: &str, value: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(value.trim(), "%Y-%m-%d")
        .map_err(|_| Error::Config(format!("invalid date `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        let micro = self
            .sweep
            .et_micro
            .or(SweepConfig::default().et_micro)
            .expect("default micro grid");
        match key {
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "preprocess.normalize" => p.normalize = parse_bool(key, value)?,
            "preprocess.smooth" => p.smooth = parse_bool(key, value)?,
            "preprocess.span_days" => p.span_days = parse(key, value)?,
            "cycles.tau_days" => p.tau_days = parse(key, value)?,
            "metric.p_rr" => p.tolerance.p_rr = parse(key, value)?,
            "metric.p_et" => p.tolerance.p_et = parse(key, value)?,
            "metric.restab_denominator" => {
                p.tolerance.restab_denominator = value.parse::<RestabDenominator>()?
            }
            "dynamics.reps" => self.dynamics.reps = parse(key, value)?,
            "dynamics.seed" => self.dynamics.seed = parse(key, value)?,
            "dynamics.batch_size" => self.dynamics.batch_size = parse(key, value)?,
            "sweep.rr_lo" => self.sweep.rr.lo = parse(key, value)?,
            "sweep.rr_hi" => self.sweep.rr.hi = parse(key, value)?,
            "sweep.rr_step" => self.sweep.rr.step = parse(key, value)?,
            "sweep.et_lo" => self.sweep.et.lo = parse(key, value)?,
            "sweep.et_hi" => self.sweep.et.hi = parse(key, value)?,
            "sweep.et_step" => self.sweep.et.step = parse(key, value)?,
            "sweep.et_micro" => {
                self.sweep.et_micro = parse_bool(key, value)?.then_some(micro);
            }
            "sweep.et_micro_lo" => {
                let mut m = micro;
                m.lo = parse(key, value)?;
                self.sweep.et_micro = Some(m);
            }
            "sweep.et_micro_hi" => {
                let mut m = micro;
                m.hi = parse(key, value)?;
                self.sweep.et_micro = Some(m);
            }
            "sweep.et_micro_step" => {
                let mut m = micro;
                m.step = parse(key, value)?;
                self.sweep.et_micro = Some(m);
            }
            "fetch.symbol" => self.fetch.symbol = value.trim().to_string(),
            "fetch.start" => self.fetch.start = parse_date(key, value)?,
            "fetch.end" => self.fetch.end = parse_date(key, value)?,
            "fetch.url_template" => self.fetch.url_template = value.trim().to_string(),
            "fetch.output" => self.fetch.output = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected `key = value`", n + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pipeline;
        p.tolerance.validate()?;
        if p.tau_days == 0 {
            return Err(Error::Config("cycles.tau_days must be >= 1".into()));
        }
        if p.span_days < 2 {
            return Err(Error::Config("preprocess.span_days must be >= 2".into()));
        }
        if self.dynamics.reps == 0 || self.dynamics.batch_size == 0 {
            return Err(Error::Config(
                "dynamics.reps and dynamics.batch_size must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.pipeline.span_days, 4);
        assert_eq!(cfg.pipeline.tau_days, 3);
        assert_eq!(cfg.pipeline.tolerance.p_rr, 0.0001);
        assert_eq!(cfg.pipeline.tolerance.p_et, 0.8);
        assert_eq!(
            cfg.pipeline.tolerance.restab_denominator,
            RestabDenominator::Eq4
        );
        assert_eq!(
            cfg.dynamics,
            BootstrapConfig {
                reps: 1000,
                seed: 42,
                batch_size: 50
            }
        );
        cfg.validate().unwrap();
    }

    #[test]
    fn text_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# comment\n\nmetric.p_et = 0.5\nmetric.restab_denominator = appendix\n\
             preprocess.smooth = false\nsweep.et_micro = false\n",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.tolerance.p_et, 0.5);
        assert_eq!(
            cfg.pipeline.tolerance.restab_denominator,
            RestabDenominator::Appendix
        );
        assert!(!cfg.pipeline.smooth);
        assert!(cfg.sweep.et_micro.is_none());
    }

    #[test]
    fn unknown_key_and_bad_value() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("metric.nope", "1").is_err());
        assert!(cfg.set("metric.p_rr", "abc").is_err());
        assert!(cfg.apply_text("no equals sign").is_err());
    }

    #[test]
    fn every_listed_key_is_settable() {
        let samples = [
            ("preprocess.normalize", "true"),
            ("preprocess.smooth", "true"),
            ("sweep.et_micro", "true"),
            ("metric.restab_denominator", "eq4"),
            ("fetch.start", "2014-01-01"),
            ("fetch.end", "2015-01-01"),
        ];
        for (key, _) in KEYS {
            let value = samples
                .iter()
                .find(|(k, _)| k == key)
                .map_or("1", |(_, v)| v);
            RunConfig::default()
                .set(key, value)
                .unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }
}
