//! Quantification of consecutive resilience cycles in daily performance
//! series.
//!
//! The pipeline reads a daily closing-value history, rescales it to a level of
//! performance (LoP) in [0, 1], de-noises it with robust LOWESS, splits it into
//! drawdown/drawup cycles, and scores each cycle with a resilience indicator
//! built from four elemental functions (resistance, re-stabilization,
//! rebuilding, reconfiguration) under two tolerance thresholds. Comparator
//! metrics, power-law tail analysis and threshold sweeps sit on top.
//!
//! ```
//! use resicycle::cycles::ResilienceCycle;
//! use resicycle::metrics::{ri, RestabDenominator, ToleranceConfig};
//!
//! let cycle = ResilienceCycle { t_pre: 1, t_event: 2, t_post: 5, p_pre: 0.4, p_event: 0.1, p_post: 0.4 };
//! let cfg = ToleranceConfig { p_rr: 0.01, p_et: 0.5, restab_denominator: RestabDenominator::Appendix };
//! assert!((ri(&cycle, &cfg).unwrap() - 0.020).abs() < 5e-4);
//! ```

pub mod cli;
pub mod config;
pub mod cycles;
pub mod dynamics;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod preprocess;
pub mod sensitivity;

pub use error::{Error, Result};
