//! Analytics for an EMA trend-following strategy under Gaussian market
//! models: exact P&L distributions via characteristic-function inversion,
//! closed-form moments, turnover and cost-aware timescale optimization,
//! variogram calibration, and a reproducible Monte Carlo oracle.
//!
//! Modules mirror the pipeline:
//!
//! * [`market`] — EMA operators, return covariance matrices, variograms;
//! * [`strategy`] — signal and the P&L quadratic-form matrices;
//! * [`spectrum`] — eigenvalues of `M C`, cumulants, characteristic function;
//! * [`density`] — Fourier inversion to density/CDF/quantiles and tails;
//! * [`analytics`] — closed-form moments, turnover, risk-adjusted P&L and
//!   the optimal trading timescale;
//! * [`calibrate`] — return standardization and variogram fitting;
//! * [`mc`] — seeded, thread-count-independent Monte Carlo estimates.

pub mod analytics;
pub mod calibrate;
pub mod density;
pub mod error;
pub mod exec;
pub mod market;
pub mod mc;
pub mod spectrum;
pub mod strategy;

pub use error::{Error, Result};
