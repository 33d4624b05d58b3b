//! Median-combination forecasting benchmark toolkit.
//!
//! Implements five one-step-ahead base forecasters, the median combiner and
//! its 26 subset variants, a rolling-origin evaluation workflow with five
//! accuracy metrics, river-flow feature estimators, and the regression and
//! predictability analyses built on top of them.

pub mod accuracy;
mod arma;
pub mod backtest;
pub mod combine;
pub mod error;
pub mod features;
pub mod forecast;
mod optim;
pub mod relate;
pub mod series;
pub mod sim;
pub mod tables;
pub mod toeplitz;
mod util;

pub use error::{Error, Result};
pub use util::derive_seed;
