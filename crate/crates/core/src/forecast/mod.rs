//! The five one-step-ahead base forecasters, each fitted on a training
//! segment by deterministic derivative-free search.

mod arfima;
mod ces;
mod ses;
mod trend;

pub use arfima::{fit_arfima, frac_diff, ArfimaConfig, ArfimaModel};
pub use ces::{fit_ces, CesModel};
pub use ses::{fit_ses, ses_level_path, SesModel};
pub use trend::{fit_trend, fit_trend_with, TrendConfig, TrendModel};

use crate::error::{Error, Result};

/// Contiguous historical window a model is fitted on, with the 1-based index
/// of its first value inside the parent series.
#[derive(Debug, Clone)]
pub struct TrainingSegment {
    values: Vec<f64>,
    origin: usize,
}

impl TrainingSegment {
    pub const MIN_LEN: usize = 10;

    pub fn new(values: Vec<f64>, origin: usize) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::TooFewValues { need: Self::MIN_LEN, got: values.len() });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(Self { values, origin })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based index of the first value within the parent series.
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("segment is never empty")
    }
}

/// One of the five individual forecasting methods, numbered as reported:
/// (1) Naive, (2) SES, (3) CES, (4) ARFIMA, (5) Prophet-style trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseMethod {
    Naive,
    Ses,
    Ces,
    Arfima,
    Trend,
}

impl BaseMethod {
    pub const ALL: [BaseMethod; 5] =
        [BaseMethod::Naive, BaseMethod::Ses, BaseMethod::Ces, BaseMethod::Arfima, BaseMethod::Trend];

    /// Method number used in combiner labels.
    pub fn number(self) -> u8 {
        match self {
            BaseMethod::Naive => 1,
            BaseMethod::Ses => 2,
            BaseMethod::Ces => 3,
            BaseMethod::Arfima => 4,
            BaseMethod::Trend => 5,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)? as usize).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            BaseMethod::Naive => "Naive",
            BaseMethod::Ses => "SES",
            BaseMethod::Ces => "CES",
            BaseMethod::Arfima => "ARFIMA",
            BaseMethod::Trend => "Prophet-style",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "1" | "naive" => Some(BaseMethod::Naive),
            "2" | "ses" => Some(BaseMethod::Ses),
            "3" | "ces" => Some(BaseMethod::Ces),
            "4" | "arfima" => Some(BaseMethod::Arfima),
            "5" | "prophet" | "prophet-style" | "trend" => Some(BaseMethod::Trend),
            _ => None,
        }
    }
}

/// Last-observation benchmark: the forecast is the final training value.
pub fn forecast_naive(train: &TrainingSegment) -> f64 {
    train.last()
}

/// Fits `method` on `train` and returns its one-step forecast together with
/// a fallback note when the fit degraded. Never fails: every method has a
/// deterministic fallback producing a finite forecast.
pub fn forecast_base(method: BaseMethod, train: &TrainingSegment) -> (f64, Option<String>) {
    match method {
        BaseMethod::Naive => (forecast_naive(train), None),
        BaseMethod::Ses => {
            let m = fit_ses(train);
            (m.forecast(), m.fallback_note().map(str::to_owned))
        }
        BaseMethod::Ces => {
            let m = fit_ces(train);
            (m.forecast(), m.fallback_note().map(str::to_owned))
        }
        BaseMethod::Arfima => {
            let m = fit_arfima(train);
            (m.forecast(), m.fallback_note().map(str::to_owned))
        }
        BaseMethod::Trend => {
            let m = fit_trend(train);
            (m.forecast(), m.fallback_note().map(str::to_owned))
        }
    }
}
