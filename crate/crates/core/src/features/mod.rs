//! River-flow statistics computed on each full series: coefficient of
//! variation from a fitted fGn process, lag-1 autocorrelation, Hurst
//! parameter, trend strength and spectral entropy.

mod fgn;
mod supersmoother;

pub use fgn::{coefficient_of_variation, fit_fgn, FgnFit};
pub use supersmoother::supersmooth;

use crate::error::{Error, Result};
use crate::series::Dataset;
use crate::util;

/// The five per-series statistics.
#[derive(Debug, Clone, Copy)]
pub struct SeriesFeatures {
    /// Coefficient of variation (dimensionless).
    pub cv: f64,
    /// Lag-1 sample autocorrelation in [-1, 1].
    pub acf1: f64,
    /// Hurst parameter of the fitted fGn process, in (0, 1).
    pub hurst: f64,
    /// Trend strength in [0, 1].
    pub trend_strength: f64,
    /// Normalized spectral entropy in [0, 1]; larger means less forecastable.
    pub spectral_entropy: f64,
}

pub const FEATURE_NAMES: [&str; 5] =
    ["cv", "acf1", "hurst", "trend_strength", "spectral_entropy"];

impl SeriesFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "cv" => Some(self.cv),
            "acf1" => Some(self.acf1),
            "hurst" => Some(self.hurst),
            "trend_strength" => Some(self.trend_strength),
            "spectral_entropy" => Some(self.spectral_entropy),
            _ => None,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.cv, self.acf1, self.hurst, self.trend_strength, self.spectral_entropy]
    }
}

/// Lag-1 sample autocorrelation:
/// `r1 = sum_{t<n} (x_t - xbar)(x_{t+1} - xbar) / sum_t (x_t - xbar)^2`.
pub fn acf1(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooFewValues { need: 3, got: x.len() });
    }
    let mean = util::mean(x);
    let denom: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Ok(num / denom)
}

/// Trend strength: `max(0, 1 - Var(x - trend) / Var(x))` clipped to [0, 1],
/// with the trend from the super smoother. A zero-variance series carries no
/// trend information, so it maps to 0.
pub fn trend_strength(x: &[f64]) -> Result<f64> {
    if x.len() < 10 {
        return Err(Error::TooFewValues { need: 10, got: x.len() });
    }
    let var_x = util::variance(x);
    if var_x <= 0.0 {
        return Ok(0.0);
    }
    let trend = supersmooth(x)?;
    let resid: Vec<f64> = x.iter().zip(&trend).map(|(a, b)| a - b).collect();
    let var_r = util::variance(&resid);
    Ok((1.0 - var_r / var_x).clamp(0.0, 1.0))
}

/// Normalized spectral entropy.
///
/// The spectral density is estimated by the periodogram at the Fourier
/// frequencies (frequency zero excluded), aggregated into non-overlapping
/// bands of three ordinates to tame the noise of raw ordinates; band masses
/// are normalized to sum to one and the Shannon entropy is divided by the
/// log of the band count, giving a value in [0, 1]. A flat spectrum (noise)
/// scores near 1, a single concentrated frequency scores near 0.
pub fn spectral_entropy(x: &[f64]) -> Result<f64> {
    const BAND: usize = 3;
    let n = x.len();
    if n < 10 {
        return Err(Error::TooFewValues { need: 10, got: n });
    }
    if util::variance(x) <= 0.0 {
        return Err(Error::DegenerateSeries);
    }

    let m = n / 2;
    let mut power = Vec::with_capacity(m);
    for k in 1..=m {
        let omega = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (t, &v) in x.iter().enumerate() {
            let angle = omega * t as f64;
            re += v * angle.cos();
            im -= v * angle.sin();
        }
        power.push(re * re + im * im);
    }

    let n_bands = m.div_ceil(BAND);
    let mut bands = vec![0.0; n_bands];
    for (k, p) in power.iter().enumerate() {
        bands[k / BAND] += p;
    }
    let total: f64 = bands.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let mut entropy = 0.0;
    for b in &bands {
        let p = b / total;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    Ok(entropy / (n_bands as f64).ln())
}

/// All five features for one series.
pub fn compute_features(x: &[f64]) -> Result<SeriesFeatures> {
    let fit = fit_fgn(x)?;
    Ok(SeriesFeatures {
        cv: coefficient_of_variation(&fit)?,
        acf1: acf1(x)?,
        hurst: fit.hurst,
        trend_strength: trend_strength(x)?,
        spectral_entropy: spectral_entropy(x)?,
    })
}

/// Feature rows for every station in the dataset, ordered by station id.
/// Stations whose features cannot be computed are skipped with a diagnostic.
pub fn features_table(dataset: &Dataset) -> (Vec<(String, SeriesFeatures)>, Vec<String>) {
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in dataset.entries() {
        match compute_features(entry.series.values()) {
            Ok(f) => rows.push((entry.series.station_id().to_string(), f)),
            Err(e) => diagnostics.push(format!(
                "station {}: features skipped: {e}",
                entry.series.station_id()
            )),
        }
    }
    (rows, diagnostics)
}
