//! Maximum-likelihood fit of fractional Gaussian noise.
//!
//! The autocovariance is `gamma(k) = (sigma^2/2)(|k+1|^{2H} - 2|k|^{2H} +
//! |k-1|^{2H})`. For fixed `H` the mean is profiled out by generalized least
//! squares and the variance analytically, so the fit is a 1-D search over
//! `H` on (0.01, 0.99) with the likelihood evaluated through the
//! symmetric-Toeplitz recursion.

use crate::error::{Error, Result};
use crate::optim;
use crate::toeplitz;
use crate::util;

/// Fitted fractional Gaussian noise process.
#[derive(Debug, Clone, Copy)]
pub struct FgnFit {
    /// Process mean (data units), generalized-least-squares estimate.
    pub mu: f64,
    /// Process standard deviation (data units).
    pub sigma: f64,
    /// Hurst parameter in (0, 1).
    pub hurst: f64,
    /// Maximized Gaussian log-likelihood.
    pub log_likelihood: f64,
}

const H_LO: f64 = 0.01;
const H_HI: f64 = 0.99;

/// Profile log-likelihood of `x` at Hurst parameter `h`.
pub(crate) fn fgn_profile_loglik(h: f64, x: &[f64]) -> Option<(f64, f64, f64)> {
    let rho = toeplitz::fgn_correlations(h, x.len() - 1);
    toeplitz::profile_loglik(&rho, x)
}

/// Fits fGn by maximum likelihood: `H` by bounded 1-D search, mean and
/// variance profiled analytically per candidate.
pub fn fit_fgn(x: &[f64]) -> Result<FgnFit> {
    if x.len() < 10 {
        return Err(Error::TooFewValues { need: 10, got: x.len() });
    }
    if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx));
    }
    let sd = util::variance(x).sqrt();
    let m = util::mean(x);
    if sd <= 1e-12 * (1.0 + m.abs()) {
        return Err(Error::DegenerateSeries);
    }

    let objective = |h: f64| match fgn_profile_loglik(h, x) {
        Some((ll, _, _)) => -ll,
        None => 1e12,
    };
    let (h, neg_ll) = optim::grid_then_golden(objective, H_LO, H_HI, 15, 1e-5);
    let (ll, mu, var) = fgn_profile_loglik(h, x).ok_or(Error::DegenerateSeries)?;
    debug_assert!((neg_ll + ll).abs() <= 1e-6 * (1.0 + ll.abs()));
    Ok(FgnFit { mu, sigma: var.sqrt(), hurst: h, log_likelihood: ll })
}

/// Maximum-likelihood coefficient of variation: `sigma / mu` of the fitted
/// process. The mean must be positive (river flows are).
pub fn coefficient_of_variation(fit: &FgnFit) -> Result<f64> {
    if fit.mu <= 0.0 {
        return Err(Error::NonpositiveMean);
    }
    Ok(fit.sigma / fit.mu)
}
