//! Durbin-Levinson machinery for stationary Gaussian processes with
//! symmetric Toeplitz covariance.
//!
//! Given autocorrelations `rho(0..n-1)` the recursion yields, in O(n^2), the
//! coefficients of the best linear one-step predictors and their error
//! variances. Those drive three things here:
//!
//! * the innovations transform of observed vectors (for exact likelihoods),
//! * Gaussian profile log-likelihood with the mean profiled out by GLS and
//!   the variance profiled analytically,
//! * exact sequential simulation (Hosking's method).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Innovations of one or more vectors under a common correlation structure.
///
/// `innovations[s][t]` is the one-step prediction error of series `s` at time
/// `t`; `variances[t]` is the corresponding error variance relative to the
/// process variance (`variances[0] == rho[0] == 1`).
pub(crate) struct InnovationsTransform {
    pub innovations: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

/// Runs the Durbin-Levinson recursion on `rho` (autocorrelations, `rho[0] = 1`)
/// and transforms each input vector into its innovations sequence.
///
/// Returns `None` if the implied covariance is not positive definite.
pub(crate) fn innovations_transform(rho: &[f64], series: &[&[f64]]) -> Option<InnovationsTransform> {
    let n = series.first().map_or(0, |s| s.len());
    assert!(series.iter().all(|s| s.len() == n));
    assert!(rho.len() >= n && n > 0);

    let mut innovations: Vec<Vec<f64>> = series.iter().map(|s| vec![s[0]]).collect();
    let mut variances = vec![1.0];
    if n == 1 {
        return Some(InnovationsTransform { innovations, variances });
    }

    // phi holds the order-(t) predictor coefficients phi_{t,1..t}
    let mut phi = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut v = 1.0;

    for t in 1..n {
        let kappa = if t == 1 {
            rho[1]
        } else {
            let mut acc = rho[t];
            for j in 1..t {
                acc -= phi[j - 1] * rho[t - j];
            }
            acc / v
        };
        if !(kappa.is_finite()) || kappa.abs() >= 1.0 {
            return None;
        }
        prev[..t - 1].copy_from_slice(&phi[..t - 1]);
        for j in 1..t {
            phi[j - 1] = prev[j - 1] - kappa * prev[t - 1 - j];
        }
        phi[t - 1] = kappa;
        v *= 1.0 - kappa * kappa;
        if v <= 0.0 || !v.is_finite() {
            return None;
        }

        for (s, x) in series.iter().enumerate() {
            let mut pred = 0.0;
            for j in 1..=t {
                pred += phi[j - 1] * x[t - j];
            }
            innovations[s].push(x[t] - pred);
        }
        variances.push(v);
    }
    Some(InnovationsTransform { innovations, variances })
}

/// Exact Gaussian profile log-likelihood of `x` for a process with
/// autocorrelations `rho`, mean profiled by generalized least squares and
/// variance profiled analytically.
///
/// Returns `(loglik, mu_hat, var_hat)`; `None` when `rho` is not positive
/// definite or the residual quadratic form degenerates.
pub(crate) fn profile_loglik(rho: &[f64], x: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    let ones = vec![1.0; n];
    let t = innovations_transform(rho, &[x, &ones])?;
    let (ex, e1, v) = (&t.innovations[0], &t.innovations[1], &t.variances);

    let mut s11 = 0.0;
    let mut s1x = 0.0;
    let mut sxx = 0.0;
    let mut log_det = 0.0;
    for i in 0..n {
        s11 += e1[i] * e1[i] / v[i];
        s1x += e1[i] * ex[i] / v[i];
        sxx += ex[i] * ex[i] / v[i];
        log_det += v[i].ln();
    }
    if s11 <= 0.0 {
        return None;
    }
    let mu = s1x / s11;
    let q = sxx - s1x * s1x / s11;
    if !(q.is_finite()) || q <= 0.0 {
        return None;
    }
    let var = q / n as f64;
    let nf = n as f64;
    let ll = -0.5 * (nf * (2.0 * std::f64::consts::PI * var).ln() + log_det + nf);
    Some((ll, mu, var))
}

/// Autocorrelations of fractional Gaussian noise with Hurst parameter `h`:
/// `rho(k) = 0.5 (|k+1|^{2H} - 2 |k|^{2H} + |k-1|^{2H})`.
pub fn fgn_correlations(hurst: f64, max_lag: usize) -> Vec<f64> {
    let two_h = 2.0 * hurst;
    (0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k = k as f64;
                0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
            }
        })
        .collect()
}

/// Autocorrelations of the stationary ARFIMA(0, d, 0) process,
/// `rho(k) = rho(k-1) (k - 1 + d) / (k - d)`.
pub fn arfima0_correlations(d: f64, max_lag: usize) -> Vec<f64> {
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for k in 1..=max_lag {
        let kf = k as f64;
        let prev = rho[k - 1];
        rho.push(prev * (kf - 1.0 + d) / (kf - d));
    }
    rho
}

/// Exact sequential simulation of a zero-mean, unit-variance stationary
/// Gaussian process from its autocorrelations (Hosking's method).
pub fn hosking_simulate<R: Rng + ?Sized>(rho: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    assert!(rho.len() >= n && n > 0);
    let mut x = Vec::with_capacity(n);
    let z0: f64 = StandardNormal.sample(rng);
    x.push(z0);

    let mut phi = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut v = 1.0;
    for t in 1..n {
        let kappa = if t == 1 {
            rho[1]
        } else {
            let mut acc = rho[t];
            for j in 1..t {
                acc -= phi[j - 1] * rho[t - j];
            }
            acc / v
        };
        prev[..t - 1].copy_from_slice(&phi[..t - 1]);
        for j in 1..t {
            phi[j - 1] = prev[j - 1] - kappa * prev[t - 1 - j];
        }
        phi[t - 1] = kappa;
        v *= 1.0 - kappa * kappa;
        let mut pred = 0.0;
        for j in 1..=t {
            pred += phi[j - 1] * x[t - j];
        }
        let z: f64 = StandardNormal.sample(rng);
        x.push(pred + v.max(0.0).sqrt() * z);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fgn_half_is_white_noise() {
        let rho = fgn_correlations(0.5, 5);
        assert_abs_diff_eq!(rho[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[3], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn innovations_match_white_noise() {
        let rho = vec![1.0, 0.0, 0.0, 0.0];
        let x = [2.0, -1.0, 0.5, 3.0];
        let t = innovations_transform(&rho, &[&x]).unwrap();
        for (e, v) in t.innovations[0].iter().zip(&x) {
            assert_abs_diff_eq!(e, v, epsilon = 1e-12);
        }
        for v in &t.variances {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ar1_innovations_variance() {
        // AR(1) with coefficient 0.6: rho(k) = 0.6^k, v_t -> 1 - 0.36
        let rho: Vec<f64> = (0..50).map(|k| 0.6_f64.powi(k)).collect();
        let x = vec![0.0; 50];
        let t = innovations_transform(&rho, &[&x]).unwrap();
        assert_abs_diff_eq!(t.variances[1], 1.0 - 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(t.variances[49], 1.0 - 0.36, epsilon = 1e-9);
    }

    #[test]
    fn profile_loglik_recovers_mean() {
        // white noise correlations: GLS mean equals the sample mean
        let rho = vec![1.0; 8];
        let rho: Vec<f64> = rho.iter().enumerate().map(|(i, _)| if i == 0 { 1.0 } else { 0.0 }).collect();
        let x = [4.0, 6.0, 5.0, 5.0, 4.5, 5.5, 5.0, 5.0];
        let (_, mu, var) = profile_loglik(&rho, &x).unwrap();
        assert_abs_diff_eq!(mu, 5.0, epsilon = 1e-12);
        let expect_var = x.iter().map(|v| (v - 5.0) * (v - 5.0)).sum::<f64>() / 8.0;
        assert_abs_diff_eq!(var, expect_var, epsilon = 1e-12);
    }
}
