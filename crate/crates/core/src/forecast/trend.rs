//! Piecewise-linear trend model with L1-penalized slope adjustments.
//!
//! At the annual scale the additive decomposable model loses its seasonal
//! and holiday terms, leaving the piecewise-linear growth component
//! `g(t) = m + k t + sum_j delta_j (t - s_j)_+` on time normalized to
//! [0, 1], with changepoints `s_j` on a uniform grid over the first
//! `changepoint_range` fraction of the segment and a Laplace prior of scale
//! `tau` on the adjustments.
//!
//! The MAP fit alternates coordinate descent on `(k, m, delta)` (soft
//! thresholding for the penalized coordinates) with a profile update of the
//! noise scale; data are scaled by their absolute maximum first so `tau` is
//! unit free. The forecast extrapolates the final effective slope one step.

use super::TrainingSegment;

#[derive(Debug, Clone)]
pub struct TrendConfig {
    pub n_changepoints: usize,
    pub changepoint_range: f64,
    pub tau: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig { n_changepoints: 10, changepoint_range: 0.8, tau: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct TrendModel {
    slope: f64,
    offset: f64,
    changepoints: Vec<f64>,
    deltas: Vec<f64>,
    tau: f64,
    scale: f64,
    /// normalized time of the forecast target (one step past the segment)
    t_next: f64,
    fallback: Option<&'static str>,
}

impl TrendModel {
    /// Base slope on normalized time, in data units.
    pub fn slope(&self) -> f64 {
        self.slope * self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset * self.scale
    }

    pub fn changepoints(&self) -> &[f64] {
        &self.changepoints
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fallback_note(&self) -> Option<&'static str> {
        self.fallback
    }

    /// Trend value at normalized time `t`, in data units.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut g = self.offset + self.slope * t;
        for (s, d) in self.changepoints.iter().zip(&self.deltas) {
            if t > *s {
                g += d * (t - s);
            }
        }
        g * self.scale
    }

    /// One-step-ahead forecast: the final effective slope extrapolated one
    /// normalized step past the training window.
    pub fn forecast(&self) -> f64 {
        self.value_at(self.t_next)
    }
}

pub fn fit_trend(train: &TrainingSegment) -> TrendModel {
    fit_trend_with(train, &TrendConfig::default())
}

pub fn fit_trend_with(train: &TrainingSegment, cfg: &TrendConfig) -> TrendModel {
    let y = train.values();
    let n = y.len();
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let t_next = n as f64 / (n - 1) as f64;

    if scale == 0.0 {
        return TrendModel {
            slope: 0.0,
            offset: 0.0,
            changepoints: Vec::new(),
            deltas: Vec::new(),
            tau: cfg.tau,
            scale: 1.0,
            t_next,
            fallback: None,
        };
    }
    let ys: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();

    // uniform changepoint grid on (0, changepoint_range]; shrink when the
    // design would not leave enough points per piece
    let mut n_cp = cfg.n_changepoints;
    let mut fallback = None;
    let max_cp = n.saturating_sub(4).min((n as f64 * cfg.changepoint_range) as usize);
    if n_cp > max_cp {
        n_cp = max_cp;
        fallback = Some("trend: changepoint grid reduced for short segment");
    }
    let changepoints: Vec<f64> =
        (1..=n_cp).map(|j| cfg.changepoint_range * j as f64 / n_cp as f64).collect();

    // design columns: intercept (implicit), t, and hinges (t - s_j)_+
    let hinge: Vec<Vec<f64>> = changepoints
        .iter()
        .map(|s| ts.iter().map(|t| if t > s { t - s } else { 0.0 }).collect())
        .collect();

    let mut k = 0.0_f64;
    let mut m = 0.0_f64;
    let mut delta = vec![0.0_f64; n_cp];
    let mut resid: Vec<f64> = ys.clone(); // residual for current (k, m, delta)

    let sum_tt: f64 = ts.iter().map(|t| t * t).sum();
    let hinge_tt: Vec<f64> = hinge.iter().map(|h| h.iter().map(|v| v * v).sum()).collect();

    let var_y = {
        let mean = ys.iter().sum::<f64>() / n as f64;
        ys.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
    };
    let mut sigma2 = var_y.max(1e-12);

    for _outer in 0..60 {
        let lambda = sigma2 / cfg.tau;
        let mut max_change = 0.0_f64;
        for _inner in 0..400 {
            let mut sweep_change = 0.0_f64;

            // offset update (unpenalized)
            let grad_m: f64 = resid.iter().sum::<f64>();
            let new_m = m + grad_m / n as f64;
            let dm = new_m - m;
            if dm != 0.0 {
                for r in resid.iter_mut() {
                    *r -= dm;
                }
                m = new_m;
                sweep_change = sweep_change.max(dm.abs());
            }

            // base slope update (unpenalized)
            let grad_k: f64 = resid.iter().zip(&ts).map(|(r, t)| r * t).sum();
            let new_k = k + grad_k / sum_tt;
            let dk = new_k - k;
            if dk != 0.0 {
                for (r, t) in resid.iter_mut().zip(&ts) {
                    *r -= dk * t;
                }
                k = new_k;
                sweep_change = sweep_change.max(dk.abs());
            }

            // soft-thresholded changepoint adjustments
            for j in 0..n_cp {
                if hinge_tt[j] == 0.0 {
                    continue;
                }
                let grad: f64 = resid.iter().zip(&hinge[j]).map(|(r, h)| r * h).sum();
                let raw = delta[j] + grad / hinge_tt[j];
                let thresh = lambda / hinge_tt[j];
                let new_d = raw.signum() * (raw.abs() - thresh).max(0.0);
                let dd = new_d - delta[j];
                if dd != 0.0 {
                    for (r, h) in resid.iter_mut().zip(&hinge[j]) {
                        *r -= dd * h;
                    }
                    delta[j] = new_d;
                    sweep_change = sweep_change.max(dd.abs());
                }
            }

            max_change = sweep_change;
            if sweep_change < 1e-12 {
                break;
            }
        }

        let sse: f64 = resid.iter().map(|r| r * r).sum();
        let new_sigma2 = (sse / n as f64).max(1e-14);
        let done = (new_sigma2 - sigma2).abs() <= 1e-10 * sigma2 && max_change < 1e-12;
        sigma2 = new_sigma2;
        if done {
            break;
        }
    }

    TrendModel {
        slope: k,
        offset: m,
        changepoints,
        deltas: delta,
        tau: cfg.tau,
        scale,
        t_next,
        fallback,
    }
}
