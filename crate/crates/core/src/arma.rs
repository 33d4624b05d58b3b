//! ARMA model internals: stationarity tests, weight expansions, model
//! autocovariances and the exact Gaussian likelihood.
//!
//! The likelihood runs a Kalman filter on the companion state-space form
//! (state dimension `r = max(p, q+1)`, stationary initialization from the
//! discrete Lyapunov equation), which is exact and O(n r^2). A unit-tested
//! cross-check against the Durbin-Levinson likelihood on the model
//! autocovariances guards the implementation.

/// Stationarity of `1 - phi_1 z - ... - phi_p z^p` (all roots outside the
/// unit circle), tested through the Levinson step-down recursion: the
/// polynomial is stationary iff every reflection coefficient has modulus
/// below one.
pub(crate) fn ar_stationary(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    for k in (1..=a.len()).rev() {
        let r = a[k - 1];
        if !r.is_finite() || r.abs() >= 1.0 {
            return false;
        }
        if k == 1 {
            break;
        }
        let denom = 1.0 - r * r;
        let prev = a.clone();
        for j in 1..k {
            a[j - 1] = (prev[j - 1] + r * prev[k - 1 - j]) / denom;
        }
    }
    true
}

/// Invertibility of `1 + theta_1 z + ... + theta_q z^q`: same criterion as
/// stationarity applied to the negated coefficients.
pub(crate) fn ma_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    ar_stationary(&neg)
}

/// Binomial expansion weights of the fractional difference operator
/// `(1-B)^d`: `b_0 = 1`, `b_k = b_{k-1} (k - 1 - d) / k`.
pub(crate) fn frac_diff_weights(d: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    w.push(1.0);
    for k in 1..len {
        let kf = k as f64;
        let prev = w[k - 1];
        w.push(prev * (kf - 1.0 - d) / kf);
    }
    w
}

/// MA(infinity) weights `psi` of an ARMA(p, q):
/// `psi_0 = 1`, `psi_j = theta_j + sum_{i=1..min(j,p)} phi_i psi_{j-i}`.
pub(crate) fn arma_psi_weights(phi: &[f64], theta: &[f64], len: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(len);
    psi.push(1.0);
    for j in 1..len {
        let mut acc = if j <= theta.len() { theta[j - 1] } else { 0.0 };
        for (i, &p) in phi.iter().enumerate() {
            let lag = i + 1;
            if lag > j {
                break;
            }
            acc += p * psi[j - lag];
        }
        psi.push(acc);
    }
    psi
}

/// AR(infinity) weights `pi` of an ARFIMA(p, d, q):
/// `pi(B) = Theta(B)^{-1} Phi(B) (1-B)^d`, with `pi_0 = 1`.
pub(crate) fn arfima_pi_weights(d: f64, phi: &[f64], theta: &[f64], len: usize) -> Vec<f64> {
    let b = frac_diff_weights(d, len);
    // a(B) = Phi(B) (1-B)^d
    let mut a = vec![0.0; len];
    for k in 0..len {
        let mut acc = b[k];
        for (i, &p) in phi.iter().enumerate() {
            let lag = i + 1;
            if lag > k {
                break;
            }
            acc -= p * b[k - lag];
        }
        a[k] = acc;
    }
    // Theta(B) pi(B) = a(B)
    let mut pi = vec![0.0; len];
    for k in 0..len {
        let mut acc = a[k];
        for (j, &t) in theta.iter().enumerate() {
            let lag = j + 1;
            if lag > k {
                break;
            }
            acc -= t * pi[k - lag];
        }
        pi[k] = acc;
    }
    pi
}

/// Solves a small dense linear system in place with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub(crate) fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Autocovariances `gamma(0..max_lag)` of a stationary ARMA(p, q) with unit
/// innovation variance, from the Yule-Walker-type linear system plus the
/// forward recursion.
pub(crate) fn arma_autocovariances(phi: &[f64], theta: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let p = phi.len();
    let q = theta.len();
    let psi = arma_psi_weights(phi, theta, q + 1);
    // theta_full[j] = coefficient of eps_{t-j} on the RHS, theta_0 = 1
    let theta_full: Vec<f64> = std::iter::once(1.0).chain(theta.iter().copied()).collect();

    // rhs(k) = sum_{j=k..q} theta_full[j] psi[j-k]
    let rhs = |k: usize| -> f64 {
        (k..=q).map(|j| theta_full[j] * psi[j - k]).sum()
    };

    // unknowns gamma(0..p); equations: gamma(k) - sum_i phi_i gamma(|k-i|) = rhs(k)
    let dim = p + 1;
    let mut mat = vec![vec![0.0; dim]; dim];
    let mut vec_b = vec![0.0; dim];
    for k in 0..dim {
        mat[k][k] += 1.0;
        for (i, &ph) in phi.iter().enumerate() {
            let lag = i + 1;
            let idx = k.abs_diff(lag);
            if idx < dim {
                mat[k][idx] -= ph;
            } else {
                // gamma(idx) with idx > p cannot appear when k <= p and lag <= p
                unreachable!("autocovariance index out of range");
            }
        }
        vec_b[k] = rhs(k);
    }
    let head = solve_dense(&mut mat, &mut vec_b)?;

    let mut gamma = vec![0.0; max_lag + 1];
    gamma[..dim.min(max_lag + 1)].copy_from_slice(&head[..dim.min(max_lag + 1)]);
    for k in dim..=max_lag {
        let mut acc = if k <= q { rhs(k) } else { 0.0 };
        for (i, &ph) in phi.iter().enumerate() {
            acc += ph * gamma[k - i - 1];
        }
        gamma[k] = acc;
    }
    Some(gamma)
}

/// Applies the companion transition matrix (first column `phi`, ones on the
/// superdiagonal) to a vector: `out[i] = phi[i] v[0] + v[i+1]`.
#[inline]
fn companion_apply(phi_col: &[f64], v: &[f64], out: &mut [f64]) {
    let r = v.len();
    for i in 0..r {
        let shifted = if i + 1 < r { v[i + 1] } else { 0.0 };
        out[i] = phi_col[i] * v[0] + shifted;
    }
}

/// Exact Gaussian log-likelihood of a zero-mean ARMA(p, q) on `x`, with the
/// innovation variance profiled out. Returns `(loglik, sigma2_hat)`.
///
/// Two exact routes, dispatched on length: short series go through the
/// Levinson recursion on the model autocovariances (O(n^2) but tiny
/// constants), long series through a Kalman filter on the companion
/// state-space form whose gain freezes once the prediction variance
/// converges. A unit test pins the two routes to each other.
///
/// `None` when the coefficients are non-stationary, non-invertible, or the
/// recursion degenerates.
pub(crate) fn arma_profile_loglik(phi: &[f64], theta: &[f64], x: &[f64]) -> Option<(f64, f64)> {
    if !ar_stationary(phi) || !ma_invertible(theta) {
        return None;
    }
    if x.len() <= 200 {
        arma_profile_loglik_toeplitz(phi, theta, x)
    } else {
        arma_profile_loglik_kalman(phi, theta, x)
    }
}

/// Levinson-recursion likelihood on the model autocovariances.
fn arma_profile_loglik_toeplitz(phi: &[f64], theta: &[f64], x: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n == 0 {
        return None;
    }
    let gamma = arma_autocovariances(phi, theta, n - 1)?;
    if !(gamma[0].is_finite()) || gamma[0] <= 0.0 {
        return None;
    }
    let rho: Vec<f64> = gamma.iter().map(|g| g / gamma[0]).collect();
    let t = crate::toeplitz::innovations_transform(&rho, &[x])?;
    let mut sum_sq = 0.0;
    let mut log_det = 0.0;
    for (e, v) in t.innovations[0].iter().zip(&t.variances) {
        let var = v * gamma[0];
        sum_sq += e * e / var;
        log_det += var.ln();
    }
    let nf = n as f64;
    let sigma2 = sum_sq / nf;
    if !(sigma2.is_finite()) || sigma2 <= 0.0 {
        return None;
    }
    let ll = -0.5 * (nf * (2.0 * std::f64::consts::PI * sigma2).ln() + log_det + nf);
    if !ll.is_finite() {
        return None;
    }
    Some((ll, sigma2))
}

/// Kalman-filter likelihood on the companion state-space form.
fn arma_profile_loglik_kalman(phi: &[f64], theta: &[f64], x: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n == 0 {
        return None;
    }
    let p = phi.len();
    let q = theta.len();
    let r = p.max(q + 1);

    // first column of the companion transition matrix
    let mut phi_col = vec![0.0; r];
    phi_col[..p].copy_from_slice(phi);
    let mut r_vec = vec![0.0; r];
    r_vec[0] = 1.0;
    for (j, &th) in theta.iter().enumerate() {
        r_vec[j + 1] = th;
    }

    // stationary state covariance: solve (I - T (x) T) vec(P) = vec(R R')
    let dim = r * r;
    let mut t_mat = vec![vec![0.0; r]; r];
    for (i, &ph) in phi_col.iter().enumerate() {
        t_mat[i][0] = ph;
    }
    for i in 0..r.saturating_sub(1) {
        t_mat[i][i + 1] = 1.0;
    }
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for i in 0..r {
        for j in 0..r {
            let row = i * r + j;
            a[row][row] += 1.0;
            for k in 0..r {
                for l in 0..r {
                    a[row][k * r + l] -= t_mat[i][k] * t_mat[j][l];
                }
            }
            b[row] = r_vec[i] * r_vec[j];
        }
    }
    let p0 = solve_dense(&mut a, &mut b)?;
    let mut p_cov = vec![vec![0.0; r]; r];
    for i in 0..r {
        for j in 0..r {
            p_cov[i][j] = 0.5 * (p0[i * r + j] + p0[j * r + i]);
        }
    }

    let mut state = vec![0.0; r];
    let mut sum_sq = 0.0;
    let mut log_det = 0.0;
    let mut filtered = vec![0.0; r];
    let mut tp = vec![vec![0.0; r]; r];
    let mut col = vec![0.0; r];
    let mut f_prev = f64::NAN;
    let mut stable_runs = 0u32;

    let mut t = 0;
    while t < n {
        let f = p_cov[0][0];
        if !(f.is_finite()) || f <= 0.0 {
            return None;
        }
        let e = x[t] - state[0];
        sum_sq += e * e / f;
        log_det += f.ln();

        for i in 0..r {
            col[i] = p_cov[i][0];
        }
        // filtered state a + (P e_1 / F) e, then predicted state T a_f
        for i in 0..r {
            filtered[i] = state[i] + col[i] / f * e;
        }
        companion_apply(&phi_col, &filtered, &mut state);

        // P_f = P - col col'/F; predicted P = T P_f T' + R R'
        for i in 0..r {
            for j in 0..r {
                p_cov[i][j] -= col[i] * col[j] / f;
            }
        }
        for j in 0..r {
            for i in 0..r {
                let shifted = if i + 1 < r { p_cov[i + 1][j] } else { 0.0 };
                tp[i][j] = phi_col[i] * p_cov[0][j] + shifted;
            }
        }
        for i in 0..r {
            for j in 0..r {
                let shifted = if j + 1 < r { tp[i][j + 1] } else { 0.0 };
                p_cov[i][j] = phi_col[j] * tp[i][0] + shifted + r_vec[i] * r_vec[j];
            }
        }
        for i in 0..r {
            for j in i + 1..r {
                let avg = 0.5 * (p_cov[i][j] + p_cov[j][i]);
                p_cov[i][j] = avg;
                p_cov[j][i] = avg;
            }
        }

        t += 1;
        if (f - f_prev).abs() <= 1e-13 * (1.0 + f) {
            stable_runs += 1;
            if stable_runs >= 3 {
                break;
            }
        } else {
            stable_runs = 0;
        }
        f_prev = f;
    }

    if t < n {
        // steady state: fixed prediction variance and gain
        let f = p_cov[0][0];
        if !(f.is_finite()) || f <= 0.0 {
            return None;
        }
        let log_f = f.ln();
        // propagated gain T (P e_1) / F
        let mut gain = vec![0.0; r];
        for i in 0..r {
            col[i] = p_cov[i][0] / f;
        }
        companion_apply(&phi_col, &col, &mut gain);
        for &obs in &x[t..] {
            let e = obs - state[0];
            sum_sq += e * e / f;
            log_det += log_f;
            companion_apply(&phi_col, &state, &mut filtered);
            for i in 0..r {
                state[i] = filtered[i] + gain[i] * e;
            }
        }
    }

    let nf = n as f64;
    let sigma2 = sum_sq / nf;
    if !(sigma2.is_finite()) || sigma2 <= 0.0 {
        return None;
    }
    let ll = -0.5 * (nf * (2.0 * std::f64::consts::PI * sigma2).ln() + log_det + nf);
    if !ll.is_finite() {
        return None;
    }
    Some((ll, sigma2))
}

/// Yule-Walker AR coefficients of order `p` from data, used as optimizer
/// starting values. Falls back to zeros when the sample is degenerate.
pub(crate) fn yule_walker_start(x: &[f64], p: usize) -> Vec<f64> {
    if p == 0 {
        return Vec::new();
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut acov = vec![0.0; p + 1];
    for (k, slot) in acov.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in 0..n - k {
            acc += (x[t] - mean) * (x[t + k] - mean);
        }
        *slot = acc / n as f64;
    }
    if acov[0] <= 0.0 {
        return vec![0.0; p];
    }
    let mut mat = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for i in 0..p {
        for j in 0..p {
            mat[i][j] = acov[i.abs_diff(j)];
        }
        b[i] = acov[i + 1];
    }
    match solve_dense(&mut mat, &mut b) {
        Some(coefs) if ar_stationary(&coefs) => coefs,
        _ => vec![0.0; p],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn stationarity_checks() {
        assert!(ar_stationary(&[0.5]));
        assert!(!ar_stationary(&[1.01]));
        assert!(ar_stationary(&[0.4, 0.3]));
        assert!(!ar_stationary(&[0.9, 0.3]));
        assert!(ma_invertible(&[0.5]));
        assert!(!ma_invertible(&[-1.2]));
    }

    #[test]
    fn frac_weights_match_recurrence() {
        let w = frac_diff_weights(0.5, 4);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], -0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(w[3], -0.0625, epsilon = 1e-15);
    }

    #[test]
    fn ar1_autocovariance_closed_form() {
        // AR(1): gamma(k) = phi^k / (1 - phi^2)
        let g = arma_autocovariances(&[0.7], &[], 5).unwrap();
        for k in 0..=5 {
            let expect = 0.7_f64.powi(k as i32) / (1.0 - 0.49);
            assert_abs_diff_eq!(g[k], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn ma1_autocovariance_closed_form() {
        // MA(1): gamma(0) = 1 + theta^2, gamma(1) = theta, gamma(k>1) = 0
        let g = arma_autocovariances(&[], &[0.6], 4).unwrap();
        assert_abs_diff_eq!(g[0], 1.36, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(g[2], 0.0, epsilon = 1e-12);
    }

    /// The Kalman route and the Durbin-Levinson route must agree: both are
    /// exact evaluations of the same Gaussian likelihood.
    #[test]
    fn kalman_matches_toeplitz_likelihood() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.6], vec![]),
            (vec![], vec![0.4]),
            (vec![0.5, -0.3], vec![0.2]),
            (vec![0.3], vec![-0.25, 0.1]),
        ];
        for (phi, theta) in cases {
            let n = 60;
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let (ll_kalman, _) = arma_profile_loglik_kalman(&phi, &theta, &x).unwrap();
            let (ll_routed, _) = arma_profile_loglik(&phi, &theta, &x).unwrap();
            assert_abs_diff_eq!(ll_kalman, ll_routed, epsilon = 1e-8);

            let gamma = arma_autocovariances(&phi, &theta, n - 1).unwrap();
            let rho: Vec<f64> = gamma.iter().map(|g| g / gamma[0]).collect();
            let t = toeplitz::innovations_transform(&rho, &[&x]).unwrap();
            let mut sum_sq = 0.0;
            let mut log_det = 0.0;
            for (e, v) in t.innovations[0].iter().zip(&t.variances) {
                // variances are relative to gamma(0); rescale to innovation units
                let var = v * gamma[0];
                sum_sq += e * e / var;
                log_det += var.ln();
            }
            let nf = n as f64;
            let sigma2 = sum_sq / nf;
            let ll_dl = -0.5 * (nf * (2.0 * std::f64::consts::PI * sigma2).ln() + log_det + nf);
            assert_abs_diff_eq!(ll_kalman, ll_dl, epsilon = 1e-8);
        }
    }

    #[test]
    fn pi_weights_invert_psi_weights() {
        // for pure ARMA (d = 0), convolving pi with psi must give the identity
        let phi = [0.5, -0.2];
        let theta = [0.3];
        let pi = arfima_pi_weights(0.0, &phi, &theta, 20);
        let psi = arma_psi_weights(&phi, &theta, 20);
        for k in 0..20 {
            let conv: f64 = (0..=k).map(|j| pi[j] * psi[k - j]).sum();
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(conv, expect, epsilon = 1e-10);
        }
    }
}
