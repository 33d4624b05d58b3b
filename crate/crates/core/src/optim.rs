//! Deterministic derivative-free optimizers.
//!
//! All fitters in this crate minimize objectives through these routines with
//! fixed starting grids, so repeated runs produce identical estimates.

/// Golden-section minimization on a bracketing interval.
///
/// Assumes `f` is unimodal on `[lo, hi]`; callers seed the bracket from a
/// coarse grid when unimodality is uncertain.
pub(crate) fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizes `f` on a grid, then refines with golden-section inside the
/// bracket around the best grid point. Returns `(x, f(x))`.
pub(crate) fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    xtol: f64,
) -> (f64, f64) {
    assert!(grid_points >= 3);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best_i = 0;
    let mut best_f = f64::INFINITY;
    let mut best_x = lo;
    for i in 0..grid_points {
        let x = lo + step * i as f64;
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_i = i;
            best_x = x;
        }
    }
    let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let b = if best_i + 1 == grid_points { hi } else { lo + step * (best_i + 1) as f64 };
    let (x, fx) = golden_section_min(&mut f, a, b, xtol, 200);
    if fx < best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}

/// Result of a Nelder-Mead run.
pub(crate) struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
}

/// Nelder-Mead simplex minimization with standard coefficients.
///
/// The initial simplex is `start` plus one vertex per coordinate offset by
/// `steps[i]`. Converges when the objective spread over the simplex falls
/// below `ftol` (1e-8 across the crate).
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    ftol: f64,
    max_iter: usize,
) -> NmResult {
    let dim = start.len();
    assert_eq!(steps.len(), dim);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += if steps[i] != 0.0 { steps[i] } else { 1e-4 };
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iter {
        // order vertices by objective (stable, so ties break deterministically)
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (fvals[worst] - fvals[best]).abs() <= ftol * (1.0 + fvals[best].abs()) {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < fvals[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fvals[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = f_reflect;
            }
        } else if f_reflect < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < fvals[worst] {
                simplex[worst] = contract;
                fvals[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (x, b) in simplex[i].iter_mut().zip(&best_v) {
                        *x = b + sigma * (*x - b);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    NmResult { x: simplex[best].clone(), fx: fvals[best] }
}

/// Runs Nelder-Mead from each start and keeps the best outcome.
pub(crate) fn nelder_mead_multistart<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    starts: &[Vec<f64>],
    steps: &[f64],
    ftol: f64,
    max_iter: usize,
) -> NmResult {
    let mut best: Option<NmResult> = None;
    for start in starts {
        let r = nelder_mead(&mut f, start, steps, ftol, max_iter);
        if best.as_ref().map_or(true, |b| r.fx < b.fx) {
            best = Some(r);
        }
    }
    best.expect("at least one start")
}
