//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line.
//!
//! Run with `cargo test -p medcast-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use medcast_core::accuracy::{compute_metric, MetricId};
use medcast_core::backtest::{self, RegionScope};
use medcast_core::combine::{all_method_ids, enumerate_variants, median_combine, MethodId};
use medcast_core::features::{acf1, fit_fgn, spectral_entropy, trend_strength};
use medcast_core::forecast::{fit_arfima, fit_ses, BaseMethod, TrainingSegment};
use medcast_core::relate::{linear_regression, predictability_summary};
use medcast_core::{sim, toeplitz};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

fn criterion(number: u32, description: &str, pass: bool) {
    println!("[criterion {number:02}] {}: {description}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {number} failed: {description}");
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Independent brute-force evaluation of the five metric formulas.
mod oracle {
    pub fn median(values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    }

    pub fn metric(name: &str, f: &[f64], x: &[f64]) -> f64 {
        let n = f.len() as f64;
        match name {
            "MAE" => f.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>() / n,
            "MAPE" => {
                f.iter().zip(x).map(|(a, b)| (100.0 * (a - b) / b).abs()).sum::<f64>() / n
            }
            "MdAE" => {
                let errs: Vec<f64> = f.iter().zip(x).map(|(a, b)| (a - b).abs()).collect();
                median(&errs)
            }
            "MdAPE" => {
                let errs: Vec<f64> =
                    f.iter().zip(x).map(|(a, b)| (100.0 * (a - b) / b).abs()).collect();
                median(&errs)
            }
            "RMSE" => {
                (f.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt()
            }
            _ => unreachable!(),
        }
    }

    pub fn regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        (slope, intercept, r)
    }
}

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..100.0)).collect();
        for metric in MetricId::ALL {
            let ours = compute_metric(metric, &f, &x).unwrap().value;
            let oracle = oracle::metric(metric.name(), &f, &x);
            let dev = (ours - oracle).abs() / (1.0 + oracle.abs());
            worst = worst.max(dev);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        &format!("metrics match brute-force oracle (worst rel dev {worst:.2e}, {elapsed:.2}s)"),
        worst <= 1e-12 && elapsed < 5.0,
    );
}

#[test]
fn criterion_02_combiner_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut pass = true;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=5usize);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let target: f64 = rng.random_range(-50.0..50.0);
        let m = median_combine(&f).unwrap();
        pass &= (m - oracle::median(&f)).abs() <= 1e-12;
        let worst = f.iter().map(|v| (v - target).abs()).fold(0.0_f64, f64::max);
        pass &= (m - target).abs() <= worst + 1e-12;
        match n {
            2 => pass &= m == (f[0] + f[1]) / 2.0,
            4 => {
                let mut s = f.clone();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pass &= m == (s[1] + s[2]) / 2.0;
            }
            _ => {}
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        2,
        &format!("median combiner matches sort oracle with boundedness ({elapsed:.2}s)"),
        pass && elapsed < 5.0,
    );
}

#[test]
fn criterion_03_variant_enumeration() {
    let variants = enumerate_variants(&BaseMethod::ALL).unwrap();
    let count_size =
        |k: usize| variants.iter().filter(|m| m.members().len() == k).count();
    let pass = variants.len() == 26
        && count_size(2) == 10
        && count_size(3) == 10
        && count_size(4) == 5
        && count_size(5) == 1;
    criterion(3, "26 variants for 5 bases with size counts 10/10/5/1", pass);
}

#[test]
fn criterion_04_workflow_counts() {
    let values = sim::fgn_series(90, 0.7, 20.0, 4.0, 104)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect::<Vec<f64>>();
    let series = medcast_core::series::AnnualSeries::new("wf", 1900, values).unwrap();

    let origins = backtest::make_origins(&series, 10, 80).unwrap();
    let mut pass = origins.len() == 10 && origins.iter().all(|(seg, _)| seg.len() == 80);

    let methods = all_method_ids();
    let (matrix, report) = backtest::evaluate_series(&series, &methods, 104).unwrap();
    // 5 base methods x 10 segments = 50 fitted models, one forecast each
    let base_forecasts: usize = matrix
        .rows()
        .filter(|(m, _)| matches!(m, MethodId::Base(_)))
        .map(|(_, row)| row.len())
        .sum();
    pass &= base_forecasts == 50;
    pass &= report.metric_count() == 155;
    pass &= report.relative_improvements().len() == 90;
    for metric in MetricId::ALL {
        let sum: f64 = methods.iter().map(|m| report.rank(*m, metric).unwrap()).sum();
        pass &= (sum - 496.0).abs() < 1e-9;
    }
    criterion(4, "10 origins, 50 base fits, 155 metrics, 90 RIs, rank sum 496", pass);
}

#[test]
fn criterion_05_clamping_and_nonnegativity() {
    // steep decline toward a small plateau forces negative extrapolations
    let values: Vec<f64> = (0..90).map(|i| (1000.0 - 13.0 * i as f64).max(5.0)).collect();
    let series = medcast_core::series::AnnualSeries::new("clamp", 1900, values).unwrap();
    let methods = all_method_ids();
    let (matrix, _) = backtest::evaluate_series(&series, &methods, 105).unwrap();
    let mut any_zero = false;
    let mut all_nonnegative = true;
    for (_, row) in matrix.rows() {
        for v in row {
            all_nonnegative &= *v >= 0.0;
            any_zero |= *v == 0.0;
        }
    }
    criterion(
        5,
        "negative base forecast stored as 0 and every combo forecast nonnegative",
        any_zero && all_nonnegative,
    );
}

#[test]
fn criterion_06_estimator_recovery() {
    let start = Instant::now();

    // SES alpha recovery: 200 length-80 simulations at alpha = 0.3
    let mut rng = ChaCha8Rng::seed_from_u64(1061);
    let mut errs: Vec<f64> = Vec::new();
    for _ in 0..200 {
        let mut level = 50.0_f64;
        let mut xs = Vec::with_capacity(80);
        for _ in 0..80 {
            let e: f64 = StandardNormal.sample(&mut rng);
            let x = level + e;
            level += 0.3 * e;
            xs.push(x);
        }
        let m = fit_ses(&TrainingSegment::new(xs, 1).unwrap());
        errs.push((m.alpha() - 0.3).abs());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ses_median = errs[100];

    // ARFIMA d recovery: 50 length-1000 ARFIMA(0, 0.3, 0) replicates
    let mut rng = ChaCha8Rng::seed_from_u64(1062);
    let rho = toeplitz::arfima0_correlations(0.3, 1000);
    let mut errs: Vec<f64> = Vec::new();
    for _ in 0..50 {
        let x = toeplitz::hosking_simulate(&rho, 1000, &mut rng);
        let m = fit_arfima(&TrainingSegment::new(x, 1).unwrap());
        errs.push((m.d() - 0.3).abs());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let arfima_median = errs[25];

    // ARFIMA on white noise: d near zero
    let mut rng = ChaCha8Rng::seed_from_u64(1063);
    let mut errs: Vec<f64> = Vec::new();
    for _ in 0..50 {
        let x: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = fit_arfima(&TrainingSegment::new(x, 1).unwrap());
        errs.push(m.d().abs());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let white_median = errs[25];

    // fGn Hurst recovery at H = 0.7 (exact generation) and on iid noise
    let mut rng = ChaCha8Rng::seed_from_u64(1064);
    let rho = toeplitz::fgn_correlations(0.7, 90);
    let mut errs: Vec<f64> = Vec::new();
    for _ in 0..100 {
        let x: Vec<f64> =
            toeplitz::hosking_simulate(&rho, 90, &mut rng).iter().map(|v| 10.0 + 2.0 * v).collect();
        errs.push((fit_fgn(&x).unwrap().hurst - 0.7).abs());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let fgn_median = errs[50];

    let mut rng = ChaCha8Rng::seed_from_u64(1065);
    let mut errs: Vec<f64> = Vec::new();
    for _ in 0..100 {
        let x: Vec<f64> = (0..90)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                20.0 + 3.0 * z
            })
            .collect();
        errs.push((fit_fgn(&x).unwrap().hurst - 0.5).abs());
    }
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iid_median = errs[50];

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        6,
        &format!(
            "estimator recovery: SES {ses_median:.3} (<=0.15), ARFIMA {arfima_median:.3} \
             (<=0.08), white noise {white_median:.3} (<=0.08), fGn {fgn_median:.3} (<=0.10), \
             iid {iid_median:.3} (<=0.10), {elapsed:.0}s (<600s)"
        ),
        ses_median <= 0.15
            && arfima_median <= 0.08
            && white_median <= 0.08
            && fgn_median <= 0.10
            && iid_median <= 0.10
            && elapsed < 600.0,
    );
}

#[test]
fn criterion_07_feature_sanity() {
    // spectral entropy: iid noise high, Fourier sinusoid low
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut vals: Vec<f64> = (0..200)
        .map(|_| {
            let x: Vec<f64> = (0..90).map(|_| StandardNormal.sample(&mut rng)).collect();
            spectral_entropy(&x).unwrap()
        })
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let entropy_iid = vals[100];

    let sinusoid: Vec<f64> = (0..90)
        .map(|t| (2.0 * std::f64::consts::PI * 7.0 * t as f64 / 90.0).sin())
        .collect();
    let entropy_sin = spectral_entropy(&sinusoid).unwrap();

    // trend strength: exact line 1, iid noise low
    let line: Vec<f64> = (0..90).map(|i| 0.7 * i as f64 + 3.0).collect();
    let strength_line = trend_strength(&line).unwrap();
    let mut strengths: Vec<f64> = (0..200)
        .map(|_| {
            let x: Vec<f64> = (0..90).map(|_| StandardNormal.sample(&mut rng)).collect();
            trend_strength(&x).unwrap()
        })
        .collect();
    strengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let strength_iid = strengths[100];

    let alt = acf1(&[1.0, -1.0, 1.0, -1.0]).unwrap();

    criterion(
        7,
        &format!(
            "entropy iid {entropy_iid:.3} (>=0.90), sinusoid {entropy_sin:.3} (<=0.1), \
             trend line {strength_line:.3} (=1), trend iid {strength_iid:.3} (<=0.35), \
             acf1 alternating {alt} (=-0.75)"
        ),
        entropy_iid >= 0.90
            && entropy_sin <= 0.1
            && (strength_line - 1.0).abs() < 1e-9
            && strength_iid <= 0.35
            && alt == -0.75,
    );
}

#[test]
fn criterion_08_combination_benefit() {
    let start = Instant::now();
    let dataset = sim::synthetic_flow_dataset(100, 90, 0.7, 108);
    let methods = all_method_ids();
    let series_list: Vec<_> = dataset.entries().iter().map(|e| e.series.clone()).collect();
    let results = backtest::evaluate_stations(&series_list, &methods, 108, 1).unwrap();
    let reports: Vec<_> = results.into_iter().map(|(_, r)| r).collect();
    let summary = backtest::summarize(&reports, &dataset.regions());

    // average RMSE relative improvement per method, Globe scope
    let avg_ri = |m: MethodId| -> f64 {
        summary
            .row(RegionScope::Globe, MetricId::Rmse, m)
            .and_then(|r| r.avg_relative_improvement)
            .unwrap_or(0.0) // benchmark: zero by definition
    };

    let mut combos_ok = true;
    let mut worst_gap = f64::INFINITY;
    for m in &methods {
        if let MethodId::Combo(_) = m {
            if m.members().len() >= 3 {
                let combo_ri = avg_ri(*m);
                let min_base_ri = m
                    .members()
                    .iter()
                    .map(|b| avg_ri(MethodId::Base(*b)))
                    .fold(f64::INFINITY, f64::min);
                worst_gap = worst_gap.min(combo_ri - min_base_ri);
                combos_ok &= combo_ri >= min_base_ri;
            }
        }
    }

    // independent aggregation: recompute each method's Globe average RMSE RI
    // directly from the per-station reports and compare with the summary
    let mut aggregation_ok = true;
    for m in &methods {
        if m.is_benchmark() {
            continue;
        }
        let direct: f64 = reports
            .iter()
            .map(|r| r.relative_improvement(*m, MetricId::Rmse).unwrap())
            .sum::<f64>()
            / reports.len() as f64;
        aggregation_ok &= (direct - avg_ri(*m)).abs() <= 1e-12 * (1.0 + direct.abs());
    }

    let predictability = predictability_summary(&reports, &dataset.regions()).unwrap();
    let mut best_dominates = predictability.global_mean_ri >= 0.0;
    for m in &methods {
        if m.is_benchmark() {
            continue;
        }
        best_dominates &= predictability.global_mean_ri >= avg_ri(*m) - 1e-12;
    }

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        8,
        &format!(
            "combination benefit on 100 fGn stations: every size>=3 combo beats its worst \
             base (min gap {worst_gap:.4}), best-per-station mean dominates, independent \
             aggregation agrees, {elapsed:.0}s (<900s)"
        ),
        combos_ok && best_dominates && aggregation_ok && elapsed < 900.0,
    );
}

#[test]
fn criterion_09_run_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = sim::synthetic_flow_dataset(4, 90, 0.7, 109);
    let (series, meta) = sim::dataset_to_csv(&ds);
    let sp = tmp.path().join("series.csv");
    let mp = tmp.path().join("meta.csv");
    std::fs::write(&sp, series).unwrap();
    std::fs::write(&mp, meta).unwrap();

    let mut dirs = Vec::new();
    for (name, jobs) in [("r1", "1"), ("r2", "1"), ("r3", "3")] {
        let out = tmp.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_medcast"))
            .args([
                "run",
                "--data",
                sp.to_str().unwrap(),
                "--meta",
                mp.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "33",
                "--jobs",
                jobs,
            ])
            .status()
            .unwrap();
        assert!(status.success());
        dirs.push(out);
    }
    let mut files: Vec<String> = std::fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    files.sort();
    let mut identical = true;
    for dir in &dirs[1..] {
        for f in &files {
            let a = std::fs::read(dirs[0].join(f)).unwrap();
            let b = std::fs::read(dir.join(f)).unwrap();
            identical &= a == b;
        }
    }
    criterion(
        9,
        &format!("byte-identical artifacts across reruns and --jobs ({} files)", files.len()),
        identical,
    );
}

#[test]
fn criterion_10_regression_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..60);
        let x: Vec<f64> = (0..n).map(|i| i as f64 + rng.random_range(-0.45..0.45)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let ours = linear_regression(&x, &y).unwrap();
        let (slope, intercept, r) = oracle::regression(&x, &y);
        worst = worst.max((ours.slope - slope).abs() / (1.0 + slope.abs()));
        worst = worst.max((ours.intercept - intercept).abs() / (1.0 + intercept.abs()));
        if !ours.degenerate_response {
            worst = worst.max((ours.pearson_r - r).abs());
        }
    }

    // planted-slope recovery: RI = -2 cv + noise
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..100 {
        let cv: f64 = rng.random_range(0.1..1.2);
        for _ in 0..30 {
            xs.push(cv);
            ys.push(-2.0 * cv + rng.random_range(-0.3..0.3));
        }
    }
    let planted = linear_regression(&xs, &ys).unwrap();

    criterion(
        10,
        &format!(
            "regression matches normal equations (worst rel dev {worst:.2e}) and recovers \
             planted slope ({:.3} vs -2)",
            planted.slope
        ),
        worst <= 1e-10 && (planted.slope + 2.0).abs() <= 0.2,
    );
}

#[test]
fn acceptance_sanity_close_helper() {
    assert!(close(1.0, 1.0 + 1e-13, 1e-12));
    assert!(!close(1.0, 1.1, 1e-12));
}
