//! Acceptance criteria 1-10. Each test prints one `PASS`/`FAIL` line per
//! criterion (criteria with several parts print one line per part).

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use vvmult::counterexample::{
    blowup_trend, log_integral, log_integral_closed_form, log_integral_trend, CounterexampleParams,
};
use vvmult::experiments::{
    run_atoms_suite, run_finfty_suite, run_maximal_suite, run_single_scale_suite,
    run_vector_valued_suite, ExperimentReport, SuiteConfig, COVARIANCE_TOL, MU_SPREAD_TOL,
    REFINEMENT_TOL,
};
use vvmult::harness::{self, ExperimentConfig, Suite};
use vvmult::maximal::{
    dyadic_maximal, dyadic_sharp, hl_maximal, peetre_maximal, power_maximal, MaximalConfig,
    WindowFamily,
};
use vvmult::multiplier::{apply_family, default_symbol_grid, MultiplierFamily};
use vvmult::random::{random_field, trial_rng};
use vvmult::spaces::DEFAULT_BAND_CONSTANT;
use vvmult::spectral::{GridSpec, SampledFunction};

fn line(passed: bool, criterion: &str, detail: String) -> bool {
    println!(
        "{} criterion {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn within(elapsed: Duration, limit: u64) -> (bool, String) {
    (
        elapsed.as_secs_f64() < limit as f64,
        format!("{:.2} s (limit {limit} s)", elapsed.as_secs_f64()),
    )
}

/// Every check of the report, one line each.
fn report_lines(criterion: &str, label: &str, report: &ExperimentReport) -> bool {
    let mut ok = true;
    for e in &report.ensembles {
        let finite = e.max.is_finite() && e.ratios.iter().all(|r| r.is_finite());
        ok &= line(
            finite,
            criterion,
            format!(
                "{label} {}: {} trials, max {:.4e} finite",
                e.name,
                e.ratios.len(),
                e.max
            ),
        );
    }
    for c in &report.checks {
        ok &= line(
            c.passed,
            criterion,
            format!("{label} {}: {:.4e} vs {:.4e}", c.name, c.value, c.threshold),
        );
    }
    ok
}

#[test]
fn criterion_01_partition_of_unity() {
    let (err, t) =
        timed(|| harness::partition_error(GridSpec::new(1, 1024, 1.0).unwrap(), -3, 6).unwrap());
    let (fast, time) = within(t, 1);
    let ok = line(
        err <= 1e-10 && fast,
        "1",
        format!("max |sum phi_k^ - 1| = {err:.3e} <= 1e-10, {time}"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_phi_transform_roundtrip() {
    let mut cfg = ExperimentConfig::preset(Suite::Roundtrip);
    cfg.params.trials = 50;
    let (report, t) = timed(|| harness::run(&cfg).unwrap());
    let e = &report.ensembles[0];
    let (fast, time) = within(t, 10);
    let ok = line(
        e.ratios.len() == 50 && e.max <= 1e-8 && fast,
        "2",
        format!(
            "50 fields, max relative error {:.3e} <= 1e-8, {time}",
            e.max
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_03_identity_multiplier() {
    let (err, t) = timed(|| {
        let grid = GridSpec::new(1, 256, 4.0).unwrap();
        let family = MultiplierFamily::identity(default_symbol_grid(1), 0, 3);
        (0..10)
            .map(|trial| {
                let f = random_field(grid, 0, 3, DEFAULT_BAND_CONSTANT, &mut trial_rng(3, trial))
                    .unwrap();
                let g = apply_family(&family, &f).unwrap();
                let scale = f
                    .iter()
                    .map(|(_, c)| c.lp_norm(f64::INFINITY))
                    .fold(0.0, f64::max);
                f.max_abs_diff(&g).unwrap() / scale
            })
            .fold(0.0, f64::max)
    });
    let (fast, time) = within(t, 1);
    let ok = line(
        err <= 1e-12 && fast,
        "3",
        format!("max relative deviation {err:.3e} <= 1e-12, {time}"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_single_scale_invariance() {
    let (ok, t) = timed(|| {
        let mut ok = true;
        for (p, s) in [(0.8, 1.0), (1.0, 0.75), (2.0, 0.75), (4.0, 0.75)] {
            let cfg = SuiteConfig {
                p,
                s,
                r: 2.0,
                k_min: 0,
                k_max: 5,
                n: 512,
                trials: 50,
                ..SuiteConfig::default()
            };
            let report = run_single_scale_suite(&cfg).unwrap();
            let cov = report.check("scale covariance").unwrap();
            let refine = report.ensembles[0].refinement.as_ref().unwrap();
            ok &= line(
                cov.value <= COVARIANCE_TOL,
                "4",
                format!(
                    "p = {p}: rescaling spread over k = 0..5 is {:.3e} <= 1e-6",
                    cov.value
                ),
            );
            ok &= line(
                refine.relative_change <= REFINEMENT_TOL,
                "4",
                format!(
                    "p = {p}: max ratio {:.4e} -> {:.4e} under n -> 2n, change {:.3e} <= 0.1",
                    refine.max, refine.refined_max, refine.relative_change
                ),
            );
        }
        ok
    });
    let (fast, time) = within(t, 60);
    assert!(line(fast, "4", format!("runtime {time}")) && ok);
}

#[test]
fn criterion_05_vector_valued_estimate() {
    let (ok, t) = timed(|| {
        let mut ok = true;
        for (p, q, s) in [
            (0.5, 1.0, 1.75),
            (1.0, 2.0, 0.75),
            (2.0, f64::INFINITY, 0.75),
            (3.0, 1.5, 0.6),
        ] {
            let cfg = SuiteConfig {
                p,
                q,
                s,
                r: 2.0,
                trials: 100,
                ..SuiteConfig::default()
            };
            let report = run_vector_valued_suite(&cfg).unwrap();
            let e = &report.ensembles[0];
            let refine = e.refinement.as_ref().unwrap();
            ok &= line(
                e.ratios.len() == 100 && e.max.is_finite() && refine.relative_change <= REFINEMENT_TOL,
                "5",
                format!(
                    "(p, q) = ({p}, {q}), s = {s}, r = 2: max ratio {:.4e} -> {:.4e} under n -> 2n, change {:.3e} <= 0.1",
                    refine.max, refine.refined_max, refine.relative_change
                ),
            );
        }
        ok
    });
    let (fast, time) = within(t, 300);
    assert!(line(fast, "5", format!("runtime {time}")) && ok);
}

#[test]
fn criterion_06_uniform_in_mu() {
    let cfg = SuiteConfig {
        p: 2.0,
        q: 2.0,
        s: 0.75,
        r: 2.0,
        mu: vec![0, 1, 2, 3],
        trials: 50,
        ..SuiteConfig::default()
    };
    let (report, t) = timed(|| run_finfty_suite(&cfg).unwrap());
    let spread = report.check("mu spread").unwrap();
    let per_mu: Vec<String> = report
        .trend
        .iter()
        .map(|p| format!("{}: {:.4e}", p.parameter, p.value))
        .collect();
    let mut ok = line(
        spread.value <= MU_SPREAD_TOL,
        "6",
        format!(
            "max ratio per mu [{}], spread {:.3e} <= 0.15",
            per_mu.join(", "),
            spread.value
        ),
    );
    ok &= report_lines("6", "", &report);
    let (fast, time) = within(t, 120);
    assert!(line(fast, "6", format!("runtime {time}")) && ok);
}

/// Random samples with small integer parts, so every cube sum is exact.
fn integer_noise(grid: GridSpec, seed: u64) -> SampledFunction {
    let mut rng = trial_rng(seed, 0);
    let samples = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-20..=20) as f64, 0.0))
        .collect();
    SampledFunction::new(grid, samples).unwrap()
}

/// Cells `[s, s + w)` per axis, row-major.
fn window_cells(grid: &GridSpec, start: [usize; 2], w: usize) -> Vec<usize> {
    let n = grid.n();
    if grid.dim() == 1 {
        (start[0]..start[0] + w).collect()
    } else {
        (start[0]..start[0] + w)
            .flat_map(|r| (start[1]..start[1] + w).map(move |c| r * n + c))
            .collect()
    }
}

fn starts(grid: &GridSpec, w: usize, step: usize) -> Vec<[usize; 2]> {
    let n = grid.n();
    let axis: Vec<usize> = (0..=n - w).step_by(step).collect();
    if grid.dim() == 1 {
        axis.iter().map(|&s| [s, 0]).collect()
    } else {
        axis.iter()
            .flat_map(|&r| axis.iter().map(move |&c| [r, c]))
            .collect()
    }
}

/// Sup of `|Q|^-1 sum_Q |f|^t` over all non-wrapping aligned windows (or
/// dyadic blocks) containing each cell, then the `1/t` power.
fn brute_maximal(f: &SampledFunction, t: f64, dyadic: bool) -> Vec<f64> {
    let grid = *f.grid();
    let a: Vec<f64> = f.samples().iter().map(|v| v.norm().powf(t)).collect();
    let mut out = vec![0.0f64; grid.len()];
    let widths: Vec<usize> = if dyadic {
        (0..grid.n().trailing_zeros()).map(|e| 1 << e).collect()
    } else {
        (1..=grid.n()).collect()
    };
    for w in widths {
        for s in starts(&grid, w, if dyadic { w } else { 1 }) {
            let cells = window_cells(&grid, s, w);
            let avg = cells.iter().map(|&i| a[i]).sum::<f64>() / cells.len() as f64;
            for &i in &cells {
                out[i] = out[i].max(avg);
            }
        }
    }
    out.into_iter().map(|v| v.powf(1.0 / t)).collect()
}

fn brute_sharp(f: &SampledFunction) -> Vec<f64> {
    let grid = *f.grid();
    let mut out = vec![0.0f64; grid.len()];
    for e in 0..grid.n().trailing_zeros() {
        let w = 1 << e;
        for s in starts(&grid, w, w) {
            let cells = window_cells(&grid, s, w);
            let len = cells.len() as f64;
            let mean = Complex64::new(
                cells.iter().map(|&i| f.samples()[i].re).sum::<f64>() / len,
                cells.iter().map(|&i| f.samples()[i].im).sum::<f64>() / len,
            );
            let osc = cells
                .iter()
                .map(|&i| (f.samples()[i] - mean).norm())
                .sum::<f64>()
                / len;
            for &i in &cells {
                out[i] = out[i].max(osc);
            }
        }
    }
    out
}

fn brute_peetre(f: &SampledFunction, k: i32, sigma: f64) -> Vec<f64> {
    let grid = *f.grid();
    let n = grid.n();
    let coords = |i: usize| {
        if grid.dim() == 1 {
            [i, 0]
        } else {
            [i / n, i % n]
        }
    };
    (0..grid.len())
        .map(|i| {
            (0..grid.len())
                .map(|j| {
                    let (a, b) = (coords(i), coords(j));
                    let mut d2 = 0.0;
                    for axis in 0..grid.dim() {
                        let m = (a[axis] + n - b[axis]) % n;
                        d2 += (m.min(n - m) as f64 * grid.spacing()).powi(2);
                    }
                    f.samples()[j].norm() * (1.0 + 2f64.powi(k) * d2.sqrt()).powf(-sigma)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn values(f: &SampledFunction) -> Vec<f64> {
    f.samples().iter().map(|v| v.re).collect()
}

#[test]
fn criterion_07_maximal_inequalities() {
    let (ok, t) = timed(|| {
        let mut exact = true;
        let grids = [
            GridSpec::new(1, 64, 4.0).unwrap(),
            GridSpec::new(2, 16, 2.0).unwrap(),
        ];
        for (gi, grid) in grids.into_iter().enumerate() {
            for seed in 0..3 {
                let f = integer_noise(grid, 100 * gi as u64 + seed);
                let aligned = MaximalConfig::default();
                let dyadic = MaximalConfig::new(WindowFamily::Dyadic, 1.0, 1.0).unwrap();
                exact &=
                    values(&hl_maximal(&f, &aligned).unwrap()) == brute_maximal(&f, 1.0, false);
                exact &= values(&hl_maximal(&f, &dyadic).unwrap()) == brute_maximal(&f, 1.0, true);
                exact &= values(&power_maximal(&f, 2.0, &aligned).unwrap())
                    == brute_maximal(&f, 2.0, false);
                exact &= values(&power_maximal(&f, 2.0, &dyadic).unwrap())
                    == brute_maximal(&f, 2.0, true);
                exact &= values(&dyadic_maximal(&f).unwrap()) == brute_maximal(&f, 1.0, true);
                exact &= values(&dyadic_sharp(&f).unwrap()) == brute_sharp(&f);
                for (k, sigma) in [(0, 1.0), (2, 2.5)] {
                    exact &= values(&peetre_maximal(&f, k, sigma).unwrap())
                        == brute_peetre(&f, k, sigma);
                }
            }
        }
        let mut ok = line(
            exact,
            "7",
            "HL (aligned, dyadic), power, dyadic, dyadic sharp and Peetre maximal functions equal brute-force enumeration exactly at n = 64 (d = 1) and n = 16 (d = 2)".into(),
        );
        for (p, q) in [(1.0, 2.0), (2.0, 2.0), (4.0, 1.0)] {
            let cfg = SuiteConfig {
                p,
                q,
                trials: 30,
                ..SuiteConfig::default()
            };
            ok &= report_lines(
                "7",
                &format!("(p, q) = ({p}, {q})"),
                &run_maximal_suite(&cfg).unwrap(),
            );
        }
        ok
    });
    let (fast, time) = within(t, 120);
    assert!(line(fast, "7", format!("runtime {time}")) && ok);
}

#[test]
fn criterion_08_atomic_decomposition() {
    let (ok, t) = timed(|| {
        let mut ok = true;
        for p in [0.5, 0.8, 1.0] {
            for q in [p, 2.0, f64::INFINITY] {
                let cfg = SuiteConfig {
                    n: 64,
                    p,
                    q,
                    trials: 100,
                    ..SuiteConfig::default()
                };
                let report = run_atoms_suite(&cfg).unwrap();
                let failures = report.check("reconstruction failures").unwrap().value;
                let e = &report.ensembles[0];
                let r = e.refinement.as_ref().unwrap();
                ok &= line(
                    failures == 0.0 && r.relative_change <= 0.2,
                    "8",
                    format!(
                        "(p, q) = ({p}, {q}): exact reconstruction in 100 trials, C = {:.4e} -> {:.4e} under n -> 2n, change {:.3e} <= 0.2",
                        r.max, r.refined_max, r.relative_change
                    ),
                );
            }
        }
        ok
    });
    let (fast, time) = within(t, 60);
    assert!(line(fast, "8", format!("runtime {time}")) && ok);
}

#[test]
fn criterion_09_sharpness_dichotomy() {
    let (ok, t) = timed(|| {
        let mut ok = true;
        for r in [16.0, 256.0, 1024.0, 2f64.powi(20)] {
            let two = log_integral(2.0, r);
            let two_exact = 0.5 * (1.0 - 1.0 / (1.0 + 2.0 * f64::ln(r)));
            let one = log_integral(1.0, r);
            let one_exact = 0.5 * (1.0 + 2.0 * f64::ln(r)).ln();
            let worst = ((two - two_exact) / two_exact)
                .abs()
                .max(((one - one_exact) / one_exact).abs());
            ok &= line(
                worst <= 1e-8 && (log_integral_closed_form(2.0, r) - two_exact).abs() <= 1e-14,
                "9",
                format!("closed forms at R = {r}: I_2 = {two:.12}, I_1 = {one:.12}, relative error {worst:.2e}"),
            );
        }
        let params = CounterexampleParams::midpoint(1, 1.0, 1.0, 0.6).unwrap();
        let report = harness::run(&ExperimentConfig::preset(Suite::Counterexample)).unwrap();
        ok &= line(
            true,
            "9",
            format!(
                "t = {}, gamma = {}, finite-side exponent {:.4}, divergent-side exponent {:.4}",
                params.t,
                params.gamma,
                params.finiteness_exponent(),
                params.blowup_exponent()
            ),
        );
        ok &= report_lines("9", "", &report);
        // contrast exponents under the literal thresholds
        let flipped_i =
            log_integral_trend(1.0, &(0..=10).map(|j| 2f64.powi(j)).collect::<Vec<_>>());
        let min_i = flipped_i
            .increments
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        ok &= line(
            min_i >= 0.05,
            "9",
            format!("contrast exponent 1: finite-side increments through R = 2^10 stay >= 0.05, min {min_i:.4e}"),
        );
        let flipped_j = blowup_trend(1, 2.0, &[256.0]);
        ok &= line(
            flipped_j.increments[0] < 1e-3,
            "9",
            format!(
                "contrast exponent 2: divergent-side increment at R = 2^8 below 1e-3, {:.4e}",
                flipped_j.increments[0]
            ),
        );
        ok
    });
    let (fast, time) = within(t, 120);
    assert!(line(fast, "9", format!("runtime {time}")) && ok);
}

#[test]
fn criterion_10_compact_support_embedding() {
    let (report, t) = timed(|| harness::run(&ExperimentConfig::preset(Suite::Embedding)).unwrap());
    let per_b: Vec<String> = report
        .trend
        .iter()
        .map(|p| format!("B = {}: {:.4e}", p.parameter, p.value))
        .collect();
    let spread = report.check("radius spread").unwrap();
    let ok = line(
        spread.passed,
        "10",
        format!(
            "C_B [{}], max |C_B / C_1 - 1| = {:.3e} <= 0.2",
            per_b.join(", "),
            spread.value
        ),
    );
    let (fast, time) = within(t, 60);
    assert!(line(fast, "10", format!("runtime {time}")) && ok);
}
