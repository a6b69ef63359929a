//! Experiment configuration, validation, dispatch and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counterexample::{
    blowup_trend, check_blowup, check_l_finiteness, decay_fit, log_integral_trend,
    CounterexampleParams, DECAY_SLACK,
};
use crate::error::{Error, Result};
use crate::experiments::{
    self, ratio, trials, window_violations, Check, Ensemble, ExperimentReport, SuiteConfig,
    TrendPoint, Violation, Window,
};
use crate::frames::{build_phi0, build_psi0};
use crate::random::random_field;
use crate::spaces::{finfty_q_norm, fpq_discrete_norm, lp_lq_norm};
use crate::spectral::GridSpec;
use crate::transform::{analyze, relative_error, roundtrip};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest allowed `|sum_k phi_k^ - 1|` on the covered band.
pub const PARTITION_TOL: f64 = 1e-10;
/// Largest allowed relative reconstruction error of the phi-transform.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
/// Band constant of roundtrip inputs: spectral radius `2^{k-2}`.
pub const ROUNDTRIP_BAND_CONSTANT: f64 = 0.125;
/// Upper integrability exponent of the embedding suite.
pub const EMBEDDING_R1: f64 = 2.0;
/// Support radii of the embedding suite.
pub const EMBEDDING_RADII: [f64; 3] = [1.0, 2.0, 4.0];

/// Literal thresholds of the sharpness dichotomy.
pub const FINITE_INCREMENT_MAX: f64 = 1e-3;
pub const FINITE_INCREMENT_RADIUS: f64 = 256.0;
pub const DIVERGENT_INCREMENT_MIN: f64 = 0.05;
pub const DIVERGENT_INCREMENT_RADIUS: f64 = 1024.0;
/// Doubling radii `2^8 .. 2^40` used to fit the increment decay exponents.
pub const FIT_LOG2_RADII: std::ops::RangeInclusive<i32> = 8..=40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PartitionCheck,
    Roundtrip,
    Norms,
    Maximal,
    Atoms,
    #[serde(rename = "lemma61")]
    SingleScale,
    #[serde(rename = "theorem11")]
    VectorValued,
    #[serde(rename = "theorem12")]
    FInfinity,
    #[serde(rename = "corollary13")]
    Homogeneous,
    Counterexample,
    Embedding,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::PartitionCheck,
        Suite::Roundtrip,
        Suite::Norms,
        Suite::Maximal,
        Suite::Atoms,
        Suite::SingleScale,
        Suite::VectorValued,
        Suite::FInfinity,
        Suite::Homogeneous,
        Suite::Counterexample,
        Suite::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PartitionCheck => "partition-check",
            Suite::Roundtrip => "roundtrip",
            Suite::Norms => "norms",
            Suite::Maximal => "maximal",
            Suite::Atoms => "atoms",
            Suite::SingleScale => "lemma61",
            Suite::VectorValued => "theorem11",
            Suite::FInfinity => "theorem12",
            Suite::Homogeneous => "corollary13",
            Suite::Counterexample => "counterexample",
            Suite::Embedding => "embedding",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub params: SuiteConfig,
}

impl ExperimentConfig {
    /// Default parameters of each suite, all at `d = 1`.
    pub fn preset(suite: Suite) -> Self {
        let base = SuiteConfig::default();
        let params = match suite {
            Suite::PartitionCheck => SuiteConfig {
                n: 1024,
                half_width: 1.0,
                k_min: -3,
                k_max: 6,
                trials: 1,
                ..base
            },
            Suite::Roundtrip => SuiteConfig { trials: 50, ..base },
            Suite::Norms => SuiteConfig { trials: 20, ..base },
            Suite::Maximal => SuiteConfig { trials: 50, ..base },
            Suite::Atoms => SuiteConfig {
                n: 64,
                p: 0.8,
                trials: 100,
                ..base
            },
            Suite::SingleScale => SuiteConfig { trials: 50, ..base },
            Suite::VectorValued => SuiteConfig {
                trials: 100,
                ..base
            },
            Suite::FInfinity => SuiteConfig {
                p: 2.0,
                trials: 50,
                ..base
            },
            Suite::Homogeneous => SuiteConfig {
                n: 1024,
                k_max: 2,
                trials: 20,
                ..base
            },
            Suite::Counterexample => SuiteConfig {
                n: 4096,
                half_width: 16.0,
                p: 1.0,
                q: 1.0,
                s: 0.6,
                trials: 1,
                ..base
            },
            Suite::Embedding => SuiteConfig {
                n: 1024,
                r: 1.5,
                trials: 30,
                ..base
            },
        };
        Self { suite, params }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn violation(inequality: &str, left: f64, right: f64) -> Violation {
    Violation {
        inequality: inequality.to_string(),
        left,
        right,
    }
}

/// Every violated hypothesis of the selected suite, plus grid constraints.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    let c = &config.params;
    let mut out = Vec::new();
    if c.dim != 1 && c.dim != 2 {
        out.push(violation("d in {1, 2}", c.dim as f64, 2.0));
    }
    if c.n < 8 || !c.n.is_power_of_two() {
        out.push(violation("n = 2^j >= 8", c.n as f64, 8.0));
    }
    if !(c.half_width > 0.0 && c.half_width.is_finite()) {
        out.push(violation("L > 0", c.half_width, 0.0));
    }
    if c.k_min > c.k_max {
        out.push(violation("k_min <= k_max", c.k_min as f64, c.k_max as f64));
    }
    let window = |w: Window| window_violations(w, c.dim, c.p, c.q, c.s, c.r);
    match config.suite {
        Suite::SingleScale => out.extend(window(Window::SingleScale)),
        Suite::VectorValued => out.extend(window(Window::VectorValued)),
        Suite::FInfinity => {
            out.extend(window(Window::FInfinity));
            if c.mu.is_empty() {
                out.push(violation("mu sweep nonempty", 0.0, 1.0));
            }
        }
        Suite::Homogeneous => out.extend(window(Window::TriebelLizorkin)),
        Suite::Atoms => {
            if !(c.p > 0.0 && c.p <= 1.0) {
                out.push(violation("0 < p <= 1", c.p, 1.0));
            }
            if !(c.q >= c.p) {
                out.push(violation("q >= p", c.q, c.p));
            }
        }
        Suite::Norms | Suite::Maximal => {
            if !(c.p > 0.0) {
                out.push(violation("p > 0", c.p, 0.0));
            }
            if !(c.q > 0.0) {
                out.push(violation("q > 0", c.q, 0.0));
            }
        }
        Suite::Counterexample => out.extend(counterexample_violations(c)),
        Suite::Embedding => {
            if !(c.r > 1.0) {
                out.push(violation("1 < r", c.r, 1.0));
            }
            if !(c.r < EMBEDDING_R1) {
                out.push(violation("r < r1", c.r, EMBEDDING_R1));
            }
        }
        Suite::PartitionCheck | Suite::Roundtrip => {}
    }
    out
}

fn counterexample_violations(c: &SuiteConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(c.p > 0.0 && c.q > 0.0) {
        out.push(violation("p, q > 0", c.p.min(c.q), 0.0));
        return out;
    }
    let d = c.dim as f64;
    let m = 1f64.min(c.p).min(c.q);
    let t = d / m;
    if !(t - d < c.s) {
        out.push(violation("d/min(1,p,q) - d < s", t - d, c.s));
    }
    if !(c.s < t) {
        out.push(violation("s < d/min(1,p,q)", c.s, t));
    }
    if let (true, Some(gamma)) = (out.is_empty(), c.gamma) {
        let tau = d / (c.s - (t - d));
        if !(2.0 / tau < gamma) {
            out.push(violation("2/tau^(s,p,q) < gamma", 2.0 / tau, gamma));
        }
        if !(gamma < 2.0 / m) {
            out.push(violation("gamma < 2/min(1,p,q)", gamma, 2.0 / m));
        }
    }
    out
}

/// Process exit status for an error: 3 for I/O, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) => 3,
        _ => 1,
    }
}

/// Validates and runs the configured suite. `trials = 0` yields an empty report.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let violations = validate(config);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidExponents(text.join("; ")));
    }
    let c = &config.params;
    if c.trials == 0 {
        return Ok(ExperimentReport::new(config.suite.name(), c));
    }
    log::info!("running {} with seed {}", config.suite.name(), c.seed);
    match config.suite {
        Suite::PartitionCheck => partition_check(c),
        Suite::Roundtrip => roundtrip_suite(c),
        Suite::Norms => norms_suite(c),
        Suite::Maximal => experiments::run_maximal_suite(c),
        Suite::Atoms => experiments::run_atoms_suite(c),
        Suite::SingleScale => experiments::run_single_scale_suite(c),
        Suite::VectorValued => experiments::run_vector_valued_suite(c),
        Suite::FInfinity => experiments::run_finfty_suite(c),
        Suite::Homogeneous => experiments::run_homogeneous_suite(c),
        Suite::Counterexample => counterexample_suite(c),
        Suite::Embedding => experiments::run_embedding_suite(c, EMBEDDING_R1, &EMBEDDING_RADII),
    }
}

/// `max |sum_k phi_k^ - 1|` over grid frequencies with `2^k_min <= |xi| <= 2^k_max`.
pub fn partition_error(grid: GridSpec, k_min: i32, k_max: i32) -> Result<f64> {
    let family = build_phi0(grid, k_min, k_max)?;
    let (lo, hi) = (2f64.powi(k_min), 2f64.powi(k_max));
    Ok((0..grid.len())
        .filter(|&i| (lo..=hi).contains(&grid.freq_norm(i)))
        .map(|i| (family.partition_sum(grid.freq(i)) - 1.0).abs())
        .fold(0.0, f64::max))
}

fn partition_check(c: &SuiteConfig) -> Result<ExperimentReport> {
    let grid = c.grid()?;
    let err = partition_error(grid, c.k_min, c.k_max)?;
    let mut report = ExperimentReport::new(Suite::PartitionCheck.name(), c);
    report
        .checks
        .push(Check::at_most("partition of unity", err, PARTITION_TOL));
    Ok(report)
}

fn roundtrip_suite(c: &SuiteConfig) -> Result<ExperimentReport> {
    let grid = c.grid()?;
    let psi = build_psi0(grid, c.k_min, c.k_max)?;
    let errors = trials(c, |rng| {
        let field = random_field(grid, c.k_min, c.k_max, ROUNDTRIP_BAND_CONSTANT, rng)?;
        relative_error(&field, &roundtrip(&field, &psi)?)
    })?;
    let mut report = ExperimentReport::new(Suite::Roundtrip.name(), c);
    let e = Ensemble::new("relative error", errors);
    report
        .checks
        .push(Check::at_most("reconstruction", e.max, ROUNDTRIP_TOL));
    report.ensembles.push(e);
    Ok(report)
}

/// Continuous against discrete norms of random fields: `||F||_{L^p(l^q)}` over
/// the sequence norm of its phi-transform coefficients, and the same for the
/// `F_inf` norms at `mu = k_min`.
fn norms_suite(c: &SuiteConfig) -> Result<ExperimentReport> {
    let grid = c.grid()?;
    let rows = trials(c, |rng| {
        let field = random_field(grid, c.k_min, c.k_max, ROUNDTRIP_BAND_CONSTANT, rng)?;
        let b = analyze(&field)?;
        let lp = ratio(
            lp_lq_norm(&field, c.p, c.q)?,
            fpq_discrete_norm(&b, c.p, c.q)?,
        );
        let finf = if c.q.is_finite() {
            let mu = c.k_min.max(-grid.log2_half_width().unwrap_or(0));
            ratio(
                finfty_q_norm(&field, c.q, mu)?,
                crate::spaces::finfty_discrete_norm(&b, c.q, mu)?,
            )
        } else {
            0.0
        };
        Ok((lp, finf))
    })?;
    let mut report = ExperimentReport::new(Suite::Norms.name(), c);
    report.ensembles.push(Ensemble::new(
        "continuous / discrete",
        rows.iter().map(|r| r.0).collect(),
    ));
    if c.q.is_finite() {
        report.ensembles.push(Ensemble::new(
            "continuous / discrete f-infinity",
            rows.iter().map(|r| r.1).collect(),
        ));
    }
    Ok(report)
}

fn counterexample_suite(c: &SuiteConfig) -> Result<ExperimentReport> {
    let params = match c.gamma {
        Some(g) => CounterexampleParams::new(c.dim, c.p, c.q, c.s, g)?,
        None => CounterexampleParams::midpoint(c.dim, c.p, c.q, c.s)?,
    };
    let grid = c.grid()?;
    let mut report = ExperimentReport::new(Suite::Counterexample.name(), c);
    report.config.gamma = Some(params.gamma);
    let fit_radii: Vec<f64> = FIT_LOG2_RADII.map(|j| 2f64.powi(j)).collect();
    let finite = check_l_finiteness(&params, &fit_radii, &[grid])?;
    let blowup = check_blowup(&params, &fit_radii, &[grid])?;
    for (series, t) in [
        ("finite increment", &finite),
        ("divergent increment", &blowup),
    ] {
        for (r, v) in t.radii.iter().zip(&t.increments) {
            report.trend.push(TrendPoint::new(series, *r, *v));
        }
    }
    for (series, t) in [
        ("grid multiplier functional", &finite),
        ("grid kernel norm", &blowup),
    ] {
        for g in &t.grid {
            report
                .trend
                .push(TrendPoint::new(series, g.half_width, g.value));
        }
    }

    let at = log_integral_trend(params.finiteness_exponent(), &[FINITE_INCREMENT_RADIUS]);
    report.checks.push(Check::at_most(
        "finite-side increment at R = 2^8",
        at.increments[0],
        FINITE_INCREMENT_MAX,
    ));
    let early: Vec<f64> = (0..=DIVERGENT_INCREMENT_RADIUS.log2() as i32)
        .map(|j| 2f64.powi(j))
        .collect();
    let low = blowup_trend(params.dim, params.blowup_exponent(), &early);
    let min_inc = low.increments.iter().copied().fold(f64::INFINITY, f64::min);
    report.checks.push(Check::at_least(
        "divergent-side increments through R = 2^10",
        min_inc,
        DIVERGENT_INCREMENT_MIN,
    ));

    let fitted = |t: &crate::counterexample::TrendReport| t.decay_exponent.unwrap_or(f64::NAN);
    let strict = |name: &str, value: f64, above: bool| Check {
        name: name.to_string(),
        value,
        threshold: 1.0,
        passed: if above { value > 1.0 } else { value < 1.0 },
    };
    report.checks.push(strict(
        "finite-side increments summable",
        fitted(&finite),
        true,
    ));
    report.checks.push(strict(
        "divergent-side increments not summable",
        fitted(&blowup),
        false,
    ));
    let contrast_finite = log_integral_trend(1.0, &fit_radii);
    let contrast_blowup = blowup_trend(params.dim, 2.0, &fit_radii);
    report.checks.push(strict(
        "contrast exponent 1 not summable",
        fitted(&contrast_finite),
        false,
    ));
    report.checks.push(strict(
        "contrast exponent 2 summable",
        fitted(&contrast_blowup),
        true,
    ));

    if params.dim == 1 {
        let fit = decay_fit(
            &params,
            GridSpec::new(1, 1 << 13, 16.0)?,
            GridSpec::new(1, 1 << 14, 32.0)?,
        )?;
        let worst = fit.refined_low.max(fit.refined_high) / fit.constant;
        report.checks.push(Check {
            name: "decay constant".into(),
            value: worst,
            threshold: DECAY_SLACK,
            passed: fit.passes,
        });
    }
    Ok(report)
}

/// The machine-readable report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: ExperimentReport,
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        report: report.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

/// `series,parameter,value` rows of the report trend.
pub fn trend_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("series,parameter,value\n");
    for t in &report.trend {
        let _ = writeln!(out, "{},{:e},{:e}", t.series, t.parameter, t.value);
    }
    out
}

pub fn summary_text(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "suite: {}", report.suite);
    let _ = writeln!(out, "surrogate: {}", report.surrogate);
    let c = &report.config;
    let _ = writeln!(
        out,
        "d = {}, n = {}, L = {}, k = {}..{}, p = {}, q = {}, s = {}, r = {}, trials = {}, seed = {}",
        c.dim, c.n, c.half_width, c.k_min, c.k_max, c.p, c.q, c.s, c.r, c.trials, c.seed
    );
    for e in &report.ensembles {
        let _ = write!(
            out,
            "{}: {} trials, max {:.6e}, median {:.6e}",
            e.name,
            e.ratios.len(),
            e.max,
            e.median
        );
        if let Some(r) = &e.refinement {
            let _ = write!(
                out,
                ", n = {} -> {}: max {:.6e} (change {:.3}%)",
                r.n,
                r.refined_n,
                r.refined_max,
                100.0 * r.relative_change
            );
        }
        out.push('\n');
    }
    for ch in &report.checks {
        let _ = writeln!(
            out,
            "{} {}: {:.6e} (threshold {:.6e})",
            if ch.passed { "PASS" } else { "FAIL" },
            ch.name,
            ch.value,
            ch.threshold
        );
    }
    let _ = writeln!(
        out,
        "overall: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out
}

/// Writes `<suite>.json`, `<suite>_trend.csv` and `<suite>_summary.txt` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (format!("{}.json", report.suite), report_json(report)?),
        (format!("{}_trend.csv", report.suite), trend_csv(report)),
        (
            format!("{}_summary.txt", report.suite),
            summary_text(report),
        ),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_roundtrip() {
        for suite in Suite::ALL {
            let cfg = ExperimentConfig::preset(suite);
            assert!(
                validate(&cfg).is_empty(),
                "{}: {:?}",
                suite.name(),
                validate(&cfg)
            );
            let text = cfg.to_json().unwrap();
            let back = ExperimentConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json().unwrap(), text);
            assert_eq!(Suite::from_name(suite.name()), Some(suite));
        }
    }

    #[test]
    fn validation_names_the_inequality() {
        let mut cfg = ExperimentConfig::preset(Suite::VectorValued);
        cfg.params.n = 100;
        cfg.params.s = 0.2;
        let v = validate(&cfg);
        let names: Vec<&str> = v.iter().map(|x| x.inequality.as_str()).collect();
        assert!(names.contains(&"n = 2^j >= 8"));
        assert!(names.contains(&"max(|d/p - d/2|, |d/q - d/2|) < s"));
        assert!(matches!(run(&cfg), Err(Error::InvalidExponents(_))));
        let mut ce = ExperimentConfig::preset(Suite::Counterexample);
        ce.params.gamma = Some(2.5);
        assert_eq!(validate(&ce)[0].inequality, "gamma < 2/min(1,p,q)");
    }

    #[test]
    fn zero_trials_give_an_empty_report() {
        for suite in Suite::ALL {
            let mut cfg = ExperimentConfig::preset(suite);
            cfg.params.trials = 0;
            let report = run(&cfg).unwrap();
            assert!(report.ensembles.is_empty() && report.checks.is_empty() && report.passed());
        }
    }

    #[test]
    fn partition_and_roundtrip_presets_pass() {
        let report = run(&ExperimentConfig::preset(Suite::PartitionCheck)).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        let mut cfg = ExperimentConfig::preset(Suite::Roundtrip);
        cfg.params.trials = 5;
        let report = run(&cfg).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn report_files() {
        let mut cfg = ExperimentConfig::preset(Suite::SingleScale);
        cfg.params.trials = 3;
        let report = run(&cfg).unwrap();
        let json = report_json(&report).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert_eq!(json, report_json(&run(&cfg).unwrap()).unwrap());
        let parsed: ReportFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.report, report);
        let csv = trend_csv(&report);
        assert_eq!(csv.lines().count(), 1 + report.trend.len());
        assert!(summary_text(&report).contains("overall: PASS"));
        let dir = std::env::temp_dir().join(format!("vvmult-harness-{}", std::process::id()));
        let paths = write_report(&report, &dir).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(fs::read_to_string(&paths[0]).unwrap(), json);
        fs::remove_dir_all(&dir).unwrap();
    }
}
