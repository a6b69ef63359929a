//! Randomized ensembles for the multiplier, maximal and decomposition
//! estimates.
//!
//! Every inequality `lhs <= C rhs` is tested through the ratio `lhs / rhs` over
//! seeded trials. A bound is read as: the ensemble maximum is finite and moves
//! little when `n` doubles. Random draws do not depend on `n`, so the refined
//! run sees the same functions on a finer grid.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{decompose_atoms, lambda_lp, reconstruct, verify_atom};
use crate::cube::DyadicCube;
use crate::error::{Error, Result};
use crate::frames::{build_phi0, psi0_hat};
use crate::maximal::{lp_lq_of, peetre_maximal, power_maximal, MaximalConfig};
use crate::multiplier::{
    apply_family, default_symbol_grid, localized_hormander_norm, MultiplierFamily, Symbol,
};
use crate::random::{
    random_band_limited, random_family_independent, random_field, random_symbol, trial_rng,
};
use crate::spaces::{
    finfty_of, finfty_q_norm, fpq_discrete_norm, lp_lq_norm, multiplier_functional, sobolev_norm,
    CubeCoefficients, DEFAULT_BAND_CONSTANT,
};
use crate::spectral::{GridSpec, Point, SampledFunction, Spectrum, ZERO};

/// Allowed relative change of an ensemble max under `n -> 2n`.
pub const REFINEMENT_TOL: f64 = 0.10;
/// Same for the atomic decomposition constant.
pub const ATOM_REFINEMENT_TOL: f64 = 0.20;
/// Allowed `|C_B / C_1 - 1|` in the embedding suite.
pub const EMBEDDING_TOL: f64 = 0.20;

/// Stated at the top of every report.
pub const SURROGATE: &str =
    "bounded operator is read as: ensemble max ratio finite and stable under grid refinement n -> 2n";

/// Serde for exponents that may be infinite: `inf` is written as the string "inf".
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            "inf".serialize(s)
        } else {
            v.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("not an exponent: {t}"))),
        }
    }
}

/// Which multipliers a suite draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierModel {
    /// Random normalized symbols with envelope exponent `a`.
    #[default]
    Random,
    /// `m_k = Psi_k^`.
    Identity,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub k_min: i32,
    pub k_max: i32,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub s: f64,
    pub r: f64,
    /// Envelope exponent of random symbols; larger is smoother.
    pub envelope: f64,
    /// Smoothness index for the `F^{alpha,q}_p` norms of the homogeneous suite.
    pub alpha: f64,
    /// Values of `mu` swept by the `F_inf` suites.
    pub mu: Vec<i32>,
    pub multiplier: MultiplierModel,
    /// Log exponent of the sharpness example; `None` picks the window midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 256,
            half_width: 4.0,
            k_min: 0,
            k_max: 3,
            p: 1.0,
            q: 2.0,
            s: 0.75,
            r: 2.0,
            envelope: 2.0,
            alpha: 0.0,
            mu: vec![0, 1, 2, 3],
            multiplier: MultiplierModel::Random,
            gamma: None,
            trials: 20,
            seed: 1,
        }
    }
}

impl SuiteConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.n, self.half_width)
    }

    /// Same configuration on a grid with twice the points per axis.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub series: String,
    pub parameter: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub n: usize,
    pub max: f64,
    pub refined_n: usize,
    pub refined_max: f64,
    pub relative_change: f64,
}

impl TrendPoint {
    pub fn new(series: &str, parameter: f64, value: f64) -> Self {
        Self {
            series: series.to_string(),
            parameter,
            value,
        }
    }
}

impl Refinement {
    fn new(n: usize, max: f64, refined_max: f64) -> Self {
        Self {
            n,
            max,
            refined_n: 2 * n,
            refined_max,
            relative_change: relative_change(max, refined_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub name: String,
    /// One ratio per trial, in trial order.
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    pub refinement: Option<Refinement>,
}

impl Ensemble {
    pub fn new(name: &str, ratios: Vec<f64>) -> Self {
        let max = ratios.iter().copied().fold(0.0, f64::max);
        Self {
            name: name.to_string(),
            median: median(&ratios),
            max,
            ratios,
            refinement: None,
        }
    }

    fn refine_with(mut self, n: usize, refined: &Ensemble) -> Self {
        self.refinement = Some(Refinement::new(n, self.max, refined.max));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            passed: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub surrogate: String,
    pub config: SuiteConfig,
    pub ensembles: Vec<Ensemble>,
    pub trend: Vec<TrendPoint>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(suite: &str, config: &SuiteConfig) -> Self {
        Self {
            suite: suite.to_string(),
            surrogate: SURROGATE.to_string(),
            config: config.clone(),
            ensembles: Vec::new(),
            trend: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn ensemble(&self, name: &str) -> Option<&Ensemble> {
        self.ensembles.iter().find(|e| e.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One check per refined ensemble: relative change of the max under
    /// `n -> 2n` at most `tol`.
    pub fn add_refinement_checks(&mut self, tol: f64) {
        for e in &self.ensembles {
            if let Some(r) = &e.refinement {
                self.checks.push(Check::at_most(
                    &format!("refinement {}", e.name),
                    r.relative_change,
                    tol,
                ));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `|b - a| / |a|`, 0 when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

/// Ratio with `0 / 0 = 0`.
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub(crate) fn trials<T: Send>(
    cfg: &SuiteConfig,
    run: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run(&mut trial_rng(cfg.seed, t)))
        .collect()
}

// ---------------------------------------------------------------------------
// exponent windows

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// `|d/p - d/2| < s < d/min(1,p)`, `r > tau^(s,p)`.
    SingleScale,
    /// `max(|d/p - d/2|, |d/q - d/2|) < s < d/min(1,p,q)`, `r > tau^(s,p,q)`,
    /// `p < inf` unless `p = q = inf`.
    VectorValued,
    /// `|d/q - d/2| < s < d/min(1,q)`, `r > tau^(s,q)`, `q < inf`.
    FInfinity,
    /// As `VectorValued` with `0 < p, q <= inf`.
    TriebelLizorkin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: String,
    pub left: f64,
    pub right: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (left = {}, right = {})",
            self.inequality, self.left, self.right
        )
    }
}

/// Every violated hypothesis of `window`, with the computed sides.
pub fn window_violations(
    window: Window,
    dim: usize,
    p: f64,
    q: f64,
    s: f64,
    r: f64,
) -> Vec<Violation> {
    let d = dim as f64;
    let mut out = Vec::new();
    let mut need = |ok: bool, inequality: &str, left: f64, right: f64| {
        if !ok {
            out.push(Violation {
                inequality: inequality.to_string(),
                left,
                right,
            });
        }
    };
    need(dim == 1 || dim == 2, "d in {1, 2}", d, 2.0);
    need(p > 0.0, "p > 0", p, 0.0);
    need(q > 0.0, "q > 0", q, 0.0);
    need(r > 0.0 && r.is_finite(), "0 < r < inf", r, f64::INFINITY);
    let gap = |x: f64| (d / x - d / 2.0).abs();
    let (lower, lower_text, top_min, upper_text, tau_text) = match window {
        Window::SingleScale => (
            gap(p),
            "|d/p - d/2| < s",
            1f64.min(p),
            "s < d/min(1,p)",
            "r > tau^(s,p)",
        ),
        Window::VectorValued | Window::TriebelLizorkin => (
            gap(p).max(gap(q)),
            "max(|d/p - d/2|, |d/q - d/2|) < s",
            1f64.min(p).min(q),
            "s < d/min(1,p,q)",
            "r > tau^(s,p,q)",
        ),
        Window::FInfinity => (
            gap(q),
            "|d/q - d/2| < s",
            1f64.min(q),
            "s < d/min(1,q)",
            "r > tau^(s,q)",
        ),
    };
    match window {
        Window::VectorValued => need(
            p.is_finite() || q.is_infinite(),
            "p < inf unless p = q = inf",
            p,
            f64::INFINITY,
        ),
        Window::FInfinity => need(q.is_finite(), "q < inf", q, f64::INFINITY),
        _ => {}
    }
    need(lower < s, lower_text, lower, s);
    let upper = d / top_min;
    need(s < upper, upper_text, s, upper);
    let denom = s - (upper - d);
    if denom > 0.0 {
        let tau = d / denom;
        need(r > tau, tau_text, r, tau);
    }
    out
}

fn require(window: Window, cfg: &SuiteConfig) -> Result<()> {
    let v = window_violations(window, cfg.dim, cfg.p, cfg.q, cfg.s, cfg.r);
    if v.is_empty() {
        Ok(())
    } else {
        let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(Error::InvalidExponents(text.join("; ")))
    }
}

fn check_scales(cfg: &SuiteConfig) -> Result<()> {
    if cfg.k_min > cfg.k_max {
        return Err(Error::InvalidConfig(format!(
            "empty scale range [{}, {}]",
            cfg.k_min, cfg.k_max
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// multiplier suites

fn draw_symbol(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Symbol {
    match cfg.multiplier {
        MultiplierModel::Random => random_symbol(cfg.dim, cfg.envelope, rng),
        MultiplierModel::Identity => {
            std::sync::Arc::new(|eta: Point| Complex64::new(psi0_hat(eta), 0.0))
        }
        MultiplierModel::Zero => std::sync::Arc::new(|_| ZERO),
    }
}

fn draw_family(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> MultiplierFamily {
    let sg = default_symbol_grid(cfg.dim);
    match cfg.multiplier {
        MultiplierModel::Random => {
            random_family_independent(sg, cfg.k_min, cfg.k_max, cfg.envelope, rng)
        }
        MultiplierModel::Identity => MultiplierFamily::identity(sg, cfg.k_min, cfg.k_max),
        MultiplierModel::Zero => {
            MultiplierFamily::from_normalized(sg, cfg.k_min, cfg.k_max, |_| ZERO)
        }
    }
}

fn dilated(sigma: &Symbol, k: i32) -> impl Fn(Point) -> Complex64 + '_ {
    let c = 2f64.powi(-k);
    move |xi| sigma([xi[0] * c, xi[1] * c])
}

/// `|| m_k^v * f ||_p / (|| sigma ||_{L^r_s} || f ||_p)` with `m_k = sigma(2^-k .)`.
fn single_scale_ratio(sigma: &Symbol, sigma_norm: f64, f: &SampledFunction, k: i32, p: f64) -> f64 {
    let out = f.apply_multiplier(dilated(sigma, k));
    ratio(out.lp_norm(p), sigma_norm * f.lp_norm(p))
}

fn symbol_norm(sigma: &Symbol, dim: usize, s: f64, r: f64) -> f64 {
    sobolev_norm(
        &SampledFunction::from_fn(default_symbol_grid(dim), |eta| sigma(eta)),
        s,
        r,
    )
}

struct SingleScaleTrial {
    per_scale: Vec<f64>,
    covariance_spread: f64,
}

fn single_scale_trial(
    cfg: &SuiteConfig,
    grid: GridSpec,
    rng: &mut ChaCha8Rng,
) -> Result<SingleScaleTrial> {
    let sigma = draw_symbol(cfg, rng);
    let norm = symbol_norm(&sigma, cfg.dim, cfg.s, cfg.r);
    let mut per_scale = Vec::new();
    let mut base = None;
    for k in cfg.k_min..=cfg.k_max {
        let f = random_band_limited(grid, 2f64.powi(k - 1), rng)?;
        per_scale.push(single_scale_ratio(&sigma, norm, &f, k, cfg.p));
        base.get_or_insert(f);
    }
    // exact dyadic rescaling: same samples on the torus of half-width 2^-j L
    let f0 = base.expect("nonempty scale range");
    let mut covariance: Vec<f64> = Vec::new();
    for j in 0..=5 {
        let g = SampledFunction::new(grid.rescaled(2f64.powi(-j))?, f0.samples().to_vec())?;
        covariance.push(single_scale_ratio(&sigma, norm, &g, cfg.k_min + j, cfg.p));
    }
    let hi = covariance.iter().copied().fold(f64::MIN, f64::max);
    let lo = covariance.iter().copied().fold(f64::MAX, f64::min);
    let covariance_spread = if hi == 0.0 { 0.0 } else { (hi - lo) / hi };
    Ok(SingleScaleTrial {
        per_scale,
        covariance_spread,
    })
}

/// `|| m_k^v ||_1 / (2^{kd(1/p - 1)} || m_k^v ||_p)` for `k = 0..=3` on a torus
/// wide enough to hold `m_k^v` without wrapping; the spread across `k` checks
/// the Bernstein scaling factor.
pub fn bernstein_spread(sigma: &Symbol, p: f64) -> Result<f64> {
    let grid = GridSpec::new(1, 8192, 32.0)?;
    let values: Vec<f64> = (0..=3)
        .map(|k| {
            let kernel = SampledFunction::from_spectrum(Spectrum::from_fn(grid, dilated(sigma, k)));
            let factor = 2f64.powf(k as f64 * (1.0 / p - 1.0));
            ratio(kernel.lp_norm(1.0), factor * kernel.lp_norm(p))
        })
        .collect();
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    Ok(if hi == 0.0 { 0.0 } else { (hi - lo) / hi })
}

/// Tolerance of the exact rescaling check.
pub const COVARIANCE_TOL: f64 = 1e-6;
/// Tolerance of the Bernstein scaling micro-check.
pub const BERNSTEIN_TOL: f64 = 0.05;

/// Single-scale estimate: for each trial one random normalized symbol `sigma`,
/// `m_k = sigma(2^-k .)`, and independent `f_k` with spectrum in
/// `|xi| <= 2^{k-1}`. The trial ratio is the max over `k`.
pub fn run_single_scale_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    require(Window::SingleScale, cfg)?;
    check_scales(cfg)?;
    let run = |c: &SuiteConfig| -> Result<Vec<SingleScaleTrial>> {
        let grid = c.grid()?;
        trials(c, |rng| single_scale_trial(c, grid, rng))
    };
    let coarse = run(cfg)?;
    let fine = run(&cfg.refined())?;
    let maxima = |ts: &[SingleScaleTrial]| -> Vec<f64> {
        ts.iter()
            .map(|t| t.per_scale.iter().copied().fold(0.0, f64::max))
            .collect()
    };
    let mut report = ExperimentReport::new("lemma61", cfg);
    let refined = Ensemble::new("ratio", maxima(&fine));
    report
        .ensembles
        .push(Ensemble::new("ratio", maxima(&coarse)).refine_with(cfg.n, &refined));
    for (i, k) in (cfg.k_min..=cfg.k_max).enumerate() {
        let v = coarse.iter().map(|t| t.per_scale[i]).fold(0.0, f64::max);
        report.trend.push(TrendPoint::new("scale", k as f64, v));
    }
    let spread = coarse
        .iter()
        .map(|t| t.covariance_spread)
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("scale covariance", spread, COVARIANCE_TOL));
    if cfg.dim == 1 && cfg.trials > 0 {
        let sigma = draw_symbol(cfg, &mut trial_rng(cfg.seed, 0));
        report.checks.push(Check::at_most(
            "bernstein scaling",
            bernstein_spread(&sigma, cfg.p)?,
            BERNSTEIN_TOL,
        ));
    }
    report.add_refinement_checks(REFINEMENT_TOL);
    Ok(report)
}

struct FieldTrial {
    functional: f64,
    field: crate::spaces::VectorField,
    image: crate::spaces::VectorField,
}

fn field_trial(cfg: &SuiteConfig, grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<FieldTrial> {
    let family = draw_family(cfg, rng);
    let field = random_field(grid, cfg.k_min, cfg.k_max, DEFAULT_BAND_CONSTANT, rng)?;
    let image = apply_family(&family, &field)?;
    Ok(FieldTrial {
        functional: multiplier_functional(&family, cfg.s, cfg.r)?,
        field,
        image,
    })
}

/// Vector-valued estimate in `L^p(l^q)`: independent random symbols per scale,
/// `f_k` with spectrum in `|xi| <= 2^{k-1}`, normalizer `L^r_s[m]`.
pub fn run_vector_valued_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    require(Window::VectorValued, cfg)?;
    check_scales(cfg)?;
    let run = |c: &SuiteConfig| -> Result<Vec<f64>> {
        let grid = c.grid()?;
        trials(c, |rng| {
            let t = field_trial(c, grid, rng)?;
            let num = lp_lq_norm(&t.image, c.p, c.q)?;
            Ok(ratio(num, t.functional * lp_lq_norm(&t.field, c.p, c.q)?))
        })
    };
    let coarse = Ensemble::new("ratio", run(cfg)?);
    let fine = Ensemble::new("ratio", run(&cfg.refined())?);
    let mut report = ExperimentReport::new("theorem11", cfg);
    report.trend = vec![
        TrendPoint::new("n", cfg.n as f64, coarse.max),
        TrendPoint::new("n", 2.0 * cfg.n as f64, fine.max),
    ];
    report.ensembles.push(coarse.refine_with(cfg.n, &fine));
    report.add_refinement_checks(REFINEMENT_TOL);
    Ok(report)
}

/// Spread `(max - min) / max` of the per-`mu` ensemble maxima.
pub const MU_SPREAD_TOL: f64 = 0.15;

/// `F_inf` estimate: ratio of the `mu`-localized `F^{0,q}_inf` norms, swept over
/// `cfg.mu`; the trial ratio is the max over `mu`.
pub fn run_finfty_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    require(Window::FInfinity, cfg)?;
    check_scales(cfg)?;
    if cfg.mu.is_empty() {
        return Err(Error::InvalidConfig("mu sweep is empty".into()));
    }
    let run = |c: &SuiteConfig| -> Result<Vec<Vec<f64>>> {
        let grid = c.grid()?;
        trials(c, |rng| {
            let t = field_trial(c, grid, rng)?;
            c.mu.iter()
                .map(|&mu| {
                    let num = finfty_q_norm(&t.image, c.q, mu)?;
                    Ok(ratio(num, t.functional * finfty_q_norm(&t.field, c.q, mu)?))
                })
                .collect()
        })
    };
    let coarse = run(cfg)?;
    let fine = run(&cfg.refined())?;
    let over_mu = |ts: &[Vec<f64>]| -> Vec<f64> {
        ts.iter()
            .map(|v| v.iter().copied().fold(0.0, f64::max))
            .collect()
    };
    let mut report = ExperimentReport::new("theorem12", cfg);
    let refined = Ensemble::new("ratio", over_mu(&fine));
    report
        .ensembles
        .push(Ensemble::new("ratio", over_mu(&coarse)).refine_with(cfg.n, &refined));
    for (i, mu) in cfg.mu.iter().enumerate() {
        let v = coarse.iter().map(|t| t[i]).fold(0.0, f64::max);
        report.trend.push(TrendPoint::new("mu", *mu as f64, v));
    }
    if cfg.trials > 0 {
        let hi = report
            .trend
            .iter()
            .map(|t| t.value)
            .fold(f64::MIN, f64::max);
        let lo = report
            .trend
            .iter()
            .map(|t| t.value)
            .fold(f64::MAX, f64::min);
        let spread = if hi == 0.0 { 0.0 } else { (hi - lo) / hi };
        report
            .checks
            .push(Check::at_most("mu spread", spread, MU_SPREAD_TOL));
    }
    report.add_refinement_checks(REFINEMENT_TOL);
    Ok(report)
}

/// `|| {2^{alpha k} phi_k * f}_{k_min <= k <= k_max} ||_{L^p(l^q)}`.
pub fn triebel_lizorkin_norm(
    f: &SampledFunction,
    k_min: i32,
    k_max: i32,
    alpha: f64,
    p: f64,
    q: f64,
) -> Result<f64> {
    let family = build_phi0(*f.grid(), k_min, k_max)?;
    let pieces = (k_min..=k_max)
        .map(|k| {
            Ok(family
                .piece(f, k)?
                .scaled(Complex64::new(2f64.powf(alpha * k as f64), 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    lp_lq_of(&pieces, p, q)
}

/// Upper scale used by the tail check: `2 k_max`, or `k_max + 1` when
/// `k_max <= 0`.
pub fn extended_k_max(k_max: i32) -> i32 {
    if k_max >= 1 {
        2 * k_max
    } else {
        k_max + 1
    }
}

/// Relative change allowed when the scale range is extended.
pub const TAIL_TOL: f64 = 0.01;

/// Single multiplier `m(xi) = (a + b sgn xi_1) |xi|^{i beta}` acting on
/// `F^{alpha,q}_p`, normalized by `sup_l || m(2^l .) phi^ ||_{L^r_s}`.
pub fn run_homogeneous_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    require(Window::TriebelLizorkin, cfg)?;
    check_scales(cfg)?;
    let ext = extended_k_max(cfg.k_max);
    let run = |c: &SuiteConfig| -> Result<Vec<(f64, f64)>> {
        let grid = c.grid()?;
        trials(c, |rng| {
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let beta: f64 = rng.random_range(-0.5..0.5);
            let m = move |xi: Point| {
                let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                if r == 0.0 {
                    return ZERO;
                }
                (a + b * xi[0].signum()) * Complex64::from_polar(1.0, beta * r.ln())
            };
            let raw = random_band_limited(grid, 2f64.powi(c.k_max), rng)?;
            let low = 2f64.powi(c.k_min);
            let f = raw.apply_multiplier(|xi| {
                if (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() < low {
                    ZERO
                } else {
                    Complex64::new(1.0, 0.0)
                }
            });
            let norm = localized_hormander_norm(
                &m,
                default_symbol_grid(c.dim),
                c.k_min..=c.k_max,
                c.s,
                c.r,
            )?;
            let tf = f.apply_multiplier(m);
            let lhs = triebel_lizorkin_norm(&tf, c.k_min, c.k_max, c.alpha, c.p, c.q)?;
            let rhs = triebel_lizorkin_norm(&f, c.k_min, c.k_max, c.alpha, c.p, c.q)?;
            let wide = triebel_lizorkin_norm(&f, c.k_min, ext, c.alpha, c.p, c.q)?;
            Ok((ratio(lhs, norm * rhs), relative_change(rhs, wide)))
        })
    };
    let coarse = run(cfg)?;
    let fine = run(&cfg.refined())?;
    let mut report = ExperimentReport::new("corollary13", cfg);
    let refined = Ensemble::new("ratio", fine.iter().map(|t| t.0).collect());
    report.ensembles.push(
        Ensemble::new("ratio", coarse.iter().map(|t| t.0).collect()).refine_with(cfg.n, &refined),
    );
    let tail = coarse.iter().map(|t| t.1).fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("tail insensitivity", tail, TAIL_TOL));
    report.add_refinement_checks(REFINEMENT_TOL);
    Ok(report)
}

// ---------------------------------------------------------------------------
// maximal inequalities

/// Fefferman-Stein, Peetre and `F_inf`-Peetre ratios on random fields. The
/// power is `r = min(p,q)/2`, the Peetre exponent `d/min(p,q) + 1/2`, and
/// `d/q + 1/2` for the `F_inf` version.
pub fn run_maximal_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    check_scales(cfg)?;
    if !(cfg.p > 0.0 && cfg.q > 0.0) {
        return Err(Error::InvalidExponents(format!(
            "need p, q > 0, got p = {}, q = {}",
            cfg.p, cfg.q
        )));
    }
    let d = cfg.dim as f64;
    let power = 0.5 * cfg.p.min(cfg.q);
    let sigma = d / cfg.p.min(cfg.q) + 0.5;
    let sigma_q = d / cfg.q + 0.5;
    let finite_q = cfg.q.is_finite();
    let window = MaximalConfig::default();
    let run = |c: &SuiteConfig| -> Result<Vec<[f64; 3]>> {
        let grid = c.grid()?;
        trials(c, |rng| {
            let field = random_field(grid, c.k_min, c.k_max, DEFAULT_BAND_CONSTANT, rng)?;
            let base = lp_lq_norm(&field, c.p, c.q)?;
            let fs: Vec<SampledFunction> = field
                .iter()
                .map(|(_, f)| power_maximal(f, power, &window))
                .collect::<Result<_>>()?;
            let peetre: Vec<SampledFunction> = field
                .iter()
                .map(|(k, f)| peetre_maximal(f, k, sigma))
                .collect::<Result<_>>()?;
            let mut finf = 0.0f64;
            if finite_q {
                let pq: Vec<SampledFunction> = field
                    .iter()
                    .map(|(k, f)| peetre_maximal(f, k, sigma_q))
                    .collect::<Result<_>>()?;
                for &mu in &c.mu {
                    let num = finfty_of(&grid, c.k_min, &pq, c.q, mu)?;
                    finf = finf.max(ratio(num, finfty_q_norm(&field, c.q, mu)?));
                }
            }
            Ok([
                ratio(lp_lq_of(&fs, c.p, c.q)?, base),
                ratio(lp_lq_of(&peetre, c.p, c.q)?, base),
                finf,
            ])
        })
    };
    let coarse = run(cfg)?;
    let fine = run(&cfg.refined())?;
    let mut report = ExperimentReport::new("maximal", cfg);
    let names = ["fefferman-stein", "peetre", "peetre f-infinity"];
    for (i, name) in names.iter().enumerate() {
        if i == 2 && !finite_q {
            continue;
        }
        let refined = Ensemble::new(name, fine.iter().map(|t| t[i]).collect());
        report.ensembles.push(
            Ensemble::new(name, coarse.iter().map(|t| t[i]).collect()).refine_with(cfg.n, &refined),
        );
    }
    report.add_refinement_checks(REFINEMENT_TOL);
    Ok(report)
}

// ---------------------------------------------------------------------------
// atoms

/// Number of nonzero coefficients in the random sequences of the atom suite.
pub const ATOM_ENTRIES: usize = 20;

/// Random sequence with `ATOM_ENTRIES` (or every available) uniform entries on cubes of scales
/// `k_min..=k_max`, which must be resolvable on `grid`. The draw does not
/// depend on `n`.
pub fn random_coefficients(
    grid: &GridSpec,
    k_min: i32,
    k_max: i32,
    rng: &mut ChaCha8Rng,
) -> Result<CubeCoefficients> {
    let mut coeffs = CubeCoefficients::for_grid(grid)?;
    let j = coeffs.log2_half_width();
    let finest = -grid
        .log2_spacing()
        .ok_or_else(|| Error::GridIncompatible("grid spacing is not a power of two".into()))?;
    if k_min < -j || k_max > finest || k_min > k_max {
        return Err(Error::ScaleOutOfRange {
            k: if k_min < -j { k_min } else { k_max },
            min: -j,
            max: finest,
        });
    }
    let available: f64 = (k_min..=k_max)
        .map(|k| 2f64.powi((k + j + 1) * grid.dim() as i32))
        .sum();
    let target = ATOM_ENTRIES.min(available as usize);
    while coeffs.len() < target {
        let k = rng.random_range(k_min..=k_max);
        let side = 1i64 << (k + j + 1);
        let mut l = [0i64; 2];
        for slot in l.iter_mut().take(grid.dim()) {
            *slot = rng.random_range(-side / 2..side / 2);
        }
        let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        coeffs.insert(DyadicCube::new(grid.dim(), k, l), v)?;
    }
    Ok(coeffs)
}

/// Decomposes random sequences into `inf`-atoms; checks exact reconstruction
/// and atom normalization, and records `(sum |lambda_j|^p)^{1/p} / ||b||`.
pub fn run_atoms_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    if !(cfg.p > 0.0 && cfg.p <= 1.0 && cfg.q >= cfg.p) {
        return Err(Error::InvalidExponents(format!(
            "need 0 < p <= 1 and q >= p, got p = {}, q = {}",
            cfg.p, cfg.q
        )));
    }
    let run = |c: &SuiteConfig| -> Result<Vec<(f64, bool)>> {
        let grid = c.grid()?;
        trials(c, |rng| {
            let b = random_coefficients(&grid, c.k_min, c.k_max, rng)?;
            let j = b.log2_half_width();
            let terms = decompose_atoms(&b, c.p, c.q)?;
            let rebuilt = reconstruct(&terms, c.dim, j)?;
            let exact = rebuilt.support().count() == b.support().count()
                && b.support().all(|(q, v)| rebuilt.get(q) == *v)
                && terms.iter().all(|t| verify_atom(&t.atom));
            Ok((
                ratio(lambda_lp(&terms, c.p), fpq_discrete_norm(&b, c.p, c.q)?),
                exact,
            ))
        })
    };
    let coarse = run(cfg)?;
    let fine = run(&cfg.refined())?;
    let mut report = ExperimentReport::new("atoms", cfg);
    let refined = Ensemble::new("lambda ratio", fine.iter().map(|t| t.0).collect());
    report.ensembles.push(
        Ensemble::new("lambda ratio", coarse.iter().map(|t| t.0).collect())
            .refine_with(cfg.n, &refined),
    );
    let failures = coarse.iter().chain(&fine).filter(|t| !t.1).count();
    report.checks.push(Check::at_most(
        "reconstruction failures",
        failures as f64,
        0.0,
    ));
    report.add_refinement_checks(ATOM_REFINEMENT_TOL);
    Ok(report)
}

// ---------------------------------------------------------------------------
// compact-support embedding

/// `|| m ||_{L^{r0}_s} / (B^{d/r0 - d/r1} || m ||_{L^{r1}_s})` for
/// `m = sigma(./B)` with a random normalized `sigma`, supported in `|x| <= B`.
/// Uses `r0 = cfg.r` on the torus of half-width 16.
pub fn run_embedding_suite(cfg: &SuiteConfig, r1: f64, radii: &[f64]) -> Result<ExperimentReport> {
    let r0 = cfg.r;
    if !(1.0 < r0 && r0 < r1 && r1.is_finite()) {
        return Err(Error::InvalidExponents(format!(
            "need 1 < r0 < r1 < inf, got r0 = {r0}, r1 = {r1}"
        )));
    }
    if radii.iter().any(|b| !(*b > 0.0 && *b <= 8.0)) {
        return Err(Error::InvalidConfig(
            "support radii must lie in (0, 8]".into(),
        ));
    }
    let d = cfg.dim as f64;
    let grid = GridSpec::new(cfg.dim, cfg.n, 16.0)?;
    let per_trial = trials(cfg, |rng| {
        let sigma = random_symbol(cfg.dim, cfg.envelope, rng);
        Ok(radii
            .iter()
            .map(|&b| {
                let m = SampledFunction::from_fn(grid, |x| sigma([x[0] / b, x[1] / b]));
                let num = sobolev_norm(&m, cfg.s, r0);
                ratio(num, b.powf(d / r0 - d / r1) * sobolev_norm(&m, cfg.s, r1))
            })
            .collect::<Vec<f64>>())
    })?;
    let mut report = ExperimentReport::new("embedding", cfg);
    for (i, b) in radii.iter().enumerate() {
        let e = Ensemble::new(
            &format!("B = {b}"),
            per_trial.iter().map(|t| t[i]).collect(),
        );
        report
            .trend
            .push(TrendPoint::new("support radius", *b, e.max));
        report.ensembles.push(e);
    }
    if let Some(first) = report.trend.first().map(|t| t.value).filter(|v| *v > 0.0) {
        let spread = report
            .trend
            .iter()
            .map(|t| (t.value / first - 1.0).abs())
            .fold(0.0, f64::max);
        report
            .checks
            .push(Check::at_most("radius spread", spread, EMBEDDING_TOL));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> SuiteConfig {
        SuiteConfig {
            trials,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn windows_report_each_violation() {
        assert!(
            window_violations(Window::VectorValued, 1, 2.0, 2.0, 0.6, 1.0 / 0.6 + 0.1).is_empty()
        );
        let v = window_violations(Window::VectorValued, 1, 1.0, 1.0, 0.6, 1.0 / 0.6);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].inequality, "r > tau^(s,p,q)");
        // q = inf, p = 1/2: lower edge at max(d/p - d/2, d/2) = 3/2
        for (s, expect) in [(1.49, true), (1.5, true), (1.51, false)] {
            let v = window_violations(Window::VectorValued, 1, 0.5, f64::INFINITY, s, 10.0);
            assert_eq!(
                v.iter().any(|x| x.inequality.starts_with("max(")),
                expect,
                "s = {s}"
            );
        }
        assert!(
            !window_violations(Window::VectorValued, 1, f64::INFINITY, 2.0, 0.75, 2.0).is_empty()
        );
        assert!(window_violations(
            Window::VectorValued,
            1,
            f64::INFINITY,
            f64::INFINITY,
            0.75,
            2.0
        )
        .is_empty());
        assert!(!window_violations(Window::FInfinity, 1, 1.0, f64::INFINITY, 0.75, 2.0).is_empty());
        let v = window_violations(Window::SingleScale, 1, 0.8, 2.0, 0.7, 2.0);
        assert_eq!(v[0].inequality, "|d/p - d/2| < s");
        assert_eq!((v[0].left, v[0].right), (0.75, 0.7));
    }

    #[test]
    fn identity_and_zero_multipliers() {
        let cfg = SuiteConfig {
            multiplier: MultiplierModel::Identity,
            ..small(3)
        };
        let report = run_single_scale_suite(&cfg).unwrap();
        let expected = 1.0 / symbol_norm(&draw_symbol(&cfg, &mut trial_rng(0, 0)), 1, cfg.s, cfg.r);
        for r in &report.ensembles[0].ratios {
            assert!((r - expected).abs() < 1e-12 * expected);
        }
        let report = run_vector_valued_suite(&cfg).unwrap();
        for r in &report.ensembles[0].ratios {
            assert!((r - expected).abs() < 1e-12 * expected);
        }
        let zero = SuiteConfig {
            multiplier: MultiplierModel::Zero,
            ..small(2)
        };
        assert!(run_single_scale_suite(&zero).unwrap().ensembles[0]
            .ratios
            .iter()
            .all(|r| *r == 0.0));
    }

    #[test]
    fn single_scale_report_shape() {
        let cfg = SuiteConfig {
            k_min: 2,
            k_max: 2,
            ..small(4)
        };
        let a = run_single_scale_suite(&cfg).unwrap();
        let b = run_vector_valued_suite(&SuiteConfig { q: 1.0, ..cfg }).unwrap();
        for (x, y) in a.ensembles[0].ratios.iter().zip(&b.ensembles[0].ratios) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn single_scale_checks_pass() {
        let report = run_single_scale_suite(&SuiteConfig {
            p: 0.8,
            s: 1.0,
            ..small(4)
        })
        .unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(report.trend.len(), 4);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(3);
        let a = serde_json::to_string(
            &run_finfty_suite(&SuiteConfig {
                q: 2.0,
                ..cfg.clone()
            })
            .unwrap(),
        )
        .unwrap();
        let b = serde_json::to_string(&run_finfty_suite(&SuiteConfig { q: 2.0, ..cfg }).unwrap())
            .unwrap();
        assert_eq!(a, b);
        let empty = run_vector_valued_suite(&small(0)).unwrap();
        assert!(empty.ensembles[0].ratios.is_empty());
        assert_eq!(empty.ensembles[0].max, 0.0);
    }

    #[test]
    fn invalid_windows_are_refused() {
        let err = run_vector_valued_suite(&SuiteConfig {
            s: 0.3,
            p: 0.5,
            ..small(1)
        })
        .unwrap_err();
        assert!(err
            .to_string()
            .contains("max(|d/p - d/2|, |d/q - d/2|) < s"));
        assert!(run_finfty_suite(&SuiteConfig {
            q: f64::INFINITY,
            ..small(1)
        })
        .is_err());
    }

    #[test]
    fn exponent_serde_roundtrip() {
        let cfg = SuiteConfig {
            q: f64::INFINITY,
            ..SuiteConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"q\":\"inf\""));
        let back: SuiteConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn atom_suite_reconstructs() {
        let cfg = SuiteConfig {
            n: 64,
            p: 0.7,
            q: 2.0,
            ..small(5)
        };
        let report = run_atoms_suite(&cfg).unwrap();
        assert!(report.passed());
        assert!(report.ensembles[0].max > 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), 0.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
