//! The sharpness example `H^(t,gamma)`, `eta`, `K = H * eta`, `m_k = K_k^`, and
//! the radial integrals that separate a finite multiplier functional from a
//! kernel of infinite `L^min(1,p,q)` norm.
//!
//! Divergence cannot be observed directly, so both integrals are tracked as
//! increments over doublings of the truncation radius. Increments behave like
//! `v^-a` in a logarithmic variable `v`; the sum over doublings is finite iff
//! `a > 1`, and `a` is fitted by least squares.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::bump;
use crate::quadrature::adaptive_simpson;
use crate::spectral::{
    band_project, convolve, is_band_limited, GridSpec, SampledFunction, Spectrum, ZERO,
};

/// Relative tolerance of every radial quadrature.
pub const QUADRATURE_TOL: f64 = 1e-9;
/// `g^` falls from 1 to 0 across this shell, so `eta = |g|^2` has spectrum in
/// `|xi| <= 1/10`.
pub const ETA_TRANSITION: (f64, f64) = (1.0 / 40.0, 1.0 / 20.0);
/// Frequencies above this are below the resolvable floor of the grid
/// transforms used for the decay check.
pub const DECAY_WINDOW: f64 = 16.0;
/// Allowed growth of the fitted decay constant on the refined grid.
pub const DECAY_SLACK: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
}

fn check_window(dim: usize, p: f64, q: f64, s: f64) -> Result<(f64, f64)> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidConfig(format!(
            "dimension {dim} is not 1 or 2"
        )));
    }
    if !(p > 0.0 && q > 0.0) || p.is_nan() || q.is_nan() {
        return Err(Error::InvalidExponents(format!(
            "need p > 0 and q > 0, got p = {p}, q = {q}"
        )));
    }
    let d = dim as f64;
    let t = d / 1f64.min(p).min(q);
    if !(t - d < s && s < t) {
        return Err(Error::InvalidExponents(format!(
            "need d/min(1,p,q) - d < s < d/min(1,p,q), got {} < {s} < {t}",
            t - d
        )));
    }
    Ok((t, d / (s - (t - d))))
}

impl CounterexampleParams {
    /// `t = d / min(1,p,q)`; requires `d/min(1,p,q) - d < s < d/min(1,p,q)` and
    /// `2/tau^(s,p,q) < gamma < 2/min(1,p,q)`.
    pub fn new(dim: usize, p: f64, q: f64, s: f64, gamma: f64) -> Result<Self> {
        let (t, tau) = check_window(dim, p, q, s)?;
        let m = 1f64.min(p).min(q);
        if !(2.0 / tau < gamma && gamma < 2.0 / m) {
            return Err(Error::InvalidExponents(format!(
                "need 2/tau < gamma < 2/min(1,p,q), got {} < {gamma} < {}",
                2.0 / tau,
                2.0 / m
            )));
        }
        Ok(Self {
            dim,
            p,
            q,
            s,
            t,
            gamma,
        })
    }

    /// `gamma` at the midpoint of its window.
    pub fn midpoint(dim: usize, p: f64, q: f64, s: f64) -> Result<Self> {
        let (_, tau) = check_window(dim, p, q, s)?;
        let m = 1f64.min(p).min(q);
        Self::new(dim, p, q, s, 0.5 * (2.0 / tau + 2.0 / m))
    }

    pub fn min_1pq(&self) -> f64 {
        1f64.min(self.p).min(self.q)
    }

    pub fn tau(&self) -> f64 {
        let d = self.dim as f64;
        d / (self.s - (self.t - d))
    }

    /// `tau gamma / 2`, above 1.
    pub fn finiteness_exponent(&self) -> f64 {
        self.tau() * self.gamma / 2.0
    }

    /// `gamma min(1,p,q) / 2`, below 1.
    pub fn blowup_exponent(&self) -> f64 {
        self.gamma * self.min_1pq() / 2.0
    }
}

/// `H^(t,gamma)` at distance `r` from the origin.
pub fn h_value(t: f64, gamma: f64, r: f64) -> f64 {
    let w = 4.0 * PI * PI * r * r;
    (1.0 + w).powf(-t / 2.0) * (1.0 + w.ln_1p()).powf(-gamma / 2.0)
}

fn check_dim(params: &CounterexampleParams, grid: &GridSpec) -> Result<()> {
    if params.dim != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "parameters are {}-dimensional, grid is {}-dimensional",
            params.dim,
            grid.dim()
        )));
    }
    Ok(())
}

fn h_with(t: f64, gamma: f64, grid: GridSpec) -> SampledFunction {
    SampledFunction::from_real_fn(grid, |x| {
        h_value(t, gamma, (x[0] * x[0] + x[1] * x[1]).sqrt())
    })
}

/// `H^(t,gamma)` sampled on the fundamental domain of the torus.
pub fn h_function(params: &CounterexampleParams, grid: GridSpec) -> Result<SampledFunction> {
    check_dim(params, &grid)?;
    Ok(h_with(params.t, params.gamma, grid))
}

/// Radius on which `eta` is bounded below: 1/100 in 1-d, 1/8 in 2-d.
pub fn eta_flat_radius(dim: usize) -> f64 {
    if dim == 1 {
        0.01
    } else {
        0.125
    }
}

/// `eta = |g|^2` with `g^(xi) = bump(|xi|, 1/40, 1/20)` on the frequency
/// lattice. The spectrum of `eta` is the exact lattice autocorrelation of
/// `g^`, so its support in `|xi| <= 1/10` holds exactly.
pub fn build_eta(grid: GridSpec) -> Result<SampledFunction> {
    let radius = eta_flat_radius(grid.dim());
    if grid.spacing() > radius {
        return Err(Error::Resolution(format!(
            "grid spacing {} does not resolve the radius {radius}",
            grid.spacing()
        )));
    }
    let period = 2.0 * grid.half_width();
    if period * ETA_TRANSITION.1 <= 1.0 {
        return Err(Error::Resolution(format!(
            "frequency spacing {} does not resolve the support radius {}",
            1.0 / period,
            ETA_TRANSITION.1
        )));
    }
    let reach = (ETA_TRANSITION.1 * period).ceil() as i64;
    let outer = if grid.dim() == 1 {
        0..=0
    } else {
        -reach..=reach
    };
    let mut g_hat: Vec<([i64; 2], f64)> = Vec::new();
    for a in outer {
        for b in -reach..=reach {
            let m = if grid.dim() == 1 { [b, 0] } else { [a, b] };
            let r = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt() / period;
            let v = bump(r, ETA_TRANSITION.0, ETA_TRANSITION.1);
            if v > 0.0 {
                g_hat.push((m, v));
            }
        }
    }
    let slot = |m: [i64; 2]| {
        grid.freq_slot(m).ok_or(Error::Aliasing {
            radius: 0.1,
            nyquist: grid.nyquist(),
        })
    };
    let mut values = vec![ZERO; grid.len()];
    for (m, v) in &g_hat {
        values[slot(*m)?] = Complex64::new(*v, 0.0);
    }
    let g = SampledFunction::from_spectrum(Spectrum::new(grid, values)?);
    let samples = g
        .samples()
        .iter()
        .map(|z| Complex64::new(z.norm_sqr(), 0.0))
        .collect();

    let volume = period.powi(grid.dim() as i32);
    let mut eta_hat = vec![ZERO; grid.len()];
    for (ma, va) in &g_hat {
        for (mb, vb) in &g_hat {
            eta_hat[slot([ma[0] - mb[0], ma[1] - mb[1]])?] += va * vb / volume;
        }
    }
    Ok(SampledFunction::from_parts(
        samples,
        Spectrum::new(grid, eta_hat)?,
    ))
}

/// `K = H * eta` by spectral convolution on the torus.
pub fn build_k(params: &CounterexampleParams, grid: GridSpec) -> Result<SampledFunction> {
    let h = h_function(params, grid)?;
    convolve(&h, &build_eta(grid)?)
}

/// `m_k = K_k^` with `K_k(x) = 2^{kd} K(2^k x)`, on the torus of half-width
/// `2^-k L`. Its lattice frequencies are `2^k` times those of `grid` and
/// `m_k(2^k xi) = K^(xi)` entry by entry.
pub fn build_mk(params: &CounterexampleParams, grid: GridSpec, k: i32) -> Result<Spectrum> {
    let kernel = build_k(params, grid)?;
    Spectrum::new(
        grid.rescaled(2f64.powi(-k))?,
        kernel.spectrum().values().to_vec(),
    )
}

/// The kernel `K_k` itself, sampled on the rescaled torus.
pub fn build_kk(params: &CounterexampleParams, grid: GridSpec, k: i32) -> Result<SampledFunction> {
    Ok(SampledFunction::from_spectrum(build_mk(params, grid, k)?))
}

/// `|| K^ ||_{L^r_s}` evaluated on the kernel side:
/// `(I - Delta)^{s/2} K^ = ((1 + 4 pi^2 |x|^2)^{s/2} K)^`.
pub fn symbol_sobolev_norm(kernel: &SampledFunction, s: f64, r: f64) -> f64 {
    let weighted = SampledFunction::from_fn(*kernel.grid(), |x| {
        Complex64::new(
            (1.0 + 4.0 * PI * PI * (x[0] * x[0] + x[1] * x[1])).powf(s / 2.0),
            0.0,
        )
    });
    let samples = weighted
        .samples()
        .iter()
        .zip(kernel.samples())
        .map(|(w, k)| w * k)
        .collect();
    SampledFunction::new(*kernel.grid(), samples)
        .expect("same grid")
        .spectrum()
        .lp_norm(r)
}

/// `\int_1^R u^-1 (1 + 2 ln u)^-a du` by quadrature in `ln u`.
pub fn log_integral(a: f64, radius: f64) -> f64 {
    log_increment(a, 1.0, radius)
}

fn log_increment(a: f64, from: f64, to: f64) -> f64 {
    adaptive_simpson(
        |t| (1.0 + 2.0 * t).powf(-a),
        from.ln(),
        to.ln(),
        QUADRATURE_TOL,
    )
}

/// Antiderivative of [`log_integral`].
pub fn log_integral_closed_form(a: f64, radius: f64) -> f64 {
    let v = 1.0 + 2.0 * radius.ln();
    if a == 1.0 {
        0.5 * v.ln()
    } else {
        0.5 * (1.0 - v.powf(1.0 - a)) / (a - 1.0)
    }
}

fn sphere_area(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

fn blowup_density(dim: usize, b: f64, r: f64) -> f64 {
    let w = 4.0 * PI * PI * r * r;
    sphere_area(dim)
        * r.powi(dim as i32 - 1)
        * (1.0 + w).powf(-(dim as f64) / 2.0)
        * (1.0 + w.ln_1p()).powf(-b)
}

fn blowup_increment(dim: usize, b: f64, from: f64, to: f64) -> f64 {
    let mut total = 0.0;
    if from < 1.0 {
        total += adaptive_simpson(
            |r| blowup_density(dim, b, r),
            from,
            to.min(1.0),
            QUADRATURE_TOL,
        );
    }
    if to > 1.0 {
        let lo = from.max(1.0).ln();
        total += adaptive_simpson(
            |t| blowup_density(dim, b, t.exp()) * t.exp(),
            lo,
            to.ln(),
            QUADRATURE_TOL,
        );
    }
    total
}

/// `\int_{|x| <= R} (1 + 4 pi^2 |x|^2)^{-d/2} (1 + ln(1 + 4 pi^2 |x|^2))^-b dx`.
pub fn blowup_integral(dim: usize, b: f64, radius: f64) -> f64 {
    blowup_increment(dim, b, 0.0, radius)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridValue {
    pub half_width: f64,
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub label: String,
    pub exponent: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `value(2R) - value(R)` for each listed `R`.
    pub increments: Vec<f64>,
    /// Fitted `a` in `increment ~ v^-a`.
    pub decay_exponent: Option<f64>,
    /// Whether the increments are summable over doublings (`a > 1`).
    pub summable: Option<bool>,
    pub grid: Vec<GridValue>,
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn trend(
    label: &str,
    exponent: f64,
    radii: &[f64],
    value: impl Fn(f64) -> f64,
    increment: impl Fn(f64) -> f64,
    log_variable: impl Fn(f64) -> f64,
) -> TrendReport {
    let values: Vec<f64> = radii.iter().map(|&r| value(r)).collect();
    let increments: Vec<f64> = radii.iter().map(|&r| increment(r)).collect();
    let points: Vec<(f64, f64)> = radii
        .iter()
        .zip(&increments)
        .filter(|(r, _)| **r > 1.0)
        .map(|(r, inc)| (log_variable(*r), *inc))
        .collect();
    let decay_exponent = loglog_slope(&points).map(|s| -s);
    TrendReport {
        label: label.to_string(),
        exponent,
        radii: radii.to_vec(),
        values,
        increments,
        decay_exponent,
        summable: decay_exponent.map(|a| a > 1.0),
        grid: Vec::new(),
    }
}

/// Trend of [`log_integral`] with exponent `a`; the log variable is
/// `1 + 2 ln R`.
pub fn log_integral_trend(a: f64, radii: &[f64]) -> TrendReport {
    trend(
        "log integral",
        a,
        radii,
        |r| log_integral(a, r),
        |r| log_increment(a, r, 2.0 * r),
        |r| 1.0 + 2.0 * r.ln(),
    )
}

/// Trend of [`blowup_integral`] with exponent `b`; the log variable is
/// `1 + ln(1 + 4 pi^2 R^2)`.
pub fn blowup_trend(dim: usize, b: f64, radii: &[f64]) -> TrendReport {
    trend(
        "kernel integral",
        b,
        radii,
        |r| blowup_integral(dim, b, r),
        |r| blowup_increment(dim, b, r, 2.0 * r),
        |r| 1.0 + (4.0 * PI * PI * r * r).ln_1p(),
    )
}

/// Radial proxy for `|| m_k(2^k .) ||_{L^tau_s}` with exponent `tau gamma / 2`,
/// together with the kernel-side Sobolev norm of `K^` on each grid.
pub fn check_l_finiteness(
    params: &CounterexampleParams,
    radii: &[f64],
    grids: &[GridSpec],
) -> Result<TrendReport> {
    let mut report = log_integral_trend(params.finiteness_exponent(), radii);
    report.label = "multiplier functional".into();
    for grid in grids {
        let kernel = build_k(params, *grid)?;
        report.grid.push(GridValue {
            half_width: grid.half_width(),
            n: grid.n(),
            value: symbol_sobolev_norm(&kernel, params.s, params.tau()),
        });
    }
    Ok(report)
}

/// Radial `L^min(1,p,q)` integral of `H^(t,gamma)` with exponent
/// `gamma min(1,p,q) / 2`, together with the grid norm of `H` on each torus.
pub fn check_blowup(
    params: &CounterexampleParams,
    radii: &[f64],
    grids: &[GridSpec],
) -> Result<TrendReport> {
    let mut report = blowup_trend(params.dim, params.blowup_exponent(), radii);
    report.label = "kernel norm".into();
    let m = params.min_1pq();
    for grid in grids {
        let h = h_function(params, *grid)?;
        report.grid.push(GridValue {
            half_width: grid.half_width(),
            n: grid.n(),
            value: h.lp_norm(m).powf(m),
        });
    }
    Ok(report)
}

/// Bound shape for `|(I - Delta)^{s/2} H^(xi)|`.
pub fn decay_bound(params: &CounterexampleParams, xi: f64) -> f64 {
    let d = params.dim as f64;
    if xi <= 1.0 {
        xi.powf(-(d - params.t + params.s))
            * (1.0 + 2.0 * (1.0 / xi).ln()).powf(-params.gamma / 2.0)
    } else {
        (-xi / 2.0).exp()
    }
}

/// `(|xi|, |(I - Delta)^{s/2} H^(xi)| / bound)` for grid frequencies with
/// `0 < |xi| <= DECAY_WINDOW`, using `(I - Delta)^{s/2} H^ = (H^(t-s,gamma))^`.
pub fn decay_ratios(params: &CounterexampleParams, grid: GridSpec) -> Result<Vec<(f64, f64)>> {
    check_dim(params, &grid)?;
    let h = h_with(params.t - params.s, params.gamma, grid);
    let spec = h.spectrum();
    Ok(spec
        .values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let xi = grid.freq_norm(i);
            (xi > 0.0 && xi <= DECAY_WINDOW).then(|| (xi, v.norm() / decay_bound(params, xi)))
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// Fitted constant on the coarse grid.
    pub constant: f64,
    /// Largest ratios on the refined grid, over `|xi| <= 1` and `1 < |xi| <= DECAY_WINDOW`.
    pub refined_low: f64,
    pub refined_high: f64,
    pub passes: bool,
}

/// Fits `C` as the largest ratio on `fit_grid` and checks that no ratio on
/// `check_grid` exceeds `DECAY_SLACK * C`.
pub fn decay_fit(
    params: &CounterexampleParams,
    fit_grid: GridSpec,
    check_grid: GridSpec,
) -> Result<DecayFit> {
    let fit = decay_ratios(params, fit_grid)?;
    let check = decay_ratios(params, check_grid)?;
    let constant = fit.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_over = |low: bool| {
        check
            .iter()
            .filter(|p| (p.0 <= 1.0) == low)
            .map(|p| p.1)
            .fold(0.0, f64::max)
    };
    let (refined_low, refined_high) = (max_over(true), max_over(false));
    let passes = constant.is_finite()
        && constant > 0.0
        && check.iter().all(|p| p.1.is_finite())
        && refined_low.max(refined_high) <= DECAY_SLACK * constant;
    if !passes {
        log::warn!(
            "decay fit failed: C = {constant}, refined maxima {refined_low}, {refined_high}"
        );
    }
    Ok(DecayFit {
        constant,
        refined_low,
        refined_high,
        passes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryNorms {
    /// Whether `K` had to be projected onto `|xi| <= 2` first.
    pub band_projected: bool,
    /// `min(p, q, p', q')`.
    pub dual_exponent: f64,
    pub norm_dual: f64,
    pub norm_min_1pq: f64,
    pub khat_sup: f64,
    /// `| ||K||_1 - K^(0) |` when `K >= 0`.
    pub l1_gap: Option<f64>,
}

fn conjugate(p: f64) -> f64 {
    if p <= 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Norms entering the necessary conditions for a kernel in `E(1)`.
pub fn necessary_condition_norms(
    kernel: &SampledFunction,
    p: f64,
    q: f64,
) -> Result<NecessaryNorms> {
    if !(p > 0.0 && q > 0.0) || p.is_nan() || q.is_nan() {
        return Err(Error::InvalidExponents(format!(
            "need p > 0 and q > 0, got p = {p}, q = {q}"
        )));
    }
    let band_projected = !is_band_limited(kernel, 2.0);
    let k = if band_projected {
        band_project(kernel, 2.0)?
    } else {
        kernel.clone()
    };
    let dual_exponent = p.min(q).min(conjugate(p)).min(conjugate(q));
    let scale = k.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let nonnegative = k
        .samples()
        .iter()
        .all(|z| z.re >= 0.0 && z.im.abs() <= 1e-12 * scale);
    let l1_gap = nonnegative.then(|| (k.lp_norm(1.0) - k.spectrum().at_zero().re).abs());
    Ok(NecessaryNorms {
        band_projected,
        dual_exponent,
        norm_dual: k.lp_norm(dual_exponent),
        norm_min_1pq: k.lp_norm(1f64.min(p).min(q)),
        khat_sup: k.spectrum().lp_norm(f64::INFINITY),
        l1_gap,
    })
}
