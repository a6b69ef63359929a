//! Sampled functions on the periodic grid `[-L, L)^d`, their spectra, and
//! the spectral operations everything else is built from.
//!
//! The transform follows `f^(xi) = \int f(x) exp(-2 pi i <x, xi>) dx`,
//! approximated by a Riemann sum with cell volume `(2L/n)^d`. Frequencies live
//! on the lattice `(1/2L) Z^d`, represented in `(-n/4L, n/4L]^d`. With these
//! weights Plancherel and the convolution theorem hold without extra factors.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// A point in `R^d`, `d <= 2`. Unused coordinates are zero.
pub type Point = [f64; 2];

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Uniform periodic grid on the torus `[-L, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} is not 1 or 2")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::InvalidGrid(format!(
                "{n} points per axis is not a power of two >= 8"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} must be positive"
            )));
        }
        Ok(Self { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn freq_spacing(&self) -> f64 {
        0.5 / self.half_width
    }

    pub fn freq_cell_volume(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }

    /// Largest representable frequency magnitude along an axis, `n / 4L`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (4.0 * self.half_width)
    }

    /// `log2 L` when the half-width is an exact power of two.
    pub fn log2_half_width(&self) -> Option<i32> {
        exact_log2(self.half_width)
    }

    /// `log2` of the grid spacing when it is an exact power of two.
    pub fn log2_spacing(&self) -> Option<i32> {
        exact_log2(self.spacing())
    }

    /// Same number of points on the torus scaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.n, self.half_width * factor)
    }

    pub(crate) fn axis_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub(crate) fn flat_index(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] * self.n + axes[1]
        }
    }

    fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Signed frequency index in `(-n/2, n/2]` of FFT-ordered index `i`.
    pub(crate) fn signed_freq_index(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Position of sample `idx`.
    pub fn point(&self, idx: usize) -> Point {
        let a = self.axis_index(idx);
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.axis_coord(a[axis]);
        }
        p
    }

    /// Frequency of spectrum entry `idx` (FFT order).
    pub fn freq(&self, idx: usize) -> Point {
        let a = self.axis_index(idx);
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.signed_freq_index(a[axis]) as f64 * self.freq_spacing();
        }
        p
    }

    pub fn freq_norm(&self, idx: usize) -> f64 {
        norm(self.freq(idx))
    }

    /// Index of the spectrum entry for the signed integer frequency `m`
    /// (frequency `m / 2L`), if representable.
    pub fn freq_slot(&self, m: [i64; 2]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut axes = [0usize; 2];
        for axis in 0..self.dim {
            let v = m[axis];
            if v <= -half || v > half {
                return None;
            }
            axes[axis] = v.rem_euclid(self.n as i64) as usize;
        }
        Some(self.flat_index(axes))
    }

    /// Sample index of the point nearest the origin (exactly the origin).
    pub fn origin_index(&self) -> usize {
        self.flat_index([self.n / 2, self.n / 2])
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

fn exact_log2(v: f64) -> Option<i32> {
    if !(v.is_finite() && v > 0.0) {
        return None;
    }
    let e = v.log2().round() as i32;
    (2f64.powi(e) == v).then_some(e)
}

/// Riemann-sum `L^p` norm of `values` with cell volume `weight`.
/// `p = inf` is the maximum.
pub fn weighted_lp_norm<I>(values: I, p: f64, weight: f64) -> f64
where
    I: IntoIterator<Item = f64>,
{
    if p.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else {
        let sum: f64 = values.into_iter().map(|v| v.powf(p)).sum();
        (sum * weight).powf(1.0 / p)
    }
}

/// Frequency-side samples on the lattice `(1/2L) Z^d`, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} spectrum values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![ZERO; grid.len()],
        }
    }

    /// Spectrum `m(xi)` evaluated at every lattice frequency.
    pub fn from_fn(grid: GridSpec, m: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| m(grid.freq(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise product with `m(xi)`.
    pub fn multiply(&self, m: impl Fn(Point) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if *v == ZERO {
                    ZERO
                } else {
                    v * m(self.grid.freq(i))
                }
            })
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Frequency-cell-weighted `L^p` norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        weighted_lp_norm(
            self.values.iter().map(|v| v.norm()),
            p,
            self.grid.freq_cell_volume(),
        )
    }

    /// Value at the zero frequency.
    pub fn at_zero(&self) -> Complex64 {
        self.values[0]
    }
}

/// Complex samples on a [`GridSpec`], with a lazily computed spectrum.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: GridSpec,
    samples: Vec<Complex64>,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for SampledFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl SampledFunction {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let f = Self {
            grid,
            samples: vec![ZERO; grid.len()],
            spectrum: OnceLock::new(),
        };
        let _ = f.spectrum.set(Spectrum::zeros(grid));
        f
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> Complex64) -> Self {
        let samples = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(Point) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Synthesizes samples from `spectrum` and keeps it as the exact cached
    /// spectrum, so support statements about it remain exact.
    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        let samples = inverse_samples(&spectrum);
        let f = Self {
            grid: spectrum.grid,
            samples,
            spectrum: OnceLock::new(),
        };
        let _ = f.spectrum.set(spectrum);
        f
    }

    /// Both representations at once; they must satisfy the transform relation.
    pub(crate) fn from_parts(samples: Vec<Complex64>, spectrum: Spectrum) -> Self {
        debug_assert_eq!(samples.len(), spectrum.grid.len());
        let f = Self {
            grid: spectrum.grid,
            samples,
            spectrum: OnceLock::new(),
        };
        let _ = f.spectrum.set(spectrum);
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| forward_spectrum(&self.grid, &self.samples))
    }

    pub fn is_finite(&self) -> bool {
        self.samples
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn value_at_index(&self, idx: usize) -> Complex64 {
        self.samples[idx]
    }

    /// Riemann-sum `L^p` (quasi-)norm; `p = inf` is the grid maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        weighted_lp_norm(
            self.samples.iter().map(|v| v.norm()),
            p,
            self.grid.cell_volume(),
        )
    }

    /// Discrete bilinear pairing `\int f g dx` (no conjugation).
    pub fn pairing(&self, other: &SampledFunction) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let sum: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// Discrete inner product `\int f conj(g) dx`.
    pub fn inner(&self, other: &SampledFunction) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let sum: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(Spectrum {
                grid: s.grid,
                values: s.values.iter().map(|v| v * c).collect(),
            });
        }
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v * c).collect(),
            spectrum,
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &SampledFunction) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + c * b)
            .collect();
        let spectrum = OnceLock::new();
        if let (Some(s), Some(t)) = (self.spectrum.get(), other.spectrum.get()) {
            let _ = spectrum.set(Spectrum {
                grid: self.grid,
                values: s
                    .values
                    .iter()
                    .zip(&t.values)
                    .map(|(a, b)| a + c * b)
                    .collect(),
            });
        }
        Ok(Self {
            grid: self.grid,
            samples,
            spectrum,
        })
    }

    /// Pointwise map of the samples.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(self.grid, self.samples.iter().map(|v| f(*v)).collect()).unwrap()
    }

    /// Applies the Fourier multiplier `m(xi)`.
    pub fn apply_multiplier(&self, m: impl Fn(Point) -> Complex64) -> Self {
        Self::from_spectrum(self.spectrum().multiply(m))
    }

    /// Maximum absolute difference of samples.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn forward_spectrum(grid: &GridSpec, samples: &[Complex64]) -> Spectrum {
    let mut data = samples.to_vec();
    fft::transform(&mut data, grid.n, grid.dim, FftDirection::Forward);
    let w = grid.cell_volume();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= alternating_sign(grid, i) * w;
    }
    Spectrum {
        grid: *grid,
        values: data,
    }
}

fn inverse_samples(spectrum: &Spectrum) -> Vec<Complex64> {
    let grid = &spectrum.grid;
    let mut data: Vec<Complex64> = spectrum
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * alternating_sign(grid, i))
        .collect();
    fft::transform(&mut data, grid.n, grid.dim, FftDirection::Inverse);
    let w = grid.freq_cell_volume();
    for v in data.iter_mut() {
        *v *= w;
    }
    data
}

// exp(i pi m) for the frequency index; accounts for the grid starting at -L.
fn alternating_sign(grid: &GridSpec, idx: usize) -> f64 {
    let a = grid.axis_index(idx);
    let parity = (0..grid.dim).map(|axis| a[axis]).sum::<usize>() % 2;
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn fft_forward(f: &SampledFunction) -> Spectrum {
    f.spectrum().clone()
}

pub fn fft_inverse(spectrum: &Spectrum) -> SampledFunction {
    SampledFunction::from_spectrum(spectrum.clone())
}

/// Keeps the spectrum on `|xi| <= radius` and zeroes the rest.
pub fn band_project(f: &SampledFunction, radius: f64) -> Result<SampledFunction> {
    let nyquist = f.grid.nyquist();
    if radius >= nyquist {
        return Err(Error::Aliasing { radius, nyquist });
    }
    let s = f.spectrum();
    let values = s
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if f.grid.freq_norm(i) <= radius {
                *v
            } else {
                ZERO
            }
        })
        .collect();
    Ok(SampledFunction::from_spectrum(Spectrum {
        grid: f.grid,
        values,
    }))
}

/// True when every spectrum entry with `|xi| > radius` is exactly zero.
pub fn is_band_limited(f: &SampledFunction, radius: f64) -> bool {
    let s = f.spectrum();
    s.values
        .iter()
        .enumerate()
        .all(|(i, v)| *v == ZERO || f.grid.freq_norm(i) <= radius)
}

/// Bessel potential multiplier `(1 + 4 pi^2 |xi|^2)^(s/2)`.
pub fn bessel_symbol(xi: Point, s: f64) -> f64 {
    (1.0 + 4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1])).powf(0.5 * s)
}

/// `(I - Delta)^(s/2) f`.
pub fn bessel_potential(f: &SampledFunction, s: f64) -> SampledFunction {
    if s == 0.0 {
        return f.clone();
    }
    f.apply_multiplier(|xi| Complex64::new(bessel_symbol(xi, s), 0.0))
}

/// Periodic convolution on the torus, `\int f(x - y) g(y) dy`.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    f.grid.check_same(&g.grid)?;
    let (a, b) = (f.spectrum(), g.spectrum());
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    Ok(SampledFunction::from_spectrum(Spectrum {
        grid: f.grid,
        values,
    }))
}

/// `x -> f(2^j x)` on the same torus, `j >= 0`. The spectrum entry at
/// lattice frequency `m` moves to `2^j m`.
pub fn compress_periodic(f: &SampledFunction, j: u32) -> Result<SampledFunction> {
    let grid = f.grid;
    let factor = 1i64 << j;
    let s = f.spectrum();
    let mut values = vec![ZERO; grid.len()];
    for (i, v) in s.values.iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let a = grid.axis_index(i);
        let mut m = [0i64; 2];
        for axis in 0..grid.dim {
            m[axis] = grid.signed_freq_index(a[axis]) * factor;
        }
        let slot = grid.freq_slot(m).ok_or_else(|| Error::Aliasing {
            radius: grid.freq_norm(i) * factor as f64,
            nyquist: grid.nyquist(),
        })?;
        values[slot] = *v;
    }
    Ok(SampledFunction::from_spectrum(Spectrum { grid, values }))
}
