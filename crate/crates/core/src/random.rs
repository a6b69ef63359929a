//! Seeded random fields and multipliers.
//!
//! Band-limited functions are drawn directly in frequency: one complex
//! Gaussian per lattice frequency inside the band, in lexicographic order of
//! the integer frequency vector. The draw depends on the half-width and the
//! radius but not on `n`, so refining a grid reproduces the same function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::frames::psi0_hat;
use crate::multiplier::{MultiplierFamily, Symbol};
use crate::spaces::VectorField;
use crate::spectral::{GridSpec, Point, SampledFunction, Spectrum, ZERO};

/// Independent stream for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random function with spectrum supported in `|xi| <= radius`, normalized so
/// each Fourier coefficient has unit variance.
pub fn random_band_limited(
    grid: GridSpec,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SampledFunction> {
    if radius >= grid.nyquist() {
        return Err(Error::Aliasing {
            radius,
            nyquist: grid.nyquist(),
        });
    }
    let period = 2.0 * grid.half_width();
    let reach = (radius * period).floor() as i64;
    let (outer, inner) = if grid.dim() == 1 {
        (0..=0, -reach..=reach)
    } else {
        (-reach..=reach, -reach..=reach)
    };
    let scale = period.powi(grid.dim() as i32);
    let mut values = vec![ZERO; grid.len()];
    for a in outer {
        for b in inner.clone() {
            let m = if grid.dim() == 1 { [b, 0] } else { [a, b] };
            let xi = [m[0] as f64 / period, m[1] as f64 / period];
            if (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() > radius {
                continue;
            }
            let slot = grid.freq_slot(m).expect("frequency is below Nyquist");
            values[slot] = gaussian(rng) * scale;
        }
    }
    Ok(SampledFunction::from_spectrum(Spectrum::new(grid, values)?))
}

/// Field whose component `k` is random with spectral radius
/// `2 * band_constant * 2^k`, independent across scales.
pub fn random_field(
    grid: GridSpec,
    k_min: i32,
    k_max: i32,
    band_constant: f64,
    rng: &mut ChaCha8Rng,
) -> Result<VectorField> {
    let comps = (k_min..=k_max)
        .map(|k| random_band_limited(grid, 2.0 * band_constant * 2f64.powi(k), rng))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(grid, k_min, comps, band_constant)
}

/// Normalized symbol `sigma(eta) = Psi_0^(eta) sum_j c_j w_j e^{-2 pi i x_j . eta}`
/// with Gaussian `c_j`, weights `w_j = (1 + |x_j|^2)^{-a/2}` and nodes `x_j` on
/// `[-8, 8)` with spacing 1/4 in 1-d, `[-4, 4)^2` with spacing 1/2 in 2-d.
/// Larger `a` gives a smoother symbol. The coefficients are scaled so that
/// `sum |c_j w_j| = 1`, hence `|sigma| <= 1`.
pub fn random_symbol(dim: usize, a: f64, rng: &mut ChaCha8Rng) -> Symbol {
    let (extent, step) = if dim == 1 { (8.0, 0.25) } else { (4.0, 0.5) };
    let per_axis = (2.0 * extent / step) as usize;
    let axis = |i: usize| -extent + i as f64 * step;
    let mut nodes: Vec<(Point, Complex64)> = Vec::new();
    for i in 0..if dim == 1 { 1 } else { per_axis } {
        for j in 0..per_axis {
            let x = if dim == 1 {
                [axis(j), 0.0]
            } else {
                [axis(i), axis(j)]
            };
            let w = (1.0 + x[0] * x[0] + x[1] * x[1]).powf(-0.5 * a);
            nodes.push((x, gaussian(rng) * w));
        }
    }
    let total: f64 = nodes.iter().map(|(_, c)| c.norm()).sum();
    for (_, c) in &mut nodes {
        *c /= total;
    }
    std::sync::Arc::new(move |eta: Point| {
        let cut = psi0_hat(eta);
        if cut == 0.0 {
            return ZERO;
        }
        let sum: Complex64 = nodes
            .iter()
            .map(|(x, c)| {
                c * Complex64::from_polar(1.0, -2.0 * PI * (x[0] * eta[0] + x[1] * eta[1]))
            })
            .sum();
        sum * cut
    })
}

/// Family `m_k(xi) = sigma(2^-k xi)` from one random normalized symbol, so
/// every `m_k(2^k .)` is the same function and supp `m_k` lies in `|xi| <= 2^k`.
pub fn random_family(
    symbol_grid: GridSpec,
    k_min: i32,
    k_max: i32,
    a: f64,
    rng: &mut ChaCha8Rng,
) -> MultiplierFamily {
    let sigma = random_symbol(symbol_grid.dim(), a, rng);
    MultiplierFamily::from_normalized(symbol_grid, k_min, k_max, move |eta| sigma(eta))
}

/// Family with an independent random normalized symbol at every scale.
pub fn random_family_independent(
    symbol_grid: GridSpec,
    k_min: i32,
    k_max: i32,
    a: f64,
    rng: &mut ChaCha8Rng,
) -> MultiplierFamily {
    let mut fam = MultiplierFamily::new(symbol_grid);
    for k in k_min..=k_max {
        let sigma = random_symbol(symbol_grid.dim(), a, rng);
        let s = 2f64.powi(-k);
        fam.insert(k, move |xi| sigma([xi[0] * s, xi[1] * s]));
    }
    fam
}
