//! The phi-transform pair: sampling `f_k` at dyadic corners and resynthesis
//! from coefficients through `Psi_k`.

use num_complex::Complex64;

use crate::cube::torus_cubes;
use crate::error::{Error, Result};
use crate::frames::{psi_k_hat, PsiFamily};
use crate::spaces::{CubeCoefficients, VectorField};
use crate::spectral::{is_band_limited, SampledFunction, Spectrum, ZERO};

/// Band constant of synthesized fields: `Psi_k^` vanishes beyond `(3/4) 2^k`.
pub const SYNTHESIS_BAND_CONSTANT: f64 = 0.375;

/// `b_Q = |Q|^{1/2} f_k(x_Q)` for every cube of every populated scale.
pub fn analyze(field: &VectorField) -> Result<CubeCoefficients> {
    let grid = field.grid();
    let mut out = CubeCoefficients::for_grid(grid)?;
    let j = out.log2_half_width();
    for (k, f) in field.iter() {
        for q in torus_cubes(grid.dim(), k, j) {
            let (start, _) = q.cell_block(grid).ok_or_else(|| {
                Error::GridIncompatible(format!("corner of {q:?} is not a grid point"))
            })?;
            let idx = grid.flat_index(start);
            out.insert(q, f.samples()[idx] * q.volume().sqrt())?;
        }
    }
    Ok(out)
}

/// `f_k = sum_{Q in D_k} b_Q Psi^Q` for every scale of `psi`: the coefficients
/// are scattered as a comb of point masses and filtered by `Psi_k^` once.
pub fn synthesize(b: &CubeCoefficients, psi: &PsiFamily) -> Result<VectorField> {
    let grid = *psi.grid();
    let expected = CubeCoefficients::for_grid(&grid)?;
    if b.dim() != grid.dim() || b.log2_half_width() != expected.log2_half_width() {
        return Err(Error::DimensionMismatch(
            "coefficients live on another torus".into(),
        ));
    }
    let (k_min, k_max) = psi.k_range();
    if let Some((lo, hi)) = b.scale_range() {
        if lo < k_min || hi > k_max {
            let k = if lo < k_min { lo } else { hi };
            return Err(Error::ScaleOutOfRange {
                k,
                min: k_min,
                max: k_max,
            });
        }
    }
    let inv_cell = 1.0 / grid.cell_volume();
    let mut combs = vec![vec![ZERO; grid.len()]; (k_max - k_min + 1) as usize];
    for (q, v) in b.support() {
        let (start, _) = q.cell_block(&grid).ok_or_else(|| {
            Error::GridIncompatible(format!("corner of {q:?} is not a grid point"))
        })?;
        combs[(q.scale() - k_min) as usize][grid.flat_index(start)] +=
            v * q.volume().sqrt() * inv_cell;
    }
    let components = combs
        .into_iter()
        .zip(k_min..=k_max)
        .map(|(comb, k)| {
            if comb.iter().all(|v| *v == ZERO) {
                return Ok(SampledFunction::zeros(grid));
            }
            let comb = SampledFunction::new(grid, comb)?;
            let spectrum = comb
                .spectrum()
                .multiply(|xi| Complex64::new(psi_k_hat(k, xi), 0.0));
            Ok(SampledFunction::from_spectrum(Spectrum::new(
                grid,
                spectrum.into_values(),
            )?))
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(grid, k_min, components, SYNTHESIS_BAND_CONSTANT)
}

/// `synthesize(analyze(F))` for fields with `f_k^` supported in `|xi| <= 2^{k-2}`,
/// where the sampling identity reproduces `F`.
pub fn roundtrip(field: &VectorField, psi: &PsiFamily) -> Result<VectorField> {
    for (k, f) in field.iter() {
        let radius = 2f64.powi(k - 2);
        if !is_band_limited(f, radius) {
            return Err(Error::BandViolation { k, radius });
        }
    }
    synthesize(&analyze(field)?, psi)
}

/// Largest per-component relative error `max|g_k - f_k| / max|f_k|`; zero
/// components contribute their absolute error.
pub fn relative_error(reference: &VectorField, other: &VectorField) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, f) in reference.iter() {
        let g = other.component(k).ok_or(Error::MissingScale(k))?;
        let scale = f.lp_norm(f64::INFINITY);
        let diff = f.max_abs_diff(g)?;
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

/// `\int sum_k f_k(x) V_k(b)(x) dx` with `V_k(b) = sum_{Q in D_k} b_Q Psi^Q`.
pub fn duality_pairing(
    field: &VectorField,
    b: &CubeCoefficients,
    psi: &PsiFamily,
) -> Result<Complex64> {
    if field.grid() != psi.grid() {
        return Err(Error::DimensionMismatch(
            "field and frame grids differ".into(),
        ));
    }
    let synth = synthesize(b, psi)?;
    let mut total = ZERO;
    for (k, f) in field.iter() {
        if let Some(v) = synth.component(k) {
            total += f.pairing(v)?;
        }
    }
    Ok(total)
}

/// `sum_Q U_Q(F) b_Q`, the coefficient-side form of the pairing.
pub fn coefficient_pairing(field: &VectorField, b: &CubeCoefficients) -> Result<Complex64> {
    let a = analyze(field)?;
    Ok(b.support().map(|(q, v)| a.get(q) * v).sum())
}
