//! Vector fields `{f_k}`, cube coefficient sequences, and the norm
//! functionals on them: `L^p(l^q)`, the `F_inf`-type cube norms, the discrete
//! sequence norms, and Sobolev norms.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cube::DyadicCube;
use crate::error::{Error, Result};
use crate::multiplier::MultiplierFamily;
use crate::spectral::{
    bessel_potential, is_band_limited, weighted_lp_norm, GridSpec, SampledFunction,
};

/// Default band constant `A`: `f_k` has spectrum in `|xi| <= 2A 2^k`.
pub const DEFAULT_BAND_CONSTANT: f64 = 0.25;

fn check_p(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidExponents(format!(
            "{name} = {p} must lie in (0, inf]"
        )));
    }
    Ok(())
}

fn check_finite_q(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidExponents(format!(
            "q = {q} must lie in (0, inf)"
        )));
    }
    Ok(())
}

/// `l^q` (quasi-)norm of nonnegative values.
pub(crate) fn lq_sum(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Exponent tuple `(p, q, s, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub r: f64,
}

impl ExponentTuple {
    pub fn new(p: f64, q: f64, s: f64, r: f64) -> Result<Self> {
        check_p("p", p)?;
        check_p("q", q)?;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidExponents(format!(
                "s = {s} must be a finite value >= 0"
            )));
        }
        if !(r.is_finite() && r > 1.0) {
            return Err(Error::InvalidExponents(format!(
                "r = {r} must lie in (1, inf)"
            )));
        }
        Ok(Self { p, q, s, r })
    }

    pub fn min_1p(&self) -> f64 {
        self.p.min(1.0)
    }

    pub fn min_1pq(&self) -> f64 {
        self.p.min(self.q).min(1.0)
    }

    /// `tau^(s,p) = d / (s - (d/min(1,p) - d))`.
    pub fn tau_sp(&self, d: usize) -> f64 {
        let d = d as f64;
        d / (self.s - (d / self.min_1p() - d))
    }

    /// `tau^(s,p,q) = d / (s - (d/min(1,p,q) - d))`.
    pub fn tau_spq(&self, d: usize) -> f64 {
        let d = d as f64;
        d / (self.s - (d / self.min_1pq() - d))
    }
}

/// Finite family `{f_k}`, `k_min <= k <= k_max`, each `f_k` with spectrum
/// in `|xi| <= 2A 2^k`.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: GridSpec,
    k_min: i32,
    components: Vec<SampledFunction>,
    band_constant: f64,
}

impl VectorField {
    /// Validates the band condition of every component exactly, the Nyquist
    /// limit, and that every dyadic corner at the populated scales is a grid
    /// point.
    pub fn new(
        grid: GridSpec,
        k_min: i32,
        components: Vec<SampledFunction>,
        band_constant: f64,
    ) -> Result<Self> {
        if !(band_constant.is_finite() && band_constant > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "band constant {band_constant} must be positive"
            )));
        }
        let j = grid
            .log2_half_width()
            .ok_or_else(|| Error::GridIncompatible("half-width is not a power of two".into()))?;
        let b = grid
            .log2_spacing()
            .ok_or_else(|| Error::GridIncompatible("grid spacing is not a power of two".into()))?;
        let field = Self {
            grid,
            k_min,
            components,
            band_constant,
        };
        if field.components.is_empty() {
            return Ok(field);
        }
        let k_max = field.k_max();
        if k_min < -j {
            return Err(Error::GridIncompatible(format!(
                "scale {k_min} cubes do not fit in the torus of half-width 2^{j}"
            )));
        }
        if -k_max < b {
            return Err(Error::GridIncompatible(format!(
                "scale {k_max} corners are finer than the grid spacing 2^{b}"
            )));
        }
        let top = field.band_radius(k_max);
        if top >= grid.nyquist() {
            return Err(Error::Aliasing {
                radius: top,
                nyquist: grid.nyquist(),
            });
        }
        for (k, f) in field.iter() {
            if f.grid() != &grid {
                return Err(Error::DimensionMismatch(format!(
                    "component {k} lives on another grid"
                )));
            }
            if !is_band_limited(f, field.band_radius(k)) {
                return Err(Error::BandViolation {
                    k,
                    radius: field.band_radius(k),
                });
            }
        }
        Ok(field)
    }

    pub fn with_default_band(
        grid: GridSpec,
        k_min: i32,
        components: Vec<SampledFunction>,
    ) -> Result<Self> {
        Self::new(grid, k_min, components, DEFAULT_BAND_CONSTANT)
    }

    pub fn zeros(grid: GridSpec, k_min: i32, k_max: i32) -> Result<Self> {
        let count = (k_max - k_min + 1).max(0) as usize;
        Self::with_default_band(grid, k_min, vec![SampledFunction::zeros(grid); count])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    /// `k_min - 1` for an empty field.
    pub fn k_max(&self) -> i32 {
        self.k_min + self.components.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn band_constant(&self) -> f64 {
        self.band_constant
    }

    /// Spectral support radius `2A 2^k` of component `k`.
    pub fn band_radius(&self, k: i32) -> f64 {
        self.band_constant * 2f64.powi(k + 1)
    }

    pub fn component(&self, k: i32) -> Option<&SampledFunction> {
        if k < self.k_min {
            return None;
        }
        self.components.get((k - self.k_min) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &SampledFunction)> {
        self.components
            .iter()
            .enumerate()
            .map(move |(i, f)| (self.k_min + i as i32, f))
    }

    pub fn into_components(self) -> Vec<SampledFunction> {
        self.components
    }

    /// Applies `op` to every component and revalidates with band constant `band`.
    pub fn map_components(
        &self,
        band: f64,
        op: impl Fn(i32, &SampledFunction) -> Result<SampledFunction>,
    ) -> Result<Self> {
        let components = self
            .iter()
            .map(|(k, f)| op(k, f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.grid, self.k_min, components, band)
    }

    /// `{2^{alpha k} f_k}`: the weighting that turns `F^{alpha,q}_p` questions
    /// into `alpha = 0` ones.
    pub fn weighted(&self, alpha: f64) -> Self {
        let components = self
            .iter()
            .map(|(k, f)| f.scaled(Complex64::new(2f64.powf(alpha * k as f64), 0.0)))
            .collect();
        Self {
            components,
            ..self.clone()
        }
    }

    /// Largest sample difference over all components.
    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        if self.k_min != other.k_min || self.len() != other.len() {
            return Err(Error::DimensionMismatch(
                "fields have different scale ranges".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for ((_, a), (_, b)) in self.iter().zip(other.iter()) {
            worst = worst.max(a.max_abs_diff(b)?);
        }
        Ok(worst)
    }

    /// Pointwise `l^q` norm across scales, `x -> |{f_k(x)}|_{l^q}`.
    pub fn lq_profile(&self, q: f64) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| lq_sum(self.components.iter().map(|f| f.samples()[i].norm()), q))
            .collect()
    }
}

/// `|| |{f_k}|_{l^q} ||_{L^p}` by Riemann sum; an empty field gives 0.
pub fn lp_lq_norm(field: &VectorField, p: f64, q: f64) -> Result<f64> {
    check_p("p", p)?;
    check_p("q", q)?;
    if field.is_empty() {
        log::warn!("L^p(l^q) norm of a field with an empty scale range");
        return Ok(0.0);
    }
    Ok(weighted_lp_norm(
        field.lq_profile(q),
        p,
        field.grid.cell_volume(),
    ))
}

/// Admissible dyadic scales `[-log2 L, -log2 dx]` of cubes on `grid`.
pub(crate) fn cube_scales(grid: &GridSpec) -> Result<(i32, i32)> {
    let j = grid
        .log2_half_width()
        .ok_or_else(|| Error::GridIncompatible("half-width is not a power of two".into()))?;
    let b = grid
        .log2_spacing()
        .ok_or_else(|| Error::GridIncompatible("grid spacing is not a power of two".into()))?;
    Ok((-j, -b))
}

/// Averages of `values` over every aligned dyadic block of `2^a` cells per side.
/// Returns one value per block in row-major block order.
pub(crate) fn block_averages(grid: &GridSpec, values: &[f64], a: u32) -> Vec<f64> {
    let n = grid.n();
    let side = 1usize << a;
    let blocks = n / side;
    match grid.dim() {
        1 => values
            .chunks(side)
            .map(|c| c.iter().sum::<f64>() / side as f64)
            .collect(),
        _ => {
            let mut out = vec![0.0; blocks * blocks];
            for r in 0..n {
                for c in 0..n {
                    out[(r / side) * blocks + c / side] += values[r * n + c];
                }
            }
            let vol = (side * side) as f64;
            out.iter_mut().for_each(|v| *v /= vol);
            out
        }
    }
}

/// `sup_{P : l(P) <= 2^-mu} ( |P|^-1 \int_P sum_{k >= -log2 l(P)} |f_k|^q )^{1/q}`
/// over dyadic `P` inside the torus and no finer than one grid cell.
pub fn finfty_q_norm(field: &VectorField, q: f64, mu: i32) -> Result<f64> {
    finfty_of(&field.grid, field.k_min, &field.components, q, mu)
}

/// [`finfty_q_norm`] for arbitrary sampled components `f_{k_min}, f_{k_min+1}, ...`.
pub fn finfty_of(
    grid: &GridSpec,
    k_min: i32,
    components: &[SampledFunction],
    q: f64,
    mu: i32,
) -> Result<f64> {
    check_finite_q(q)?;
    let (coarsest, finest) = cube_scales(grid)?;
    if mu < coarsest || mu > finest {
        return Err(Error::ScaleOutOfRange {
            k: mu,
            min: coarsest,
            max: finest,
        });
    }
    if components.is_empty() {
        log::warn!("F_inf norm of a field with an empty scale range");
        return Ok(0.0);
    }
    if let Some(f) = components.iter().find(|f| f.grid() != grid) {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {grid:?}",
            f.grid()
        )));
    }
    let powers: Vec<Vec<f64>> = components
        .iter()
        .map(|f| f.samples().iter().map(|v| v.norm().powf(q)).collect())
        .collect();
    let mut best: f64 = 0.0;
    for nu in mu..=finest {
        // sum over k >= nu
        let mut tail = vec![0.0; grid.len()];
        for (idx, p) in powers.iter().enumerate() {
            if k_min + idx as i32 >= nu {
                tail.iter_mut().zip(p).for_each(|(t, v)| *t += v);
            }
        }
        let a = (finest - nu) as u32;
        let avg = block_averages(grid, &tail, a);
        best = best.max(avg.into_iter().fold(0.0, f64::max));
    }
    Ok(best.powf(1.0 / q))
}

/// Coefficients `b_Q` on dyadic cubes of the torus `[-2^j, 2^j)^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CubeCoefficients {
    dim: usize,
    log2_half_width: i32,
    entries: BTreeMap<DyadicCube, Complex64>,
}

impl CubeCoefficients {
    pub fn new(dim: usize, log2_half_width: i32) -> Self {
        Self {
            dim,
            log2_half_width,
            entries: BTreeMap::new(),
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Result<Self> {
        let (coarsest, _) = cube_scales(grid)?;
        Ok(Self::new(grid.dim(), -coarsest))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log2_half_width(&self) -> i32 {
        self.log2_half_width
    }

    /// Inserts (or overwrites) `b_Q`; zero values are stored too.
    pub fn insert(&mut self, q: DyadicCube, value: Complex64) -> Result<()> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{q:?} in a {}-d sequence",
                self.dim
            )));
        }
        if !q.inside_torus(self.log2_half_width) {
            return Err(Error::InvalidConfig(format!(
                "{q:?} does not fit inside the torus"
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite coefficient on {q:?}"
            )));
        }
        self.entries.insert(q, value);
        Ok(())
    }

    pub fn get(&self, q: &DyadicCube) -> Complex64 {
        self.entries.get(q).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicCube, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries with nonzero value.
    pub fn support(&self) -> impl Iterator<Item = (&DyadicCube, &Complex64)> {
        self.entries
            .iter()
            .filter(|(_, v)| **v != Complex64::default())
    }

    /// Smallest and largest populated scale.
    pub fn scale_range(&self) -> Option<(i32, i32)> {
        let lo = self.entries.keys().map(|q| q.scale()).min()?;
        let hi = self.entries.keys().map(|q| q.scale()).max()?;
        Some((lo, hi))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let entries = self.entries.iter().map(|(q, v)| (*q, v * c)).collect();
        Self {
            entries,
            ..self.clone()
        }
    }

    /// Coefficientwise `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &CubeCoefficients) -> Result<Self> {
        if self.dim != other.dim || self.log2_half_width != other.log2_half_width {
            return Err(Error::DimensionMismatch(
                "coefficient sequences on different tori".into(),
            ));
        }
        let mut out = self.clone();
        for (q, v) in &other.entries {
            *out.entries.entry(*q).or_default() += c * v;
        }
        Ok(out)
    }

    /// Number of cells per axis of the scale-`k` lattice on the torus.
    pub(crate) fn lattice_side(&self, k: i32) -> usize {
        1usize << (k + self.log2_half_width + 1)
    }
}

/// Nonnegative function constant on the cubes of one dyadic scale of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    pub dim: usize,
    pub scale: i32,
    pub log2_half_width: i32,
    pub values: Vec<f64>,
}

impl LatticeFunction {
    pub fn side(&self) -> usize {
        1usize << (self.scale + self.log2_half_width + 1)
    }

    pub fn cell_volume(&self) -> f64 {
        2f64.powi(-self.scale * self.dim as i32)
    }

    /// Flat index of the scale-`k` cells covered by `q` (`q` no finer than `k`).
    pub fn cells_of(&self, q: &DyadicCube) -> Vec<usize> {
        let side = self.side() as i64;
        let per = 1i64 << (self.scale - q.scale());
        let offset = 1i64 << (self.scale + self.log2_half_width);
        let l = q.index();
        let start = [l[0] * per + offset, l[1] * per + offset];
        match self.dim {
            1 => (start[0]..start[0] + per).map(|i| i as usize).collect(),
            _ => (start[0]..start[0] + per)
                .flat_map(|r| (start[1]..start[1] + per).map(move |c| (r * side + c) as usize))
                .collect(),
        }
    }

    /// Cube of scale `self.scale` at flat index `idx`.
    pub fn cube_at(&self, idx: usize) -> DyadicCube {
        let side = self.side();
        let offset = 1i64 << (self.scale + self.log2_half_width);
        let l = match self.dim {
            1 => [idx as i64 - offset, 0],
            _ => [(idx / side) as i64 - offset, (idx % side) as i64 - offset],
        };
        DyadicCube::new(self.dim, self.scale, l)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        weighted_lp_norm(self.values.iter().copied(), p, self.cell_volume())
    }
}

/// `g^q(b)(x) = |{ |b_Q| |Q|^{-1/2} 1_Q(x) }|_{l^q}` on the lattice of the
/// finest populated scale (exact, since `g^q(b)` is constant there).
pub fn gq_lattice(b: &CubeCoefficients, q: f64) -> Option<LatticeFunction> {
    let (_, finest) = b.scale_range()?;
    let side = b.lattice_side(finest);
    let mut lat = LatticeFunction {
        dim: b.dim,
        scale: finest,
        log2_half_width: b.log2_half_width,
        values: vec![0.0; side.pow(b.dim as u32)],
    };
    for (cube, v) in b.support() {
        let w = v.norm() / cube.volume().sqrt();
        let contribution = if q.is_infinite() { w } else { w.powf(q) };
        for idx in lat.cells_of(cube) {
            let slot = &mut lat.values[idx];
            if q.is_infinite() {
                *slot = slot.max(contribution);
            } else {
                *slot += contribution;
            }
        }
    }
    if q.is_finite() {
        lat.values.iter_mut().for_each(|v| *v = v.powf(1.0 / q));
    }
    Some(lat)
}

/// `|| g^q(b) ||_{L^p}`.
pub fn fpq_discrete_norm(b: &CubeCoefficients, p: f64, q: f64) -> Result<f64> {
    check_p("p", p)?;
    check_p("q", q)?;
    Ok(gq_lattice(b, q).map_or(0.0, |g| g.lp_norm(p)))
}

/// `sup_{P : l(P) <= 2^-mu} ( |P|^-1 sum_{Q in P} (|b_Q| |Q|^{-1/2})^q |Q| )^{1/q}`,
/// by accumulating each term into all admissible ancestors.
pub fn finfty_discrete_norm(b: &CubeCoefficients, q: f64, mu: i32) -> Result<f64> {
    check_finite_q(q)?;
    let coarsest = mu.max(-b.log2_half_width);
    let mut mass: HashMap<DyadicCube, f64> = HashMap::new();
    for (cube, v) in b.support() {
        let w = (v.norm() / cube.volume().sqrt()).powf(q) * cube.volume();
        for nu in coarsest..=cube.scale() {
            let p = cube.ancestor(nu).expect("ancestor scale is coarser");
            *mass.entry(p).or_default() += w;
        }
    }
    let best = mass.iter().map(|(p, m)| m / p.volume()).fold(0.0, f64::max);
    Ok(best.powf(1.0 / q))
}

/// `|| (I - Delta)^{s/2} f ||_{L^r}`.
pub fn sobolev_norm(f: &SampledFunction, s: f64, r: f64) -> f64 {
    bessel_potential(f, s).lp_norm(r)
}

/// `sup_l || m_l(2^l .) ||_{L^r_s}` over the scales present in the family.
pub fn multiplier_functional(family: &MultiplierFamily, s: f64, r: f64) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(family
        .scales()
        .map(|k| {
            sobolev_norm(
                &family.normalized_symbol(k).expect("scale is present"),
                s,
                r,
            )
        })
        .fold(0.0, f64::max))
}
