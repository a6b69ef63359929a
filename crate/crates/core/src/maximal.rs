//! Hardy-Littlewood, power, Peetre, dyadic and dyadic sharp maximal
//! operators on the grid.
//!
//! Sample `i` stands for the cell `[x_i, x_i + dx)^d`; a cube contains the
//! point when it contains that cell, and averages are cell sums.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{block_averages, cube_scales, lq_sum, VectorField};
use crate::spectral::{weighted_lp_norm, GridSpec, SampledFunction};

/// Which cubes the Hardy-Littlewood supremum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WindowFamily {
    /// Every axis-parallel cube with grid-aligned corners that does not wrap.
    #[default]
    AllAligned,
    /// Dyadic cubes of the torus only.
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalConfig {
    pub window: WindowFamily,
    pub t_power: f64,
    pub sigma: f64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self {
            window: WindowFamily::AllAligned,
            t_power: 1.0,
            sigma: 1.0,
        }
    }
}

impl MaximalConfig {
    pub fn new(window: WindowFamily, t_power: f64, sigma: f64) -> Result<Self> {
        if !(t_power.is_finite() && t_power > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t = {t_power} must be positive"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma = {sigma} must be positive"
            )));
        }
        Ok(Self {
            window,
            t_power,
            sigma,
        })
    }
}

fn real_function(grid: GridSpec, values: Vec<f64>) -> SampledFunction {
    SampledFunction::new(
        grid,
        values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
    .expect("one value per sample")
}

/// Sliding maximum of `v` over windows `[i - w + 1, i]` clipped to the
/// valid starts `0..v.len()`; output has `v.len() + w - 1` entries.
fn sliding_max(v: &[f64], w: usize) -> Vec<f64> {
    let out_len = v.len() + w - 1;
    let mut out = Vec::with_capacity(out_len);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for i in 0..out_len {
        if i < v.len() {
            while dq.back().is_some_and(|&b| v[b] <= v[i]) {
                dq.pop_back();
            }
            dq.push_back(i);
        }
        while dq.front().is_some_and(|&f| f + w <= i) {
            dq.pop_front();
        }
        out.push(v[*dq.front().expect("window is never empty")]);
    }
    out
}

fn aligned_maximal(grid: &GridSpec, a: &[f64]) -> Vec<f64> {
    let n = grid.n();
    match grid.dim() {
        1 => {
            let mut prefix = vec![0.0; n + 1];
            for i in 0..n {
                prefix[i + 1] = prefix[i] + a[i];
            }
            (1..=n)
                .into_par_iter()
                .map(|w| {
                    let avg: Vec<f64> = (0..=n - w)
                        .map(|s| (prefix[s + w] - prefix[s]) / w as f64)
                        .collect();
                    // point i lies in windows starting at i - w + 1 ..= i
                    sliding_max(&avg, w)[..n].to_vec()
                })
                .reduce(
                    || vec![0.0; n],
                    |x, y| x.iter().zip(&y).map(|(p, q)| p.max(*q)).collect(),
                )
        }
        _ => {
            let m = n + 1;
            let mut prefix = vec![0.0; m * m];
            for r in 0..n {
                for c in 0..n {
                    prefix[(r + 1) * m + c + 1] =
                        a[r * n + c] + prefix[r * m + c + 1] + prefix[(r + 1) * m + c]
                            - prefix[r * m + c];
                }
            }
            (1..=n)
                .into_par_iter()
                .map(|w| {
                    let starts = n - w + 1;
                    let area = (w * w) as f64;
                    let mut rows = vec![0.0; starts * n];
                    for s in 0..starts {
                        let avg: Vec<f64> = (0..starts)
                            .map(|t| {
                                (prefix[(s + w) * m + t + w]
                                    - prefix[s * m + t + w]
                                    - prefix[(s + w) * m + t]
                                    + prefix[s * m + t])
                                    / area
                            })
                            .collect();
                        rows[s * n..(s + 1) * n].copy_from_slice(&sliding_max(&avg, w)[..n]);
                    }
                    let mut out = vec![0.0; n * n];
                    for c in 0..n {
                        let col: Vec<f64> = (0..starts).map(|s| rows[s * n + c]).collect();
                        for (r, v) in sliding_max(&col, w)[..n].iter().enumerate() {
                            out[r * n + c] = *v;
                        }
                    }
                    out
                })
                .reduce(
                    || vec![0.0; n * n],
                    |x, y| x.iter().zip(&y).map(|(p, q)| p.max(*q)).collect(),
                )
        }
    }
}

fn dyadic_levels(grid: &GridSpec) -> Result<u32> {
    cube_scales(grid)?;
    // blocks of 2^a cells, from one cell up to a half-torus side
    Ok(grid.n().trailing_zeros())
}

fn block_of(grid: &GridSpec, idx: usize, a: u32) -> usize {
    let n = grid.n();
    let blocks = n >> a;
    match grid.dim() {
        1 => idx >> a,
        _ => ((idx / n) >> a) * blocks + ((idx % n) >> a),
    }
}

fn dyadic_max_of(grid: &GridSpec, a: &[f64]) -> Result<Vec<f64>> {
    let levels = dyadic_levels(grid)?;
    let mut out = vec![0.0f64; grid.len()];
    for lvl in 0..levels {
        let avg = block_averages(grid, a, lvl);
        for (i, o) in out.iter_mut().enumerate() {
            *o = o.max(avg[block_of(grid, i, lvl)]);
        }
    }
    Ok(out)
}

fn abs_values(f: &SampledFunction) -> Vec<f64> {
    f.samples().iter().map(|v| v.norm()).collect()
}

/// `Mf(x) = sup_{Q containing x} |Q|^-1 \int_Q |f|` over the configured family.
pub fn hl_maximal(f: &SampledFunction, config: &MaximalConfig) -> Result<SampledFunction> {
    maximal_of(f.grid(), &abs_values(f), config.window)
}

fn maximal_of(grid: &GridSpec, a: &[f64], window: WindowFamily) -> Result<SampledFunction> {
    let values = match window {
        WindowFamily::AllAligned => aligned_maximal(grid, a),
        WindowFamily::Dyadic => dyadic_max_of(grid, a)?,
    };
    Ok(real_function(*grid, values))
}

/// `M_t f = (M |f|^t)^{1/t}`.
pub fn power_maximal(
    f: &SampledFunction,
    t: f64,
    config: &MaximalConfig,
) -> Result<SampledFunction> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidConfig(format!("t = {t} must be positive")));
    }
    let a: Vec<f64> = f.samples().iter().map(|v| v.norm().powf(t)).collect();
    let m = maximal_of(f.grid(), &a, config.window)?;
    Ok(m.map(|v| Complex64::new(v.re.powf(1.0 / t), 0.0)))
}

/// `sup_y |f(x - y)| / (1 + 2^k |y|)^sigma` with `|y|` the torus distance.
pub fn peetre_maximal(f: &SampledFunction, k: i32, sigma: f64) -> Result<SampledFunction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sigma = {sigma} must be positive"
        )));
    }
    let grid = *f.grid();
    let n = grid.n() as i64;
    let dx = grid.spacing();
    let scale = 2f64.powi(k);
    let a = abs_values(f);
    let axis_dist = |d: i64| {
        let d = d.rem_euclid(n);
        d.min(n - d) as f64 * dx
    };
    // the weight only depends on the offset
    let weights: Vec<f64> = (0..grid.len())
        .map(|off| {
            let o = grid.point(off);
            let p0 = grid.point(0);
            let mut d2 = 0.0;
            for axis in 0..grid.dim() {
                let steps = ((o[axis] - p0[axis]) / dx).round() as i64;
                d2 += axis_dist(steps).powi(2);
            }
            (1.0 + scale * d2.sqrt()).powf(-sigma)
        })
        .collect();
    let offset = |i: usize, j: usize| -> usize {
        match grid.dim() {
            1 => ((i as i64 - j as i64).rem_euclid(n)) as usize,
            _ => {
                let (ri, ci) = (i as i64 / n, i as i64 % n);
                let (rj, cj) = (j as i64 / n, j as i64 % n);
                ((ri - rj).rem_euclid(n) * n + (ci - cj).rem_euclid(n)) as usize
            }
        }
    };
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            (0..grid.len())
                .map(|j| a[j] * weights[offset(i, j)])
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(real_function(grid, values))
}

/// Hardy-Littlewood maximal function over dyadic cubes of the torus.
pub fn dyadic_maximal(f: &SampledFunction) -> Result<SampledFunction> {
    maximal_of(f.grid(), &abs_values(f), WindowFamily::Dyadic)
}

/// `sup_{P containing x, P dyadic} |P|^-1 \int_P |f - f_P|`.
pub fn dyadic_sharp(f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    let levels = dyadic_levels(&grid)?;
    let mut out = vec![0.0f64; grid.len()];
    let re: Vec<f64> = f.samples().iter().map(|v| v.re).collect();
    let im: Vec<f64> = f.samples().iter().map(|v| v.im).collect();
    for lvl in 0..levels {
        let mean_re = block_averages(&grid, &re, lvl);
        let mean_im = block_averages(&grid, &im, lvl);
        let dev: Vec<f64> = (0..grid.len())
            .map(|i| {
                let b = block_of(&grid, i, lvl);
                (f.samples()[i] - Complex64::new(mean_re[b], mean_im[b])).norm()
            })
            .collect();
        let osc = block_averages(&grid, &dev, lvl);
        for (i, o) in out.iter_mut().enumerate() {
            *o = o.max(osc[block_of(&grid, i, lvl)]);
        }
    }
    Ok(real_function(grid, out))
}

/// `|| sup_{P containing x} ( |P|^-1 \int_P sum_{k >= -log2 l(P)} |f_k|^q )^{1/q} ||_{L^p}`
/// over dyadic `P`, for `0 < q < p < inf`.
pub fn sharp_vector_functional(field: &VectorField, q: f64, p: f64) -> Result<f64> {
    if !(q > 0.0 && q < p && p.is_finite()) {
        return Err(Error::InvalidExponents(format!(
            "need 0 < q < p < inf, got q = {q}, p = {p}"
        )));
    }
    let grid = *field.grid();
    let (coarsest, finest) = cube_scales(&grid)?;
    if field.is_empty() {
        return Ok(0.0);
    }
    let powers: Vec<Vec<f64>> = field
        .iter()
        .map(|(_, f)| f.samples().iter().map(|v| v.norm().powf(q)).collect())
        .collect();
    let mut sup = vec![0.0f64; grid.len()];
    for nu in coarsest..=finest {
        let mut tail = vec![0.0; grid.len()];
        for ((k, _), pw) in field.iter().zip(&powers) {
            if k >= nu {
                tail.iter_mut().zip(pw).for_each(|(t, v)| *t += v);
            }
        }
        let lvl = (finest - nu) as u32;
        let avg = block_averages(&grid, &tail, lvl);
        for (i, s) in sup.iter_mut().enumerate() {
            *s = s.max(avg[block_of(&grid, i, lvl)]);
        }
    }
    Ok(weighted_lp_norm(
        sup.into_iter().map(|v| v.powf(1.0 / q)),
        p,
        grid.cell_volume(),
    ))
}

/// `|| |{g_k}|_{l^q} ||_{L^p}` for arbitrary sampled families on one grid,
/// such as maximal functions of field components.
pub fn lp_lq_of(functions: &[SampledFunction], p: f64, q: f64) -> Result<f64> {
    let Some(first) = functions.first() else {
        return Ok(0.0);
    };
    let grid = *first.grid();
    if functions.iter().any(|f| f.grid() != &grid) {
        return Err(Error::DimensionMismatch(
            "functions live on different grids".into(),
        ));
    }
    let profile =
        (0..grid.len()).map(|i| lq_sum(functions.iter().map(|f| f.samples()[i].norm()), q));
    Ok(weighted_lp_norm(profile, p, grid.cell_volume()))
}
