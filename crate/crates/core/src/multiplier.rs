//! Multiplier families `{m_k}` and their action on vector fields.
//!
//! Symbols are kept as functions of the frequency so `m_k` can be evaluated on
//! any field grid and `m_k(2^k .)` on a separate symbol grid, where its
//! Sobolev norm is taken.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{phi_k_hat, psi0_hat, psi_k_hat};
use crate::spaces::{sobolev_norm, VectorField};
use crate::spectral::{GridSpec, Point, SampledFunction, ZERO};

pub type Symbol = Arc<dyn Fn(Point) -> Complex64 + Send + Sync>;

/// Default grid for normalized symbols `m_k(2^k .)`: `[-4, 4)` with 512 points
/// per axis in 1-d and 128 in 2-d.
pub fn default_symbol_grid(dim: usize) -> GridSpec {
    let n = if dim == 1 { 512 } else { 128 };
    GridSpec::new(dim, n, 4.0).expect("default symbol grid is valid")
}

fn dilate(xi: Point, k: i32) -> Point {
    let s = 2f64.powi(k);
    [xi[0] * s, xi[1] * s]
}

#[derive(Clone)]
pub struct MultiplierFamily {
    entries: BTreeMap<i32, Symbol>,
    support_certified: bool,
    symbol_grid: GridSpec,
}

impl fmt::Debug for MultiplierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierFamily")
            .field("scales", &self.entries.keys().collect::<Vec<_>>())
            .field("support_certified", &self.support_certified)
            .field("symbol_grid", &self.symbol_grid)
            .finish()
    }
}

impl MultiplierFamily {
    pub fn new(symbol_grid: GridSpec) -> Self {
        Self {
            entries: BTreeMap::new(),
            support_certified: false,
            symbol_grid,
        }
    }

    /// Family `m_k(xi) = sigma(2^-k xi)` for `k_min <= k <= k_max`.
    pub fn from_normalized(
        symbol_grid: GridSpec,
        k_min: i32,
        k_max: i32,
        sigma: impl Fn(Point) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        let sigma: Symbol = Arc::new(sigma);
        let mut fam = Self::new(symbol_grid);
        for k in k_min..=k_max {
            let s = Arc::clone(&sigma);
            fam.insert(k, move |xi| s(dilate(xi, -k)));
        }
        fam
    }

    /// `m_k = Psi_k^` at every scale.
    pub fn identity(symbol_grid: GridSpec, k_min: i32, k_max: i32) -> Self {
        let mut fam = Self::from_normalized(symbol_grid, k_min, k_max, |xi| {
            Complex64::new(psi0_hat(xi), 0.0)
        });
        fam.support_certified = true;
        fam
    }

    pub fn insert(&mut self, k: i32, m: impl Fn(Point) -> Complex64 + Send + Sync + 'static) {
        self.entries.insert(k, Arc::new(m));
        self.support_certified = false;
    }

    pub fn symbol_grid(&self) -> &GridSpec {
        &self.symbol_grid
    }

    pub fn with_symbol_grid(mut self, grid: GridSpec) -> Self {
        self.symbol_grid = grid;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn scales(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_certified(&self) -> bool {
        self.support_certified
    }

    pub fn symbol(&self, k: i32) -> Option<&Symbol> {
        self.entries.get(&k)
    }

    pub fn eval(&self, k: i32, xi: Point) -> Option<Complex64> {
        self.entries.get(&k).map(|m| m(xi))
    }

    /// `eta -> m_k(2^k eta)` sampled on the symbol grid.
    pub fn normalized_symbol(&self, k: i32) -> Option<SampledFunction> {
        let m = self.entries.get(&k)?;
        Some(SampledFunction::from_fn(self.symbol_grid, |eta| {
            m(dilate(eta, k))
        }))
    }

    /// Whether `m_k` vanishes at every frequency of `grid` with `|xi| > 2^k`.
    pub fn check_support(&self, grid: &GridSpec) -> bool {
        self.entries.iter().all(|(k, m)| {
            let radius = 2f64.powi(*k);
            (0..grid.len()).all(|i| grid.freq_norm(i) <= radius || m(grid.freq(i)) == ZERO)
        })
    }

    /// Pointwise linear combination `self + c * other` on the common scales.
    pub fn add_scaled(&self, c: Complex64, other: &MultiplierFamily) -> Self {
        let mut out = Self::new(self.symbol_grid);
        for (k, m) in &self.entries {
            let m = Arc::clone(m);
            match other.entries.get(k) {
                Some(o) => {
                    let o = Arc::clone(o);
                    out.insert(*k, move |xi| m(xi) + c * o(xi));
                }
                None => out.insert(*k, move |xi| m(xi)),
            }
        }
        for (k, o) in &other.entries {
            if !self.entries.contains_key(k) {
                let o = Arc::clone(o);
                out.insert(*k, move |xi| c * o(xi));
            }
        }
        out.support_certified = self.support_certified && other.support_certified;
        out
    }
}

/// `{(m_k f_k^)^v}`. Zero components need no symbol; a nonzero component
/// without one is an error.
pub fn apply_family(family: &MultiplierFamily, field: &VectorField) -> Result<VectorField> {
    field.map_components(field.band_constant(), |k, f| {
        let populated = f.spectrum().values().iter().any(|v| *v != ZERO);
        match family.symbol(k) {
            Some(m) => Ok(f.apply_multiplier(|xi| m(xi))),
            None if !populated => Ok(f.clone()),
            None => Err(Error::MissingScale(k)),
        }
    })
}

/// Replaces every `m_k` by `m_k Psi_k^`, which leaves the action on fields with
/// `f_k^` supported in `|xi| <= 2^{k-1}` unchanged and certifies
/// `supp m_k ⊆ {|xi| <= 2^k}`.
pub fn support_normalize(family: &MultiplierFamily) -> MultiplierFamily {
    let mut out = MultiplierFamily::new(family.symbol_grid);
    for (k, m) in &family.entries {
        let (k, m) = (*k, Arc::clone(m));
        out.insert(k, move |xi| {
            let w = psi_k_hat(k, xi);
            if w == 0.0 {
                ZERO
            } else {
                m(xi) * w
            }
        });
    }
    out.support_certified = true;
    out
}

/// `max_{l in ls} || m(2^l .) phi^ ||_{L^r_s}` with `phi^ = phi_0^`, evaluated
/// on `symbol_grid`.
pub fn localized_hormander_norm(
    m: &(dyn Fn(Point) -> Complex64 + Sync),
    symbol_grid: GridSpec,
    ls: std::ops::RangeInclusive<i32>,
    s: f64,
    r: f64,
) -> Result<f64> {
    if ls.is_empty() {
        return Err(Error::InvalidConfig(
            "empty range of dilation scales".into(),
        ));
    }
    if symbol_grid.half_width() <= 2.0 {
        return Err(Error::Resolution(
            "symbol grid must contain the annulus |xi| <= 2".into(),
        ));
    }
    Ok(ls
        .map(|l| {
            let f = SampledFunction::from_fn(symbol_grid, |eta| {
                let w = phi_k_hat(0, eta);
                if w == 0.0 {
                    ZERO
                } else {
                    m(dilate(eta, l)) * w
                }
            });
            sobolev_norm(&f, s, r)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{bump, phi0_hat};
    use crate::spectral::{band_project, Spectrum};
    use std::f64::consts::PI;

    fn field(grid: GridSpec) -> VectorField {
        let comps = (-1..=2)
            .map(|k| {
                let raw = SampledFunction::from_real_fn(grid, |x| {
                    (-(x[0] - 0.3 * k as f64).powi(2)).exp() * (1.0 + x[0].sin())
                });
                band_project(&raw, 2f64.powi(k - 1)).unwrap()
            })
            .collect();
        VectorField::with_default_band(grid, -1, comps).unwrap()
    }

    #[test]
    fn identity_and_zero() {
        let grid = GridSpec::new(1, 128, 4.0).unwrap();
        let f = field(grid);
        let id = MultiplierFamily::identity(default_symbol_grid(1), -1, 2);
        assert!(id.check_support(&grid));
        let out = apply_family(&id, &f).unwrap();
        assert!(out.max_abs_diff(&f).unwrap() < 1e-12);

        let zero = MultiplierFamily::from_normalized(default_symbol_grid(1), -1, 2, |_| ZERO);
        let out = apply_family(&zero, &f).unwrap();
        assert_eq!(out.lq_profile(1.0).iter().cloned().fold(0.0, f64::max), 0.0);

        let partial = MultiplierFamily::identity(default_symbol_grid(1), 0, 2);
        assert!(matches!(
            apply_family(&partial, &f),
            Err(Error::MissingScale(-1))
        ));
    }

    #[test]
    fn plane_wave_is_scaled_by_symbol() {
        let grid = GridSpec::new(1, 64, 4.0).unwrap();
        let xi0 = 5.0 / 8.0;
        let mut comps = vec![SampledFunction::zeros(grid); 3];
        comps[2] = SampledFunction::from_spectrum(Spectrum::from_fn(grid, |xi| {
            if xi[0] == xi0 {
                Complex64::new(8.0, 0.0)
            } else {
                ZERO
            }
        }));
        let f = VectorField::with_default_band(grid, -1, comps).unwrap();
        let m = |xi: Point| Complex64::new(bump(xi[0].abs(), 0.2, 1.4), 0.3 * xi[0]);
        let fam = MultiplierFamily::from_normalized(default_symbol_grid(1), -1, 1, move |eta| {
            m(dilate(eta, 1))
        });
        let out = apply_family(&fam, &f).unwrap();
        let expected = m([xi0, 0.0]);
        for i in 0..grid.len() {
            let x = grid.point(i)[0];
            let v = expected * Complex64::from_polar(1.0, 2.0 * PI * xi0 * x);
            assert!((out.component(1).unwrap().samples()[i] - v).norm() < 1e-12);
        }
    }

    #[test]
    fn normalization_keeps_action() {
        let grid = GridSpec::new(1, 128, 4.0).unwrap();
        let f = field(grid);
        let fam = MultiplierFamily::from_normalized(default_symbol_grid(1), -1, 2, |eta| {
            Complex64::new((eta[0] * 3.0).cos(), eta[0])
        });
        assert!(!fam.check_support(&grid));
        let normed = support_normalize(&fam);
        assert!(normed.support_certified() && normed.check_support(&grid));
        let a = apply_family(&fam, &f).unwrap();
        let b = apply_family(&normed, &f).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);

        let one = support_normalize(&MultiplierFamily::from_normalized(
            default_symbol_grid(1),
            0,
            1,
            |_| Complex64::new(1.0, 0.0),
        ));
        for x in [0.1, 0.6, 0.7, 1.4] {
            assert_eq!(one.eval(1, [x, 0.0]).unwrap().re, psi_k_hat(1, [x, 0.0]));
        }
    }

    #[test]
    fn normalized_symbols() {
        let sg = default_symbol_grid(1);
        let fam = MultiplierFamily::identity(sg, -2, 3);
        let base = fam.normalized_symbol(-2).unwrap();
        for k in -1..=3 {
            assert!(
                fam.normalized_symbol(k)
                    .unwrap()
                    .max_abs_diff(&base)
                    .unwrap()
                    < 1e-15
            );
        }
        assert!(fam.normalized_symbol(4).is_none());
    }

    #[test]
    fn hormander_examples() {
        let sg = default_symbol_grid(1);
        let one = |_: Point| Complex64::new(1.0, 0.0);
        let v = localized_hormander_norm(&one, sg, -2..=2, 1.0, 2.0).unwrap();
        let phi = SampledFunction::from_real_fn(sg, |eta| phi_k_hat(0, eta));
        assert!((v - sobolev_norm(&phi, 1.0, 2.0)).abs() < 1e-12);
        let zero = |_: Point| ZERO;
        assert_eq!(
            localized_hormander_norm(&zero, sg, 0..=3, 1.0, 2.0).unwrap(),
            0.0
        );
        #[allow(clippy::reversed_empty_ranges)]
        let empty = localized_hormander_norm(&one, sg, 1..=0, 1.0, 2.0);
        assert!(empty.is_err());
        assert_eq!(phi0_hat([0.0, 0.0]), 1.0);
    }
}
