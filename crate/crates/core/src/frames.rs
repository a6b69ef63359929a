//! Littlewood-Paley family `{phi_k}` built from `Phi_0`, and the reproducing
//! family `{Psi_k}` with its cube translates `Psi^Q`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cube::DyadicCube;
use crate::error::{Error, Result};
use crate::spectral::{norm, GridSpec, Point, SampledFunction, Spectrum};

/// Inner and outer transition radii of `Phi_0^`.
pub const PHI0_RADII: (f64, f64) = (1.0, 2.0);
/// Inner and outer transition radii of `Psi_0^`.
pub const PSI0_RADII: (f64, f64) = (0.5, 0.75);

/// Smooth step: 1 on `t <= a`, 0 on `t >= b`, built from `exp(-1/t)`.
pub fn bump(t: f64, a: f64, b: f64) -> f64 {
    if t <= a {
        return 1.0;
    }
    if t >= b {
        return 0.0;
    }
    let u = (t - a) / (b - a);
    // g(1-u) / (g(1-u) + g(u)) with g(t) = exp(-1/t)
    1.0 / (1.0 + (1.0 / (1.0 - u) - 1.0 / u).exp())
}

pub fn phi0_hat(xi: Point) -> f64 {
    bump(norm(xi), PHI0_RADII.0, PHI0_RADII.1)
}

pub fn psi0_hat(xi: Point) -> f64 {
    bump(norm(xi), PSI0_RADII.0, PSI0_RADII.1)
}

fn dilate(xi: Point, k: i32) -> Point {
    let s = 2f64.powi(-k);
    [xi[0] * s, xi[1] * s]
}

/// `phi_k^(xi) = Phi_0^(2^-k xi) - Phi_0^(2^{-k+1} xi)`.
pub fn phi_k_hat(k: i32, xi: Point) -> f64 {
    phi0_hat(dilate(xi, k)) - phi0_hat(dilate(xi, k - 1))
}

/// `Psi_k^(xi) = Psi_0^(2^-k xi)`.
pub fn psi_k_hat(k: i32, xi: Point) -> f64 {
    psi0_hat(dilate(xi, k))
}

fn check_range(grid: &GridSpec, k_min: i32, k_max: i32, outer: f64) -> Result<()> {
    if k_min > k_max {
        return Err(Error::InvalidConfig(format!(
            "empty scale range [{k_min}, {k_max}]"
        )));
    }
    let radius = outer * 2f64.powi(k_max);
    if radius >= grid.nyquist() {
        return Err(Error::Aliasing {
            radius,
            nyquist: grid.nyquist(),
        });
    }
    Ok(())
}

fn real_spectrum(grid: GridSpec, m: impl Fn(Point) -> f64) -> Spectrum {
    Spectrum::from_fn(grid, |xi| Complex64::new(m(xi), 0.0))
}

#[derive(Debug, Clone)]
pub struct LPFamily {
    phi0: Spectrum,
    k_min: i32,
    k_max: i32,
}

/// Littlewood-Paley family on `grid` for scales `k_min..=k_max`.
/// Refuses ranges whose outer support `2^{k_max+1}` reaches the Nyquist band.
pub fn build_phi0(grid: GridSpec, k_min: i32, k_max: i32) -> Result<LPFamily> {
    check_range(&grid, k_min, k_max, PHI0_RADII.1)?;
    Ok(LPFamily {
        phi0: real_spectrum(grid, phi0_hat),
        k_min,
        k_max,
    })
}

impl LPFamily {
    pub fn grid(&self) -> &GridSpec {
        self.phi0.grid()
    }

    pub fn k_range(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    pub fn phi0_spectrum(&self) -> &Spectrum {
        &self.phi0
    }

    fn check(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            return Err(Error::ScaleOutOfRange {
                k,
                min: self.k_min,
                max: self.k_max,
            });
        }
        Ok(())
    }

    pub fn phi_k_spectrum(&self, k: i32) -> Result<Spectrum> {
        self.check(k)?;
        Ok(real_spectrum(*self.grid(), |xi| phi_k_hat(k, xi)))
    }

    /// `phi_k` as a sampled function.
    pub fn phi_k(&self, k: i32) -> Result<SampledFunction> {
        Ok(SampledFunction::from_spectrum(self.phi_k_spectrum(k)?))
    }

    /// `phi_k * f`, the `k`-th Littlewood-Paley piece of `f`.
    pub fn piece(&self, f: &SampledFunction, k: i32) -> Result<SampledFunction> {
        self.check(k)?;
        if f.grid() != self.grid() {
            return Err(Error::DimensionMismatch(
                "function and family grids differ".into(),
            ));
        }
        Ok(f.apply_multiplier(|xi| Complex64::new(phi_k_hat(k, xi), 0.0)))
    }

    /// `sum_k phi_k^(xi)` over the family's range.
    pub fn partition_sum(&self, xi: Point) -> f64 {
        (self.k_min..=self.k_max).map(|k| phi_k_hat(k, xi)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct PsiFamily {
    psi0: Spectrum,
    k_min: i32,
    k_max: i32,
}

/// Reproducing family on `grid` for scales `k_min..=k_max`.
pub fn build_psi0(grid: GridSpec, k_min: i32, k_max: i32) -> Result<PsiFamily> {
    check_range(&grid, k_min, k_max, PSI0_RADII.1)?;
    Ok(PsiFamily {
        psi0: real_spectrum(grid, psi0_hat),
        k_min,
        k_max,
    })
}

impl PsiFamily {
    pub fn grid(&self) -> &GridSpec {
        self.psi0.grid()
    }

    pub fn k_range(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    pub fn psi0_spectrum(&self) -> &Spectrum {
        &self.psi0
    }

    fn check(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            return Err(Error::ScaleOutOfRange {
                k,
                min: self.k_min,
                max: self.k_max,
            });
        }
        Ok(())
    }

    pub fn psi_k(&self, k: i32) -> Result<SampledFunction> {
        self.check(k)?;
        Ok(SampledFunction::from_spectrum(real_spectrum(
            *self.grid(),
            |xi| psi_k_hat(k, xi),
        )))
    }

    /// `Psi^Q = |Q|^{1/2} Psi_k(. - x_Q)`, translated on the frequency side.
    pub fn psi_translate(&self, q: &DyadicCube) -> Result<SampledFunction> {
        let grid = *self.grid();
        self.check(q.scale())?;
        if q.dim() != grid.dim() {
            return Err(Error::DimensionMismatch(
                "cube and grid dimensions differ".into(),
            ));
        }
        let j = grid
            .log2_half_width()
            .ok_or_else(|| Error::GridIncompatible("half-width is not a power of two".into()))?;
        if !q.inside_torus(j) {
            return Err(Error::InvalidConfig(format!(
                "{q:?} does not fit inside the torus"
            )));
        }
        Ok(SampledFunction::from_spectrum(translate_spectrum(
            &grid, q, psi_k_hat,
        )))
    }
}

/// Spectrum of `|Q|^{1/2} K_k(. - x_Q)` where `K_k^ = symbol(k, .)`.
pub(crate) fn translate_spectrum(
    grid: &GridSpec,
    q: &DyadicCube,
    symbol: impl Fn(i32, Point) -> f64,
) -> Spectrum {
    let k = q.scale();
    let amp = q.volume().sqrt();
    let x = q.corner();
    Spectrum::from_fn(*grid, |xi| {
        let s = symbol(k, xi);
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = -2.0 * PI * (x[0] * xi[0] + x[1] * xi[1]);
        Complex64::from_polar(amp * s, phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{band_project, convolve, is_band_limited};

    #[test]
    fn bump_values() {
        assert_eq!(phi0_hat([0.0, 0.0]), 1.0);
        assert_eq!(phi0_hat([3.0, 0.0]), 0.0);
        assert_eq!(psi0_hat([0.4, 0.0]), 1.0);
        assert_eq!(psi0_hat([1.5, 0.0]), 0.0);
        assert!((phi0_hat([1.5, 0.0]) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = bump(1.0 + i as f64 / 100.0, 1.0, 2.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn partition_of_unity_on_grid() {
        let grid = GridSpec::new(1, 1024, 1.0).unwrap();
        let fam = build_phi0(grid, -3, 6).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            let xi = grid.freq(i);
            let r = norm(xi);
            if (2f64.powi(-3)..=2f64.powi(5)).contains(&r) {
                // telescoping oracle
                let oracle = phi0_hat(dilate(xi, 6)) - phi0_hat(dilate(xi, -4));
                assert!((fam.partition_sum(xi) - oracle).abs() < 1e-12);
                worst = worst.max((fam.partition_sum(xi) - 1.0).abs());
            }
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn supports() {
        let grid = GridSpec::new(2, 128, 2.0).unwrap();
        let fam = build_phi0(grid, -1, 2).unwrap();
        for k in -1..=2 {
            let s = fam.phi_k_spectrum(k).unwrap();
            for (i, v) in s.values().iter().enumerate() {
                let r = grid.freq_norm(i);
                if r < 2f64.powi(k - 1) || r > 2f64.powi(k + 1) {
                    assert_eq!(*v, Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!(build_phi0(grid, 0, 3).is_err());
        assert!(build_phi0(GridSpec::new(2, 64, 2.0).unwrap(), -1, 2).is_err());
        assert!(fam.phi_k_spectrum(3).is_err());
    }

    #[test]
    fn reproducing_property() {
        let grid = GridSpec::new(1, 256, 4.0).unwrap();
        let psi = build_psi0(grid, -2, 4).unwrap();
        let raw =
            SampledFunction::from_real_fn(grid, |x| (-(x[0] * x[0])).exp() * (3.0 * x[0]).cos());
        for k in -2..=4 {
            let f = band_project(&raw, 2f64.powi(k - 2)).unwrap();
            assert!(is_band_limited(&f, 2f64.powi(k - 2)));
            let g = convolve(&psi.psi_k(k).unwrap(), &f).unwrap();
            assert!(g.max_abs_diff(&f).unwrap() < 1e-10);
        }
    }

    #[test]
    fn translate_matches_direct_quadrature() {
        let grid = GridSpec::new(1, 64, 4.0).unwrap();
        let psi = build_psi0(grid, -2, 2).unwrap();
        let unit = DyadicCube::new(1, 0, [0, 0]);
        let t = psi.psi_translate(&unit).unwrap();
        assert!(t.max_abs_diff(&psi.psi_k(0).unwrap()).unwrap() < 1e-14);

        // periodized Psi_0 on the torus is the lattice sum of its transform
        let q = DyadicCube::new(1, 1, [3, 0]);
        let t = psi.psi_translate(&q).unwrap();
        let xq = q.corner()[0];
        for idx in 0..grid.len() {
            let x = grid.point(idx)[0];
            let mut direct = Complex64::new(0.0, 0.0);
            for m in -200i64..=200 {
                let xi = m as f64 / 8.0;
                let w = psi_k_hat(1, [xi, 0.0]);
                direct += Complex64::from_polar(w, 2.0 * PI * xi * (x - xq));
            }
            direct *= q.volume().sqrt() / 8.0;
            assert!((t.value_at_index(idx) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_norm_independent_of_position() {
        let grid = GridSpec::new(1, 128, 8.0).unwrap();
        let psi = build_psi0(grid, -1, 2).unwrap();
        let base = psi
            .psi_translate(&DyadicCube::new(1, 2, [0, 0]))
            .unwrap()
            .lp_norm(2.0);
        for l in [-32, -7, 5, 31] {
            let v = psi
                .psi_translate(&DyadicCube::new(1, 2, [l, 0]))
                .unwrap()
                .lp_norm(2.0);
            assert!((v - base).abs() < 1e-12);
        }
        assert!(psi.psi_translate(&DyadicCube::new(1, 2, [32, 0])).is_err());
    }
}
