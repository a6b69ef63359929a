use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use vvmult::atoms::{decompose_atoms, reconstruct, verify_atom};
use vvmult::counterexample::h_value;
use vvmult::cube::DyadicCube;
use vvmult::experiments::random_coefficients;
use vvmult::frames::{phi_k_hat, psi_k_hat};
use vvmult::maximal::{dyadic_maximal, dyadic_sharp};
use vvmult::multiplier::{apply_family, default_symbol_grid, MultiplierFamily};
use vvmult::random::{random_band_limited, random_field, random_symbol, trial_rng};
use vvmult::spaces::{lp_lq_norm, VectorField, DEFAULT_BAND_CONSTANT};
use vvmult::spectral::{band_project, bessel_potential, convolve, GridSpec, SampledFunction};

fn noise(grid: GridSpec, seed: u64) -> SampledFunction {
    let mut rng = trial_rng(seed, 0);
    let samples = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SampledFunction::new(grid, samples).unwrap()
}

fn grid_1d() -> GridSpec {
    GridSpec::new(1, 256, 4.0).unwrap()
}

fn field(seed: u64) -> VectorField {
    random_field(
        grid_1d(),
        0,
        3,
        DEFAULT_BAND_CONSTANT,
        &mut trial_rng(seed, 1),
    )
    .unwrap()
}

fn field_sum(a: &VectorField, c: Complex64, b: &VectorField) -> VectorField {
    let comps = a
        .iter()
        .zip(b.iter())
        .map(|((_, f), (_, g))| f.add_scaled(c, g).unwrap())
        .collect();
    VectorField::new(*a.grid(), a.k_min(), comps, a.band_constant()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plancherel(seed in any::<u64>(), dim in 1usize..=2) {
        let grid = GridSpec::new(dim, if dim == 1 { 512 } else { 64 }, 2.0).unwrap();
        let f = noise(grid, seed);
        let (a, b) = (f.lp_norm(2.0), f.spectrum().lp_norm(2.0));
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn hausdorff_young(seed in any::<u64>(), r in 1.01f64..1.99) {
        let f = noise(grid_1d(), seed);
        let dual = r / (r - 1.0);
        prop_assert!(f.spectrum().lp_norm(dual) <= f.lp_norm(r) * (1.0 + 1e-6));
    }

    #[test]
    fn band_projection_is_orthogonal(seed in any::<u64>(), radius in 0.5f64..15.0) {
        let f = noise(grid_1d(), seed);
        let g = noise(grid_1d(), seed.wrapping_add(1));
        let pf = band_project(&f, radius).unwrap();
        prop_assert!(band_project(&pf, radius).unwrap().max_abs_diff(&pf).unwrap() < 1e-12);
        let lhs = pf.inner(&g).unwrap();
        let rhs = f.inner(&band_project(&g, radius).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn bessel_potential_commutes_with_convolution(seed in any::<u64>(), s in -1.0f64..2.0) {
        let f = noise(grid_1d(), seed);
        let g = random_band_limited(grid_1d(), 4.0, &mut trial_rng(seed, 2)).unwrap();
        let a = bessel_potential(&convolve(&f, &g).unwrap(), s);
        let b = convolve(&bessel_potential(&f, s), &g).unwrap();
        let scale = a.lp_norm(f64::INFINITY);
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn frame_supports(k in -4i32..6, t in 0.0f64..1.0) {
        let xi = 2f64.powi(k + 2) * t;
        let (lo, hi) = (2f64.powi(k - 1), 2f64.powi(k + 1));
        if xi <= lo || xi >= hi {
            prop_assert_eq!(phi_k_hat(k, [xi, 0.0]), 0.0);
        }
        if xi >= 2f64.powi(k) {
            prop_assert_eq!(psi_k_hat(k, [xi, 0.0]), 0.0);
        }
    }

    #[test]
    fn cube_nesting(k in -6i32..8, a in -500i64..500, b in -500i64..500, up in 0i32..6) {
        let q = DyadicCube::new(2, k, [a, b]);
        let nu = k - up;
        let parent = q.ancestor(nu).unwrap();
        prop_assert!(q.is_within(&parent));
        let containing: Vec<DyadicCube> = parent.parent().children().into_iter().filter(|p| p.contains(&q)).collect();
        prop_assert_eq!(containing, vec![parent]);
        let star = q.dilate(9);
        prop_assert!(star.contains_cube(&q));
        prop_assert!(q.dilate(81).contains(&star));
    }

    #[test]
    fn lq_monotonicity(seed in any::<u64>(), p in 0.5f64..4.0, q0 in 0.5f64..4.0, dq in 0.0f64..4.0) {
        let f = field(seed);
        let small = lp_lq_norm(&f, p, q0 + dq).unwrap();
        let large = lp_lq_norm(&f, p, q0).unwrap();
        prop_assert!(small <= large * (1.0 + 1e-12));
        prop_assert!(lp_lq_norm(&f, p, f64::INFINITY).unwrap() <= small * (1.0 + 1e-12));
    }

    #[test]
    fn dyadic_sharp_is_dominated(seed in any::<u64>()) {
        let f = noise(GridSpec::new(1, 64, 2.0).unwrap(), seed);
        let sharp = dyadic_sharp(&f).unwrap();
        let max = dyadic_maximal(&f).unwrap();
        for (s, m) in sharp.samples().iter().zip(max.samples()) {
            prop_assert!(s.re <= 2.0 * m.re * (1.0 + 1e-12));
        }
    }

    #[test]
    fn apply_family_is_bilinear(seed in any::<u64>(), cr in -2.0f64..2.0, ci in -2.0f64..2.0) {
        let c = Complex64::new(cr, ci);
        let sg = default_symbol_grid(1);
        let mut rng = trial_rng(seed, 3);
        let mut m1 = MultiplierFamily::new(sg);
        let mut m2 = MultiplierFamily::new(sg);
        for k in 0..=3 {
            let (s1, s2) = (random_symbol(1, 2.0, &mut rng), random_symbol(1, 2.0, &mut rng));
            let d = 2f64.powi(-k);
            m1.insert(k, move |xi| s1([xi[0] * d, xi[1] * d]));
            m2.insert(k, move |xi| s2([xi[0] * d, xi[1] * d]));
        }
        let (f, g) = (field(seed), field(seed.wrapping_add(7)));
        let lhs = apply_family(&m1, &field_sum(&f, c, &g)).unwrap();
        let rhs = field_sum(&apply_family(&m1, &f).unwrap(), c, &apply_family(&m1, &g).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * (1.0 + c.norm()));
        let lhs = apply_family(&m1.add_scaled(c, &m2), &f).unwrap();
        let rhs = field_sum(&apply_family(&m1, &f).unwrap(), c, &apply_family(&m2, &f).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * (1.0 + c.norm()));
    }

    #[test]
    fn h_is_submultiplicative_up_to_constant(
        x in -16.0f64..16.0, y in -16.0f64..16.0, t in 0.5f64..2.0, gamma in 0.1f64..4.0,
    ) {
        // 1 + |x-y|^2 <= 2 (1 + |x|^2)(1 + |y|^2) and the same for the log factor
        // with 1 + ln 2 give the constant
        let c = 2f64.powf(-t / 2.0) * (1.0 + 2f64.ln()).powf(-gamma / 2.0);
        let lhs = h_value(t, gamma, (x - y).abs());
        prop_assert!(lhs >= c * h_value(t, gamma, x.abs()) * h_value(t, gamma, y.abs()));
    }

    #[test]
    fn atoms_reconstruct_exactly(seed in any::<u64>(), p in 0.3f64..=1.0, dq in 0.0f64..3.0, dim in 1usize..=2) {
        let grid = GridSpec::new(dim, if dim == 1 { 64 } else { 16 }, 2.0).unwrap();
        let b = random_coefficients(&grid, -1, 2, &mut trial_rng(seed, 4)).unwrap();
        let q = p + dq;
        let terms = decompose_atoms(&b, p, q).unwrap();
        prop_assert!(terms.iter().all(|t| verify_atom(&t.atom)));
        let rebuilt = reconstruct(&terms, dim, 1).unwrap();
        for (cube, v) in b.support() {
            prop_assert_eq!(rebuilt.get(cube), *v);
        }
        prop_assert_eq!(rebuilt.support().count(), b.support().count());
    }
}

#[test]
fn literal_product_bound_fails_near_origin() {
    // H(x - y) >= H(x) H(y) without a constant is false for small |x| = |y|
    let (t, gamma, x) = (1.0, 1.6, 0.05);
    assert!(h_value(t, gamma, 2.0 * x) < h_value(t, gamma, x).powi(2));
    assert!(h_value(t, gamma, 2.0) >= h_value(t, gamma, 1.0).powi(2));
}
