//! Adaptive Simpson quadrature on finite intervals.

/// `\int_a^b f` to relative tolerance `rel_tol`, refining each panel until the
/// Simpson/Richardson error estimate is below its share of the tolerance.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, rel_tol);
    }
    // coarse pass over 64 panels sets the absolute scale of the tolerance
    let panels = 64;
    let h = (b - a) / panels as f64;
    let pieces: Vec<(f64, f64, f64, f64, f64, f64)> = (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            (lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb))
        })
        .collect();
    let rough: f64 = pieces.iter().map(|p| p.5.abs()).sum();
    let tol = rel_tol * rough.max(f64::MIN_POSITIVE);
    pieces
        .iter()
        .map(|&(lo, hi, fa, fm, fb, whole)| {
            refine(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 50)
        })
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
