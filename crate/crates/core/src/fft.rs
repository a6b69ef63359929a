//! Separable n-dimensional complex FFT over row-major buffers, backed by a
//! process-wide `rustfft` planner so plans are built once per length.

use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Unnormalized transform of a `dim`-dimensional cube of side `n`, in place.
pub(crate) fn transform(data: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = planner().lock().unwrap().plan_fft(n, direction);
    match dim {
        1 => fft.process(data),
        2 => {
            // rows are contiguous
            fft.process(data);
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    column[r] = data[r * n + c];
                }
                fft.process(&mut column);
                for r in 0..n {
                    data[r * n + c] = column[r];
                }
            }
        }
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}
