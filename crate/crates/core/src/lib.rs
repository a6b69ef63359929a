//! Vector-valued Fourier multipliers on sampled periodic grids.

pub mod atoms;
pub mod counterexample;
pub mod cube;
pub mod error;
pub mod experiments;
mod fft;
pub mod frames;
pub mod harness;
pub mod maximal;
pub mod multiplier;
pub mod quadrature;
pub mod random;
pub mod spaces;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
