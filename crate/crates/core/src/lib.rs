//! Extended DFT spectral analysis.
//!
//! The transform adapts its basis iteratively through a diagonal weight
//! vector of estimated signal power, giving Fourier spectra whose resolution
//! can exceed the classical DFT by up to `N/K` for a K-sample sequence
//! analysed on N frequencies. Uniform, nonuniform and gapped sequences are
//! supported; the inverse transform recovers the input and extrapolates it.

pub mod baselines;
pub mod engine;
pub mod error;
pub mod inverse;
pub mod kernel;
pub mod signal;
pub mod testgen;

pub use error::{EdftError, Result};
