//! Linear-algebra primitives shared by the transform engine and the
//! baseline estimators.

mod dense;
mod levinson;
mod matrix;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub use dense::{hermitian_solve, HermitianFactor, MAX_CONDITION};
pub use levinson::{levinson_toeplitz, toeplitz_apply_inverse, LevinsonState};
pub use matrix::CMatrix;

use crate::error::{EdftError, Result};
use crate::signal::{FrequencyGrid, GridKind};

/// `exp(-j2π·f·t)`, with the phase reduced modulo one cycle before scaling.
pub fn unit_exponent(f: f64, t: f64) -> Complex64 {
    let cycles = (f * t).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * cycles)
}

/// K×N matrix with entries `exp(-j2π f_n t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentMatrix {
    entries: CMatrix,
}

impl ExponentMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, k: usize, n: usize) -> Complex64 {
        self.entries[(k, n)]
    }

    /// Row vector times E.
    pub fn left_mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.entries.left_mul(x)
    }
}

pub fn build_exponent_matrix(times: &[f64], grid: &FrequencyGrid) -> Result<ExponentMatrix> {
    if times.is_empty() {
        return Err(EdftError::InvalidArgument("no sampling times".into()));
    }
    let freqs = grid.freqs();
    let entries = CMatrix::from_fn(times.len(), freqs.len(), |k, n| unit_exponent(freqs[n], times[k]));
    Ok(ExponentMatrix { entries })
}

/// The K×K correlation matrix `R = (1/N)·E·W·Eᴴ` of the signal model.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationOperator {
    /// Lag vector `r` of a Hermitian Toeplitz matrix, `R[k][l] = r[l-k]`
    /// for `l >= k`. `r[0]` is real.
    Toeplitz(Vec<Complex64>),
    DenseHermitian(CMatrix),
}

impl CorrelationOperator {
    pub fn dim(&self) -> usize {
        match self {
            CorrelationOperator::Toeplitz(r) => r.len(),
            CorrelationOperator::DenseHermitian(m) => m.rows(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            CorrelationOperator::Toeplitz(r) => {
                let k = r.len();
                CMatrix::from_fn(k, k, |i, j| if j >= i { r[j - i] } else { r[i - j].conj() })
            }
            CorrelationOperator::DenseHermitian(m) => m.clone(),
        }
    }
}

/// Counts strictly positive weights and checks the rest are nonnegative and
/// finite.
pub fn check_weights(weights: &[f64], required: usize) -> Result<()> {
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(EdftError::InvalidArgument(format!("weight {i} is negative or not finite")));
    }
    let positive = weights.iter().filter(|&&w| w > 0.0).count();
    if positive < required {
        return Err(EdftError::TooFewNonzeroWeights { positive, required });
    }
    Ok(())
}

/// Dense `R` with `r_{l,k} = (1/N)·Σ_n W_n·exp(j2π f_n (t_k - t_l))`.
pub fn correlation_dense(e: &ExponentMatrix, weights: &[f64]) -> Result<CorrelationOperator> {
    let (k, n) = (e.rows(), e.cols());
    if weights.len() != n {
        return Err(EdftError::DimensionMismatch(format!("{} weights for {n} frequencies", weights.len())));
    }
    let inv_n = 1.0 / n as f64;
    let mut r = CMatrix::zeros(k, k);
    // Scaled columns E·diag(W/N) times Eᴴ, lower triangle then mirrored.
    let scaled: Vec<Vec<Complex64>> =
        (0..k).map(|row| e.entries.row(row).iter().zip(weights).map(|(z, &w)| z * (w * inv_n)).collect()).collect();
    for l in 0..k {
        for kk in 0..=l {
            let s: Complex64 = scaled[l].iter().zip(e.entries.row(kk)).map(|(a, b)| a * b.conj()).sum();
            r[(l, kk)] = s;
            r[(kk, l)] = s.conj();
        }
        r[(l, l)] = Complex64::new(r[(l, l)].re, 0.0);
    }
    Ok(CorrelationOperator::DenseHermitian(r))
}

/// Toeplitz `R` for uniform sampling on the normalized FFT grid: the first K
/// entries of the inverse N-point transform of W.
pub fn correlation_toeplitz(weights: &[f64], k: usize, fft: &FftPair) -> Result<CorrelationOperator> {
    let n = weights.len();
    if n != fft.len() {
        return Err(EdftError::DimensionMismatch(format!("{n} weights for an {}-point transform", fft.len())));
    }
    if k > n {
        return Err(EdftError::DimensionMismatch(format!("{k} samples exceed {n} frequencies")));
    }
    let spectrum: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut r = fft.inverse(&spectrum);
    r.truncate(k);
    r[0] = Complex64::new(r[0].re, 0.0);
    Ok(CorrelationOperator::Toeplitz(r))
}

/// Builds `R` for the given sampling. The Toeplitz form is used when the
/// times are uniform with `2·f_u·T = 1` on a uniform grid.
pub fn correlation_from_weights(
    times: &[f64],
    grid: &FrequencyGrid,
    e: &ExponentMatrix,
    weights: &[f64],
) -> Result<CorrelationOperator> {
    check_weights(weights, times.len())?;
    if fft_grid_matches(times, grid) {
        correlation_toeplitz(weights, times.len(), &FftPair::new(grid.len()))
    } else {
        correlation_dense(e, weights)
    }
}

/// True when `times` lie on `t0 + kT` with `2·f_u·T = 1` and the grid is the
/// uniform FFT grid, so that `E[k][n] = exp(-j2π f_n t0)·exp(-j2πnk/N)`.
pub fn fft_grid_matches(times: &[f64], grid: &FrequencyGrid) -> bool {
    if grid.kind() != GridKind::UniformFft || times.len() < 2 {
        return false;
    }
    let t0 = times[0];
    let period = 1.0 / (2.0 * grid.upper_freq());
    let tol = 1e-9 * period.max(t0.abs());
    times.iter().enumerate().all(|(k, &t)| (t - (t0 + k as f64 * period)).abs() <= tol)
}

/// `diag(Eᴴ·R⁻¹·E)` given `RE = R⁻¹·E`; real and positive for PD `R`.
pub fn diag_quadratic_form(e: &ExponentMatrix, re: &CMatrix) -> Result<Vec<f64>> {
    if (re.rows(), re.cols()) != (e.rows(), e.cols()) {
        return Err(EdftError::DimensionMismatch(format!(
            "RE is {}x{}, E is {}x{}",
            re.rows(),
            re.cols(),
            e.rows(),
            e.cols()
        )));
    }
    let mut out = vec![0.0; e.cols()];
    for k in 0..e.rows() {
        for ((o, a), b) in out.iter_mut().zip(e.entries.row(k)).zip(re.row(k)) {
            *o += (a.conj() * b).re;
        }
    }
    if let Some(index) = out.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(EdftError::NonPositiveDiagonal { index });
    }
    Ok(out)
}

/// Forward and normalized inverse FFT plans of one length.
#[derive(Clone)]
pub struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len()).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ_k x_k exp(-j2πnk/N)`, zero-padding `x` to N.
    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        buf
    }

    /// `(1/N)·Σ_n F_n exp(j2πnk/N)`.
    pub fn inverse(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        buf[..f.len()].copy_from_slice(f);
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }
}
