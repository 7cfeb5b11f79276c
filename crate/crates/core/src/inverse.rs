//! Inverse transforms: recovery of the input samples, interpolation of gaps
//! and extrapolation beyond the analysed window.

use num_complex::Complex64;

use crate::error::{EdftError, Result};
use crate::kernel::{unit_exponent, FftPair};
use crate::signal::{FrequencyGrid, GridKind};

/// `y_m = (1/N)·Σ_n F_n·exp(+j2π f_n t_m)` at arbitrary output times.
pub fn inedft(f: &[Complex64], grid: &FrequencyGrid, out_times: &[f64]) -> Result<Vec<Complex64>> {
    let n = grid.len();
    if f.len() != n {
        return Err(EdftError::DimensionMismatch(format!("{} spectrum values for {n} frequencies", f.len())));
    }
    if let Some(i) = out_times.iter().position(|t| !t.is_finite()) {
        return Err(EdftError::InfValue { index: i });
    }
    let scale = 1.0 / n as f64;
    Ok(out_times
        .iter()
        .map(|&t| {
            f.iter().zip(grid.freqs()).map(|(v, &fr)| v * unit_exponent(fr, t).conj()).sum::<Complex64>() * scale
        })
        .collect())
}

/// N-point inverse transform of `F` on a uniform FFT grid: sample `k` is the
/// signal at `t = k/(2·f_u)`. The first `K` entries reproduce the analysed
/// samples, the following ones extrapolate forward and the last ones
/// backward (periodically).
pub fn extrapolate_uniform(f: &[Complex64], grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    if grid.kind() != GridKind::UniformFft {
        return Err(EdftError::InvalidArgument("extrapolate_uniform needs a uniform FFT grid".into()));
    }
    if f.len() != grid.len() {
        return Err(EdftError::DimensionMismatch(format!("{} spectrum values for {} frequencies", f.len(), grid.len())));
    }
    Ok(FftPair::new(grid.len()).inverse(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::classical_dft;
    use crate::engine::{run_edft, EngineOptions};
    use crate::signal::SampledSequence;
    use std::f64::consts::PI;

    fn exponent(k: usize, f0: f64) -> Vec<Complex64> {
        (0..k).map(|t| Complex64::from_polar(1.0, 2.0 * PI * f0 * t as f64)).collect()
    }

    #[test]
    fn zeros_map_to_zeros() {
        let grid = FrequencyGrid::uniform(8, 0.5).unwrap();
        let y = inedft(&[Complex64::new(0.0, 0.0); 8], &grid, &[0.0, 1.5, -3.0]).unwrap();
        assert!(y.iter().all(|z| z.norm() == 0.0));
        assert!(inedft(&[Complex64::new(0.0, 0.0); 7], &grid, &[0.0]).is_err());
    }

    #[test]
    fn inverse_matches_fft_on_integer_times() {
        let grid = FrequencyGrid::uniform(10, 0.5).unwrap();
        let f: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let times: Vec<f64> = (0..10).map(|t| t as f64).collect();
        let a = inedft(&f, &grid, &times).unwrap();
        let b = extrapolate_uniform(&f, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn classical_dft_extrapolates_zeros() {
        let x = SampledSequence::uniform(exponent(8, 0.13), 1.0).unwrap();
        let grid = FrequencyGrid::uniform(40, 0.5).unwrap();
        let (f, _) = classical_dft(&x, &grid).unwrap();
        let y = extrapolate_uniform(&f, &grid).unwrap();
        for k in 0..8 {
            assert!((y[k] - x.values()[k]).norm() < 1e-12);
        }
        assert!(y[8..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn edft_extrapolation_continues_exponent() {
        let n = 128;
        let k = 16;
        let grid = FrequencyGrid::uniform(n, 0.5).unwrap();
        let f0 = grid.freqs()[20];
        let x = SampledSequence::uniform(exponent(k, f0), 1.0).unwrap();
        let res = run_edft(&x, &grid, &EngineOptions::default().with_max_iterations(10)).unwrap();
        let y = extrapolate_uniform(&res.f, &grid).unwrap();
        let truth = exponent(2 * k, f0);
        for t in k..2 * k {
            assert!((y[t] - truth[t]).norm() < 0.1, "t {t}: {}", (y[t] - truth[t]).norm());
        }
    }

    #[test]
    fn square_case_is_identity() {
        let vals: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64 * 0.3, -1.0)).collect();
        let x = SampledSequence::uniform(vals.clone(), 1.0).unwrap();
        let grid = FrequencyGrid::uniform(6, 0.5).unwrap();
        let res = run_edft(&x, &grid, &EngineOptions::default()).unwrap();
        let y = extrapolate_uniform(&res.f, &grid).unwrap();
        for (a, b) in y.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn linearity() {
        let grid = FrequencyGrid::uniform(12, 0.5).unwrap();
        let f1: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 0.5)).collect();
        let f2: Vec<Complex64> = (0..12).map(|i| Complex64::new(-0.25, (i * i) as f64)).collect();
        let (a, b) = (Complex64::new(2.0, -1.0), Complex64::new(0.5, 3.0));
        let mix: Vec<Complex64> = f1.iter().zip(&f2).map(|(x, y)| a * x + b * y).collect();
        let times = [0.0, 0.7, 3.3, 11.0];
        let y1 = inedft(&f1, &grid, &times).unwrap();
        let y2 = inedft(&f2, &grid, &times).unwrap();
        let ym = inedft(&mix, &grid, &times).unwrap();
        for i in 0..times.len() {
            let expect = a * y1[i] + b * y2[i];
            assert!((ym[i] - expect).norm() <= 1e-12 * expect.norm().max(1.0));
        }
    }
}
