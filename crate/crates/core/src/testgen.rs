//! Deterministic test signals: the three-component complex signal (noise
//! band, rectangular-spectrum pulse, complex exponent), ADC quantization,
//! jittered time grids, random sample removal, and a real-valued surrogate
//! of the Marple & Kay data set.
//!
//! All randomness comes from [`Xoshiro256PlusPlus`] seeded with the caller's
//! seed, so every generator is bit-reproducible across platforms.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{EdftError, Result};
use crate::signal::{csv_io::fmt_f64, make_uniform_times, FrequencyGrid, SampledSequence};

pub type TestRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> TestRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Spectral shape of a band component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandShape {
    Flat,
    /// Half-sine hump, zero at the band edges and `density` in the middle.
    Hump,
}

/// One component of a true (generating) spectrum. Powers are mean powers,
/// densities are power per Hz.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralComponent {
    Line { freq: f64, power: f64 },
    Band { lo: f64, hi: f64, density: f64, shape: BandShape },
    Floor { density: f64 },
}

impl SpectralComponent {
    fn density_at(&self, f: f64) -> f64 {
        match *self {
            SpectralComponent::Line { .. } => 0.0,
            SpectralComponent::Band { lo, hi, density, shape } => {
                if f < lo || f >= hi {
                    0.0
                } else {
                    match shape {
                        BandShape::Flat => density,
                        BandShape::Hump => density * (PI * (f - lo) / (hi - lo)).sin(),
                    }
                }
            }
            SpectralComponent::Floor { density } => density,
        }
    }
}

/// Analytic description of the spectrum a generator draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueSpectrum {
    pub components: Vec<SpectralComponent>,
    pub upper_freq: f64,
}

impl TrueSpectrum {
    fn bin_width(&self, grid: &FrequencyGrid) -> f64 {
        grid.spacing().unwrap_or(2.0 * self.upper_freq / grid.len() as f64)
    }

    /// Power falling into each grid bin.
    pub fn per_bin_power(&self, grid: &FrequencyGrid) -> Vec<f64> {
        let df = self.bin_width(grid);
        let mut p: Vec<f64> = grid
            .freqs()
            .iter()
            .map(|&f| self.components.iter().map(|c| c.density_at(f)).sum::<f64>() * df)
            .collect();
        for c in &self.components {
            if let SpectralComponent::Line { freq, power } = *c {
                if freq.abs() <= grid.upper_freq() {
                    p[grid.nearest_index(freq)] += power;
                }
            }
        }
        p
    }

    /// Power density per bin (power/Hz), lines spread over their bin.
    pub fn psd(&self, grid: &FrequencyGrid) -> Vec<f64> {
        let df = self.bin_width(grid);
        self.per_bin_power(grid).into_iter().map(|p| p / df).collect()
    }

    /// Weights in `|S|²` units: a line keeps its power, continuous parts
    /// contribute their power within one resolution cell `1/(K·T)`.
    pub fn weights(&self, grid: &FrequencyGrid, resolution_cell: f64) -> Vec<f64> {
        let mut w: Vec<f64> = grid
            .freqs()
            .iter()
            .map(|&f| self.components.iter().map(|c| c.density_at(f)).sum::<f64>() * resolution_cell)
            .collect();
        for c in &self.components {
            if let SpectralComponent::Line { freq, power } = *c {
                if freq.abs() <= grid.upper_freq() {
                    w[grid.nearest_index(freq)] += power;
                }
            }
        }
        w
    }

    /// Writes `f,psd_db` in ascending frequency order.
    pub fn write_csv<W: Write>(&self, grid: &FrequencyGrid, out: W) -> Result<()> {
        let psd = self.psd(grid);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["f", "psd_db"])?;
        for i in grid.ascending_order() {
            w.write_record([fmt_f64(grid.freqs()[i]), fmt_f64(10.0 * psd[i].log10())])?;
        }
        w.flush().map_err(|e| EdftError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Parameters of the three-component complex test signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSignalSpec {
    pub noise_band: Option<(f64, f64)>,
    pub noise_density: f64,
    pub pulse_band: Option<(f64, f64)>,
    pub pulse_density: f64,
    pub exponent_freq: Option<f64>,
    pub exponent_power: f64,
    pub k: usize,
    pub period: f64,
    /// ADC resolution; `None` leaves the signal unquantized.
    pub adc_bits: Option<u32>,
    /// Quantizer full scale; `None` uses four times the signal RMS.
    pub adc_full_scale: Option<f64>,
    pub seed: u64,
}

impl Default for TestSignalSpec {
    fn default() -> Self {
        Self {
            noise_band: Some((-0.5, -0.25)),
            noise_density: 1.0,
            pulse_band: Some((0.0, 0.25)),
            pulse_density: 1.0,
            exponent_freq: Some(0.35),
            exponent_power: 1.0,
            k: 64,
            period: 1.0,
            adc_bits: Some(10),
            adc_full_scale: None,
            seed: 0,
        }
    }
}

impl TestSignalSpec {
    /// A lone exponent of the given power, no ADC.
    pub fn exponent_only(freq: f64, power: f64, k: usize, seed: u64) -> Self {
        Self {
            noise_band: None,
            pulse_band: None,
            exponent_freq: Some(freq),
            exponent_power: power,
            k,
            adc_bits: None,
            seed,
            ..Self::default()
        }
    }

    pub fn upper_freq(&self) -> f64 {
        0.5 / self.period
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(EdftError::InvalidArgument("K must be positive".into()));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(EdftError::InvalidArgument("sampling period must be positive".into()));
        }
        let fu = self.upper_freq();
        for (lo, hi) in [self.noise_band, self.pulse_band].into_iter().flatten() {
            if !(lo < hi) || lo < -fu || hi > fu {
                return Err(EdftError::InvalidBand { lo, hi });
            }
        }
        if let Some(f) = self.exponent_freq {
            if !(f.abs() <= fu) {
                return Err(EdftError::InvalidBand { lo: f, hi: f });
            }
        }
        if self.adc_bits == Some(0) || self.adc_bits.is_some_and(|b| b > 62) {
            return Err(EdftError::InvalidArgument("ADC bits must be within 1..=62".into()));
        }
        if !(self.noise_density >= 0.0 && self.pulse_density >= 0.0 && self.exponent_power >= 0.0) {
            return Err(EdftError::InvalidArgument("powers must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TestSignal {
    pub sequence: SampledSequence,
    pub truth: TrueSpectrum,
    /// Full scale used by the quantizer, if one was applied.
    pub full_scale: Option<f64>,
}

/// Mode spacing of the synthesized noise relative to `1/(K·T)`.
const NOISE_MODES_PER_CELL: usize = 8;

/// Generates the test signal on the uniform grid `0, T, ..., (K-1)T`.
pub fn gen_complex_test_signal(spec: &TestSignalSpec) -> Result<TestSignal> {
    spec.validate()?;
    let times = make_uniform_times(spec.k, spec.period)?;
    gen_complex_test_signal_at(spec, &times)
}

/// Generates the same realization as [`gen_complex_test_signal`] (same
/// spec, same seed) evaluated at arbitrary increasing times.
///
/// The noise band is a sum of closely spaced exponentials with complex
/// Gaussian coefficients; the pulse has a flat spectrum over its band and
/// is centred in the observation window; the exponent has a random phase.
pub fn gen_complex_test_signal_at(spec: &TestSignalSpec, times: &[f64]) -> Result<TestSignal> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let mut values = vec![Complex64::new(0.0, 0.0); times.len()];
    let mut components = Vec::new();
    let window = spec.k as f64 * spec.period;

    if let Some((lo, hi)) = spec.noise_band {
        let df = 1.0 / (window * NOISE_MODES_PER_CELL as f64);
        let modes = ((hi - lo) / df).round().max(1.0) as usize;
        let df = (hi - lo) / modes as f64;
        let sigma = (spec.noise_density * df / 2.0).sqrt();
        for m in 0..modes {
            let f = lo + (m as f64 + 0.5) * df;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(re, im) * sigma;
            for (v, &t) in values.iter_mut().zip(times) {
                *v += c * Complex64::from_polar(1.0, 2.0 * PI * f * t);
            }
        }
        components.push(SpectralComponent::Band { lo, hi, density: spec.noise_density, shape: BandShape::Flat });
    }

    if let Some((lo, hi)) = spec.pulse_band {
        // Energy density A² spread over the window gives power density A²/(K·T).
        let amp = (spec.pulse_density * window).sqrt();
        let centre = (spec.k as f64 - 1.0) * spec.period / 2.0;
        for (v, &t) in values.iter_mut().zip(times) {
            let tau = t - centre;
            *v += if tau.abs() < 1e-12 {
                Complex64::new(amp * (hi - lo), 0.0)
            } else {
                let num = Complex64::from_polar(1.0, 2.0 * PI * hi * tau) - Complex64::from_polar(1.0, 2.0 * PI * lo * tau);
                amp * num / Complex64::new(0.0, 2.0 * PI * tau)
            };
        }
        components.push(SpectralComponent::Band { lo, hi, density: spec.pulse_density, shape: BandShape::Flat });
    }

    if let Some(f0) = spec.exponent_freq {
        let phase = rng.random_range(0.0..2.0 * PI);
        let a = spec.exponent_power.sqrt();
        for (v, &t) in values.iter_mut().zip(times) {
            *v += Complex64::from_polar(a, 2.0 * PI * f0 * t + phase);
        }
        components.push(SpectralComponent::Line { freq: f0, power: spec.exponent_power });
    }

    let mut full_scale = None;
    if let Some(bits) = spec.adc_bits {
        let fs = match spec.adc_full_scale {
            Some(fs) => fs,
            None => 4.0 * rms(&values),
        };
        if fs > 0.0 {
            values = values.iter().map(|&v| quantize(v, bits, fs)).collect();
            let step = 2.0 * fs / 2f64.powi(bits as i32);
            components.push(SpectralComponent::Floor { density: step * step / 6.0 / (2.0 * spec.upper_freq()) });
            full_scale = Some(fs);
        }
    }

    let sequence = SampledSequence::from_times(values, times.to_vec())?;
    Ok(TestSignal { sequence, truth: TrueSpectrum { components, upper_freq: spec.upper_freq() }, full_scale })
}

fn rms(values: &[Complex64]) -> f64 {
    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len().max(1) as f64).sqrt()
}

fn quantize_component(v: f64, step: f64, full_scale: f64) -> f64 {
    let top = full_scale - step / 2.0;
    ((v / step).floor() * step + step / 2.0).clamp(-top, top)
}

fn quantize(v: Complex64, bits: u32, full_scale: f64) -> Complex64 {
    let step = 2.0 * full_scale / 2f64.powi(bits as i32);
    Complex64::new(quantize_component(v.re, step, full_scale), quantize_component(v.im, step, full_scale))
}

/// Mid-rise quantizer with `2^bits` levels spanning `[-full_scale, full_scale]`,
/// applied independently to real and imaginary parts. Missing samples stay
/// missing.
pub fn adc_quantize(x: &SampledSequence, bits: u32, full_scale: f64) -> Result<SampledSequence> {
    if bits == 0 || bits > 62 {
        return Err(EdftError::InvalidArgument("ADC bits must be within 1..=62".into()));
    }
    if !(full_scale > 0.0) || !full_scale.is_finite() {
        return Err(EdftError::InvalidArgument("full scale must be positive".into()));
    }
    let values = x.values().iter().map(|&v| quantize(v, bits, full_scale)).collect();
    SampledSequence::new(values, x.times().to_vec(), x.known_mask().to_vec())
}

/// `t_k = k·T + τ_k` with `τ_k` uniform on `[0, jitter_range]`.
pub fn gen_jittered_times(k: usize, period: f64, jitter_range: f64, seed: u64) -> Result<Vec<f64>> {
    let mut times = make_uniform_times(k, period)?;
    if !(jitter_range >= 0.0) || !jitter_range.is_finite() {
        return Err(EdftError::InvalidArgument("jitter range must be nonnegative".into()));
    }
    if jitter_range > 0.0 {
        let mut rng = rng_from_seed(seed);
        for t in times.iter_mut() {
            *t += rng.random_range(0.0..=jitter_range);
        }
    }
    if let Some(i) = (1..k).find(|&i| times[i] <= times[i - 1]) {
        return Err(EdftError::MonotonicityViolated { index: i });
    }
    Ok(times)
}

/// Jitter given as a fraction of the sampling period: `t_k = (k + jitter·u_k)·T`,
/// `u_k` uniform on `[0, 1]`.
pub fn gen_jittered_times_relative(k: usize, period: f64, jitter: f64, seed: u64) -> Result<Vec<f64>> {
    gen_jittered_times(k, period, jitter * period, seed)
}

#[derive(Debug, Clone)]
pub struct SkipResult {
    /// Original slots with the removed samples masked out.
    pub gapped: SampledSequence,
    /// Only the remaining samples, as a nonuniform sequence.
    pub nonuniform: SampledSequence,
    /// `K·T / (K - removed)`.
    pub mean_period: f64,
    pub removed: Vec<usize>,
}

/// Marks `n_remove` randomly chosen known samples as missing.
pub fn random_skip(x: &SampledSequence, n_remove: usize, seed: u64) -> Result<SkipResult> {
    let known = x.known_indices();
    if n_remove >= known.len() {
        return Err(EdftError::TooManyRemovals { requested: n_remove, known: known.len() });
    }
    let mut rng = rng_from_seed(seed);
    let mut removed: Vec<usize> = index::sample(&mut rng, known.len(), n_remove).into_iter().map(|i| known[i]).collect();
    removed.sort_unstable();
    let mut mask = x.known_mask().to_vec();
    for &i in &removed {
        mask[i] = false;
    }
    let gapped = x.with_mask(mask)?;
    let nonuniform = gapped.known_subsequence();
    let mean_period = gapped.mean_period();
    Ok(SkipResult { gapped, nonuniform, mean_period, removed })
}

/// Length of the Marple & Kay record.
pub const MARPLE_KAY_LEN: usize = 64;

/// Levels of the surrogate's coloured noise and white floor.
const MK_NOISE_PEAK_DENSITY: f64 = 0.3;
const MK_WHITE_POWER: f64 = 1e-3;

/// Real 64-sample surrogate of the Marple & Kay process: unit-power
/// sinusoids at 0.2 and 0.21 Hz, a 0.1-power sinusoid at 0.1 Hz, coloured
/// noise in 0.2–0.5 Hz and a weak white floor. `T = 1 s`.
pub fn gen_marple_kay_surrogate(seed: u64) -> Result<TestSignal> {
    let mut rng = rng_from_seed(seed);
    let times = make_uniform_times(MARPLE_KAY_LEN, 1.0)?;
    let mut values = vec![0.0f64; MARPLE_KAY_LEN];
    let mut components = Vec::new();

    for (freq, power) in [(0.2, 1.0), (0.21, 1.0), (0.1, 0.1)] {
        let phase = rng.random_range(0.0..2.0 * PI);
        let amp = (2.0 * power as f64).sqrt();
        for (v, &t) in values.iter_mut().zip(&times) {
            *v += amp * (2.0 * PI * freq * t + phase).cos();
        }
        components.push(SpectralComponent::Line { freq, power: power / 2.0 });
        components.push(SpectralComponent::Line { freq: -freq, power: power / 2.0 });
    }

    let (lo, hi) = (0.2, 0.5);
    let df = 1.0 / (MARPLE_KAY_LEN * NOISE_MODES_PER_CELL) as f64;
    let modes = ((hi - lo) / df).round() as usize;
    let shape = SpectralComponent::Band { lo, hi, density: MK_NOISE_PEAK_DENSITY, shape: BandShape::Hump };
    for m in 0..modes {
        let f = lo + (m as f64 + 0.5) * df;
        // Two-sided density d(f) at ±f: the real mode carries 2·d(f)·df.
        let sigma = (2.0 * shape.density_at(f) * df).sqrt();
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        for (v, &t) in values.iter_mut().zip(&times) {
            *v += sigma * (a * (2.0 * PI * f * t).cos() + b * (2.0 * PI * f * t).sin());
        }
    }
    components.push(shape);
    components.push(SpectralComponent::Band { lo: -hi, hi: -lo, density: MK_NOISE_PEAK_DENSITY, shape: BandShape::Hump });

    let white = MK_WHITE_POWER.sqrt();
    for v in values.iter_mut() {
        let n: f64 = StandardNormal.sample(&mut rng);
        *v += white * n;
    }
    components.push(SpectralComponent::Floor { density: MK_WHITE_POWER });

    let sequence = SampledSequence::uniform(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), 1.0)?;
    Ok(TestSignal { sequence, truth: TrueSpectrum { components, upper_freq: 0.5 }, full_scale: None })
}
