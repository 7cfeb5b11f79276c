//! Sequences, sampling-time vectors and analysis frequency grids.
//!
//! Times are seconds, frequencies Hz. Kernels convert to angular frequency
//! (`2πf`) where they build exponentials.

use num_complex::Complex64;

use crate::error::{EdftError, Result};

/// Relative tolerance used to decide whether a time vector is uniform.
const UNIFORM_REL_TOL: f64 = 1e-9;

/// K complex samples with their sampling instants and a presence mask.
///
/// Missing samples keep their time slot; their stored value is zero and is
/// never read.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSequence {
    values: Vec<Complex64>,
    times: Vec<f64>,
    known_mask: Vec<bool>,
}

impl SampledSequence {
    /// Builds a sequence from parallel vectors. Values at masked-out
    /// positions are replaced by zero.
    pub fn new(values: Vec<Complex64>, times: Vec<f64>, known_mask: Vec<bool>) -> Result<Self> {
        if values.len() != times.len() || values.len() != known_mask.len() {
            return Err(EdftError::DimensionMismatch(format!(
                "values {}, times {}, mask {}",
                values.len(),
                times.len(),
                known_mask.len()
            )));
        }
        let values = values
            .into_iter()
            .zip(&known_mask)
            .map(|(v, &known)| if known { v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(Self { values, times, known_mask })
    }

    /// Fully known sequence at the given times.
    pub fn from_times(values: Vec<Complex64>, times: Vec<f64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::new(values, times, mask)
    }

    /// Fully known sequence sampled at `0, T, 2T, ...`.
    pub fn uniform(values: Vec<Complex64>, period: f64) -> Result<Self> {
        let times = make_uniform_times(values.len(), period)?;
        Self::from_times(values, times)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn known_mask(&self) -> &[bool] {
        &self.known_mask
    }

    pub fn known_count(&self) -> usize {
        self.known_mask.iter().filter(|&&k| k).count()
    }

    pub fn has_gaps(&self) -> bool {
        self.known_mask.iter().any(|&k| !k)
    }

    /// Indices of the known samples.
    pub fn known_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.known_mask[i]).collect()
    }

    /// Known samples only, with their times; the nonuniform view of a gapped
    /// sequence.
    pub fn known_subsequence(&self) -> SampledSequence {
        let idx = self.known_indices();
        SampledSequence {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            times: idx.iter().map(|&i| self.times[i]).collect(),
            known_mask: vec![true; idx.len()],
        }
    }

    /// Known values in time order.
    pub fn known_values(&self) -> Vec<Complex64> {
        self.known_indices().iter().map(|&i| self.values[i]).collect()
    }

    /// Known sampling times in order.
    pub fn known_times(&self) -> Vec<f64> {
        self.known_indices().iter().map(|&i| self.times[i]).collect()
    }

    /// Keeps the slots up to and including the `count`-th known sample.
    pub fn truncate_known(&self, count: usize) -> SampledSequence {
        let mut seen = 0;
        let mut end = 0;
        for (i, &k) in self.known_mask.iter().enumerate() {
            if seen == count {
                break;
            }
            end = i + 1;
            if k {
                seen += 1;
            }
        }
        SampledSequence {
            values: self.values[..end].to_vec(),
            times: self.times[..end].to_vec(),
            known_mask: self.known_mask[..end].to_vec(),
        }
    }

    /// Copy with a different presence mask.
    pub fn with_mask(&self, known_mask: Vec<bool>) -> Result<Self> {
        Self::new(self.values.clone(), self.times.clone(), known_mask)
    }

    /// Uniform-grid description when every slot (known or missing) lies on
    /// `t0 + kT`.
    pub fn uniform_descriptor(&self) -> Option<UniformGridDescriptor> {
        uniform_descriptor(&self.times)
    }

    /// Mean sampling period of the known samples: observation span over the
    /// number of known samples, `K·T / K_known` for a uniform grid.
    pub fn mean_period(&self) -> f64 {
        let known = self.known_count();
        if known == 0 {
            return 0.0;
        }
        match self.uniform_descriptor() {
            Some(d) => d.sample_period * self.len() as f64 / known as f64,
            None => {
                let t = self.known_times();
                if t.len() < 2 {
                    1.0
                } else {
                    (t[t.len() - 1] - t[0]) * t.len() as f64 / ((t.len() - 1) * t.len()) as f64
                }
            }
        }
    }
}

/// Uniform time grid `t_k = t0 + k·T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGridDescriptor {
    pub sample_period: f64,
    pub t0: f64,
}

fn uniform_descriptor(times: &[f64]) -> Option<UniformGridDescriptor> {
    if times.len() < 2 {
        return None;
    }
    let t0 = times[0];
    let period = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    if !(period > 0.0) {
        return None;
    }
    let tol = UNIFORM_REL_TOL * period.max(t0.abs());
    let uniform = times
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - (t0 + k as f64 * period)).abs() <= tol);
    uniform.then_some(UniformGridDescriptor { sample_period: period, t0 })
}

/// Returns `[0, T, 2T, ..., (K-1)T]`.
pub fn make_uniform_times(count: usize, period: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(EdftError::InvalidArgument("sample count must be positive".into()));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(EdftError::InvalidArgument(format!("sampling period must be positive, got {period}")));
    }
    Ok((0..count).map(|k| k as f64 * period).collect())
}

/// Checks that known values are finite, times strictly increasing and at
/// least one sample present.
pub fn validate_sequence(seq: &SampledSequence) -> Result<()> {
    if seq.known_count() == 0 {
        return Err(EdftError::EmptySequence);
    }
    for (i, (v, &known)) in seq.values.iter().zip(&seq.known_mask).enumerate() {
        if known && !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EdftError::InfValue { index: i });
        }
    }
    for (i, &t) in seq.times.iter().enumerate() {
        if !t.is_finite() {
            return Err(EdftError::NonMonotonicTimes { index: i });
        }
    }
    if let Some(i) = seq.times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(EdftError::NonMonotonicTimes { index: i + 1 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    UniformFft,
    Arbitrary,
}

/// Analysis frequencies in Hz.
///
/// A uniform grid is stored in DFT index order: entry `n` is `n·2f_u/N`
/// wrapped into `[-f_u, f_u)`, so index `n` lines up with bin `n` of an
/// N-point FFT.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
    upper_freq: f64,
    kind: GridKind,
}

impl FrequencyGrid {
    pub fn uniform(n: usize, upper_freq: f64) -> Result<Self> {
        if n == 0 {
            return Err(EdftError::InvalidArgument("frequency grid needs at least one point".into()));
        }
        if !(upper_freq > 0.0) || !upper_freq.is_finite() {
            return Err(EdftError::InvalidArgument(format!("upper frequency must be positive, got {upper_freq}")));
        }
        let step = 2.0 * upper_freq / n as f64;
        let freqs = (0..n)
            .map(|i| if 2 * i >= n { (i as f64 - n as f64) * step } else { i as f64 * step })
            .collect();
        Ok(Self { freqs, upper_freq, kind: GridKind::UniformFft })
    }

    pub fn arbitrary(freqs: Vec<f64>, upper_freq: f64) -> Result<Self> {
        if freqs.is_empty() {
            return Err(EdftError::InvalidArgument("frequency grid needs at least one point".into()));
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(EdftError::InvalidArgument("frequencies must be finite".into()));
        }
        Ok(Self { freqs, upper_freq, kind: GridKind::Arbitrary })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn upper_freq(&self) -> f64 {
        self.upper_freq
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Spacing `2f_u/N` of a uniform grid.
    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::UniformFft => Some(2.0 * self.upper_freq / self.len() as f64),
            GridKind::Arbitrary => None,
        }
    }

    /// Index of the grid frequency closest to `f`.
    pub fn nearest_index(&self, f: f64) -> usize {
        let mut best = 0;
        for (i, &g) in self.freqs.iter().enumerate() {
            if (g - f).abs() < (self.freqs[best] - f).abs() {
                best = i;
            }
        }
        best
    }

    /// Index permutation listing the grid in ascending frequency.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.freqs[a].total_cmp(&self.freqs[b]));
        idx
    }
}

/// Reorders a DFT-ordered vector so that it runs over `[-f_u, f_u)`.
pub fn fftshift<T: Clone>(data: &[T]) -> Vec<T> {
    let n = data.len();
    let half = n.div_ceil(2);
    data[half..].iter().chain(&data[..half]).cloned().collect()
}

/// CSV sample files: header `t,re,im`, one row per slot, a missing sample
/// written as `t,,`.
pub mod csv_io {
    use std::io::{Read, Write};

    use num_complex::Complex64;

    use super::SampledSequence;
    use crate::error::{EdftError, Result};

    pub fn read_samples<R: Read>(reader: R) -> Result<SampledSequence> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expect = ["t", "re", "im"];
        if headers.len() < 3 || headers.iter().take(3).ne(expect.iter().copied()) {
            return Err(EdftError::Csv(format!("expected header t,re,im, got {:?}", headers)));
        }
        let mut values = Vec::new();
        let mut times = Vec::new();
        let mut mask = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| EdftError::Csv(format!("row {}: {e}: {s:?}", row + 2)))
            };
            times.push(parse(field(0))?);
            let (re, im) = (field(1), field(2));
            if re.is_empty() && im.is_empty() {
                values.push(Complex64::new(0.0, 0.0));
                mask.push(false);
            } else {
                let im = if im.is_empty() { 0.0 } else { parse(im)? };
                values.push(Complex64::new(parse(re)?, im));
                mask.push(true);
            }
        }
        SampledSequence::new(values, times, mask)
    }

    pub fn write_samples<W: Write>(writer: W, seq: &SampledSequence) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "re", "im"])?;
        for i in 0..seq.len() {
            let t = fmt_f64(seq.times()[i]);
            if seq.known_mask()[i] {
                let v = seq.values()[i];
                w.write_record([t, fmt_f64(v.re), fmt_f64(v.im)])?;
            } else {
                w.write_record([t, String::new(), String::new()])?;
            }
        }
        w.flush().map_err(|e| EdftError::Csv(e.to_string()))
    }

    /// Formats with 17 significant digits, locale independent.
    pub fn fmt_f64(v: f64) -> String {
        if v == 0.0 {
            "0".to_string()
        } else if v.is_finite() {
            format!("{v:.16e}")
        } else {
            format!("{v}")
        }
    }
}
