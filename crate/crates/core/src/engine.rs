//! The iterative Extended DFT.
//!
//! Each iteration forms the correlation matrix `R = (1/N)·E·W·Eᴴ` from the
//! current weights and evaluates
//!
//! ```text
//! F = W ⊙ (x·R⁻¹·E)
//! S = (x·R⁻¹·E) ⊘ diag(Eᴴ·R⁻¹·E)
//! ```
//!
//! after which the weights become `|S|²`. Three interchangeable paths compute
//! `x·R⁻¹·E` and the diagonal: a Levinson/Gohberg-Semencul path for complete
//! uniform sequences on the FFT grid, a masked Toeplitz path for uniform
//! sequences with missing samples, and a dense path for anything else.
//!
//! The product `F/S = W ⊙ diag(Eᴴ·R⁻¹·E)` sums to `N·K` for every admissible
//! weight vector; the loop stops with [`StopCode::BudgetDeviation`] when the
//! computed sum drifts from that value, keeping the previous iteration's
//! output.

use num_complex::Complex64;

use crate::error::{EdftError, Result};
use crate::kernel::{
    build_exponent_matrix, check_weights, correlation_dense, diag_quadratic_form, fft_grid_matches,
    levinson_toeplitz, toeplitz_apply_inverse, unit_exponent, CMatrix, CorrelationOperator, ExponentMatrix,
    FftPair, HermitianFactor,
};
use crate::signal::{validate_sequence, FrequencyGrid, SampledSequence};

pub const DEFAULT_MAX_ITERATIONS: usize = 30;
pub const DEFAULT_REL_DEVIATION: f64 = 0.0005;
pub const DEFAULT_REL_THRESHOLD: f64 = 0.0001;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub max_iterations: usize,
    /// Allowed relative drift of `Σ F/S` from `N·K`.
    pub rel_deviation: f64,
    /// Relative change of `Σ W` between iterations that ends the loop.
    pub rel_threshold: f64,
    /// Power weights for the first iteration; all ones when absent.
    pub initial_weights: Option<Vec<f64>>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            rel_deviation: DEFAULT_REL_DEVIATION,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            initial_weights: None,
        }
    }
}

impl EngineOptions {
    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_initial_weights(mut self, weights: Vec<f64>) -> Self {
        self.initial_weights = Some(weights);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(EdftError::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if !(self.rel_deviation > 0.0) || !(self.rel_threshold > 0.0) {
            return Err(EdftError::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Why the iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCode {
    MaxIterations = 0,
    BudgetDeviation = 1,
    ThresholdReached = 2,
}

impl StopCode {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Which linear-algebra route computed the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionPath {
    UniformFast,
    GappedToeplitz,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Fourier transform, signal units times samples.
    pub f: Vec<Complex64>,
    /// Amplitude spectrum, signal units.
    pub s: Vec<Complex64>,
    pub iterations_done: usize,
    pub stop_code: StopCode,
    /// `|S|²` of the returned spectrum: the weights a further iteration
    /// would start from.
    pub final_weights: Vec<f64>,
    /// `F/S = W ⊙ diag(Eᴴ·R⁻¹·E)` of the returned iteration, evaluated
    /// without dividing.
    pub fs_ratio: Vec<f64>,
    pub k_known: usize,
    pub path: ExecutionPath,
}

impl SpectrumResult {
    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// `|Σ F/S / (N·K) - 1|` for the returned iteration.
    pub fn budget_deviation(&self) -> f64 {
        if self.iterations_done == 0 || self.k_known == 0 {
            return 0.0;
        }
        let total: f64 = self.fs_ratio.iter().sum();
        (total / (self.n() * self.k_known) as f64 - 1.0).abs()
    }
}

/// `x·R⁻¹·E` and `diag(Eᴴ·R⁻¹·E)` for one weight vector.
#[derive(Debug, Clone)]
pub(crate) struct StepOutput {
    pub xre: Vec<Complex64>,
    pub ere: Vec<f64>,
}

/// Precomputed data for one execution path.
enum Prepared {
    Fast { fft: FftPair, x: Vec<Complex64>, phase: Option<Vec<Complex64>> },
    Gapped { fft: FftPair, slots: usize, known: Vec<usize>, x: Vec<Complex64>, phase: Option<Vec<Complex64>> },
    Dense { e: ExponentMatrix, x: Vec<Complex64> },
}

impl Prepared {
    fn path(&self) -> ExecutionPath {
        match self {
            Prepared::Fast { .. } => ExecutionPath::UniformFast,
            Prepared::Gapped { .. } => ExecutionPath::GappedToeplitz,
            Prepared::Dense { .. } => ExecutionPath::Dense,
        }
    }

    fn select(x: &SampledSequence, grid: &FrequencyGrid, path: Option<ExecutionPath>) -> Result<Self> {
        let k_known = x.known_count();
        let fft_ok = k_known >= 2 && fft_grid_matches(x.times(), grid);
        let wanted = match path {
            Some(p) => p,
            None if fft_ok && !x.has_gaps() => ExecutionPath::UniformFast,
            None if fft_ok && x.len() <= grid.len() => ExecutionPath::GappedToeplitz,
            None => ExecutionPath::Dense,
        };
        let phase = || {
            let t0 = x.times()[0];
            (t0 != 0.0).then(|| grid.freqs().iter().map(|&f| unit_exponent(f, t0)).collect())
        };
        match wanted {
            ExecutionPath::UniformFast => {
                if !fft_ok || x.has_gaps() {
                    return Err(EdftError::InvalidArgument("fast path needs a complete uniform sequence on the FFT grid".into()));
                }
                Ok(Prepared::Fast { fft: FftPair::new(grid.len()), x: x.values().to_vec(), phase: phase() })
            }
            ExecutionPath::GappedToeplitz => {
                if !fft_ok || x.len() > grid.len() {
                    return Err(EdftError::InvalidArgument("gapped path needs uniform slots on the FFT grid".into()));
                }
                Ok(Prepared::Gapped {
                    fft: FftPair::new(grid.len()),
                    slots: x.len(),
                    known: x.known_indices(),
                    x: x.values().to_vec(),
                    phase: phase(),
                })
            }
            ExecutionPath::Dense => {
                let e = build_exponent_matrix(&x.known_times(), grid)?;
                Ok(Prepared::Dense { e, x: x.known_values() })
            }
        }
    }

    fn step(&self, weights: &[f64], k_known: usize) -> Result<StepOutput> {
        check_weights(weights, k_known)?;
        match self {
            Prepared::Fast { fft, x, phase } => {
                let lags = toeplitz_lags(fft, weights, x.len());
                let state = levinson_toeplitz(&lags).map_err(|_| EdftError::SingularOrIndefinite)?;
                let (xr, re) = toeplitz_apply_inverse(&state, x)?;
                finish_uniform(fft, &xr, &re, phase.as_deref())
            }
            Prepared::Gapped { fft, slots, known, x, phase } => {
                let lags = toeplitz_lags(fft, weights, *slots);
                let sub = CMatrix::from_fn(known.len(), known.len(), |a, b| {
                    let (i, j) = (known[a], known[b]);
                    if j >= i {
                        lags[j - i]
                    } else {
                        lags[i - j].conj()
                    }
                });
                let inv = HermitianFactor::new(&sub)?.inverse()?;
                let mut xr = vec![Complex64::new(0.0, 0.0); *slots];
                let mut diag = vec![Complex64::new(0.0, 0.0); *slots];
                for (a, &i) in known.iter().enumerate() {
                    for (b, &j) in known.iter().enumerate() {
                        let v = inv[(a, b)];
                        xr[j] += x[i] * v;
                        if i >= j {
                            diag[i - j] += v;
                        }
                    }
                }
                let re: Vec<Complex64> =
                    diag.iter().enumerate().map(|(m, d)| if m == 0 { *d } else { 2.0 * d.conj() }).collect();
                finish_uniform(fft, &xr, &re, phase.as_deref())
            }
            Prepared::Dense { e, x } => {
                let r = match correlation_dense(e, weights)? {
                    CorrelationOperator::DenseHermitian(m) => m,
                    CorrelationOperator::Toeplitz(_) => unreachable!("dense builder"),
                };
                let re = HermitianFactor::new(&r)?.solve(e.entries())?;
                let ere = diag_quadratic_form(e, &re)?;
                let xre = re.left_mul(x);
                Ok(StepOutput { xre, ere })
            }
        }
    }
}

fn toeplitz_lags(fft: &FftPair, weights: &[f64], k: usize) -> Vec<Complex64> {
    let spectrum: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut r = fft.inverse(&spectrum);
    r.truncate(k);
    r[0].im = 0.0;
    r
}

fn finish_uniform(fft: &FftPair, xr: &[Complex64], re: &[Complex64], phase: Option<&[Complex64]>) -> Result<StepOutput> {
    let mut xre = fft.forward(xr);
    if let Some(p) = phase {
        for (v, p) in xre.iter_mut().zip(p) {
            *v *= p;
        }
    }
    let ere: Vec<f64> = fft.forward(re).iter().map(|z| z.re).collect();
    if let Some(index) = ere.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(EdftError::NonPositiveDiagonal { index });
    }
    Ok(StepOutput { xre, ere })
}

/// How the next iteration's weights are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WeightUpdate {
    /// `W ← |S|²`
    AmplitudePower,
    /// `W ← |F|²/N`
    FourierPower,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LoopRules {
    pub update: WeightUpdate,
    pub budget_check: bool,
    pub threshold_check: bool,
}

pub(crate) const EDFT_RULES: LoopRules =
    LoopRules { update: WeightUpdate::AmplitudePower, budget_check: true, threshold_check: true };

/// Hook called with the iteration number (from 1) and the weights about to
/// be used.
pub type WeightHook<'a> = &'a mut dyn FnMut(usize, &mut Vec<f64>);

/// Runs the weight-adaptation loop around `step`.
pub(crate) fn iterate(
    mut step: impl FnMut(&[f64]) -> Result<StepOutput>,
    mut weights: Vec<f64>,
    k_known: usize,
    max_iterations: usize,
    opts: &EngineOptions,
    rules: LoopRules,
    path: ExecutionPath,
    mut hook: Option<WeightHook<'_>>,
) -> SpectrumResult {
    let n = weights.len();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut result = SpectrumResult {
        f: zero.clone(),
        s: zero,
        iterations_done: 0,
        stop_code: StopCode::MaxIterations,
        final_weights: weights.clone(),
        fs_ratio: vec![0.0; n],
        k_known,
        path,
    };
    let budget_norm = (n * k_known) as f64;
    let mut first_sum = 0.0;
    let mut prev_sum = 0.0;

    for it in 1..=max_iterations {
        if let Some(h) = hook.as_mut() {
            h(it, &mut weights);
        }
        let out = match step(&weights) {
            Ok(o) => o,
            Err(_) => {
                result.stop_code = StopCode::BudgetDeviation;
                return result;
            }
        };
        let fs_ratio: Vec<f64> = weights.iter().zip(&out.ere).map(|(w, e)| w * e).collect();
        if rules.budget_check {
            let total: f64 = fs_ratio.iter().sum();
            let dev = (total / budget_norm - 1.0).abs();
            if !(dev <= opts.rel_deviation) {
                result.stop_code = StopCode::BudgetDeviation;
                return result;
            }
        }
        let f: Vec<Complex64> = out.xre.iter().zip(&weights).map(|(z, &w)| z * w).collect();
        let s: Vec<Complex64> = out.xre.iter().zip(&out.ere).map(|(z, &e)| z / e).collect();
        let next: Vec<f64> = match rules.update {
            WeightUpdate::AmplitudePower => s.iter().map(|z| z.norm_sqr()).collect(),
            WeightUpdate::FourierPower => f.iter().map(|z| z.norm_sqr() / n as f64).collect(),
        };
        let sum: f64 = next.iter().sum();
        result.f = f;
        result.s = s;
        result.fs_ratio = fs_ratio;
        result.iterations_done = it;
        result.final_weights = next.clone();
        if it == 1 {
            first_sum = sum;
        } else if rules.threshold_check && (prev_sum - sum).abs() / first_sum <= opts.rel_threshold {
            result.stop_code = StopCode::ThresholdReached;
            return result;
        }
        prev_sum = sum;
        weights = next;
    }
    result.stop_code = StopCode::MaxIterations;
    result
}

/// Validated problem setup shared by the EDFT and the baselines that
/// iterate the same way.
pub(crate) struct Setup {
    pub x: SampledSequence,
    pub weights: Vec<f64>,
    pub max_iterations: usize,
    pub all_zero: bool,
}

pub(crate) fn setup(x: &SampledSequence, grid: &FrequencyGrid, opts: &EngineOptions) -> Result<Setup> {
    opts.validate()?;
    validate_sequence(x)?;
    let n = grid.len();
    let x = if x.known_count() > n { x.truncate_known(n) } else { x.clone() };
    let k_known = x.known_count();
    let mut max_iterations = opts.max_iterations;
    let weights = match &opts.initial_weights {
        Some(w) => {
            if w.len() != n {
                return Err(EdftError::DimensionMismatch(format!("{} initial weights for {n} frequencies", w.len())));
            }
            check_weights(w, k_known)?;
            w.clone()
        }
        None => vec![1.0; n],
    };
    // With as many samples as frequencies the result does not depend on W.
    let weights = if k_known == n {
        max_iterations = 1;
        vec![1.0; n]
    } else {
        weights
    };
    let all_zero = x.known_values().iter().all(|v| v.norm_sqr() == 0.0);
    Ok(Setup { x, weights, max_iterations, all_zero })
}

fn zero_result(n: usize, k_known: usize, path: ExecutionPath, weights: Vec<f64>) -> SpectrumResult {
    SpectrumResult {
        f: vec![Complex64::new(0.0, 0.0); n],
        s: vec![Complex64::new(0.0, 0.0); n],
        iterations_done: 1,
        stop_code: StopCode::MaxIterations,
        final_weights: weights,
        fs_ratio: vec![0.0; n],
        k_known,
        path,
    }
}

/// Computes the Extended DFT of `x` on `grid`.
pub fn run_edft(x: &SampledSequence, grid: &FrequencyGrid, opts: &EngineOptions) -> Result<SpectrumResult> {
    run_edft_inner(x, grid, opts, None, None, EDFT_RULES)
}

/// [`run_edft`] forced onto a particular execution path.
pub fn run_edft_on_path(
    x: &SampledSequence,
    grid: &FrequencyGrid,
    opts: &EngineOptions,
    path: ExecutionPath,
) -> Result<SpectrumResult> {
    run_edft_inner(x, grid, opts, Some(path), None, EDFT_RULES)
}

/// [`run_edft`] with a hook that may inspect or replace the weights before
/// each iteration.
pub fn run_edft_with_hook(
    x: &SampledSequence,
    grid: &FrequencyGrid,
    opts: &EngineOptions,
    hook: WeightHook<'_>,
) -> Result<SpectrumResult> {
    run_edft_inner(x, grid, opts, None, Some(hook), EDFT_RULES)
}

pub(crate) fn run_edft_inner(
    x: &SampledSequence,
    grid: &FrequencyGrid,
    opts: &EngineOptions,
    path: Option<ExecutionPath>,
    hook: Option<WeightHook<'_>>,
    rules: LoopRules,
) -> Result<SpectrumResult> {
    let st = setup(x, grid, opts)?;
    let k_known = st.x.known_count();
    let prepared = Prepared::select(&st.x, grid, path)?;
    if st.all_zero {
        return Ok(zero_result(grid.len(), k_known, prepared.path(), st.weights));
    }
    let p = prepared.path();
    Ok(iterate(|w| prepared.step(w, k_known), st.weights, k_known, st.max_iterations, opts, rules, p, hook))
}

/// Runs the EDFT on each sequence independently.
pub fn run_edft_batch(
    columns: &[SampledSequence],
    grid: &FrequencyGrid,
    opts: &EngineOptions,
) -> Vec<Result<SpectrumResult>> {
    columns.iter().map(|c| run_edft(c, grid, opts)).collect()
}

/// One EDFT iteration on the dense route: returns `(F, S, diag(Eᴴ·R⁻¹·E))`
/// for the known samples of `x` and weights `w`.
pub fn edft_iteration(
    x: &SampledSequence,
    e: &ExponentMatrix,
    weights: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<f64>)> {
    let values = x.known_values();
    if values.len() != e.rows() {
        return Err(EdftError::DimensionMismatch(format!("{} known samples, E has {} rows", values.len(), e.rows())));
    }
    check_weights(weights, values.len())?;
    let prepared = Prepared::Dense { e: e.clone(), x: values };
    let out = match prepared.step(weights, e.rows()) {
        Err(EdftError::NonPositiveDiagonal { .. }) => return Err(EdftError::SingularOrIndefinite),
        other => other?,
    };
    let f = out.xre.iter().zip(weights).map(|(z, &w)| z * w).collect();
    let s = out.xre.iter().zip(&out.ere).map(|(z, &e)| z / e).collect();
    Ok((f, s, out.ere))
}

/// Relative frequency resolution `(F/S)/(2·f_u·T·K)`; 1 everywhere for the
/// classical DFT analysed over one Nyquist zone.
pub fn resolution_curve(res: &SpectrumResult, upper_freq: f64, mean_period: f64, k_known: usize) -> Vec<f64> {
    let scale = 1.0 / (2.0 * upper_freq * mean_period * k_known as f64);
    res.fs_ratio.iter().map(|v| v * scale).collect()
}

/// Two-dimensional EDFT of an `M×L` matrix, optionally masked (row-major,
/// `true` = known). Columns are transformed to `rows_out` points, then the
/// rows of that intermediate to `cols_out` points. A single row or column
/// is transformed as a vector and keeps its orientation.
pub fn run_edft_2d(
    x: &CMatrix,
    mask: Option<&[bool]>,
    rows_out: usize,
    cols_out: usize,
    opts: &EngineOptions,
) -> Result<CMatrix> {
    let (m, l) = (x.rows(), x.cols());
    if m == 0 || l == 0 {
        return Err(EdftError::InvalidArgument("empty matrix".into()));
    }
    if let Some(mk) = mask {
        if mk.len() != m * l {
            return Err(EdftError::DimensionMismatch(format!("mask of {} for {m}x{l} matrix", mk.len())));
        }
    }
    let known = |i: usize, j: usize| mask.map_or(true, |mk| mk[i * l + j]);
    let transform = |values: Vec<Complex64>, mk: Vec<bool>, n: usize| -> Result<Vec<Complex64>> {
        if !mk.iter().any(|&k| k) {
            return Ok(vec![Complex64::new(0.0, 0.0); n]);
        }
        let times = (0..values.len()).map(|t| t as f64).collect();
        let seq = SampledSequence::new(values, times, mk)?;
        let grid = FrequencyGrid::uniform(n, 0.5)?;
        Ok(run_edft(&seq, &grid, opts)?.f)
    };

    if m == 1 {
        let f = transform(x.row(0).to_vec(), (0..l).map(|j| known(0, j)).collect(), cols_out)?;
        return Ok(CMatrix::from_rows(1, cols_out, f));
    }
    if l == 1 {
        let f = transform(x.column(0), (0..m).map(|i| known(i, 0)).collect(), rows_out)?;
        return Ok(CMatrix::from_rows(rows_out, 1, f));
    }
    let mut inter = CMatrix::zeros(rows_out, l);
    for j in 0..l {
        let f = transform(x.column(j), (0..m).map(|i| known(i, j)).collect(), rows_out)?;
        for (i, v) in f.into_iter().enumerate() {
            inter[(i, j)] = v;
        }
    }
    let mut out = CMatrix::zeros(rows_out, cols_out);
    for i in 0..rows_out {
        let f = transform(inter.row(i).to_vec(), vec![true; l], cols_out)?;
        out.row_mut(i).copy_from_slice(&f);
    }
    Ok(out)
}
