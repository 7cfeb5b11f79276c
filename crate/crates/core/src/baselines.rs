//! Reference estimators used to cross-check the EDFT: the classical DFT,
//! the biased autocorrelation with the classic Capon (minimum variance)
//! spectrum, the iterative filter-bank Capon, generalized weighted least
//! squares, and the High-Resolution DFT.

use num_complex::Complex64;

use crate::engine::{
    iterate, run_edft_inner, setup, EngineOptions, ExecutionPath, LoopRules, SpectrumResult, StepOutput, StopCode,
    WeightUpdate, EDFT_RULES,
};
use crate::error::{EdftError, Result};
use crate::kernel::{
    build_exponent_matrix, check_weights, correlation_dense, fft_grid_matches, unit_exponent, CMatrix,
    CorrelationOperator, ExponentMatrix, FftPair, HermitianFactor,
};
use crate::signal::{validate_sequence, FrequencyGrid, SampledSequence};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Classical transform over the known samples: `F_n = Σ_k x_k·exp(-j2π f_n t_k)`
/// and `S = F/K`.
pub fn classical_dft(x: &SampledSequence, grid: &FrequencyGrid) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    validate_sequence(x)?;
    let f = if x.len() <= grid.len() && fft_grid_matches(x.times(), grid) {
        let mut f = FftPair::new(grid.len()).forward(x.values());
        let t0 = x.times()[0];
        if t0 != 0.0 {
            for (v, &fr) in f.iter_mut().zip(grid.freqs()) {
                *v *= unit_exponent(fr, t0);
            }
        }
        f
    } else {
        let e = build_exponent_matrix(&x.known_times(), grid)?;
        e.left_mul(&x.known_values())
    };
    let k = x.known_count() as f64;
    let s = f.iter().map(|v| v / k).collect();
    Ok((f, s))
}

/// Biased autocorrelation `r(l) = (1/K)·Σ_{k<K-l} x_{k+l}·conj(x_k)`, l = 0..K-1.
pub fn biased_autocorrelation(x: &SampledSequence) -> Result<Vec<Complex64>> {
    validate_sequence(x)?;
    if x.has_gaps() || x.uniform_descriptor().is_none() {
        return Err(EdftError::InvalidArgument("autocorrelation needs a complete uniform sequence".into()));
    }
    let v = x.values();
    let k = v.len();
    Ok((0..k).map(|l| (0..k - l).map(|i| v[i + l] * v[i].conj()).sum::<Complex64>() / k as f64).collect())
}

/// `R_x[k][l] = r(k-l)` with `r(-l) = conj(r(l))`.
fn autocorrelation_matrix(r: &[Complex64]) -> CMatrix {
    let k = r.len();
    CMatrix::from_fn(k, k, |i, j| if i >= j { r[i - j] } else { r[j - i].conj() })
}

/// `diag(Eᵀ·A⁻¹·E*)` for Hermitian `A` given as its factor.
fn conj_quadratic_form(factor: &HermitianFactor, e: &ExponentMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let y = factor.solve(&e.entries().conj())?;
    let q = (0..e.cols())
        .map(|n| (0..e.rows()).map(|k| e.get(k, n) * y[(k, n)]).sum::<Complex64>().re)
        .collect();
    Ok((y, q))
}

/// Minimum-variance filter of full window length for one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CaponFilter {
    pub h: Vec<Complex64>,
    pub center_freq: f64,
    times: Vec<f64>,
}

impl CaponFilter {
    /// Builds `h = R_x⁻¹·E* / (Eᵀ·R_x⁻¹·E*)` from the sample autocorrelation.
    pub fn design(x: &SampledSequence, center_freq: f64) -> Result<Self> {
        let r = biased_autocorrelation(x)?;
        let factor = HermitianFactor::new(&autocorrelation_matrix(&r)).map_err(|_| EdftError::SingularAutocorrelation)?;
        let times = x.times().to_vec();
        let e_conj: Vec<Complex64> = times.iter().map(|&t| unit_exponent(center_freq, t).conj()).collect();
        let y = factor.solve(&CMatrix::column_vector(&e_conj))?.column(0);
        let denom: Complex64 = e_conj.iter().zip(&y).map(|(e, v)| e.conj() * v).sum();
        let h = y.iter().map(|v| v / denom).collect();
        Ok(Self { h, center_freq, times })
    }

    /// `Eᵀ·h` at frequency `f`.
    pub fn response(&self, f: f64) -> Complex64 {
        self.times.iter().zip(&self.h).map(|(&t, h)| unit_exponent(f, t) * h).sum()
    }
}

/// Classic Capon power spectrum `P_n = 1/(E_nᵀ·R_x⁻¹·E_n*)`.
pub fn capon_classic_psd(x: &SampledSequence, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    let r = biased_autocorrelation(x)?;
    let factor = HermitianFactor::new(&autocorrelation_matrix(&r)).map_err(|_| EdftError::SingularAutocorrelation)?;
    let e = build_exponent_matrix(x.times(), grid)?;
    let (_, q) = conj_quadratic_form(&factor, &e)?;
    if q.iter().any(|v| !(*v > 0.0)) {
        return Err(EdftError::SingularAutocorrelation);
    }
    Ok(q.iter().map(|v| 1.0 / v).collect())
}

/// Iterative filter-bank Capon estimate on the time-reversed input.
///
/// Uses `Rᵀ = conj(R)` with the engine's `R = (1/N)·E·W·Eᴴ`, so the
/// denominator coincides with the EDFT's `diag(Eᴴ·R⁻¹·E)` and the engine's
/// stop criteria apply unchanged. The returned `f` field carries `W ⊙`
/// numerator and has no independent meaning.
pub fn capon_iterative(x: &SampledSequence, grid: &FrequencyGrid, opts: &EngineOptions) -> Result<SpectrumResult> {
    let st = setup(x, grid, opts)?;
    let k_known = st.x.known_count();
    let e = build_exponent_matrix(&st.x.known_times(), grid)?;
    let mut reversed = st.x.known_values();
    reversed.reverse();
    if st.all_zero {
        return Ok(zero_spectrum(grid.len(), k_known, st.weights));
    }
    let e_conj = e.entries().conj();
    let step = |w: &[f64]| -> Result<StepOutput> {
        check_weights(w, k_known)?;
        let r = match correlation_dense(&e, w)? {
            CorrelationOperator::DenseHermitian(m) => m,
            CorrelationOperator::Toeplitz(_) => unreachable!("dense builder"),
        };
        let y = HermitianFactor::new(&r.conj())?.solve(&e_conj)?;
        let xre = y.left_mul(&reversed);
        let ere: Vec<f64> = (0..e.cols())
            .map(|n| (0..e.rows()).map(|k| e.get(k, n) * y[(k, n)]).sum::<Complex64>().re)
            .collect();
        if let Some(index) = ere.iter().position(|v| !(*v > 0.0)) {
            return Err(EdftError::NonPositiveDiagonal { index });
        }
        Ok(StepOutput { xre, ere })
    };
    Ok(iterate(step, st.weights, k_known, st.max_iterations, opts, EDFT_RULES, ExecutionPath::Dense, None))
}

fn zero_spectrum(n: usize, k_known: usize, weights: Vec<f64>) -> SpectrumResult {
    SpectrumResult {
        f: vec![ZERO; n],
        s: vec![ZERO; n],
        iterations_done: 1,
        stop_code: StopCode::MaxIterations,
        final_weights: weights,
        fs_ratio: vec![0.0; n],
        k_known,
        path: ExecutionPath::Dense,
    }
}

/// Generalized weighted least-squares amplitude
/// `S_n = (E_nᵀ·Q⁻¹·xᵀ)/(E_nᵀ·Q⁻¹·E_n*)` over the known samples.
pub fn gwls_spectrum(x: &SampledSequence, grid: &FrequencyGrid, q: &CMatrix) -> Result<Vec<Complex64>> {
    validate_sequence(x)?;
    let k = x.known_count();
    if q.rows() != k || q.cols() != k {
        return Err(EdftError::DimensionMismatch(format!("Q is {}x{}, {k} known samples", q.rows(), q.cols())));
    }
    let scale = q.norm().max(f64::MIN_POSITIVE);
    if q.sub(&q.conj_transpose()).norm() > 1e-12 * scale {
        return Err(EdftError::InvalidArgument("Q is not Hermitian".into()));
    }
    let factor = HermitianFactor::new(q).map_err(|_| EdftError::SingularQ)?;
    let e = build_exponent_matrix(&x.known_times(), grid)?;
    let z = factor.solve(&CMatrix::column_vector(&x.known_values()))?.column(0);
    let (_, den) = conj_quadratic_form(&factor, &e)?;
    Ok((0..e.cols())
        .map(|n| {
            let num: Complex64 = (0..k).map(|i| e.get(i, n) * z[i]).sum();
            num / den[n]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrdftResult {
    pub f: Vec<Complex64>,
    pub iterations_done: usize,
    /// [`StopCode::MaxIterations`] unless the correlation matrix became
    /// numerically singular, in which case the last good output is kept
    /// and the code is [`StopCode::BudgetDeviation`].
    pub stop_code: StopCode,
    pub final_weights: Vec<f64>,
}

/// High-Resolution DFT: the EDFT iteration fed back with `|F|²/N`.
pub fn hrdft(x: &SampledSequence, grid: &FrequencyGrid, opts: &EngineOptions) -> Result<HrdftResult> {
    let rules = LoopRules { update: WeightUpdate::FourierPower, budget_check: false, threshold_check: false };
    let res = run_edft_inner(x, grid, opts, None, None, rules)?;
    Ok(HrdftResult {
        f: res.f,
        iterations_done: res.iterations_done,
        stop_code: res.stop_code,
        final_weights: res.final_weights,
    })
}
