//! Levinson-Durbin recursion for Hermitian Toeplitz correlation matrices and
//! the Gohberg-Semencul form of their inverse.
//!
//! The correlation operator of a uniform sequence is stored as its lag
//! vector `r`, with `R[k][l] = r[l-k]` for `l >= k` and `R[l][k] = conj(R[k][l])`.
//! The recursion runs on the transpose `M = Rᵀ`, whose first column is `r`,
//! and yields `u = [1, a...]` with `M·u = V·e₀`. From `u` alone the inverse
//! is recovered through
//!
//! ```text
//! V·M⁻¹[i][j] = Σ_{p=0}^{min(i,j)} u[i-p]·conj(u[j-p]) - w[i-p]·conj(w[j-p])
//! ```
//!
//! with `w[0] = 0`, `w[m] = conj(u[K-m])`, so every entry follows from its
//! upper-left neighbour in O(1), and `R⁻¹ = conj(M⁻¹)`.

use num_complex::Complex64;

use crate::error::{EdftError, Result};

/// Prediction coefficients and final prediction error of a Hermitian
/// Toeplitz system.
#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonState {
    /// `a[0..K-1]`; together with the leading one they form `u`.
    pub pred_coeffs: Vec<Complex64>,
    pub pred_error: f64,
}

impl LevinsonState {
    pub fn order(&self) -> usize {
        self.pred_coeffs.len() + 1
    }

    fn u(&self, i: usize) -> Complex64 {
        if i == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.pred_coeffs[i - 1]
        }
    }
}

/// Runs the recursion on lag vector `r` (length K >= 1).
pub fn levinson_toeplitz(r: &[Complex64]) -> Result<LevinsonState> {
    let k = r.len();
    if k == 0 {
        return Err(EdftError::InvalidArgument("empty correlation vector".into()));
    }
    let r0 = r[0].re;
    if !(r0 > 0.0) || !r0.is_finite() || r[0].im.abs() > 1e-9 * r0 {
        return Err(EdftError::RecursionBreakdown { order: 0 });
    }
    let mut a: Vec<Complex64> = Vec::with_capacity(k - 1);
    let mut v = r0;
    for m in 0..k - 1 {
        // Last row of the (m+2)-order system applied to [1, a, 0].
        let mut alpha = r[m + 1];
        for (i, &ai) in a.iter().enumerate() {
            alpha += ai * r[m - i];
        }
        let rho = -alpha / v;
        v -= alpha.norm_sqr() / v;
        if !(v > 0.0) || !v.is_finite() {
            return Err(EdftError::RecursionBreakdown { order: m + 1 });
        }
        let prev = a.clone();
        let len = prev.len();
        for (i, ai) in a.iter_mut().enumerate() {
            *ai += rho * prev[len - 1 - i].conj();
        }
        a.push(rho);
    }
    Ok(LevinsonState { pred_coeffs: a, pred_error: v })
}

/// Applies the inverse of the Toeplitz operator described by `state`.
///
/// Returns `xr = x·R⁻¹` and the accumulation vector `re` whose N-point
/// forward transform has real part `diag(Eᴴ·R⁻¹·E)` for the uniform
/// exponent matrix `E[k][n] = exp(-j2πnk/N)`.
pub fn toeplitz_apply_inverse(state: &LevinsonState, x: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let k = state.order();
    if x.len() != k {
        return Err(EdftError::DimensionMismatch(format!("vector length {} for order {k}", x.len())));
    }
    let inv_v = 1.0 / state.pred_error;
    let w = |m: usize| -> Complex64 {
        if m == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            state.u(k - m).conj()
        }
    };

    let mut xr = vec![Complex64::new(0.0, 0.0); k];
    let mut re = vec![Complex64::new(0.0, 0.0); k];
    for m in 0..k {
        // Walk the m-th subdiagonal of G = V·M⁻¹: entries (m+p, p).
        let mut g = state.u(m);
        let mut diag_sum = Complex64::new(0.0, 0.0);
        for p in 0..k - m {
            diag_sum += g;
            // R⁻¹[m+p][p] = conj(g)/V and, above the diagonal, R⁻¹[p][m+p] = g/V.
            xr[p] += x[m + p] * g.conj();
            if m > 0 {
                xr[m + p] += x[p] * g;
            }
            if p + 1 < k - m {
                let (i, j) = (m + p + 1, p + 1);
                g += state.u(i) * state.u(j).conj() - w(i) * w(j).conj();
            }
        }
        re[m] = if m == 0 { diag_sum * inv_v } else { diag_sum * (2.0 * inv_v) };
    }
    for v in xr.iter_mut() {
        *v *= inv_v;
    }
    Ok((xr, re))
}
