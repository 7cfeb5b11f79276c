//! Hermitian positive-definite solves by Cholesky factorization with
//! symmetric (diagonal) pivoting.

use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{EdftError, Result};

/// Largest accepted ratio between the first and last Cholesky pivots.
pub const MAX_CONDITION: f64 = 1e12;

/// `PᵀAP = L·Lᴴ` for a Hermitian positive-definite `A`.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    /// Lower-triangular factor, row-major.
    lower: CMatrix,
    /// `perm[i]` is the original index placed at position `i`.
    perm: Vec<usize>,
    condition_estimate: f64,
}

impl HermitianFactor {
    pub fn new(a: &CMatrix) -> Result<Self> {
        Self::with_condition_limit(a, MAX_CONDITION)
    }

    /// Factors `a`, rejecting it when a pivot is not positive or the pivot
    /// ratio exceeds `max_condition`.
    pub fn with_condition_limit(a: &CMatrix, max_condition: f64) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(EdftError::DimensionMismatch(format!("{}x{} matrix is not square", n, a.cols())));
        }
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_diag = (0..n).map(|i| a[(i, i)].re).fold(0.0_f64, f64::max);
        if !(max_diag > 0.0) || !max_diag.is_finite() {
            return Err(EdftError::SingularOrIndefinite);
        }
        let floor = max_diag * f64::EPSILON * n as f64;
        let mut first_pivot = 0.0;
        let mut last_pivot = 0.0;

        for j in 0..n {
            let p = (j..n)
                .max_by(|&x, &y| work[(x, x)].re.total_cmp(&work[(y, y)].re))
                .expect("non-empty range");
            if p != j {
                swap_symmetric(&mut work, j, p);
                perm.swap(j, p);
            }
            let d = work[(j, j)].re;
            if !(d > floor) || !d.is_finite() {
                return Err(EdftError::SingularOrIndefinite);
            }
            if j == 0 {
                first_pivot = d;
            }
            last_pivot = d;
            let l_jj = d.sqrt();
            work[(j, j)] = Complex64::new(l_jj, 0.0);
            for i in j + 1..n {
                work[(i, j)] /= l_jj;
            }
            for k in j + 1..n {
                let l_kj = work[(k, j)].conj();
                for i in k..n {
                    let l_ij = work[(i, j)];
                    work[(i, k)] -= l_ij * l_kj;
                    // Pivot swaps read the upper triangle of the trailing block.
                    work[(k, i)] = work[(i, k)].conj();
                }
            }
        }
        let condition_estimate = first_pivot / last_pivot;
        if condition_estimate > max_condition {
            return Err(EdftError::SingularOrIndefinite);
        }
        for i in 0..n {
            for k in i + 1..n {
                work[(i, k)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { lower: work, perm, condition_estimate })
    }

    /// Ratio of the largest to the smallest pivot; a lower bound on the
    /// 2-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A·X = B`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(EdftError::DimensionMismatch(format!("rhs has {} rows, matrix is {n}x{n}", b.rows())));
        }
        let m = b.cols();
        let l = &self.lower;
        // y = Pᵀb, then forward substitution with L.
        let mut y = CMatrix::zeros(n, m);
        for i in 0..n {
            y.row_mut(i).copy_from_slice(b.row(self.perm[i]));
        }
        for i in 0..n {
            for k in 0..i {
                let lik = l[(i, k)];
                if lik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (src, dst) = split_rows(&mut y, k, i);
                for (t, &h) in dst.iter_mut().zip(src.iter()) {
                    *t -= lik * h;
                }
            }
            let inv = 1.0 / l[(i, i)].re;
            for v in y.row_mut(i) {
                *v *= inv;
            }
        }
        // Back substitution with Lᴴ.
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = l[(k, i)].conj();
                if lki == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (src, dst) = split_rows(&mut y, k, i);
                for (t, &h) in dst.iter_mut().zip(src.iter()) {
                    *t -= lki * h;
                }
            }
            let inv = 1.0 / l[(i, i)].re;
            for v in y.row_mut(i) {
                *v *= inv;
            }
        }
        let mut x = CMatrix::zeros(n, m);
        for i in 0..n {
            x.row_mut(self.perm[i]).copy_from_slice(y.row(i));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.dim()))
    }
}

/// Borrows row `src` immutably and row `dst` mutably; `src != dst`.
fn split_rows(m: &mut CMatrix, src: usize, dst: usize) -> (&[Complex64], &mut [Complex64]) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    if src < dst {
        let (head, tail) = data.split_at_mut(dst * cols);
        (&head[src * cols..(src + 1) * cols], &mut tail[..cols])
    } else {
        let (head, tail) = data.split_at_mut(src * cols);
        (&tail[..cols], &mut head[dst * cols..(dst + 1) * cols])
    }
}

fn swap_symmetric(a: &mut CMatrix, i: usize, j: usize) {
    let n = a.rows();
    for k in 0..n {
        let t = a[(i, k)];
        a[(i, k)] = a[(j, k)];
        a[(j, k)] = t;
    }
    for k in 0..n {
        let t = a[(k, i)];
        a[(k, i)] = a[(k, j)];
        a[(k, j)] = t;
    }
}

/// Solves `R·X = B` for Hermitian positive-definite `R`.
pub fn hermitian_solve(r: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    HermitianFactor::new(r)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random_pd(n: usize, seed: u64) -> CMatrix {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut r = a.matmul(&a.conj_transpose());
        for i in 0..n {
            r[(i, i)] += Complex64::new(0.1, 0.0);
        }
        r
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = CMatrix::from_fn(4, 3, |i, j| Complex64::new(i as f64, -(j as f64)));
        let x = hermitian_solve(&CMatrix::identity(4), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn random_pd_inverse_residual() {
        for seed in 0..10 {
            let r = random_pd(3, seed);
            let x = hermitian_solve(&r, &CMatrix::identity(3)).unwrap();
            let resid = r.matmul(&x).sub(&CMatrix::identity(3)).norm();
            assert!(resid < 1e-10, "seed {seed}: residual {resid}");
        }
        let r = random_pd(12, 99);
        let b = CMatrix::from_fn(12, 5, |i, j| Complex64::new((i * j) as f64, 1.0));
        let x = hermitian_solve(&r, &b).unwrap();
        assert!(r.matmul(&x).sub(&b).norm() <= 1e-8 * b.norm());
    }

    #[test]
    fn rank_deficient_is_rejected() {
        // Rank-one Hermitian matrix vvᴴ.
        let v = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 2.0), Complex64::new(0.0, 1.0)];
        let r = CMatrix::from_fn(3, 3, |i, j| v[i] * v[j].conj());
        assert_eq!(hermitian_solve(&r, &CMatrix::identity(3)), Err(EdftError::SingularOrIndefinite));
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut r = CMatrix::identity(2);
        r[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert_eq!(hermitian_solve(&r, &CMatrix::identity(2)), Err(EdftError::SingularOrIndefinite));
    }

    #[test]
    fn condition_guard() {
        let mut r = CMatrix::identity(2);
        r[(1, 1)] = Complex64::new(1e-13, 0.0);
        assert!(HermitianFactor::new(&r).is_err());
        assert!(HermitianFactor::with_condition_limit(&r, 1e14).is_ok());
    }
}
