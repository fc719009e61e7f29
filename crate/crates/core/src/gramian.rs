//! The Gramian determinant of the angle-cosine matrix and its derivatives.
//!
//! The correlation matrix has unit diagonal and entries `gamma_ij` off the
//! diagonal; `Gamma` is its determinant and `Gamma^(i)` the principal minor
//! with row and column `i` deleted. At the totally symmetric configuration
//! (all off-diagonal entries equal to `gamma_inf`) everything collapses to
//! closed forms in `N` and `gamma_inf`:
//!
//! ```text
//! Gamma|inf            = [1 + (N-1) g] (1 - g)^(N-1)
//! dGamma/dgamma_ij|inf = -2 g (1 - g)^(N-2)
//! ```
//!
//! with the minor variants obtained by `N -> N-1`, and six second
//! derivatives listed in [`SecondDerivatives`]. The closed forms are what the
//! equilibrium and Hessian layers consume; the direct determinant routines at
//! the bottom are the independent route used to validate them and to evaluate
//! the effective potential away from the symmetric configuration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pair_index;

/// The symmetric configuration `gamma_ij = gamma_inf` for all pairs.
#[derive(Clone, Copy, Debug)]
pub struct SymmetricGramian {
    n: usize,
    gamma_inf: f64,
}

/// First derivatives of the determinant and of a principal minor with
/// respect to one off-diagonal entry. The minor value applies to pairs that
/// do not touch the deleted particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstDerivatives {
    pub full: f64,
    pub minor: f64,
}

/// The six distinct second derivatives at the symmetric configuration.
///
/// `diagonal` differentiates twice by the same entry, `shared` by two entries
/// with one particle in common, `disjoint` by two entries with no particle in
/// common. Entries are `None` when the matrix is too small for the index
/// pattern to exist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondDerivatives {
    pub full_diagonal: f64,
    pub full_shared: Option<f64>,
    pub full_disjoint: Option<f64>,
    pub minor_diagonal: Option<f64>,
    pub minor_shared: Option<f64>,
    pub minor_disjoint: Option<f64>,
}

/// `base^k` through logarithms when `base` is tiny, so large-`N` powers
/// underflow gracefully instead of hitting denormals early.
fn stable_powi(base: f64, k: i32) -> f64 {
    if base > 0.0 && base < 1e-3 && k > 1 {
        (f64::from(k) * base.ln()).exp()
    } else {
        base.powi(k)
    }
}

impl SymmetricGramian {
    pub fn new(n: usize, gamma_inf: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("N = {n} < 2")));
        }
        let (lo, hi) = Self::positivity_window(n);
        if !(gamma_inf > lo && gamma_inf < hi) {
            return Err(Error::OutsidePositivityWindow {
                gamma: gamma_inf,
                lo,
                n,
            });
        }
        Ok(Self { n, gamma_inf })
    }

    /// Open interval of `gamma_inf` on which the symmetric matrix is
    /// positive definite: `(-1/(N-1), 1)`.
    pub fn positivity_window(n: usize) -> (f64, f64) {
        (-1.0 / (n as f64 - 1.0), 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma_inf(&self) -> f64 {
        self.gamma_inf
    }

    /// Determinant at the symmetric configuration.
    pub fn value(&self) -> f64 {
        let g = self.gamma_inf;
        let n = self.n as f64;
        (1.0 + (n - 1.0) * g) * stable_powi(1.0 - g, self.n as i32 - 1)
    }

    /// Principal minor at the symmetric configuration (`N -> N-1`).
    pub fn minor_value(&self) -> f64 {
        let g = self.gamma_inf;
        let n = self.n as f64;
        (1.0 + (n - 2.0) * g) * stable_powi(1.0 - g, self.n as i32 - 2)
    }

    /// Ratio `Gamma^(i) / Gamma` at the symmetric configuration.
    pub fn minor_ratio(&self) -> f64 {
        let g = self.gamma_inf;
        let n = self.n as f64;
        (1.0 + (n - 2.0) * g) / ((1.0 + (n - 1.0) * g) * (1.0 - g))
    }

    /// The off-diagonal cofactor magnitude entering the first derivative:
    /// the determinant left after deleting one row and a different column,
    /// which is [`cofactor_det`] of size `N - 1`.
    pub fn cofactor(&self) -> f64 {
        cofactor_det(self.n - 1, self.gamma_inf)
    }

    pub fn first_derivatives(&self) -> FirstDerivatives {
        let g = self.gamma_inf;
        FirstDerivatives {
            full: -2.0 * g * stable_powi(1.0 - g, self.n as i32 - 2),
            minor: -2.0 * g * stable_powi(1.0 - g, self.n as i32 - 3),
        }
    }

    pub fn second_derivatives(&self) -> SecondDerivatives {
        let g = self.gamma_inf;
        let n = self.n as f64;
        let ni = self.n as i32;
        SecondDerivatives {
            full_diagonal: -2.0 * stable_powi(1.0 - g, ni - 3) * (1.0 + (n - 3.0) * g),
            full_shared: (self.n >= 3).then(|| 2.0 * g * stable_powi(1.0 - g, ni - 3)),
            full_disjoint: (self.n >= 4).then_some(0.0),
            minor_diagonal: (self.n >= 3)
                .then(|| -2.0 * stable_powi(1.0 - g, ni - 4) * (1.0 + (n - 4.0) * g)),
            minor_shared: (self.n >= 4).then(|| 2.0 * g * stable_powi(1.0 - g, ni - 4)),
            minor_disjoint: (self.n >= 5).then_some(0.0),
        }
    }
}

/// Determinant of the `k x k` matrix whose first row is all `gamma` and
/// whose remaining rows match the symmetric correlation matrix. These appear
/// when the correlation determinant is expanded by cofactors; the closed
/// form `gamma (1 - gamma)^(k-1)` satisfies the size recursion
/// `C_k = gamma (Gamma_(k-1) - (k-1) C_(k-1))`.
pub fn cofactor_det(k: usize, gamma: f64) -> f64 {
    gamma * stable_powi(1.0 - gamma, k as i32 - 1)
}

/// Correlation matrix with unit diagonal and the given angle cosines in the
/// `(12), (13), (23), (14), ...` pair order.
pub fn correlation_matrix(n: usize, gamma: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for j in 1..n {
        for i in 0..j {
            let v = gamma[pair_index(i, j)];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Symmetric-configuration correlation matrix.
pub fn symmetric_correlation_matrix(n: usize, gamma_inf: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(n, n, gamma_inf);
    m.fill_diagonal(1.0);
    m
}

/// Log-determinant of a symmetric positive definite matrix via Cholesky.
pub fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("correlation matrix".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Determinant by LU factorization; the independent route against which the
/// Cholesky log-determinants and the closed forms are checked.
pub fn det_direct(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// `log Gamma` and all `log Gamma^(i)` for a configuration, via separate
/// Cholesky factorizations of the matrix and its principal submatrices.
pub fn log_gramian_and_minors(n: usize, gamma: &[f64]) -> Result<(f64, Vec<f64>)> {
    let full = correlation_matrix(n, gamma);
    let log_full = log_det_spd(&full)?;
    let mut log_minors = Vec::with_capacity(n);
    for i in 0..n {
        let minor = full.clone().remove_row(i).remove_column(i);
        log_minors.push(log_det_spd(&minor)?);
    }
    Ok((log_full, log_minors))
}
