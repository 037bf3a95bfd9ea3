//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place into `rhs`.
///
/// `lower[0]` and `upper[n-1]` are ignored. `scratch` must have length `n`.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || scratch.len() != n {
        return Err(Error::InvalidArgument("tridiagonal bands must have equal length".into()));
    }
    if n == 0 {
        return Ok(());
    }
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return Err(Error::DomainError("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= piv;
    for i in 1..n {
        scratch[i] = upper[i - 1] / piv;
        piv = diag[i] - lower[i] * scratch[i];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::DomainError(format!("zero pivot in tridiagonal solve at row {i}")));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}

/// Allocating convenience wrapper around [`solve_in_place`].
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = rhs.to_vec();
    let mut s = vec![0.0; diag.len()];
    solve_in_place(lower, diag, upper, &mut x, &mut s)?;
    Ok(x)
}
