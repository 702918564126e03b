//! Dense linear solves shared by the hitting-time, meeting-time and
//! electric-network computations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots smaller than this (relative to the largest matrix entry) are
/// treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Solves `a x = b` by LU decomposition with partial pivoting.
pub fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = factor(a)?;
    lu.solve(b).ok_or(Error::Singular { pivot: 0.0 })
}

/// Inverts a square matrix, rejecting numerically singular input.
pub fn invert(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = factor(a)?;
    lu.try_inverse().ok_or(Error::Singular { pivot: 0.0 })
}

fn factor(a: DMatrix<f64>) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let scale = a.amax().max(1.0);
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, p| m.min(p.abs()));
    if min_pivot < PIVOT_TOL * scale {
        return Err(Error::Singular { pivot: min_pivot });
    }
    Ok(lu)
}

/// Max-norm of `a x - b`.
pub fn residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a * x - b).amax()
}
