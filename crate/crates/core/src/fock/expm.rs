//! Matrix exponential by scaling and squaring of a truncated Taylor series.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Certified bound on `|UᵀU − I|` for exponentials of antisymmetric matrices.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a real square matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &b / k as f64;
        sum += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(a)` for antisymmetric `a`, with the orthogonality of the result
/// checked against [`ORTHOGONALITY_TOL`].
pub fn expm_orthogonal(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let u = expm(a);
    let residual = orthogonality_residual(&u);
    if residual > ORTHOGONALITY_TOL {
        return Err(Error::ExpmResidual { residual });
    }
    Ok(u)
}

pub fn orthogonality_residual(u: &DMatrix<f64>) -> f64 {
    let dim = u.nrows();
    (u.transpose() * u - DMatrix::identity(dim, dim)).amax()
}
