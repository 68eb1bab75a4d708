//! Dense real linear-algebra helpers shared by the phase-space modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest eigenvalue of the Hermitian matrix `re + i·im`.
///
/// Uses the real symmetric embedding `[[re, -im], [im, re]]`, whose spectrum
/// is the Hermitian spectrum with every eigenvalue doubled.
pub fn min_eigenvalue_hermitian(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    let m = re.nrows();
    let mut embed = DMatrix::zeros(2 * m, 2 * m);
    embed.view_mut((0, 0), (m, m)).copy_from(re);
    embed.view_mut((m, m), (m, m)).copy_from(re);
    embed.view_mut((0, m), (m, m)).copy_from(&(-im));
    embed.view_mut((m, 0), (m, m)).copy_from(im);
    // symmetrize to remove rounding asymmetry before the symmetric solver
    let embed = symmetrize(&embed);
    min_eigenvalue_symmetric(&embed)
}

pub fn min_eigenvalue_symmetric(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest absolute entry of `m - mᵀ`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Solves a small dense system `a x = b` by partially pivoted LU.
///
/// Fails when the smallest pivot is negligible relative to the largest entry
/// of `a`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let lu = a.clone().lu();
    let u = lu.u();
    let pivot = (0..u.nrows())
        .map(|i| u[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if !(pivot / scale > 1e-12) {
        return Err(Error::SingularSystem {
            what: what.to_string(),
            pivot,
        });
    }
    lu.solve(b).ok_or_else(|| Error::SingularSystem {
        what: what.to_string(),
        pivot,
    })
}

/// Block-diagonal direct sum of two square matrices.
pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}
