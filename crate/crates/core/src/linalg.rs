// Thin wrappers over faer so the rest of the crate sees plain Results and Vecs.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn determinant(a: &Mat<f64>) -> f64 {
    a.as_ref().determinant()
}

pub(crate) fn inverse(a: &Mat<f64>) -> Mat<f64> {
    a.partial_piv_lu().inverse()
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub(crate) fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("symmetric eigensolver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a complex Hermitian matrix, ascending. Only the lower
/// triangle is read.
pub(crate) fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("Hermitian eigensolver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub(crate) fn max_abs_diff(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub(crate) fn complex_determinant(a: &Mat<Complex64>) -> Complex64 {
    a.as_ref().determinant()
}
