//! Thin wrappers over the dense complex kernels.

use faer::{Mat, MatRef, Side};

use crate::{Error, Result, C64};

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub(crate) fn herm_eig(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    if m.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigendecomposition: {e:?}")))?;
    let vals = (0..m.nrows()).map(|i| evd.S()[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn herm_eigvals(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigenvalues: {e:?}")))
}

/// Singular values, nonincreasing.
pub(crate) fn singular_values(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values()
        .map_err(|e| Error::Numerical(format!("singular values: {e:?}")))
}

/// Thin SVD `m = U diag(s) V*`, singular values nonincreasing.
pub(crate) fn thin_svd(m: MatRef<'_, C64>) -> Result<(Mat<C64>, Vec<f64>, Mat<C64>)> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok((Mat::zeros(m.nrows(), 0), Vec::new(), Mat::zeros(m.ncols(), 0)));
    }
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let s = (0..k).map(|i| svd.S()[i].re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

/// Orthonormal basis of the column space, singular values above `tol`.
pub(crate) fn column_space(m: MatRef<'_, C64>, tol: f64) -> Result<Mat<C64>> {
    let (u, s, _) = thin_svd(m)?;
    let r = s.iter().take_while(|&&x| x > tol).count();
    Ok(u.subcols(0, r).to_owned())
}

/// `V V*` for a matrix with orthonormal columns.
pub(crate) fn outer_projection(v: MatRef<'_, C64>) -> Mat<C64> {
    v * v.adjoint()
}

pub(crate) fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max |a - b|` entrywise.
pub(crate) fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

pub(crate) fn is_diagonal(m: MatRef<'_, C64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

/// Operator norm of a Hermitian or skew-Hermitian matrix via its eigenvalues.
pub(crate) fn normal_norm(m: MatRef<'_, C64>, skew: bool) -> Result<f64> {
    let h = if skew {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * C64::new(0.0, 1.0))
    } else {
        m.to_owned()
    };
    Ok(herm_eigvals(h.as_ref())?.into_iter().fold(0.0, |a, x| a.max(x.abs())))
}

/// Symmetrized copy `(m + m*)/2`.
pub(crate) fn hermitian_part(m: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `max |m − m*|` entrywise.
pub(crate) fn hermitian_defect(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}
