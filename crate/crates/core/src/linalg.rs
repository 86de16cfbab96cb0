//! Small dense helpers shared by the sampling code and the test oracles.

use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Left fold of [`kron`] over a non-empty list.
pub fn kron_all<'a, I>(mats: I) -> DMatrix<f64>
where
    I: IntoIterator<Item = &'a DMatrix<f64>>,
{
    let mut it = mats.into_iter();
    let first = it.next().expect("kron_all needs at least one factor").clone();
    it.fold(first, |acc, m| kron(&acc, m))
}

/// Kronecker product of vectors, first factor most significant.
pub fn kron_vec(vs: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for v in vs {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for &a in &out {
            next.extend(v.iter().map(|&b| a * b));
        }
        out = next;
    }
    out
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `a b`, through faer's blocked kernels.
pub fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows());
    from_faer((to_faer(a) * to_faer(b)).as_ref())
}

/// `aᵀ a`.
pub fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    let f = to_faer(a);
    from_faer((f.transpose() * &f).as_ref())
}

/// Thin SVD `m = U diag(s) Vᵀ`, singular values descending.
pub fn svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector().iter().copied().collect();
    Ok((from_faer(svd.U()), s, from_faer(svd.V())))
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let mut s = to_faer(m)
        .singular_values()
        .map_err(|e| Error::NumericalFailure(format!("svd: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(DVector::from_vec(s))
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn sigma_min(m: &DMatrix<f64>) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(s.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("symmetric eigensolver: {e:?}")))?;
    let values = eig.S().column_vector().iter().copied().collect();
    Ok((values, from_faer(eig.U())))
}

/// Moore-Penrose pseudoinverse; singular values below `rel_cutoff * sigma_max`
/// are treated as zero.
pub fn pinv(m: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    let mut out = DMatrix::zeros(cols, rows);
    if rows == 0 || cols == 0 {
        return Ok(out);
    }
    let (u, s, v) = svd(m)?;
    let cut = rel_cutoff * s.iter().copied().fold(0.0, f64::max);
    for (k, &sk) in s.iter().enumerate() {
        if sk > cut && sk > 0.0 {
            // out += v_k * u_kᵀ / s
            out.ger(1.0 / sk, &v.column(k), &u.column(k), 1.0);
        }
    }
    Ok(out)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a general real square matrix whose spectrum is known to be
/// real, sorted descending. Imaginary parts are dropped.
pub fn real_eigenvalues_sorted(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::NumericalFailure(format!("eigensolver: {e:?}")))?
        .iter()
        .map(|c| c.re)
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}
