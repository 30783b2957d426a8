//! Dense helpers shared by the region, pencil and solver modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn skew(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

/// Nearest positive semidefinite matrix in Frobenius norm to the symmetric
/// part of `m`, by clipping negative eigenvalues.
pub fn project_psd(m: &Mat) -> Mat {
    let s = sym(m);
    let eig = SymmetricEigen::new(s.clone());
    // Already PSD: return it untouched rather than a rounded reconstruction.
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return s;
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * Mat::from_diagonal(&clipped) * v.transpose();
    symmetrize_in_place(&mut out);
    out
}

/// Like [`project_psd`], but eigenvalues below `floor` are set to exactly zero
/// and the result is rebuilt from the retained eigenpairs only.
pub fn truncate_psd(m: &Mat, floor: f64) -> Mat {
    let eig = SymmetricEigen::new(sym(m));
    let n = m.nrows();
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > floor {
            let v = eig.eigenvectors.column(k);
            out += lam * v * v.transpose();
        }
    }
    symmetrize_in_place(&mut out);
    out
}

pub fn symmetrize_in_place(m: &mut Mat) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * aij));
        }
    }
    out
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn lambda_max(m: &Mat) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

pub fn lambda_min(m: &Mat) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
/// Its spectrum is the Hermitian spectrum with every eigenvalue doubled.
pub fn hermitian_embedding(h: &CMat) -> Mat {
    let s = h.nrows();
    let mut out = Mat::zeros(2 * s, 2 * s);
    for i in 0..s {
        for j in 0..s {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + s, j + s)] = z.re;
            out[(i, j + s)] = -z.im;
            out[(i + s, j)] = z.im;
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let doubled = sym_eigenvalues(&hermitian_embedding(h));
    doubled.into_iter().step_by(2).collect()
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn is_positive_definite(m: &Mat) -> bool {
    nalgebra::Cholesky::new(sym(m)).is_some()
}

pub fn inverse(m: &Mat, what: &str) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(what.to_string()))
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != nc) {
        return Err(Error::Format(format!(
            "{what}: row {i} has {} entries, expected {nc}",
            r.len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Format(format!("{what}: non-finite entry")));
    }
    Ok(Mat::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub fn require_square(m: &Mat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn require_dim(m: &Mat, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}
