//! Dense complex linear algebra helpers shared across the crate.
//!
//! Matrices are `ndarray::Array2<Complex64>` in row-major layout; that layout
//! is the repo-wide flattening convention.

use crate::error::{Error, Result};
use crate::rng::Rng;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, QR, SVD, UPLO};
use num_complex::Complex64;
use rand_distr::StandardNormal;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Array2::eye(n)
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn transpose(m: &CMat) -> CMat {
    m.t().to_owned()
}

pub fn conj(m: &CMat) -> CMat {
    m.mapv(|z| z.conj())
}

/// Kronecker product of plain matrices.
pub fn kron_mat(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Outer product `u v^dag`.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    let mut out = Array2::zeros((u.len(), v.len()));
    for i in 0..u.len() {
        for j in 0..v.len() {
            out[(i, j)] = u[i] * v[j].conj();
        }
    }
    out
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max deviation from Hermiticity, `max |m - m^dag|`.
pub fn herm_dev(m: &CMat) -> f64 {
    max_abs_diff(m, &dagger(m))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

/// Eigendecomposition of (the Hermitian part of) `m`.
///
/// Returns eigenvalues ascending and eigenvectors as matrix columns.
///
/// The backend diagonalizes the transpose when handed a row-major complex
/// array, so the returned vectors come back conjugated; we verify the residual
/// and pick whichever convention actually solves `H v = lambda v`.
pub fn eigh(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    let h = hermitian_part(m);
    let (vals, vecs) = h.eigh(UPLO::Lower)?;
    let conj_vecs = conj(&vecs);
    let lam = Array2::from_diag(&vals.mapv(|x| c(x, 0.0)));
    let res_conj = max_abs_diff(&h.dot(&conj_vecs), &conj_vecs.dot(&lam));
    let res_plain = max_abs_diff(&h.dot(&vecs), &vecs.dot(&lam));
    if res_conj <= res_plain {
        Ok((vals, conj_vecs))
    } else {
        Ok((vals, vecs))
    }
}

pub fn min_eig(m: &CMat) -> Result<f64> {
    let (vals, _) = eigh(m)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Result<Array1<f64>> {
    let (_, s, _) = m.svd(false, false)?;
    Ok(s)
}

/// Full SVD `m = u * diag(s) * v_dag`.
pub fn svd_full(m: &CMat) -> Result<(CMat, Array1<f64>, CMat)> {
    let (u, s, vdag) = m.svd(true, true)?;
    let u = u.ok_or_else(|| Error::Linalg("svd did not return U".into()))?;
    let vdag = vdag.ok_or_else(|| Error::Linalg("svd did not return V^dag".into()))?;
    Ok((u, s, vdag))
}

/// Moore-Penrose pseudo-inverse with relative cutoff on singular values.
pub fn pinv(m: &CMat, rel_cut: f64) -> Result<CMat> {
    let (u, s, vdag) = svd_full(m)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = rel_cut * smax;
    let k = s.len();
    let mut sinv = Array2::zeros((vdag.dim().0, u.dim().1));
    for i in 0..k {
        if s[i] > cut {
            sinv[(i, i)] = c(1.0 / s[i], 0.0);
        }
    }
    Ok(dagger(&vdag).dot(&sinv).dot(&dagger(&u)))
}

/// PSD square root; small negative eigenvalues are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let n = m.dim().0;
    let mut out = Array2::zeros((n, n));
    for k in 0..vals.len() {
        let lam = vals[k].max(0.0);
        let sq = lam.sqrt();
        if sq == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * sq;
            }
        }
    }
    Ok(out)
}

fn normal(rng: &mut Rng) -> f64 {
    rand::Rng::sample(rng, StandardNormal)
}

/// Matrix of iid standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> CMat {
    let mut m = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = c(normal(rng), normal(rng));
        }
    }
    m
}

/// Haar-random unitary via Ginibre + QR with R-diagonal phase normalization.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> Result<CMat> {
    if d == 1 {
        let theta = 2.0 * std::f64::consts::PI * rand::Rng::random::<f64>(rng);
        return Ok(Array2::from_elem((1, 1), Complex64::from_polar(1.0, theta)));
    }
    let g = ginibre(d, d, rng);
    let (q, r) = g.qr()?;
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::ONE
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    Ok(u)
}

/// Haar-random unit vector in `C^d`.
pub fn random_unit_vector(d: usize, rng: &mut Rng) -> CVec {
    loop {
        let mut v: CVec = Array1::zeros(d);
        for i in 0..d {
            v[i] = c(normal(rng), normal(rng));
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.mapv(|z| z / norm);
        }
    }
}
