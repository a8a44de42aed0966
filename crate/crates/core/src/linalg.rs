//! Complex dense linear algebra helpers built on the nalgebra SVD.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;

/// Singular values (descending) and the matching right singular vectors,
/// computed on the matrix padded to square so that `V` is always complete.
pub fn full_svd(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<CVector>) {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::<Complex64>::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect();
    (sigma, vectors)
}

/// Right-singular vectors whose singular value is at most `threshold`.
pub fn nullspace(m: &DMatrix<Complex64>, threshold: f64) -> (Vec<CVector>, Vec<f64>) {
    let (sigma, vectors) = full_svd(m);
    let kernel = sigma
        .iter()
        .zip(vectors)
        .filter(|(s, _)| **s <= threshold)
        .map(|(_, v)| v)
        .collect();
    (kernel, sigma)
}

/// Orthonormal basis of the span of `vectors`; directions with singular value
/// below `rel_tol * sigma_max` are dropped.
pub fn orthonormal_span(vectors: &[CVector], rel_tol: f64) -> Vec<CVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let cols = DMatrix::from_columns(vectors);
    // span(cols) = range(cols) = orthogonal complement of ker(cols^H)
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > rel_tol * smax && smax > 0.0 {
            out.push(u.column(i).into_owned());
        }
    }
    debug_assert!(out.iter().all(|v| v.len() == n));
    out
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn hermitian_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermitian_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|<a/|a|, b/|b|>|`, 0 when either vector vanishes.
pub fn hermitian_overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na = hermitian_norm(a);
    let nb = hermitian_norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (hermitian_inner(a, b).norm() / (na * nb)).min(1.0)
}

/// Sine of the angle between the complex lines spanned by `a` and `b`.
pub fn hermitian_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let o = hermitian_overlap(a, b);
    (1.0 - o * o).max(0.0).sqrt()
}

/// Principal angles between the spans of two orthonormal families, ascending.
///
/// Uses both cosines (from `A^H B`) and sines (from the part of `A` outside
/// span `B`) so that tiny angles are resolved to full precision.
pub fn principal_angles(a: &[CVector], b: &[CVector]) -> Vec<f64> {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if a.is_empty() {
        return Vec::new();
    }
    let qa = DMatrix::from_columns(a);
    let qb = DMatrix::from_columns(b);
    let cross = qa.adjoint() * &qb;
    let mut cosines: Vec<f64> = cross
        .svd(false, false)
        .singular_values
        .iter()
        .map(|c| c.min(1.0))
        .collect();
    cosines.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let residual = &qa - &qb * (qb.adjoint() * &qa);
    let mut sines: Vec<f64> = residual
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.min(1.0))
        .collect();
    sines.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cosines
        .iter()
        .zip(sines.iter())
        .take(a.len())
        .map(|(c, s)| s.atan2(*c))
        .collect()
}
