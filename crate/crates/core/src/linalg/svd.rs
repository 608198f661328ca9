//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::lorentz::RealSeq;

/// Largest supported row or column count.
pub const MAX_SVD_DIM: usize = 1024;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = left * diag(sigma) * right^*`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub left: CMatrix,
    /// Singular values, non-increasing.
    pub sigma: RealSeq,
    /// `cols x k` with orthonormal columns.
    pub right: CMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMatrix {
        let k = self.sigma.len();
        let scaled = CMatrix::from_fn(self.left.rows(), k, |i, j| self.left[(i, j)] * self.sigma.values()[j]);
        scaled
            .matmul(&self.right.adjoint())
            .expect("svd factors are conformable")
    }
}

pub fn svd(m: &CMatrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.rows().max(m.cols()) > MAX_SVD_DIM {
        return Err(Error::SizeGuard(format!(
            "svd of a {}x{} matrix exceeds {MAX_SVD_DIM}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() < m.cols() {
        let t = jacobi(&m.adjoint());
        return Ok(SvdResult {
            left: t.right,
            sigma: t.sigma,
            right: t.left,
        });
    }
    Ok(jacobi(m))
}

/// Singular values only.
pub fn singular_values(m: &CMatrix) -> Result<RealSeq> {
    Ok(svd(m)?.sigma)
}

fn jacobi(m: &CMatrix) -> SvdResult {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    let mut a: Vec<Vec<Complex64>> = (0..cols).map(|j| m.col_vec(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| {
            let mut e = vec![ZERO; cols];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let tol = f64::EPSILON * (rows as f64).sqrt().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = a[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[j].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = a[i].iter().zip(&a[j]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, phase, c, s);
                rotate(&mut v, i, j, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut left_cols: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            left_cols.push(a[j].iter().map(|z| z / norms[j]).collect());
        } else {
            left_cols.push(vec![ZERO; rows]);
            pending.push(slot);
        }
    }
    for slot in pending {
        let basis = complete_basis(&left_cols, slot, rows);
        left_cols[slot] = basis;
    }

    let left = CMatrix::from_fn(rows, cols, |i, k| left_cols[k][i]);
    let right = CMatrix::from_fn(cols, cols, |i, k| v[order[k]][i]);
    let sigma = RealSeq::from_nonneg(order.iter().map(|&j| norms[j]).collect());
    SvdResult { left, sigma, right }
}

// column_i <- c col_i - s e^{i phi} col_j, column_j <- s col_i + c e^{i phi} col_j
fn rotate(cols: &mut [Vec<Complex64>], i: usize, j: usize, phase: Complex64, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let ci = &mut lo[i];
    let cj = &mut hi[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let yj = *y * phase;
        *x = xi * c - yj * s;
        *y = xi * s + yj * c;
    }
}

/// A unit vector orthogonal to every non-zero column except `slot`.
fn complete_basis(cols: &[Vec<Complex64>], slot: usize, rows: usize) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for e in 0..rows {
        let mut w = vec![ZERO; rows];
        w[e] = Complex64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for (k, q) in cols.iter().enumerate() {
                if k == slot || q.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let proj: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, w));
        }
        if n > 0.7 {
            break;
        }
    }
    let (n, w) = best.expect("rows > 0");
    w.into_iter().map(|z| z / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE;

    fn orthonormal_columns(m: &CMatrix, tol: f64) -> bool {
        let g = m.adjoint().matmul(m).unwrap();
        g.sub(&CMatrix::identity(m.cols())).unwrap().max_abs() <= tol
    }

    #[test]
    fn diagonal_example() {
        let m = CMatrix::diag_real(&[3.0, -4.0]);
        let s = svd(&m).unwrap();
        assert_eq!(s.sigma.values(), &[4.0, 3.0]);
        assert!(s.reconstruct().max_abs_diff(&m).unwrap() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let m = CMatrix::zeros(3, 2);
        let s = svd(&m).unwrap();
        assert_eq!(s.sigma.values(), &[0.0, 0.0]);
        assert!(orthonormal_columns(&s.left, 1e-14));
        assert!(orthonormal_columns(&s.right, 1e-14));
    }

    #[test]
    fn rank_deficient_wide_matrix() {
        let m = CMatrix::from_vec(
            2,
            4,
            vec![
                ONE,
                Complex64::new(0.0, 2.0),
                ZERO,
                ONE,
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 4.0),
                ZERO,
                Complex64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let s = svd(&m).unwrap();
        assert_eq!(s.left.shape(), (2, 2));
        assert_eq!(s.right.shape(), (4, 2));
        assert!(s.sigma.values()[1] < 1e-14);
        assert!((s.sigma.values()[0] - (6f64 * 5.0).sqrt()).abs() < 1e-13);
        assert!(s.reconstruct().max_abs_diff(&m).unwrap() < 1e-14);
        assert!(orthonormal_columns(&s.left, 1e-13));
        assert!(orthonormal_columns(&s.right, 1e-13));
    }

    #[test]
    fn rejects_non_finite() {
        let m = CMatrix::from_real(1, 2, &[1.0, f64::NAN]).unwrap();
        assert_eq!(svd(&m).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn size_guard() {
        let m = CMatrix::zeros(1, MAX_SVD_DIM + 1);
        assert!(matches!(svd(&m), Err(Error::SizeGuard(_))));
    }
}
