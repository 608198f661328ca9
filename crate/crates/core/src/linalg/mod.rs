//! Dense complex linear algebra kernel.

mod eigen;
mod matrix;
mod norms;
mod svd;

use num_complex::Complex64;

pub use eigen::{eigenvalues, hessenberg, sort_spectrum, MAX_EIGEN_DIM};
pub use matrix::{CMatrix, ONE, ZERO};
pub use norms::{mixed_norm, NormTag, NormValue, MAX_BRUTE_FORCE_DIM};
pub use svd::{singular_values, svd, SvdResult, MAX_SVD_DIM};

use crate::error::{Error, Result};

/// Largest number of entries [`kron`] will allocate.
pub const MAX_KRON_ENTRIES: usize = 1 << 22;

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let entries = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
    match entries {
        Some(n) if n <= MAX_KRON_ENTRIES => {}
        _ => {
            return Err(Error::SizeGuard(format!(
                "kron of {}x{} and {}x{} exceeds {MAX_KRON_ENTRIES} entries",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )))
        }
    }
    let (br, bc) = b.shape();
    Ok(CMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    }))
}

/// Largest distance between paired elements when two multisets of complex
/// numbers are matched greedily by globally closest pairs.
///
/// Returns `None` when the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    Some(worst)
}
