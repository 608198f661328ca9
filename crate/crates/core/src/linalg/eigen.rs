//! Eigenvalues of general complex matrices: Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR with deflation.

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};

pub const MAX_EIGEN_DIM: usize = 256;

/// All eigenvalues counted with algebraic multiplicity, ordered by
/// decreasing modulus and then by argument.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigenvalues of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    if n > MAX_EIGEN_DIM {
        return Err(Error::SizeGuard(format!(
            "eigenvalues of a {n}x{n} matrix exceed {MAX_EIGEN_DIM}"
        )));
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut eig = hessenberg_qr(&mut h)?;
    sort_spectrum(&mut eig);
    Ok(eig)
}

pub fn sort_spectrum(eig: &mut [Complex64]) {
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// In-place reduction to upper Hessenberg form by Householder reflections.
pub fn hessenberg(h: &mut CMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^*) H
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= 2.0 * vt * dot;
            }
        }
        // H <- H (I - 2 v v^*)
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| h[(i, k + 1 + t)] * vt).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= 2.0 * dot * vt.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn hessenberg_qr(h: &mut CMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let norm = h.max_abs();
    let cap = 100 * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { norm } else { scale };
            if sub <= f64::EPSILON * scale || sub <= f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = l1;
            eig[hi] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(Error::NoConvergence { n, iterations: total });
        }
        let shift = if since_deflation.is_multiple_of(11) {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(h, lo, hi, shift);
    }
    Ok(eig)
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr_half + root;
    let l2 = tr_half - root;
    // recover the smaller root from the determinant to avoid cancellation
    let det = a * d - b * c;
    if l1.norm() >= l2.norm() {
        let other = if l1 == ZERO { l2 } else { det / l1 };
        (l1, other)
    } else {
        let other = if l2 == ZERO { l1 } else { det / l2 };
        (other, l2)
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (l1, l2) = eig2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step `H - mu I = QR, H <- RQ + mu I` on the block `lo..=hi`.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rots.push((c, s));
    }
    for (t, &(c, s)) in rots.iter().enumerate() {
        let k = lo + t;
        for i in lo..=(k + 1).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

/// `(c, s)` with real `c` such that `[[c, s], [-conj(s), c]] [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_example() {
        let m = CMatrix::diag_real(&[1.0, 2.0, 3.0]);
        let e = eigenvalues(&m).unwrap();
        assert_eq!(e, vec![c(3.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn nilpotent_example() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let e = eigenvalues(&m).unwrap();
        assert!(e.iter().all(|z| z.norm() == 0.0));
        let j = CMatrix::from_fn(5, 5, |i, k| if k == i + 1 { c(1.0, 0.0) } else { ZERO });
        let e = eigenvalues(&j).unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = CMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let mut e = eigenvalues(&m).unwrap();
        e.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = CMatrix::from_real(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let e = eigenvalues(&m).unwrap();
        for (z, want) in e.iter().zip([3.0, 2.0, 1.0]) {
            assert!((z - c(want, 0.0)).norm() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let m = CMatrix::from_fn(6, 6, |i, j| c((i * 7 + j * 3) as f64 % 5.0, (i + 2 * j) as f64 % 3.0));
        let mut h = m.clone();
        hessenberg(&mut h);
        for i in 0..6 {
            for j in 0..6 {
                if i > j + 1 {
                    assert_eq!(h[(i, j)], ZERO);
                }
            }
        }
        assert!((h.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn rejects_rectangular() {
        assert!(eigenvalues(&CMatrix::zeros(2, 3)).is_err());
    }
}
