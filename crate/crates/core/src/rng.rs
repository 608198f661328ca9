//! Seeded randomness.
//!
//! Every random instance is drawn from a ChaCha20 stream keyed by the
//! experiment seed, with the ChaCha stream id selecting the independent cell
//! (`stream = cell index`). Cells therefore do not depend on evaluation order,
//! which keeps parallel runs byte-identical to sequential ones.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::factorization::NuclearRep;
use crate::group::{FiniteAbelianGroup, GroupFunction};
use crate::linalg::{CMatrix, NormTag};
use crate::lorentz::RealSeq;

/// Generator for cell `stream` of the experiment keyed by `seed`.
pub fn cell_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-experiment label mixed into the stream id so that different suites
/// sharing a seed draw unrelated instances.
pub fn stream_id(label: &str, cell: u64) -> u64 {
    // FNV-1a of the label, cell index in the low bits
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    (h << 20) ^ cell
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary via Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col_vec(j);
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Non-negative test sequence drawn from a mix of shapes: heavy-tailed,
/// polynomially decaying, constant and sparse.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> RealSeq {
    let len = rng.random_range(1..=max_len.max(1));
    let values: Vec<f64> = match rng.random_range(0..4u8) {
        0 => {
            let power: f64 = rng.random_range(0.2..4.0);
            (0..len)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    e.powf(power)
                })
                .collect()
        }
        1 => {
            let decay: f64 = rng.random_range(0.1..3.0);
            (1..=len).map(|n| (n as f64).powf(-decay)).collect()
        }
        2 => vec![rng.random_range(0.1..2.0); len],
        _ => (0..len)
            .map(|_| {
                if rng.random_bool(0.3) {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect(),
    };
    RealSeq::new(values).expect("generated entries are non-negative")
}

/// Diagonal matrix with a random non-negative diagonal of length `n`.
pub fn random_diagonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let power: f64 = rng.random_range(0.3..4.0);
    let d: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.powf(power)
        })
        .collect();
    CMatrix::diag_real(&d)
}

/// Function with i.i.d. complex Gaussian values.
pub fn random_group_function<R: Rng + ?Sized>(rng: &mut R, group: &FiniteAbelianGroup) -> GroupFunction {
    let values = (0..group.order()).map(|_| complex_normal(rng)).collect();
    GroupFunction::new(group.clone(), values).expect("length matches order")
}

/// Rows of i.i.d. Gaussian entries scaled to unit `l2` norm.
pub fn unit_rows<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let g = gaussian_matrix(rng, rows, cols);
    let norms: Vec<f64> = (0..rows)
        .map(|i| g.row_slice(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    CMatrix::from_fn(rows, cols, |i, j| g[(i, j)] / norms[i])
}

/// Euclidean nuclear representation with `n` terms and random unit
/// functionals and vectors; coefficients decay at a random rate.
pub fn random_nuclear_rep<R: Rng + ?Sized>(rng: &mut R, n: usize, dim_x: usize, dim_y: usize) -> NuclearRep {
    let decay: f64 = rng.random_range(0.2..3.0);
    let d: Vec<f64> = (1..=n)
        .map(|k| rng.random_range(0.5..1.0) * (k as f64).powf(-decay))
        .collect();
    let functionals = unit_rows(rng, n, dim_x);
    let vectors = unit_rows(rng, n, dim_y).transpose();
    NuclearRep::new(
        RealSeq::new(d).expect("positive"),
        functionals,
        vectors,
        NormTag::L2,
        NormTag::L2,
    )
    .expect("unit rows and columns")
}
