use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, ZERO};
use super::svd::singular_values;
use crate::error::{Error, Result};

/// Largest column count for the brute-force `l_inf -> l_2` search.
pub const MAX_BRUTE_FORCE_DIM: usize = 12;

/// Norm attached to the domain or codomain of a matrix stage.
///
/// `L1` models measures (variation norm), `LInf` continuous functions
/// (sup norm), `L2` Hilbert space legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormTag {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl NormTag {
    pub fn name(self) -> &'static str {
        match self {
            NormTag::L1 => "l1",
            NormTag::L2 => "l2",
            NormTag::LInf => "linf",
        }
    }

    /// The norm dual to `self` (`l1 <-> linf`, `l2` self-dual).
    pub fn dual(self) -> Self {
        match self {
            NormTag::L1 => NormTag::LInf,
            NormTag::L2 => NormTag::L2,
            NormTag::LInf => NormTag::L1,
        }
    }

    pub fn vector_norm(self, v: &[Complex64]) -> f64 {
        match self {
            NormTag::L1 => v.iter().map(|z| z.norm()).sum(),
            NormTag::L2 => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            NormTag::LInf => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for NormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NormTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l1" => Ok(NormTag::L1),
            "l2" => Ok(NormTag::L2),
            "linf" => Ok(NormTag::LInf),
            other => Err(Error::InvalidInput(format!("unknown norm tag {other:?}"))),
        }
    }
}

/// An operator norm value; `exact == false` marks a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub exact: bool,
}

/// Operator norm of `m` viewed as a map `(C^cols, from) -> (C^rows, to)`.
///
/// Closed forms: `l1->l1` (max column sum), `l1->l2` (max column l2 norm),
/// `l1->linf` (max entry), `l2->l2` (top singular value), `l2->linf`
/// (max row l2 norm), `linf->linf` (max row sum). `linf->l2` is exact for
/// diagonal matrices and otherwise a lower bound from a sign-grid search
/// refined by coordinate ascent on phases (at most
/// [`MAX_BRUTE_FORCE_DIM`] columns); `l2->l1` is its adjoint.
pub fn mixed_norm(m: &CMatrix, from: NormTag, to: NormTag) -> Result<NormValue> {
    use NormTag::*;
    let exact = |value| Ok(NormValue { value, exact: true });
    match (from, to) {
        (L1, L1) => exact(max_over_cols(m, |c| L1.vector_norm(c))),
        (L1, L2) => exact(max_over_cols(m, |c| L2.vector_norm(c))),
        (L1, LInf) => exact(m.max_abs()),
        (L2, L2) => exact(singular_values(m)?.approx_number(1)),
        (L2, LInf) => exact(max_over_rows(m, |r| L2.vector_norm(r))),
        (LInf, LInf) => exact(max_over_rows(m, |r| L1.vector_norm(r))),
        (LInf, L2) => inf_to_two(m),
        (L2, L1) => inf_to_two(&m.adjoint()),
        (LInf, L1) => Err(Error::UnsupportedNorm {
            from: from.name(),
            to: to.name(),
            reason: "no tractable evaluation".into(),
        }),
    }
}

fn max_over_cols(m: &CMatrix, f: impl Fn(&[Complex64]) -> f64) -> f64 {
    (0..m.cols()).map(|j| f(&m.col_vec(j))).fold(0.0, f64::max)
}

fn max_over_rows(m: &CMatrix, f: impl Fn(&[Complex64]) -> f64) -> f64 {
    (0..m.rows()).map(|i| f(m.row_slice(i))).fold(0.0, f64::max)
}

fn inf_to_two(m: &CMatrix) -> Result<NormValue> {
    let n = m.cols();
    if n == 0 || m.rows() == 0 {
        return Ok(NormValue {
            value: 0.0,
            exact: true,
        });
    }
    if is_diagonal_like(m) {
        // each coordinate feeds one output; align every phase
        let value = m.frobenius();
        return Ok(NormValue { value, exact: true });
    }
    if n > MAX_BRUTE_FORCE_DIM {
        return Err(Error::UnsupportedNorm {
            from: "linf",
            to: "l2",
            reason: format!("non-diagonal matrix with {n} > {MAX_BRUTE_FORCE_DIM} columns"),
        });
    }
    let gram = m.adjoint().matmul(m)?;
    let quad = |x: &[Complex64]| -> f64 {
        let gx = gram.matvec(x).expect("square gram");
        x.iter().zip(&gx).map(|(a, b)| (a.conj() * b).re).sum::<f64>().max(0.0)
    };
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << (n - 1)) {
        let mut x: Vec<Complex64> = (0..n)
            .map(|j| {
                let neg = j > 0 && (mask >> (j - 1)) & 1 == 1;
                Complex64::new(if neg { -1.0 } else { 1.0 }, 0.0)
            })
            .collect();
        let mut val = quad(&x);
        for _ in 0..100 {
            for j in 0..n {
                let field: Complex64 = (0..n).filter(|&k| k != j).map(|k| gram[(j, k)] * x[k]).sum();
                if field != ZERO {
                    x[j] = field / field.norm();
                }
            }
            let next = quad(&x);
            if next <= val * (1.0 + 1e-15) {
                val = val.max(next);
                break;
            }
            val = next;
        }
        best = best.max(val);
    }
    Ok(NormValue {
        value: best.sqrt(),
        exact: false,
    })
}

// at most one non-zero per row and per column
fn is_diagonal_like(m: &CMatrix) -> bool {
    let rows_ok = (0..m.rows()).all(|i| m.row_slice(i).iter().filter(|z| **z != ZERO).count() <= 1);
    let cols_ok = (0..m.cols()).all(|j| (0..m.rows()).filter(|&i| m[(i, j)] != ZERO).count() <= 1);
    rows_ok && cols_ok
}
