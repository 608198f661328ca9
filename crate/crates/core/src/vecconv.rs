//! Convolution with vector-valued functions `G -> C^d`.
//!
//! Arrays are element-major: the value at group element `t`, component `c`
//! lives at `t * d + c`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::conv_matrix;
use crate::group::{Character, FiniteAbelianGroup, GroupElement, GroupFunction};
use crate::linalg::{kron, singular_values, CMatrix, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction {
    group: FiniteAbelianGroup,
    dim: usize,
    values: Vec<Complex64>,
}

fn check_layout(group: &FiniteAbelianGroup, dim: usize, data: &[Complex64]) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("vector dimension must be positive".into()));
    }
    if data.len() != group.order() * dim {
        return Err(Error::ShapeMismatch(format!(
            "expected {} x {} values, got {}",
            group.order(),
            dim,
            data.len()
        )));
    }
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn block_norms(data: &[Complex64], dim: usize) -> impl Iterator<Item = f64> + '_ {
    data.chunks(dim)
        .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

impl VectorFunction {
    pub fn new(group: FiniteAbelianGroup, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        check_layout(&group, dim, &values)?;
        Ok(Self { group, dim, values })
    }

    /// `t -> f(t) x`.
    pub fn scalar_times(f: &GroupFunction, x: &[Complex64]) -> Result<Self> {
        let values = f
            .values()
            .iter()
            .flat_map(|&ft| x.iter().map(move |&xc| ft * xc))
            .collect();
        Self::new(f.group().clone(), x.len(), values)
    }

    /// `sum_k a_k x_k g_k`.
    pub fn character_series(
        group: &FiniteAbelianGroup,
        a: &[Complex64],
        xs: &[Vec<Complex64>],
        chars: &[Character],
    ) -> Result<Self> {
        let dim = family_dim(xs)?;
        if a.len() != xs.len() || chars.len() != xs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients, {} vectors, {} characters",
                a.len(),
                xs.len(),
                chars.len()
            )));
        }
        let mut values = vec![ZERO; group.order() * dim];
        for ((ak, xk), &g) in a.iter().zip(xs).zip(chars) {
            for t in group.elements() {
                let w = ak * group.character_value(g, t);
                for c in 0..dim {
                    values[t.0 * dim + c] += w * xk[c];
                }
            }
        }
        Self::new(group.clone(), dim, values)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, t: GroupElement) -> &[Complex64] {
        &self.values[t.0 * self.dim..(t.0 + 1) * self.dim]
    }

    /// `max_t ||f(t)||_2`
    pub fn sup_norm(&self) -> f64 {
        block_norms(&self.values, self.dim).fold(0.0, f64::max)
    }

    /// Scalar function of component `c`.
    pub fn component(&self, c: usize) -> GroupFunction {
        let vals = self.values.iter().skip(c).step_by(self.dim).copied().collect();
        GroupFunction::new(self.group.clone(), vals).expect("length matches order")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    group: FiniteAbelianGroup,
    dim: usize,
    atoms: Vec<Complex64>,
}

impl VectorMeasure {
    pub fn new(group: FiniteAbelianGroup, dim: usize, atoms: Vec<Complex64>) -> Result<Self> {
        check_layout(&group, dim, &atoms)?;
        Ok(Self { group, dim, atoms })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    /// `sum_t ||mu({t})||_2`
    pub fn variation(&self) -> f64 {
        block_norms(&self.atoms, self.dim).sum()
    }
}

/// Matrix of `mu -> f * mu` from scalar measures to `C(G, C^d)`:
/// `M[(s, c), t] = f(s - t)[c]`.
pub fn vec_conv_matrix(f: &VectorFunction) -> CMatrix {
    let g = f.group();
    let d = f.dim();
    CMatrix::from_fn(g.order() * d, g.order(), |row, t| {
        let s = GroupElement(row / d);
        f.values[g.sub(s, GroupElement(t)).0 * d + row % d]
    })
}

/// Componentwise Fourier coefficients `(1/|G|) sum_t conj(g(t)) f(t)`, one
/// `d`-vector per character.
pub fn vec_fourier(f: &VectorFunction) -> Vec<Vec<Complex64>> {
    let g = f.group();
    let d = f.dim();
    let scale = 1.0 / g.order() as f64;
    g.characters()
        .map(|ch| {
            let mut acc = vec![ZERO; d];
            for t in g.elements() {
                let w = g.character_value(ch, t).conj() * scale;
                for (a, v) in acc.iter_mut().zip(f.at(t)) {
                    *a += w * v;
                }
            }
            acc
        })
        .collect()
}

pub fn vec_inverse_fourier(group: &FiniteAbelianGroup, coeffs: &[Vec<Complex64>]) -> Result<VectorFunction> {
    if coeffs.len() != group.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficient vectors for a group of order {}",
            coeffs.len(),
            group.order()
        )));
    }
    let d = family_dim(coeffs)?;
    let mut values = vec![ZERO; group.order() * d];
    for (ch, x) in group.characters().zip(coeffs) {
        for t in group.elements() {
            let w = group.character_value(ch, t);
            for c in 0..d {
                values[t.0 * d + c] += w * x[c];
            }
        }
    }
    VectorFunction::new(group.clone(), d, values)
}

fn family_dim(family: &[Vec<Complex64>]) -> Result<usize> {
    let first = family
        .first()
        .ok_or_else(|| Error::InvalidInput("empty vector family".into()))?;
    if first.is_empty() {
        return Err(Error::InvalidInput("vectors must have positive dimension".into()));
    }
    if family.iter().any(|x| x.len() != first.len()) {
        return Err(Error::ShapeMismatch("vectors of different dimensions".into()));
    }
    Ok(first.len())
}

/// `d x K` matrix with the family as columns.
pub fn family_matrix(family: &[Vec<Complex64>]) -> Result<CMatrix> {
    let d = family_dim(family)?;
    Ok(CMatrix::from_fn(d, family.len(), |c, k| family[k][c]))
}

/// `sup_{||x'|| <= 1} (sum_k |<x_k, x'>|^2)^{1/2}`, the largest singular
/// value of the matrix whose columns are the `x_k`.
pub fn weak_l2_norm(family: &[Vec<Complex64>]) -> Result<f64> {
    let m = family_matrix(family)?;
    Ok(singular_values(&m)?.approx_number(1))
}

/// Norm of a matrix `l2 -> C(G, C^d)`: the largest spectral norm among the
/// `d`-row blocks belonging to each group element.
pub fn sup_operator_norm(u: &CMatrix, order: usize, dim: usize) -> Result<f64> {
    if u.rows() != order * dim {
        return Err(Error::ShapeMismatch(format!(
            "{} rows for {order} blocks of height {dim}",
            u.rows()
        )));
    }
    let mut best: f64 = 0.0;
    for s in 0..order {
        let block = CMatrix::from_fn(dim, u.cols(), |c, k| u[(s * dim + c, k)]);
        best = best.max(singular_values(&block)?.approx_number(1));
    }
    Ok(best)
}

/// The lacunary map `b -> sum_k b_k x_k g_k` and its weighted companion.
#[derive(Debug, Clone)]
pub struct LacunaryOperator {
    /// `|G| d x K`, column `k` is `g_k ⊗ x_k`.
    pub u: CMatrix,
    /// `K x |G|`, `mu -> (a_k mu^(g_k))_k` on atom vectors.
    pub a_map: CMatrix,
    /// `sum_k a_k x_k g_k`, so that `u * a_map = vec_conv_matrix(symbol)`.
    pub symbol: VectorFunction,
}

pub fn lacunary_operator(
    group: &FiniteAbelianGroup,
    a: &[Complex64],
    xs: &[Vec<Complex64>],
    chars: &[Character],
) -> Result<LacunaryOperator> {
    let d = family_dim(xs)?;
    if a.len() != xs.len() || chars.len() != xs.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients, {} vectors, {} characters",
            a.len(),
            xs.len(),
            chars.len()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for c in chars {
        if c.0 >= group.order() {
            return Err(Error::InvalidInput(format!("character {} out of range", c.0)));
        }
        if !seen.insert(c.0) {
            return Err(Error::InvalidInput(format!("character {} repeated", c.0)));
        }
    }
    let k = xs.len();
    let u = CMatrix::from_fn(group.order() * d, k, |row, j| {
        group.character_value(chars[j], GroupElement(row / d)) * xs[j][row % d]
    });
    let a_map = CMatrix::from_fn(k, group.order(), |j, t| {
        a[j] * group.character_value(chars[j], GroupElement(t)).conj()
    });
    let symbol = VectorFunction::character_series(group, a, xs, chars)?;
    Ok(LacunaryOperator { u, a_map, symbol })
}

/// `(sum_g ||T f^(g)||_2^s)^{1/s}`.
pub fn property_l_probe(t: &CMatrix, f: &VectorFunction, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidExponent(format!("s must lie in (0, 1], got {s}")));
    }
    if t.cols() != f.dim() {
        return Err(Error::ShapeMismatch(format!(
            "operator has {} columns, function takes values in C^{}",
            t.cols(),
            f.dim()
        )));
    }
    let mut sum = 0.0;
    for x in vec_fourier(f) {
        let y = t.matvec(&x)?;
        sum += y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().powf(s);
    }
    Ok(sum.powf(1.0 / s))
}

/// Matrix of `mu -> (s -> sum_t f(s - t) T mu(t))` on `C^d`-valued measures.
pub fn tf_matrix(f: &GroupFunction, t: &CMatrix) -> Result<CMatrix> {
    kron(&conv_matrix(f), t)
}

/// Direct evaluation of the operator represented by [`tf_matrix`].
pub fn apply_tf(f: &GroupFunction, t: &CMatrix, mu: &VectorMeasure) -> Result<VectorFunction> {
    if mu.dim() != t.cols() || mu.group() != f.group() {
        return Err(Error::ShapeMismatch("measure does not match the operator".into()));
    }
    let g = f.group();
    let images: Vec<Vec<Complex64>> = (0..g.order())
        .map(|k| t.matvec(&mu.atoms()[k * mu.dim()..(k + 1) * mu.dim()]))
        .collect::<Result<_>>()?;
    let out_dim = t.rows();
    let mut values = vec![ZERO; g.order() * out_dim];
    for s in g.elements() {
        for tt in g.elements() {
            let w = f.at(g.sub(s, tt));
            for c in 0..out_dim {
                values[s.0 * out_dim + c] += w * images[tt.0][c];
            }
        }
    }
    VectorFunction::new(g.clone(), out_dim, values)
}
