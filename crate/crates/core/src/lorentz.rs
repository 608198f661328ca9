//! Lorentz sequence spaces `l_{p,q}` on finite index sets.
//!
//! A finite sequence is identified with its zero-padded infinite extension,
//! so the approximation numbers `a_n(x)` are simply the entries of the
//! non-increasing rearrangement of `|x|`, followed by zeros.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `m` accepted by [`counterexample_xm`]; `x_m` has `2^{m+1} - 1` entries.
pub const MAX_COUNTEREXAMPLE_M: u32 = 25;

/// A finite non-negative sequence together with its non-increasing
/// rearrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeq {
    values: Vec<f64>,
    rearranged: Vec<f64>,
}

impl RealSeq {
    /// Builds a sequence from non-negative finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "sequence entries must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self::from_nonneg(values))
    }

    pub(crate) fn from_nonneg(values: Vec<f64>) -> Self {
        let mut rearranged = values.clone();
        // stable: equal entries keep their original order
        rearranged.sort_by(|a, b| b.total_cmp(a));
        Self { values, rearranged }
    }

    pub fn empty() -> Self {
        Self::from_nonneg(Vec::new())
    }

    /// Entries in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries sorted non-increasingly.
    pub fn rearranged(&self) -> &[f64] {
        &self.rearranged
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `n`-th approximation number (1-based); zero beyond the support.
    pub fn approx_number(&self, n: usize) -> f64 {
        assert!(n >= 1, "approximation numbers are 1-based");
        self.rearranged.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.rearranged.first().is_none_or(|&v| v == 0.0)
    }
}

/// Exponents `(p, q)` of a Lorentz space. Either may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    #[serde(with = "crate::io::ext_real")]
    pub p: f64,
    #[serde(with = "crate::io::ext_real")]
    pub q: f64,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidExponent(format!("p must be positive, got {p}")));
        }
        if q.is_nan() || q <= 0.0 {
            return Err(Error::InvalidExponent(format!("q must be positive, got {q}")));
        }
        if p.is_infinite() && q.is_finite() {
            return Err(Error::InvalidExponent(
                "p = inf is only supported together with q = inf".into(),
            ));
        }
        Ok(Self { p, q })
    }

    /// The diagonal case `p = q`, i.e. the plain `l_p` (Schatten-`p`) scale.
    pub fn diagonal(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }
}

/// Strictly increasing indices `1 = n_0 < n_1 < ...` whose consecutive
/// ratios stay inside `[a, b]` with `a > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiGeoSeq {
    indices: Vec<usize>,
    ratio_bounds: (f64, f64),
}

impl QuasiGeoSeq {
    pub fn new(indices: Vec<usize>, ratio_bounds: (f64, f64)) -> Result<Self> {
        let (a, b) = ratio_bounds;
        if !(a > 1.0 && a <= b) {
            return Err(Error::InvalidIndices(format!(
                "ratio bounds must satisfy 1 < a <= b, got ({a}, {b})"
            )));
        }
        if indices.first() != Some(&1) {
            return Err(Error::InvalidIndices("sequence must start at 1".into()));
        }
        for (k, w) in indices.windows(2).enumerate() {
            let ratio = w[1] as f64 / w[0] as f64;
            if ratio < a || ratio > b {
                return Err(Error::InvalidIndices(format!(
                    "ratio n_{}/n_{} = {ratio} outside [{a}, {b}]",
                    k + 1,
                    k
                )));
            }
        }
        Ok(Self { indices, ratio_bounds })
    }

    /// `n_k = 2^k` for all `2^k <= limit` (at least `n_0 = 1`).
    pub fn dyadic(limit: usize) -> Self {
        let indices = std::iter::successors(Some(1usize), |&n| n.checked_mul(2))
            .take_while(|&n| n <= limit.max(1))
            .collect();
        Self {
            indices,
            ratio_bounds: (2.0, 2.0),
        }
    }

    /// `n_k = (k + 1) 2^k` for all terms `<= limit`; ratios lie in `(2, 4]`.
    pub fn linear_dyadic(limit: usize) -> Self {
        let mut indices = Vec::new();
        for k in 0usize.. {
            let n = match (k + 1).checked_mul(1usize << k.min(62)) {
                Some(n) if k < 62 => n,
                _ => break,
            };
            if n > limit.max(1) {
                break;
            }
            indices.push(n);
        }
        Self {
            indices,
            ratio_bounds: (2.0, 4.0),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn ratio_bounds(&self) -> (f64, f64) {
        self.ratio_bounds
    }
}

/// `|x|` rearranged non-increasingly.
pub fn rearrange(x: &[f64]) -> RealSeq {
    RealSeq::from_nonneg(x.iter().map(|v| v.abs()).collect())
}

/// Moduli of complex entries, rearranged non-increasingly.
pub fn rearrange_complex(x: &[Complex64]) -> RealSeq {
    RealSeq::from_nonneg(x.iter().map(|v| v.norm()).collect())
}

/// `||x||_{p,q} = (sum_n n^{q/p - 1} a_n(x)^q)^{1/q}`, or
/// `sup_n n^{1/p} a_n(x)` when `q = inf`.
pub fn lorentz_quasinorm(x: &RealSeq, params: LorentzParams) -> f64 {
    sorted_quasinorm(x.rearranged(), params)
}

/// Same as [`lorentz_quasinorm`] for a slice that is already sorted
/// non-increasingly and non-negative.
pub(crate) fn sorted_quasinorm(a: &[f64], params: LorentzParams) -> f64 {
    let LorentzParams { p, q } = params;
    if q.is_infinite() {
        let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
        return a
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64).powf(inv_p) * v)
            .fold(0.0, f64::max);
    }
    // factor out the largest entry so tiny or huge sequences do not
    // under- or overflow in v^q
    let top = match a.first() {
        Some(&t) if t > 0.0 => t,
        _ => return 0.0,
    };
    let weight_exp = q / p - 1.0;
    let sum: f64 = if weight_exp == 0.0 {
        a.iter().map(|&v| (v / top).powf(q)).sum()
    } else {
        a.iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| ((i + 1) as f64).powf(weight_exp) * (v / top).powf(q))
            .sum()
    };
    top * sum.powf(1.0 / q)
}

/// Quasi-norm evaluated only along the indices `n_k`:
/// the `l_q` norm of `(n_k^{1/p} a_{n_k}(x))_k`.
///
/// Indices past the support pick up zeros.
pub fn subsampled_quasinorm(x: &RealSeq, params: LorentzParams, idx: &QuasiGeoSeq) -> f64 {
    let inv_p = if params.p.is_infinite() { 0.0 } else { 1.0 / params.p };
    let terms = idx
        .indices()
        .iter()
        .map(|&n| (n as f64).powf(inv_p) * x.approx_number(n));
    if params.q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(params.q)).sum::<f64>().powf(1.0 / params.q)
    }
}

/// All pairwise products `x_n y_m`, rearranged.
pub fn outer_product(x: &RealSeq, y: &RealSeq) -> RealSeq {
    let mut values = Vec::with_capacity(x.len() * y.len());
    for &a in x.values() {
        values.extend(y.values().iter().map(|&b| a * b));
    }
    RealSeq::from_nonneg(values)
}

/// The block sequence `x_m`: value `2^{-i}` on the positions
/// `2^i <= n < 2^{i+1}` for `i = 0..=m`.
pub fn counterexample_xm(m: u32) -> Result<RealSeq> {
    if m > MAX_COUNTEREXAMPLE_M {
        return Err(Error::SizeGuard(format!(
            "counterexample_xm: m = {m} exceeds {MAX_COUNTEREXAMPLE_M}"
        )));
    }
    let len = (1usize << (m + 1)) - 1;
    let mut values = Vec::with_capacity(len);
    for i in 0..=m {
        let v = (-(i as f64)).exp2();
        values.extend(std::iter::repeat_n(v, 1usize << i));
    }
    Ok(RealSeq::from_nonneg(values))
}

/// Least-squares slope of `log y` against `log x`.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "slope_fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(Error::InvalidInput(format!(
            "slope_fit needs positive finite coordinates, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope_fit: all x coordinates coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
