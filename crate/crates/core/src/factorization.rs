//! Explicit factorizations through Schatten-class middle operators.
//!
//! A [`FactorChain`] lists its stages in *application order*: the first
//! stage acts first, so the represented operator is
//! `stages[k-1] * ... * stages[1] * stages[0]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{conv_matrix, fourier, GroupFunction};
use crate::linalg::{kron, mixed_norm, svd, CMatrix, NormTag, ONE, ZERO};
use crate::lorentz::{lorentz_quasinorm, LorentzParams, RealSeq};
use crate::schatten::{schatten_quasinorm, SingularSpectrum};

/// Fourier coefficients below this fraction of the largest one count as zero.
pub const ZERO_COEFF_REL: f64 = 1e-13;

/// Tolerance on unit row/column norms of a [`NuclearRep`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Pairs an outer exponent `r` in `(0, 1]` with the middle Schatten
/// exponent `v` given by `1/v = 1/r - 1` (`v = inf` at `r = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRelation {
    pub outer: f64,
    #[serde(with = "crate::io::ext_real")]
    pub middle: f64,
}

impl ExponentRelation {
    pub fn new(outer: f64) -> Result<Self> {
        if !(outer > 0.0 && outer <= 1.0) {
            return Err(Error::InvalidExponent(format!(
                "exponent must lie in (0, 1], got {outer}"
            )));
        }
        let middle = if outer == 1.0 {
            f64::INFINITY
        } else {
            outer / (1.0 - outer)
        };
        Ok(Self { outer, middle })
    }

    /// Residual of `1/middle = 1/outer - 1`.
    pub fn defect(&self) -> f64 {
        (self.middle.recip() - (self.outer.recip() - 1.0)).abs()
    }

    pub fn middle_params(&self) -> LorentzParams {
        LorentzParams {
            p: self.middle,
            q: self.middle,
        }
    }
}

/// Finite nuclear representation `T x = sum_n d_n <x'_n, x> y_n`.
///
/// Rows of `functionals` are the `x'_n`, normalized in the norm dual to
/// `domain`; columns of `vectors` are the `y_n`, normalized in `codomain`.
#[derive(Debug, Clone)]
pub struct NuclearRep {
    d: RealSeq,
    functionals: CMatrix,
    vectors: CMatrix,
    domain: NormTag,
    codomain: NormTag,
}

impl NuclearRep {
    pub fn new(d: RealSeq, functionals: CMatrix, vectors: CMatrix, domain: NormTag, codomain: NormTag) -> Result<Self> {
        let n = d.len();
        if functionals.rows() != n || vectors.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n} coefficients with {} functionals and {} vectors",
                functionals.rows(),
                vectors.cols()
            )));
        }
        for i in 0..n {
            let norm = domain.dual().vector_norm(functionals.row_slice(i));
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidInput(format!(
                    "functional {i} has {} norm {norm}",
                    domain.dual()
                )));
            }
            let norm = codomain.vector_norm(&vectors.col_vec(i));
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidInput(format!("vector {i} has {codomain} norm {norm}")));
            }
        }
        Ok(Self {
            d,
            functionals,
            vectors,
            domain,
            codomain,
        })
    }

    pub fn coefficients(&self) -> &RealSeq {
        &self.d
    }

    pub fn functionals(&self) -> &CMatrix {
        &self.functionals
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn domain(&self) -> NormTag {
        self.domain
    }

    pub fn codomain(&self) -> NormTag {
        self.codomain
    }

    /// The represented operator `Y diag(d) X'`.
    pub fn operator(&self) -> CMatrix {
        let scaled = CMatrix::from_fn(self.vectors.rows(), self.d.len(), |i, n| {
            self.vectors[(i, n)] * self.d.values()[n]
        });
        scaled.matmul(&self.functionals).expect("shapes checked in new")
    }

    /// `||d||_s`, the quasi-norm bound this representation certifies for `nu_s`.
    pub fn nu_bound(&self, s: f64) -> f64 {
        lorentz_quasinorm(&self.d, LorentzParams { p: s, q: s })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub matrix: CMatrix,
    pub from: NormTag,
    pub to: NormTag,
}

impl Stage {
    pub fn new(matrix: CMatrix, from: NormTag, to: NormTag) -> Self {
        Self { matrix, from, to }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorChain {
    stages: Vec<Stage>,
    middle_index: usize,
    middle_params: LorentzParams,
}

impl FactorChain {
    pub fn new(stages: Vec<Stage>, middle_index: usize, middle_params: LorentzParams) -> Result<Self> {
        if middle_index >= stages.len() {
            return Err(Error::InvalidInput(format!(
                "middle index {middle_index} for a chain of {} stages",
                stages.len()
            )));
        }
        for (k, w) in stages.windows(2).enumerate() {
            if w[1].matrix.cols() != w[0].matrix.rows() {
                return Err(Error::ShapeMismatch(format!(
                    "stage {} ({}x{}) cannot follow stage {k} ({}x{})",
                    k + 1,
                    w[1].matrix.rows(),
                    w[1].matrix.cols(),
                    w[0].matrix.rows(),
                    w[0].matrix.cols()
                )));
            }
        }
        Ok(Self {
            stages,
            middle_index,
            middle_params,
        })
    }

    /// Three-stage chain `T = left * diag(sigma) * right^*` from the SVD,
    /// Euclidean on both ends.
    pub fn from_svd(t: &CMatrix, middle_params: LorentzParams) -> Result<Self> {
        let f = svd(t)?;
        let l2 = NormTag::L2;
        Self::new(
            vec![
                Stage::new(f.right.adjoint(), l2, l2),
                Stage::new(CMatrix::diag_real(f.sigma.values()), l2, l2),
                Stage::new(f.left, l2, l2),
            ],
            1,
            middle_params,
        )
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stages_mut(&mut self) -> &mut [Stage] {
        &mut self.stages
    }

    pub fn middle_index(&self) -> usize {
        self.middle_index
    }

    pub fn middle(&self) -> &CMatrix {
        &self.stages[self.middle_index].matrix
    }

    pub fn middle_params(&self) -> LorentzParams {
        self.middle_params
    }

    /// Product of all stages.
    pub fn compose(&self) -> Result<CMatrix> {
        let mut acc = self.stages[0].matrix.clone();
        for s in &self.stages[1..] {
            acc = s.matrix.matmul(&acc)?;
        }
        Ok(acc)
    }
}

fn check_outer_exponent(s: f64) -> Result<ExponentRelation> {
    ExponentRelation::new(s)
}

/// Five-stage chain `V Δ2 Δ0 Δ1 W` for a nuclear representation, with
/// `Δ1 = Δ2 = diag(d^{r/2})` and the middle `Δ0 = diag(d^{1-r})` in `S_v`.
pub fn five_factor(rep: &NuclearRep, r: f64) -> Result<FactorChain> {
    let rel = check_outer_exponent(r)?;
    let d = rep.coefficients().values();
    let half: Vec<f64> = d.iter().map(|&x| x.powf(r / 2.0)).collect();
    let mid: Vec<f64> = d.iter().map(|&x| x.powf(1.0 - r)).collect();
    FactorChain::new(
        vec![
            Stage::new(rep.functionals().clone(), rep.domain(), NormTag::LInf),
            Stage::new(CMatrix::diag_real(&half), NormTag::LInf, NormTag::L2),
            Stage::new(CMatrix::diag_real(&mid), NormTag::L2, NormTag::L2),
            Stage::new(CMatrix::diag_real(&half), NormTag::L2, NormTag::L1),
            Stage::new(rep.vectors().clone(), NormTag::L1, rep.codomain()),
        ],
        2,
        rel.middle_params(),
    )
}

/// Non-zero part of `f^`: character indices, moduli and phases.
struct Support {
    chars: Vec<usize>,
    moduli: Vec<f64>,
    phases: Vec<Complex64>,
}

fn fourier_support(f: &GroupFunction) -> Result<Support> {
    if f.is_zero() {
        return Err(Error::Degenerate("function is identically zero".into()));
    }
    let hat = fourier(f);
    let top = hat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut support = Support {
        chars: Vec::new(),
        moduli: Vec::new(),
        phases: Vec::new(),
    };
    for (k, z) in hat.iter().enumerate() {
        let c = z.norm();
        if c > ZERO_COEFF_REL * top {
            support.chars.push(k);
            support.moduli.push(c);
            support.phases.push(z / c);
        }
    }
    Ok(support)
}

/// Three-stage chain `A U B` for the convolution operator `mu -> f * mu`:
///
/// * `B mu = (mu^(g_n) c_n^{s/2})_n`, `l1 -> l2`
/// * `U = diag(c_n^{1-s})`, the middle in `S_r` with `1/r = 1/s - 1`
/// * `A b = sum_n b_n sign(f^(g_n)) c_n^{s/2} g_n`, `l2 -> linf`
///
/// where `c_n = |f^(g_n)|` over the non-zero Fourier coefficients and
/// `sign z = z / |z|`.
pub fn conv_factor(f: &GroupFunction, s: f64) -> Result<FactorChain> {
    let rel = check_outer_exponent(s)?;
    let sup = fourier_support(f)?;
    let g = f.group();
    let k = sup.chars.len();
    let n = g.order();
    let char_val = |c: usize, t: usize| g.character_value(crate::group::Character(c), crate::group::GroupElement(t));
    let b = CMatrix::from_fn(k, n, |i, t| {
        char_val(sup.chars[i], t).conj() * sup.moduli[i].powf(s / 2.0)
    });
    let u = CMatrix::diag_real(&sup.moduli.iter().map(|c| c.powf(1.0 - s)).collect::<Vec<_>>());
    let a = CMatrix::from_fn(n, k, |t, i| {
        char_val(sup.chars[i], t) * sup.phases[i] * sup.moduli[i].powf(s / 2.0)
    });
    FactorChain::new(
        vec![
            Stage::new(b, NormTag::L1, NormTag::L2),
            Stage::new(u, NormTag::L2, NormTag::L2),
            Stage::new(a, NormTag::L2, NormTag::LInf),
        ],
        1,
        rel.middle_params(),
    )
}

/// Nuclear representation of `mu -> f * mu` through the diagonal
/// `l_inf -> l_1` route: coefficients `|f^(g)|`, functionals
/// `mu -> mu^(g)` (sup-norm one on measures) and vectors `sign f^(g) g`.
pub fn conv_nuclear_rep(f: &GroupFunction, s: f64) -> Result<NuclearRep> {
    check_outer_exponent(s)?;
    let sup = fourier_support(f)?;
    let g = f.group();
    let n = g.order();
    let char_val = |c: usize, t: usize| g.character_value(crate::group::Character(c), crate::group::GroupElement(t));
    let functionals = CMatrix::from_fn(sup.chars.len(), n, |i, t| char_val(sup.chars[i], t).conj());
    let vectors = CMatrix::from_fn(n, sup.chars.len(), |t, i| char_val(sup.chars[i], t) * sup.phases[i]);
    NuclearRep::new(
        RealSeq::from_nonneg(sup.moduli),
        functionals,
        vectors,
        NormTag::L1,
        NormTag::LInf,
    )
}

/// Stagewise Kronecker product of two three-stage chains. The middle
/// spectrum is the outer product of the two middle spectra.
///
/// Norm tags are kept where both chains agree and otherwise taken from `c1`.
pub fn tensor_factor(c1: &FactorChain, c2: &FactorChain) -> Result<FactorChain> {
    for (name, c) in [("first", c1), ("second", c2)] {
        if c.stages().len() != 3 || c.middle_index() != 1 {
            return Err(Error::InvalidInput(format!(
                "{name} chain must have three stages with the middle in position 1"
            )));
        }
    }
    let stages = c1
        .stages()
        .iter()
        .zip(c2.stages())
        .map(|(a, b)| Ok(Stage::new(kron(&a.matrix, &b.matrix)?, a.from, a.to)))
        .collect::<Result<Vec<_>>>()?;
    FactorChain::new(stages, 1, c1.middle_params())
}

/// Chains recovered from a factorization of `T_f = kron(conv_matrix(f), T)`.
#[derive(Debug, Clone)]
pub struct ExtractedFactors {
    /// Composes to `conv_matrix(f)`: `(V R) (P U) (A k)`.
    pub conv_chain: FactorChain,
    /// Composes to `T`: `(j B) U (A i)`.
    pub t_chain: FactorChain,
    /// Evaluation point with `f(s0) != 0`.
    pub s0: usize,
    /// `||T x0|| = 1`.
    pub x0: Vec<Complex64>,
    /// Norming functional with `<y', T x0> = ||y'|| = 1`.
    pub y_prime: Vec<Complex64>,
}

/// Residual tolerance for accepting an input chain in [`extract_scalar_factors`].
pub const EXTRACT_INPUT_TOL: f64 = 1e-10;

/// Splits a factorization of `T_f` into factorizations of `T` and of the
/// scalar convolution operator, reusing its middle operator.
///
/// * `T = j B U A i` with `i x = delta_e ⊗ x` and `j h = h(s0) / f(s0)`;
/// * `conv(f) = V R P U A k` with `k mu = mu ⊗ x0`, `P` the orthogonal
///   projection onto the range of `U A k`, `R` the restriction of `B`, and
///   `V (h ⊗ y) = h <y', y>`.
///
/// Element-major ordering is used for `C^{|G|} ⊗ C^d`.
pub fn extract_scalar_factors(tf_chain: &FactorChain, f: &GroupFunction, t: &CMatrix) -> Result<ExtractedFactors> {
    if f.is_zero() {
        return Err(Error::Degenerate("function is identically zero".into()));
    }
    if t.max_abs() == 0.0 {
        return Err(Error::Degenerate("operator T is zero".into()));
    }
    if tf_chain.stages().len() != 3 || tf_chain.middle_index() != 1 {
        return Err(Error::InvalidInput(
            "T_f chain must have three stages with the middle in position 1".into(),
        ));
    }
    let conv = conv_matrix(f);
    let target = kron(&conv, t)?;
    let composed = tf_chain.compose()?;
    if composed.shape() != target.shape() {
        return Err(Error::ShapeMismatch(format!(
            "chain composes to {}x{}, T_f is {}x{}",
            composed.rows(),
            composed.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let scale = target.max_abs().max(1.0);
    let residual = composed.max_abs_diff(&target)?;
    if residual > EXTRACT_INPUT_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "chain does not factor T_f (residual {residual:e})"
        )));
    }

    let g = f.group();
    let order = g.order();
    let (d_out, d_in) = t.shape();
    let a = &tf_chain.stages()[0];
    let u = &tf_chain.stages()[1];
    let b = &tf_chain.stages()[2];

    let s0 = f
        .values()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, _)| k)
        .expect("non-empty group");
    let f_s0 = f.values()[s0];

    let mut e_id = CMatrix::zeros(order, 1);
    e_id[(0, 0)] = ONE;
    let i_map = kron(&e_id, &CMatrix::identity(d_in))?;
    let mut e_s0 = CMatrix::zeros(1, order);
    e_s0[(0, s0)] = ONE / f_s0;
    let j_map = kron(&e_s0, &CMatrix::identity(d_out))?;

    let t_chain = FactorChain::new(
        vec![
            Stage::new(a.matrix.matmul(&i_map)?, NormTag::L2, a.to),
            u.clone(),
            Stage::new(j_map.matmul(&b.matrix)?, b.from, NormTag::L2),
        ],
        1,
        tf_chain.middle_params(),
    )?;

    let t_svd = svd(t)?;
    let top = t_svd.sigma.approx_number(1);
    let x0: Vec<Complex64> = t_svd.right.col_vec(0).iter().map(|z| z / top).collect();
    let y_prime = t.matvec(&x0)?;

    let k_map = kron(&CMatrix::identity(order), &CMatrix::column(&x0))?;
    let ak = a.matrix.matmul(&k_map)?;
    let uak = u.matrix.matmul(&ak)?;
    let range = svd(&uak)?;
    let sig_top = range.sigma.approx_number(1);
    let rank = range
        .sigma
        .values()
        .iter()
        .take_while(|&&v| v > 1e-12 * sig_top)
        .count();
    let q = range.left.select_cols(&(0..rank).collect::<Vec<_>>());
    let p_map = q.adjoint();
    let r_map = b.matrix.matmul(&q)?;
    let y_row = CMatrix::row(&y_prime.iter().map(|z| z.conj()).collect::<Vec<_>>());
    let v_map = kron(&CMatrix::identity(order), &y_row)?;

    let conv_chain = FactorChain::new(
        vec![
            Stage::new(ak, NormTag::L1, a.to),
            Stage::new(p_map.matmul(&u.matrix)?, u.from, u.to),
            Stage::new(v_map.matmul(&r_map)?, b.from, NormTag::LInf),
        ],
        1,
        tf_chain.middle_params(),
    )?;

    Ok(ExtractedFactors {
        conv_chain,
        t_chain,
        s0,
        x0,
        y_prime,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageNorm {
    pub from: NormTag,
    pub to: NormTag,
    pub value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// `max |compose - target|`
    pub residual: f64,
    pub stage_norms: Vec<StageNorm>,
    pub middle_sigma_pq: f64,
    /// Product of the outer stage norms and the middle quasi-norm.
    pub product_of_norms: f64,
    /// False when some outer norm is only a lower bound.
    pub product_exact: bool,
}

/// Residual against `target` and the norm bookkeeping of the chain.
/// The middle stage is measured by `sigma_{p,q}` (operator norm for `p = inf`).
pub fn verify_chain(chain: &FactorChain, target: &CMatrix, params: LorentzParams) -> Result<ChainReport> {
    let composed = chain.compose()?;
    let residual = composed.max_abs_diff(target)?;
    let middle_sigma_pq = schatten_quasinorm(chain.middle(), params)?;
    let mut stage_norms = Vec::with_capacity(chain.stages().len());
    let mut product = 1.0;
    let mut product_exact = true;
    for (k, st) in chain.stages().iter().enumerate() {
        let nv = if k == chain.middle_index() {
            crate::linalg::NormValue {
                value: middle_sigma_pq,
                exact: true,
            }
        } else {
            mixed_norm(&st.matrix, st.from, st.to)?
        };
        product *= nv.value;
        product_exact &= nv.exact;
        stage_norms.push(StageNorm {
            from: st.from,
            to: st.to,
            value: nv.value,
            exact: nv.exact,
        });
    }
    Ok(ChainReport {
        residual,
        stage_norms,
        middle_sigma_pq,
        product_of_norms: product,
        product_exact,
    })
}

/// Whether every singular value of `inner` is at most the matching
/// singular value of `outer` (plus `tol`).
pub fn spectrum_dominated(inner: &CMatrix, outer: &CMatrix, tol: f64) -> Result<bool> {
    let a = SingularSpectrum::of(inner)?;
    let b = SingularSpectrum::of(outer)?;
    let n = a.sigma().len().max(b.sigma().len());
    Ok((1..=n).all(|k| a.sigma().approx_number(k) <= b.sigma().approx_number(k) + tol))
}

#[allow(dead_code)]
fn zero_like(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |_, _| ZERO)
}
