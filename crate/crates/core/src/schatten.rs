//! Schatten and Lorentz–Schatten quasi-norms of matrices.
//!
//! `M` belongs to `S_{p,q}` exactly when its singular values belong to
//! `l_{p,q}`, and `sigma_{p,q}(M) = ||s(M)||_{p,q}`. All spectra come from
//! [`crate::linalg::svd`].

use serde::Serialize;

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use crate::lorentz::{lorentz_quasinorm, LorentzParams, RealSeq};

/// Singular values of a matrix, non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    sigma: RealSeq,
}

impl SingularSpectrum {
    pub fn of(m: &CMatrix) -> Result<Self> {
        Ok(Self {
            sigma: singular_values(m)?,
        })
    }

    pub fn sigma(&self) -> &RealSeq {
        &self.sigma
    }

    pub fn quasinorm(&self, params: LorentzParams) -> f64 {
        lorentz_quasinorm(&self.sigma, params)
    }
}

pub fn schatten_quasinorm(m: &CMatrix, params: LorentzParams) -> Result<f64> {
    Ok(SingularSpectrum::of(m)?.quasinorm(params))
}

/// `1 / (1/a + 1/b)`, with `1/inf = 0`.
pub fn harmonic_sum(a: f64, b: f64) -> f64 {
    1.0 / (a.recip() + b.recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub p_u: f64,
    pub q_u: f64,
    pub p_v: f64,
    pub q_v: f64,
    /// `1/s = 1/p_u + 1/p_v`
    pub s: f64,
    /// `1/r = 1/q_u + 1/q_v`
    pub r: f64,
}

/// Outcome of a composition-inequality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    pub exponents: Exponents,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Relative slack granted to `lhs <= rhs` for floating-point rounding.
pub const COMPOSITION_REL_SLACK: f64 = 1e-12;

/// Checks `sigma_{s,r}(UV) <= C sigma_{p_u,q_u}(U) sigma_{p_v,q_v}(V)` with
/// `C = 1` when both factors are measured on the diagonal scale
/// (`p = q`) and `C = 2^{1/s}` otherwise.
pub fn composition_check(
    u: &CMatrix,
    v: &CMatrix,
    u_params: LorentzParams,
    v_params: LorentzParams,
) -> Result<CompositionReport> {
    if u.cols() != v.rows() {
        return Err(Error::ShapeMismatch(format!(
            "cannot compose {}x{} with {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    for p in [u_params.p, u_params.q, v_params.p, v_params.q] {
        if !p.is_finite() {
            return Err(Error::InvalidExponent(
                "composition_check needs finite exponents".into(),
            ));
        }
    }
    let s = harmonic_sum(u_params.p, v_params.p);
    let r = harmonic_sum(u_params.q, v_params.q);
    let constant = if u_params.is_diagonal() && v_params.is_diagonal() {
        1.0
    } else {
        2f64.powf(1.0 / s)
    };
    let lhs = schatten_quasinorm(&u.matmul(v)?, LorentzParams::new(s, r)?)?;
    let rhs = constant * schatten_quasinorm(u, u_params)? * schatten_quasinorm(v, v_params)?;
    Ok(CompositionReport {
        exponents: Exponents {
            p_u: u_params.p,
            q_u: u_params.q,
            p_v: v_params.p,
            q_v: v_params.q,
            s,
            r,
        },
        lhs,
        rhs,
        constant,
        holds: lhs <= rhs * (1.0 + COMPOSITION_REL_SLACK),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub from: LorentzParams,
    pub to: LorentzParams,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Checks `sigma_{p',q'}(M) <= C sigma_{p,q}(M)` for an admissible
/// inclusion `S_{p,q} ⊂ S_{p',q'}`, with `C` taken from the calibration
/// fixtures.
pub fn inclusion_check(
    m: &CMatrix,
    from: LorentzParams,
    to: LorentzParams,
    calibration: &Calibration,
) -> Result<InclusionReport> {
    let admissible = (from.p == to.p && from.q <= to.q) || from.p < to.p;
    if !admissible {
        return Err(Error::InvalidExponent(format!(
            "S_({},{}) is not included in S_({},{})",
            from.p, from.q, to.p, to.q
        )));
    }
    let constant = calibration.inclusion_constant(from, to).ok_or_else(|| {
        Error::InvalidInput(format!(
            "no calibrated inclusion constant for ({},{}) -> ({},{})",
            from.p, from.q, to.p, to.q
        ))
    })?;
    let spectrum = SingularSpectrum::of(m)?;
    let source_norm = spectrum.quasinorm(from);
    let target_norm = spectrum.quasinorm(to);
    let ratio = if source_norm == 0.0 {
        0.0
    } else {
        target_norm / source_norm
    };
    Ok(InclusionReport {
        from,
        to,
        source_norm,
        target_norm,
        ratio,
        constant,
        holds: ratio <= constant * (1.0 + COMPOSITION_REL_SLACK),
    })
}
