//! Empirical constants for the quasi-norm equivalences and inclusions.
//!
//! The constants are measured by [`calibrate`] (run via `nuclab calibrate`)
//! on a dedicated seed, multiplied by [`CALIBRATION_MARGIN`] and rounded up,
//! then pinned in `fixtures/calibration.json`. Suites that check against them
//! draw their instances from other seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lorentz::{
    counterexample_xm, lorentz_quasinorm, outer_product, subsampled_quasinorm, LorentzParams, QuasiGeoSeq, RealSeq,
};
use crate::rng::{cell_rng, random_sequence, stream_id};

pub const CALIBRATION_SEED: u64 = 0x00C0_FFEE_2024;
pub const CALIBRATION_TRIALS: u64 = 4000;
pub const CALIBRATION_MARGIN: f64 = 1.10;
pub const CALIBRATION_MAX_LEN: usize = 96;

const PINNED: &str = include_str!("../fixtures/calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamConstant {
    pub params: LorentzParams,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionConstant {
    pub from: LorentzParams,
    pub to: LorentzParams,
    pub constant: f64,
}

/// Ratio band of `||x_m ⊗ x_m|| / ||x_m||^2` over a range of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    pub params: LorentzParams,
    pub m_lo: u32,
    pub m_hi: u32,
    pub lo: f64,
    pub hi: f64,
}

/// `||x ⊗ y||_{r,u} <= c ||x||_{r,u} ||y||_{r,v}`, measured only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedTensorConstant {
    pub r: f64,
    pub u: f64,
    pub v: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub seed: u64,
    pub trials: u64,
    pub margin: f64,
    /// `||x + y|| <= K (||x|| + ||y||)`
    pub quasi_triangle: Vec<ParamConstant>,
    /// `max(ratio, 1/ratio)` of dyadic subsampled vs direct quasi-norm.
    pub dyadic_equivalence: Vec<ParamConstant>,
    /// Same for `n_k = (k + 1) 2^k`.
    pub linear_dyadic_equivalence: Vec<ParamConstant>,
    pub inclusion: Vec<InclusionConstant>,
    /// `||x ⊗ y|| <= C ||x|| ||y||` in the regime `q <= p`.
    pub tensor: Vec<ParamConstant>,
    pub tensor_band: RatioBand,
    pub mixed_tensor: Vec<MixedTensorConstant>,
}

pub fn quasi_triangle_configs() -> Vec<LorentzParams> {
    [
        (1.0, 2.0),
        (2.0, 1.0),
        (0.5, 1.0),
        (1.0, 0.5),
        (2.0, 4.0),
        (1.0, f64::INFINITY),
    ]
    .iter()
    .map(|&(p, q)| LorentzParams { p, q })
    .collect()
}

pub fn equivalence_configs() -> Vec<LorentzParams> {
    quasi_triangle_configs()
}

pub fn inclusion_configs() -> Vec<(LorentzParams, LorentzParams)> {
    let lp = |p, q| LorentzParams { p, q };
    vec![
        (lp(1.0, 1.0), lp(1.0, 2.0)),
        (lp(1.0, 1.0), lp(2.0, 2.0)),
        (lp(0.5, 1.0), lp(1.0, 1.0)),
        (lp(1.0, 2.0), lp(2.0, 1.0)),
        (lp(1.0, 2.0), lp(1.0, 4.0)),
        (lp(2.0, 1.0), lp(3.0, 3.0)),
    ]
}

/// Exponents with `q <= p`, where a tensor constant exists.
pub fn tensor_configs() -> Vec<LorentzParams> {
    [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 0.5), (3.0, 2.0)]
        .iter()
        .map(|&(p, q)| LorentzParams { p, q })
        .collect()
}

pub const TENSOR_BAND_PARAMS: LorentzParams = LorentzParams { p: 2.0, q: 1.0 };
pub const TENSOR_BAND_M: (u32, u32) = (2, 10);

impl Calibration {
    /// The constants checked into `fixtures/calibration.json`.
    pub fn pinned() -> Self {
        Self::from_json(PINNED).expect("pinned calibration fixture parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("calibration serializes");
        s.push('\n');
        s
    }

    fn lookup(table: &[ParamConstant], params: LorentzParams) -> Option<f64> {
        table.iter().find(|c| c.params == params).map(|c| c.constant)
    }

    pub fn quasi_triangle_constant(&self, params: LorentzParams) -> Option<f64> {
        Self::lookup(&self.quasi_triangle, params)
    }

    pub fn dyadic_constant(&self, params: LorentzParams) -> Option<f64> {
        Self::lookup(&self.dyadic_equivalence, params)
    }

    pub fn linear_dyadic_constant(&self, params: LorentzParams) -> Option<f64> {
        Self::lookup(&self.linear_dyadic_equivalence, params)
    }

    pub fn tensor_constant(&self, params: LorentzParams) -> Option<f64> {
        Self::lookup(&self.tensor, params)
    }

    /// `1` for the trivial inclusion and for raising `q` when `q <= p`;
    /// otherwise the calibrated value.
    pub fn inclusion_constant(&self, from: LorentzParams, to: LorentzParams) -> Option<f64> {
        if from == to || (from.p == to.p && from.q <= to.q && from.q <= from.p) {
            return Some(1.0);
        }
        self.inclusion
            .iter()
            .find(|c| c.from == from && c.to == to)
            .map(|c| c.constant)
    }
}

fn pad(x: &RealSeq, len: usize) -> Vec<f64> {
    let mut v = x.values().to_vec();
    v.resize(len, 0.0);
    v
}

fn max_over_trials(
    label: &str,
    seed: u64,
    trials: u64,
    f: impl Fn(&mut rand_chacha::ChaCha20Rng) -> f64 + Sync,
) -> f64 {
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut cell_rng(seed, stream_id(label, t))))
        .reduce(|| 0.0, f64::max)
}

/// Worst observed `||x + y|| / (||x|| + ||y||)`.
pub fn measure_quasi_triangle(params: LorentzParams, seed: u64, trials: u64) -> f64 {
    max_over_trials("quasi-triangle", seed, trials, |rng| {
        let x = random_sequence(rng, CALIBRATION_MAX_LEN);
        let y = random_sequence(rng, CALIBRATION_MAX_LEN);
        let len = x.len().max(y.len());
        let sum: Vec<f64> = pad(&x, len).iter().zip(pad(&y, len)).map(|(a, b)| a + b).collect();
        let sum = RealSeq::new(sum).expect("sum of non-negative sequences");
        let denom = lorentz_quasinorm(&x, params) + lorentz_quasinorm(&y, params);
        if denom == 0.0 {
            0.0
        } else {
            lorentz_quasinorm(&sum, params) / denom
        }
    })
}

/// Worst observed `max(r, 1/r)` for `r = subsampled / direct`.
pub fn measure_equivalence(params: LorentzParams, linear: bool, seed: u64, trials: u64) -> f64 {
    max_over_trials(
        if linear { "equiv-linear" } else { "equiv-dyadic" },
        seed,
        trials,
        |rng| {
            let x = random_sequence(rng, CALIBRATION_MAX_LEN);
            let idx = if linear {
                QuasiGeoSeq::linear_dyadic(x.len())
            } else {
                QuasiGeoSeq::dyadic(x.len())
            };
            let direct = lorentz_quasinorm(&x, params);
            let sub = subsampled_quasinorm(&x, params, &idx);
            if direct == 0.0 && sub == 0.0 {
                1.0
            } else {
                let r = sub / direct;
                r.max(r.recip())
            }
        },
    )
}

/// Worst observed `||x||_to / ||x||_from`.
pub fn measure_inclusion(from: LorentzParams, to: LorentzParams, seed: u64, trials: u64) -> f64 {
    max_over_trials("inclusion", seed, trials, |rng| {
        let x = random_sequence(rng, CALIBRATION_MAX_LEN);
        let a = lorentz_quasinorm(&x, from);
        if a == 0.0 {
            0.0
        } else {
            lorentz_quasinorm(&x, to) / a
        }
    })
}

/// Worst observed `||x ⊗ y||_{p,q} / (||x||_{p,q} ||y||_{p,q})`.
pub fn measure_tensor(params: LorentzParams, seed: u64, trials: u64) -> f64 {
    max_over_trials("tensor", seed, trials, |rng| {
        let x = random_sequence(rng, CALIBRATION_MAX_LEN / 2);
        let y = random_sequence(rng, CALIBRATION_MAX_LEN / 2);
        let denom = lorentz_quasinorm(&x, params) * lorentz_quasinorm(&y, params);
        if denom == 0.0 {
            0.0
        } else {
            lorentz_quasinorm(&outer_product(&x, &y), params) / denom
        }
    })
}

pub fn measure_mixed_tensor(r: f64, u: f64, v: f64, seed: u64, trials: u64) -> f64 {
    let ru = LorentzParams { p: r, q: u };
    let rv = LorentzParams { p: r, q: v };
    max_over_trials("mixed-tensor", seed, trials, |rng| {
        let x = random_sequence(rng, CALIBRATION_MAX_LEN / 2);
        let y = random_sequence(rng, CALIBRATION_MAX_LEN / 2);
        let denom = lorentz_quasinorm(&x, ru) * lorentz_quasinorm(&y, rv);
        if denom == 0.0 {
            0.0
        } else {
            lorentz_quasinorm(&outer_product(&x, &y), ru) / denom
        }
    })
}

/// `||x_m ⊗ x_m|| / ||x_m||^2` for one `m`.
pub fn xm_tensor_ratio(m: u32, params: LorentzParams) -> Result<f64> {
    let x = counterexample_xm(m)?;
    let n = lorentz_quasinorm(&x, params);
    Ok(lorentz_quasinorm(&outer_product(&x, &x), params) / (n * n))
}

fn round_up(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(3 - v.abs().log10().floor() as i32);
    (v * scale).ceil() / scale
}

fn round_down(v: f64) -> f64 {
    -round_up(-v)
}

/// Runs every measurement and applies the margin.
pub fn calibrate(seed: u64, trials: u64) -> Result<Calibration> {
    let pin = |v: f64| round_up(v * CALIBRATION_MARGIN);
    let quasi_triangle = quasi_triangle_configs()
        .into_iter()
        .map(|params| ParamConstant {
            params,
            constant: pin(measure_quasi_triangle(params, seed, trials)),
        })
        .collect();
    let equiv = |linear| {
        equivalence_configs()
            .into_iter()
            .map(|params| ParamConstant {
                params,
                constant: pin(measure_equivalence(params, linear, seed, trials)),
            })
            .collect()
    };
    let inclusion = inclusion_configs()
        .into_iter()
        .map(|(from, to)| InclusionConstant {
            from,
            to,
            constant: pin(measure_inclusion(from, to, seed, trials)),
        })
        .collect();
    let tensor = tensor_configs()
        .into_iter()
        .map(|params| ParamConstant {
            params,
            constant: pin(measure_tensor(params, seed, trials / 4)),
        })
        .collect();
    let (m_lo, m_hi) = TENSOR_BAND_M;
    let ratios = (m_lo..=m_hi)
        .map(|m| xm_tensor_ratio(m, TENSOR_BAND_PARAMS))
        .collect::<Result<Vec<_>>>()?;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let tensor_band = RatioBand {
        params: TENSOR_BAND_PARAMS,
        m_lo,
        m_hi,
        lo: round_down(lo / CALIBRATION_MARGIN),
        hi: round_up(hi * CALIBRATION_MARGIN),
    };
    let mixed_tensor = [(1.0, 2.0, 1.0), (2.0, 2.0, 1.0)]
        .iter()
        .map(|&(r, u, v)| MixedTensorConstant {
            r,
            u,
            v,
            constant: pin(measure_mixed_tensor(r, u, v, seed, trials / 4)),
        })
        .collect();
    Ok(Calibration {
        seed,
        trials,
        margin: CALIBRATION_MARGIN,
        quasi_triangle,
        dyadic_equivalence: equiv(false),
        linear_dyadic_equivalence: equiv(true),
        inclusion,
        tensor,
        tensor_band,
        mixed_tensor,
    })
}
