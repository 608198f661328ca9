//! Experiment configuration and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! seed = 42
//! group = Z4xZ3xZ5
//! exponents = 1:2, 2:1
//! s = 0.5
//! m_lo = 4
//! m_hi = 11
//! tol_abs = 1e-10
//! tol_rel = 1e-9
//! out = results
//! ```
//!
//! `p` and `q` may be given instead of `exponents` to set a single pair.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{parse_err, Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::io::parse_real;
use crate::lorentz::LorentzParams;

/// `x_m ⊗ x_m` has `(2^{m+1} - 1)^2` entries; beyond this it no longer
/// fits comfortably in memory.
pub const MAX_TENSOR_M: u32 = 11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub group_spec: String,
    pub exponents: Vec<LorentzParams>,
    pub s: f64,
    pub m_lo: u32,
    pub m_hi: u32,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            group_spec: "Z64".into(),
            exponents: vec![LorentzParams { p: 1.0, q: 2.0 }],
            s: 0.5,
            m_lo: 4,
            m_hi: 11,
            tol_abs: 1e-10,
            tol_rel: 1e-9,
            output_dir: None,
        }
    }
}

/// Values present in a config file or on the command line. Unset fields
/// leave the underlying configuration untouched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub group_spec: Option<String>,
    pub exponents: Option<Vec<LorentzParams>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<f64>,
    pub m_lo: Option<u32>,
    pub m_hi: Option<u32>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

fn parse_pairs(line: usize, v: &str) -> Result<Vec<LorentzParams>> {
    v.split(',')
        .map(|pair| {
            let (p, q) = pair
                .split_once(':')
                .ok_or_else(|| parse_err(line, format!("expected p:q, got {:?}", pair.trim())))?;
            let p = parse_real(p).ok_or_else(|| parse_err(line, format!("bad p {p:?}")))?;
            let q = parse_real(q).ok_or_else(|| parse_err(line, format!("bad q {q:?}")))?;
            LorentzParams::new(p, q)
        })
        .collect()
}

impl ConfigOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(parse_err(line, format!("duplicate key {key:?}")));
            }
            let real = || parse_real(value).ok_or_else(|| parse_err(line, format!("{key}: bad number {value:?}")));
            let int = || {
                value
                    .parse::<u32>()
                    .map_err(|_| parse_err(line, format!("{key}: bad integer {value:?}")))
            };
            match key {
                "seed" => {
                    c.seed = Some(
                        value
                            .parse()
                            .map_err(|_| parse_err(line, format!("bad seed {value:?}")))?,
                    )
                }
                "group" => c.group_spec = Some(value.to_owned()),
                "exponents" => c.exponents = Some(parse_pairs(line, value)?),
                "p" => c.p = Some(real()?),
                "q" => c.q = Some(real()?),
                "s" => c.s = Some(real()?),
                "m_lo" => c.m_lo = Some(int()?),
                "m_hi" => c.m_hi = Some(int()?),
                "tol_abs" => c.tol_abs = Some(real()?),
                "tol_rel" => c.tol_rel = Some(real()?),
                "out" => c.output_dir = Some(PathBuf::from(value)),
                other => return Err(parse_err(line, format!("unknown key {other:?}"))),
            }
        }
        Ok(c)
    }
}

impl ExperimentConfig {
    /// Applies overrides and validates the result.
    pub fn with(mut self, o: &ConfigOverrides) -> Result<Self> {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.group_spec {
            self.group_spec = v.clone();
        }
        if let Some(v) = &o.exponents {
            self.exponents = v.clone();
        }
        if o.p.is_some() || o.q.is_some() {
            let base = self
                .exponents
                .first()
                .copied()
                .unwrap_or(LorentzParams { p: 1.0, q: 2.0 });
            self.exponents = vec![LorentzParams::new(o.p.unwrap_or(base.p), o.q.unwrap_or(base.q))?];
        }
        if let Some(v) = o.s {
            self.s = v;
        }
        if let Some(v) = o.m_lo {
            self.m_lo = v;
        }
        if let Some(v) = o.m_hi {
            self.m_hi = v;
        }
        if let Some(v) = o.tol_abs {
            self.tol_abs = v;
        }
        if let Some(v) = o.tol_rel {
            self.tol_rel = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = Some(v.clone());
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.group()?;
        if self.exponents.is_empty() {
            return Err(Error::InvalidInput("at least one exponent pair is required".into()));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::InvalidExponent(format!("s must lie in (0, 1], got {}", self.s)));
        }
        if self.m_lo > self.m_hi {
            return Err(Error::InvalidInput(format!(
                "m range {}..{} is empty",
                self.m_lo, self.m_hi
            )));
        }
        for (name, t) in [("tol_abs", self.tol_abs), ("tol_rel", self.tol_rel)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn group(&self) -> Result<FiniteAbelianGroup> {
        self.group_spec.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = ConfigOverrides::parse("seed = 7\n# note\ngroup = Z4 x Z3\nm_hi = 9 # trailing\n").unwrap();
        let flags = ConfigOverrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = ExperimentConfig::default().with(&file).unwrap().with(&flags).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.group().unwrap().order(), 12);
        assert_eq!(cfg.m_hi, 9);
    }

    #[test]
    fn exponent_lists() {
        let c = ConfigOverrides::parse("exponents = 1:2, 2:1, inf:inf").unwrap();
        let e = c.exponents.unwrap();
        assert_eq!(e.len(), 3);
        assert!(e[2].p.is_infinite());
        let cfg = ExperimentConfig::default()
            .with(&ConfigOverrides {
                q: Some(4.0),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(cfg.exponents, vec![LorentzParams { p: 1.0, q: 4.0 }]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigOverrides::parse("seed 7").is_err());
        assert!(ConfigOverrides::parse("colour = red").is_err());
        assert!(ConfigOverrides::parse("seed = 1\nseed = 2").is_err());
        assert!(ConfigOverrides::parse("exponents = 1-2").is_err());
        assert!(ConfigOverrides::parse("m_lo = -1").is_err());
        let bad = ConfigOverrides::parse("m_lo = 9\nm_hi = 4").unwrap();
        assert!(ExperimentConfig::default().with(&bad).is_err());
        let bad = ConfigOverrides::parse("tol_abs = 0").unwrap();
        assert!(ExperimentConfig::default().with(&bad).is_err());
        let bad = ConfigOverrides::parse("group = Q8").unwrap();
        assert!(ExperimentConfig::default().with(&bad).is_err());
    }
}
