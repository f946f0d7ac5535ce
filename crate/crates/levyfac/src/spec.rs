//! `name:key=value,...` specs for exponents and closed-form transforms, and
//! quadruplet exponents built from expressions.

use std::sync::Arc;

use levyfac_core::exponent::{self, CharExponent, LevyMeasure, RealFn};
use levyfac_core::mellin::{self, MellinFunction};
use levyfac_core::quad::integrate_real;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("malformed spec `{0}`: expected name:key=value,...")]
    Malformed(String),
    #[error("unknown exponent `{0}`")]
    UnknownExponent(String),
    #[error("`{name}` needs parameter `{key}`")]
    Missing { name: String, key: String },
    #[error("`{name}` does not take parameter `{key}`")]
    Unknown { name: String, key: String },
    #[error(transparent)]
    Expr(#[from] crate::expr::ParseError),
    #[error(transparent)]
    Core(#[from] levyfac_core::Error),
}

/// A parsed `name:key=value,...` string.
#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub name: String,
    pub params: Vec<(String, f64)>,
}

impl Spec {
    pub fn parse(s: &str) -> Result<Spec, SpecError> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s, ""),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(SpecError::Malformed(s.to_string()));
        }
        let mut params = Vec::new();
        if !rest.is_empty() {
            for part in rest.split(',') {
                let (k, v) = part.split_once('=').ok_or_else(|| SpecError::Malformed(s.to_string()))?;
                let k = k.trim();
                if k.is_empty() || params.iter().any(|(p, _): &(String, f64)| p == k) {
                    return Err(SpecError::Malformed(s.to_string()));
                }
                params.push((k.to_string(), Expr::constant(v.trim())?));
            }
        }
        Ok(Spec { name: name.to_string(), params })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    fn need(&self, key: &str) -> Result<f64, SpecError> {
        self.get(key).ok_or_else(|| SpecError::Missing { name: self.name.clone(), key: key.to_string() })
    }

    fn only(&self, keys: &[&str]) -> Result<(), SpecError> {
        for (k, _) in &self.params {
            if !keys.contains(&k.as_str()) {
                return Err(SpecError::Unknown { name: self.name.clone(), key: k.clone() });
            }
        }
        Ok(())
    }

    /// Builds a builtin exponent.
    pub fn exponent(&self) -> Result<CharExponent, SpecError> {
        Ok(match self.name.as_str() {
            "brownian" => {
                self.only(&["a", "sigma", "q"])?;
                let q = self.get("q").unwrap_or(0.0);
                exponent::brownian_killed(self.need("a")?, self.need("sigma")?, q)?
            }
            "spectrally-positive" | "sp" => {
                self.only(&["alpha"])?;
                exponent::spectrally_positive(self.need("alpha")?)?
            }
            "lamperti" => {
                self.only(&["alpha", "rho"])?;
                exponent::lamperti_stable(self.need("alpha")?, self.need("rho")?)?
            }
            "tilted-stable" => {
                self.only(&["alpha", "rho"])?;
                exponent::tilted_stable(self.need("alpha")?, self.need("rho")?)?
            }
            _ => return Err(SpecError::UnknownExponent(self.name.clone())),
        })
    }

    /// Looks up a registered closed-form Mellin transform.
    pub fn mellin(&self) -> Result<MellinFunction, SpecError> {
        let p: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(mellin::registered(&self.name, &p)?)
    }

    /// Canonical text form, used for cache keys and report labels.
    pub fn canonical(&self) -> String {
        let mut p = self.params.clone();
        p.sort_by(|a, b| a.0.cmp(&b.0));
        let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v:?}")).collect();
        format!("{}:{}", self.name, parts.join(","))
    }
}

/// An exponent given by its quadruplet, with Lévy densities as expressions
/// in `y > 0` (the jump size for the negative side is `-y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupletSpec {
    #[serde(default = "zero")]
    pub killing: String,
    #[serde(default = "zero")]
    pub drift: String,
    #[serde(default = "zero")]
    pub gaussian: String,
    pub density_plus: Option<String>,
    pub density_minus: Option<String>,
    /// Largest `u` with `∫_{y>1} e^{uy} Π(dy) < ∞`; 0 when unknown.
    #[serde(default)]
    pub barrier_plus: f64,
    #[serde(default)]
    pub barrier_minus: f64,
}

fn zero() -> String {
    "0".to_string()
}

fn side(src: &Option<String>) -> Result<Option<(RealFn, RealFn)>, SpecError> {
    let Some(src) = src else { return Ok(None) };
    let e = Expr::compile(src, &["y"])?;
    let d = e.clone();
    let density: RealFn = Arc::new(move |y: f64| if y > 0.0 { d.eval(&[y]).max(0.0) } else { 0.0 });
    let inner = density.clone();
    let tail: RealFn = Arc::new(move |y: f64| {
        if !(y > 0.0) {
            return f64::INFINITY;
        }
        integrate_real(|t| inner(t), y, f64::INFINITY, 1e-12).unwrap_or(f64::NAN)
    });
    Ok(Some((density, tail)))
}

impl QuadrupletSpec {
    pub fn build(&self) -> Result<CharExponent, SpecError> {
        let q = Expr::constant(&self.killing)?;
        let a = Expr::constant(&self.drift)?;
        let s = Expr::constant(&self.gaussian)?;
        let plus = side(&self.density_plus)?;
        let minus = side(&self.density_minus)?;
        let measure = if plus.is_none() && minus.is_none() {
            None
        } else {
            let zero: RealFn = Arc::new(|_| 0.0);
            let (dp, tp) = plus.clone().unwrap_or((zero.clone(), zero.clone()));
            let (dm, tm) = minus.clone().unwrap_or((zero.clone(), zero));
            let density: RealFn = Arc::new(move |x: f64| if x > 0.0 { dp(x) } else if x < 0.0 { dm(-x) } else { 0.0 });
            Some(LevyMeasure {
                density,
                tail_plus: tp,
                tail_minus: tm,
                inv_tail_plus: None,
                inv_tail_minus: None,
                barrier_plus: self.barrier_plus,
                barrier_minus: self.barrier_minus,
                has_plus: plus.is_some(),
                has_minus: minus.is_some(),
            })
        };
        Ok(CharExponent::quadruplet(q, a, s, measure)?)
    }
}
