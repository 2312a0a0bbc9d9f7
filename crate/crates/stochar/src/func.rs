//! Data functions `f`, `g` and test functions given on the command line.
//!
//! Accepted forms (JSON): a bare number, `{"const": c}`,
//! `{"poly": [[[exps...], coef], ...]}`, or
//! `{"indicator": {"halfspace": {"normal": [...], "offset": c}}}`, the
//! indicator of the closed half-space `normal·x ≥ offset`. A value starting
//! with `@` names a file holding the JSON.

use serde::Deserialize;
use stochar_core::estimate::ScalarFn;
use stochar_core::poly::CompiledPoly;
use stochar_core::MultiPoly;

use crate::spec::{PolySpec, SpecError};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum IndicatorSpec {
    Halfspace(HalfspaceSpec),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FnObject {
    Const(f64),
    Poly(PolySpec),
    Indicator(IndicatorSpec),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Number(f64),
    Object(FnObject),
}

/// A function ready for evaluation.
#[derive(Clone, Debug)]
pub enum Func {
    Const(f64),
    Poly { poly: MultiPoly, compiled: CompiledPoly },
    Halfspace { normal: Vec<f64>, offset: f64 },
}

impl Func {
    pub fn parse(arg: &str, dim: usize) -> Result<Self, SpecError> {
        let text = match arg.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).map_err(|source| SpecError::Io {
                path: path.to_string(),
                source,
            })?,
            None => arg.to_string(),
        };
        let spec: FnSpec = serde_json::from_str(&text)?;
        Self::build(&spec, dim)
    }

    pub fn build(spec: &FnSpec, dim: usize) -> Result<Self, SpecError> {
        Ok(match spec {
            FnSpec::Number(c) | FnSpec::Object(FnObject::Const(c)) => Func::Const(*c),
            FnSpec::Object(FnObject::Poly(p)) => {
                let poly = p.build(dim)?;
                Func::Poly {
                    compiled: poly.compile(),
                    poly,
                }
            }
            FnSpec::Object(FnObject::Indicator(IndicatorSpec::Halfspace(h))) => {
                if h.normal.len() != dim {
                    return Err(SpecError::Invalid(format!(
                        "indicator normal has length {}, expected {dim}",
                        h.normal.len()
                    )));
                }
                Func::Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset,
                }
            }
        })
    }

    /// `sup |f|` when it is known without a domain.
    pub fn sup_abs(&self) -> Option<f64> {
        match self {
            Func::Const(c) => Some(c.abs()),
            Func::Halfspace { .. } => Some(1.0),
            Func::Poly { poly, .. } => poly.is_constant().then(|| poly.max_abs_coefficient()),
        }
    }

    /// The polynomial form, for symbolic uses.
    pub fn as_poly(&self, dim: usize) -> Option<MultiPoly> {
        match self {
            Func::Const(c) => Some(MultiPoly::constant(dim, *c)),
            Func::Poly { poly, .. } => Some(poly.clone()),
            Func::Halfspace { .. } => None,
        }
    }
}

impl ScalarFn for Func {
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Func::Const(c) => *c,
            Func::Poly { compiled, .. } => compiled.eval(x),
            Func::Halfspace { normal, offset } => {
                let s: f64 = normal.iter().zip(x).map(|(a, b)| a * b).sum();
                if s >= *offset {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
