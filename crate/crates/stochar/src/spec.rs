//! JSON model files (`"schema": "stochar.model/1"`).
//!
//! ```json
//! {
//!   "schema": "stochar.model/1",
//!   "name": "bm-unit-interval",
//!   "dim": 1,
//!   "drift": [0],
//!   "sigma": [[1]],
//!   "domain": { "kind": "box", "lo": [0], "hi": [1] },
//!   "sim": { "dt": 0.001, "horizon": 20 }
//! }
//! ```
//!
//! A polynomial is either a number (a constant) or a list of
//! `[[exponents...], coefficient]` terms.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stochar_core::{DiffusionModel, Domain, Exhaustion, MultiPoly, PolyMatrix, PolyVectorField, SimConfig};

pub const MODEL_SCHEMA: &str = "stochar.model/1";

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {found:?} (expected {MODEL_SCHEMA:?})")]
    Schema { found: String },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] stochar_core::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Constant(f64),
    Terms(Vec<(Vec<u32>, f64)>),
}

impl PolySpec {
    pub fn build(&self, dim: usize) -> Result<MultiPoly, SpecError> {
        match self {
            PolySpec::Constant(c) => Ok(MultiPoly::constant(dim, *c)),
            PolySpec::Terms(terms) => {
                if let Some((e, _)) = terms.iter().find(|(e, _)| e.len() != dim) {
                    return Err(SpecError::Invalid(format!(
                        "monomial {e:?} has {} exponents, expected {dim}",
                        e.len()
                    )));
                }
                Ok(MultiPoly::from_terms(dim, terms.iter().cloned())?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Interior `normal·x < offset`.
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Interior `p(x) < 0`.
    Sublevel {
        poly: PolySpec,
    },
    Full,
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<Domain, SpecError> {
        let check = |v: &[f64], what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(SpecError::Invalid(format!(
                    "{what} has length {}, expected {dim}",
                    v.len()
                )))
            }
        };
        Ok(match self {
            DomainSpec::Box { lo, hi } => {
                check(lo, "box lo")?;
                check(hi, "box hi")?;
                Domain::boxed(lo.clone(), hi.clone())?
            }
            DomainSpec::Ball { center, radius } => {
                check(center, "ball center")?;
                Domain::ball(center.clone(), *radius)?
            }
            DomainSpec::Halfspace { normal, offset } => {
                check(normal, "halfspace normal")?;
                Domain::halfspace(normal.clone(), *offset)?
            }
            DomainSpec::Sublevel { poly } => Domain::sublevel(poly.build(dim)?),
            DomainSpec::Full => Domain::full(dim),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExhaustionSpec {
    Balls { center: Vec<f64>, step: f64 },
    Boxes { center: Vec<f64>, step: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub bridge: Option<bool>,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub schema: String,
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    /// One polynomial per coordinate.
    pub drift: Vec<PolySpec>,
    /// `dim` rows of `r` polynomials each.
    pub sigma: Vec<Vec<PolySpec>>,
    #[serde(default)]
    pub statespace: Option<DomainSpec>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub exhaustion: Option<ExhaustionSpec>,
    #[serde(default)]
    pub sim: SimSpec,
    /// Asserted, never checked.
    #[serde(default)]
    pub irreducible: Option<bool>,
}

/// A validated model file.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub spec: ModelSpec,
    pub model: DiffusionModel,
    /// The problem domain `U`, if the file names one.
    pub domain: Option<Domain>,
    pub exhaustion: Exhaustion,
    /// Hex SHA-256 of the file bytes.
    pub sha256: String,
}

impl LoadedModel {
    pub fn domain(&self) -> Result<&Domain, SpecError> {
        self.domain
            .as_ref()
            .ok_or_else(|| SpecError::Invalid("model file has no \"domain\"".into()))
    }

    /// Simulation settings from the file, with command-line overrides.
    pub fn sim_config(
        &self,
        dt: Option<f64>,
        horizon: Option<f64>,
        bridge: Option<bool>,
        seed: u64,
    ) -> Result<SimConfig, SpecError> {
        let dt = dt.or(self.spec.sim.dt).unwrap_or(DEFAULT_DT);
        let horizon = horizon.or(self.spec.sim.horizon).unwrap_or(DEFAULT_HORIZON);
        let bridge = bridge.or(self.spec.sim.bridge).unwrap_or(true);
        Ok(SimConfig::new(dt, horizon, seed)?.with_bridge(bridge))
    }
}

/// Noise requirement when loading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseRule {
    /// At least one noise column (simulation).
    Required,
    /// `r = 0` allowed (symbolic checks only).
    Optional,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        if spec.schema != MODEL_SCHEMA {
            return Err(SpecError::Schema { found: spec.schema });
        }
        Ok(spec)
    }

    pub fn build(&self, noise: NoiseRule) -> Result<(DiffusionModel, Option<Domain>, Exhaustion), SpecError> {
        let m = self.dim;
        if m == 0 {
            return Err(SpecError::Invalid("dim must be at least 1".into()));
        }
        if self.drift.len() != m {
            return Err(SpecError::Invalid(format!(
                "drift has {} components, expected {m}",
                self.drift.len()
            )));
        }
        if self.sigma.len() != m {
            return Err(SpecError::Invalid(format!(
                "sigma has {} rows, expected {m}",
                self.sigma.len()
            )));
        }
        let r = self.sigma[0].len();
        if self.sigma.iter().any(|row| row.len() != r) {
            return Err(SpecError::Invalid("sigma rows differ in length".into()));
        }
        if r == 0 && noise == NoiseRule::Required {
            return Err(SpecError::Invalid("sigma has no noise columns".into()));
        }
        let drift = PolyVectorField::new(self.drift.iter().map(|p| p.build(m)).collect::<Result<_, _>>()?)?;
        let entries = self
            .sigma
            .iter()
            .flatten()
            .map(|p| p.build(m))
            .collect::<Result<Vec<_>, _>>()?;
        let sigma = PolyMatrix::new(m, r, entries)?;
        let statespace = match &self.statespace {
            Some(s) => s.build(m)?,
            None => Domain::full(m),
        };
        let model = DiffusionModel::polynomial(drift, sigma, statespace)?;
        let domain = self.domain.as_ref().map(|d| d.build(m)).transpose()?;
        let exhaustion = match &self.exhaustion {
            Some(ExhaustionSpec::Balls { center, step }) => Exhaustion::Balls {
                center: center.clone(),
                step: *step,
            },
            Some(ExhaustionSpec::Boxes { center, step }) => Exhaustion::Boxes {
                center: center.clone(),
                step: *step,
            },
            None => Exhaustion::default_for(m),
        };
        if exhaustion.dim() != m {
            return Err(SpecError::Invalid("exhaustion center has the wrong dimension".into()));
        }
        exhaustion.validate()?;
        Ok((model, domain, exhaustion))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses and validates model-file text.
pub fn load_model_str(text: &str, noise: NoiseRule) -> Result<LoadedModel, SpecError> {
    let spec = ModelSpec::from_json(text)?;
    let (model, domain, exhaustion) = spec.build(noise)?;
    Ok(LoadedModel {
        spec,
        model,
        domain,
        exhaustion,
        sha256: sha256_hex(text.as_bytes()),
    })
}

pub fn load_model(path: &std::path::Path, noise: NoiseRule) -> Result<LoadedModel, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_model_str(&text, noise)
}
