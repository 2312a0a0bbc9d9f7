//! Diffusion models `dx = b(x) dt + σ(x) dW` on a state space.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{apply_generator, to_hormander_form, PolyMatrix, PolyVectorField, VectorFieldSystem};
use crate::poly::{CompiledPoly, MultiPoly};

/// Non-polynomial coefficients supplied as code. Usable for simulation only.
pub trait CoefficientFn: Send + Sync {
    /// Writes `b(x)` into `out` (length m).
    fn drift(&self, x: &[f64], out: &mut [f64]);
    /// Writes `σ(x)` row-major into `out` (length m·r).
    fn sigma(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Clone)]
enum Coefficients {
    Polynomial {
        drift: PolyVectorField,
        sigma: PolyMatrix,
        a: PolyMatrix,
        compiled_drift: Box<[CompiledPoly]>,
        compiled_sigma: Box<[CompiledPoly]>,
        /// `σ` when it is constant, row-major.
        constant_sigma: Option<Vec<f64>>,
    },
    Callable(Arc<dyn CoefficientFn>),
}

#[derive(Clone)]
pub struct DiffusionModel {
    m: usize,
    r: usize,
    coeffs: Coefficients,
    statespace: Domain,
}

impl fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("DiffusionModel");
        s.field("m", &self.m).field("r", &self.r);
        match &self.coeffs {
            Coefficients::Polynomial { drift, sigma, .. } => {
                s.field("drift", drift).field("sigma", sigma);
            }
            Coefficients::Callable(_) => {
                s.field("coefficients", &"<callable>");
            }
        }
        s.field("statespace", &self.statespace).finish()
    }
}

/// Scratch buffers for one walker.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub(crate) b: Vec<f64>,
    pub(crate) sigma: Vec<f64>,
    pub(crate) a: Vec<f64>,
}

impl DiffusionModel {
    /// Polynomial model; `sigma` is m×r. `r = 0` (no noise) is allowed here
    /// for symbolic use, but the model-file loader rejects it.
    pub fn polynomial(drift: PolyVectorField, sigma: PolyMatrix, statespace: Domain) -> Result<Self> {
        let m = drift.dim();
        if sigma.rows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: sigma.rows(),
            });
        }
        if statespace.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: statespace.dim(),
            });
        }
        if let Some(bad) = sigma.entries().iter().find(|p| p.dim() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.dim(),
            });
        }
        let r = sigma.cols();
        let constant_sigma = sigma
            .entries()
            .iter()
            .all(|p| p.is_constant())
            .then(|| sigma.entries().iter().map(|p| p.coefficient(&vec![0; m])).collect());
        Ok(Self {
            m,
            r,
            coeffs: Coefficients::Polynomial {
                compiled_drift: drift.components().iter().map(|p| p.compile()).collect(),
                compiled_sigma: sigma.entries().iter().map(|p| p.compile()).collect(),
                a: sigma.times_transpose(),
                drift,
                sigma,
                constant_sigma,
            },
            statespace,
        })
    }

    pub fn callable(m: usize, r: usize, f: Arc<dyn CoefficientFn>, statespace: Domain) -> Result<Self> {
        if m == 0 || r == 0 {
            return Err(Error::InvalidArgument("callable model needs m, r >= 1".into()));
        }
        if statespace.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: statespace.dim(),
            });
        }
        Ok(Self {
            m,
            r,
            coeffs: Coefficients::Callable(f),
            statespace,
        })
    }

    pub fn dim_state(&self) -> usize {
        self.m
    }

    pub fn dim_noise(&self) -> usize {
        self.r
    }

    pub fn statespace(&self) -> &Domain {
        &self.statespace
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.coeffs, Coefficients::Polynomial { .. })
    }

    pub fn drift_poly(&self) -> Result<&PolyVectorField> {
        match &self.coeffs {
            Coefficients::Polynomial { drift, .. } => Ok(drift),
            Coefficients::Callable(_) => Err(Error::NonPolynomial),
        }
    }

    pub fn sigma_poly(&self) -> Result<&PolyMatrix> {
        match &self.coeffs {
            Coefficients::Polynomial { sigma, .. } => Ok(sigma),
            Coefficients::Callable(_) => Err(Error::NonPolynomial),
        }
    }

    /// `a = σσᵀ`, exact.
    pub fn diffusion_poly(&self) -> Result<&PolyMatrix> {
        match &self.coeffs {
            Coefficients::Polynomial { a, .. } => Ok(a),
            Coefficients::Callable(_) => Err(Error::NonPolynomial),
        }
    }

    /// Exact `Lw`.
    pub fn generator(&self, w: &MultiPoly) -> Result<MultiPoly> {
        apply_generator(self.drift_poly()?, self.diffusion_poly()?, w)
    }

    pub fn hormander_form(&self) -> Result<VectorFieldSystem> {
        to_hormander_form(self.drift_poly()?, self.sigma_poly()?)
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            b: vec![0.0; self.m],
            sigma: vec![0.0; self.m * self.r],
            a: vec![0.0; self.m * self.m],
        }
    }

    #[inline]
    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.coeffs {
            Coefficients::Polynomial { compiled_drift, .. } => {
                for (o, p) in out.iter_mut().zip(compiled_drift.iter()) {
                    *o = p.eval(x);
                }
            }
            Coefficients::Callable(f) => f.drift(x, out),
        }
    }

    #[inline]
    pub fn sigma_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.coeffs {
            Coefficients::Polynomial {
                compiled_sigma,
                constant_sigma,
                ..
            } => {
                if let Some(c) = constant_sigma {
                    out.copy_from_slice(c);
                } else {
                    for (o, p) in out.iter_mut().zip(compiled_sigma.iter()) {
                        *o = p.eval(x);
                    }
                }
            }
            Coefficients::Callable(f) => f.sigma(x, out),
        }
    }

    /// `σσᵀ(x)` row-major into `ws.a`, using `ws.sigma` as scratch.
    pub fn diffusion_into(&self, x: &[f64], ws: &mut Workspace) {
        self.sigma_into(x, &mut ws.sigma);
        self.diffusion_from_sigma(ws);
    }

    /// `ws.a = ws.sigma · ws.sigmaᵀ`.
    #[inline]
    pub(crate) fn diffusion_from_sigma(&self, ws: &mut Workspace) {
        let (m, r) = (self.m, self.r);
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..r {
                    s += ws.sigma[i * r + k] * ws.sigma[j * r + k];
                }
                ws.a[i * m + j] = s;
            }
        }
    }

    /// Euler–Maruyama step `x + b(x)h + σ(x)√h·z` written to `out`.
    /// Leaves `b(x)`, `σ(x)` in the workspace.
    #[inline]
    pub fn step_into(&self, x: &[f64], h: f64, z: &[f64], out: &mut [f64], ws: &mut Workspace) {
        self.drift_into(x, &mut ws.b);
        self.sigma_into(x, &mut ws.sigma);
        let sq = h.sqrt();
        let r = self.r;
        for i in 0..self.m {
            let mut noise = 0.0;
            for k in 0..r {
                noise += ws.sigma[i * r + k] * z[k];
            }
            out[i] = x[i] + ws.b[i] * h + sq * noise;
        }
    }

    /// One Euler–Maruyama step; fails on a non-finite result.
    pub fn step_em(&self, x: &[f64], dt: f64, gaussians: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        if gaussians.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                found: gaussians.len(),
            });
        }
        let mut ws = self.workspace();
        let mut out = vec![0.0; self.m];
        self.step_into(x, dt, gaussians, &mut out, &mut ws);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Exploded);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm1() -> DiffusionModel {
        DiffusionModel::polynomial(
            PolyVectorField::zero(1),
            PolyMatrix::constant(1, 1, &[1.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap()
    }

    #[test]
    fn em_step_examples() {
        let frozen = DiffusionModel::polynomial(
            PolyVectorField::zero(2),
            PolyMatrix::constant(2, 1, &[0.0, 0.0]).unwrap(),
            Domain::full(2),
        )
        .unwrap();
        assert_eq!(frozen.step_em(&[0.3, -1.0], 0.1, &[2.0]).unwrap(), vec![0.3, -1.0]);
        let drift = DiffusionModel::polynomial(
            PolyVectorField::constant(&[1.0]),
            PolyMatrix::constant(1, 1, &[0.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap();
        assert_eq!(drift.step_em(&[0.0], 0.1, &[0.7]).unwrap(), vec![0.1]);
        let y = bm1().step_em(&[1.0], 0.25, &[2.0]).unwrap();
        assert_eq!(y, vec![2.0]);
        assert!(bm1().step_em(&[1.0, 0.0], 0.1, &[0.0]).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let cubic = DiffusionModel::polynomial(
            PolyVectorField::new(vec![MultiPoly::from_terms(1, [(vec![3], 1.0)]).unwrap()]).unwrap(),
            PolyMatrix::constant(1, 1, &[0.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap();
        assert_eq!(cubic.step_em(&[1e200], 1.0, &[0.0]), Err(Error::Exploded));
    }

    struct Tanh;
    impl CoefficientFn for Tanh {
        fn drift(&self, x: &[f64], out: &mut [f64]) {
            out[0] = -x[0].tanh();
        }
        fn sigma(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 1.0;
        }
    }

    #[test]
    fn callable_rejects_symbolic_use() {
        let m = DiffusionModel::callable(1, 1, Arc::new(Tanh), Domain::full(1)).unwrap();
        assert!(!m.is_polynomial());
        assert_eq!(m.generator(&MultiPoly::var(1, 0).unwrap()), Err(Error::NonPolynomial));
        assert_eq!(m.hormander_form().err(), Some(Error::NonPolynomial));
        let y = m.step_em(&[0.0], 0.01, &[0.0]).unwrap();
        assert_eq!(y, vec![0.0]);
    }

    #[test]
    fn generator_of_square() {
        let w = MultiPoly::from_terms(1, [(vec![2], 1.0)]).unwrap();
        assert_eq!(bm1().generator(&w).unwrap(), MultiPoly::constant(1, 1.0));
    }
}
