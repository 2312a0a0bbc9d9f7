//! Polynomial vector fields, Lie brackets and the generator
//! `L = b·∇ + ½ Σ a_ij ∂_i ∂_j` in both coefficient and vector-field form.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::poly::MultiPoly;

/// Vector field `Σ_i X^i ∂_i` with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    components: Vec<MultiPoly>,
}

impl PolyVectorField {
    pub fn new(components: Vec<MultiPoly>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("vector field needs dim >= 1".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { components })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            components: (0..dim).map(|_| MultiPoly::zero(dim)).collect(),
        }
    }

    /// Constant field `Σ c_i ∂_i`.
    pub fn constant(c: &[f64]) -> Self {
        let dim = c.len();
        Self {
            components: c.iter().map(|&ci| MultiPoly::constant(dim, ci)).collect(),
        }
    }

    /// The coordinate field `∂_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let mut f = Self::zero(dim);
        f.components[axis] = MultiPoly::constant(dim, 1.0);
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiPoly::is_zero)
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Directional derivative `X p = Σ_i X^i ∂_i p`.
    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        check_dim(self.dim(), p.dim())?;
        let mut acc = MultiPoly::zero(p.dim());
        for (i, xi) in self.components.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            acc = &acc + &(xi * &p.differentiate(i)?);
        }
        Ok(acc)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Lie bracket `[X,Y]^j = Σ_i (X^i ∂_i Y^j − Y^i ∂_i X^j)`, computed exactly.
pub fn lie_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField> {
    check_dim(x.dim(), y.dim())?;
    let components = x
        .components
        .iter()
        .zip(&y.components)
        .map(|(xj, yj)| Ok(&x.apply(yj)? - &y.apply(xj)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyVectorField { components })
}

/// Row-major matrix of polynomials, e.g. σ (m×r) or a = σσᵀ (m×m).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<MultiPoly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|e| e.dim() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: bad.dim(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<MultiPoly>>) -> Result<Self> {
        let m = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != r) {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: bad.len(),
            });
        }
        Self::new(m, r, rows.into_iter().flatten().collect())
    }

    pub fn constant(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&v| MultiPoly::constant(rows, v)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[MultiPoly] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> PolyVectorField {
        PolyVectorField {
            components: (0..self.rows).map(|i| self.get(i, j).clone()).collect(),
        }
    }

    /// `σσᵀ`, exact.
    pub fn times_transpose(&self) -> PolyMatrix {
        let m = self.rows;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = MultiPoly::zero(m);
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * self.get(j, k));
                }
                entries.push(acc);
            }
        }
        PolyMatrix {
            rows: m,
            cols: m,
            entries,
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.eval(x);
        }
    }
}

/// Operator `X₀ + ½ Σ_j X_j²`, the vector-field form of a generator.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSystem {
    pub drift: PolyVectorField,
    pub noise: Vec<PolyVectorField>,
}

impl VectorFieldSystem {
    pub fn new(drift: PolyVectorField, noise: Vec<PolyVectorField>) -> Result<Self> {
        for x in &noise {
            check_dim(drift.dim(), x.dim())?;
        }
        Ok(Self { drift, noise })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    /// `(X₀ + ½ Σ X_j²) w`.
    pub fn apply(&self, w: &MultiPoly) -> Result<MultiPoly> {
        let mut acc = self.drift.apply(w)?;
        for x in &self.noise {
            let xxw = x.apply(&x.apply(w)?)?;
            acc = &acc + &xxw.scale(0.5);
        }
        Ok(acc)
    }
}

/// Splits `L` with drift `b` and diffusion `σ` into `X₀ + ½ Σ X_j²`.
///
/// `X_i` is the i-th column of σ and
/// `X₀ = Σ_ℓ (b_ℓ − ½ Σ_{i,j} σ_{ji} ∂_j σ_{ℓi}) ∂_ℓ`.
pub fn to_hormander_form(b: &PolyVectorField, sigma: &PolyMatrix) -> Result<VectorFieldSystem> {
    let m = b.dim();
    check_dim(m, sigma.rows())?;
    let noise: Vec<PolyVectorField> = (0..sigma.cols()).map(|i| sigma.column(i)).collect();
    let mut drift = Vec::with_capacity(m);
    for l in 0..m {
        let mut corr = MultiPoly::zero(m);
        for x in &noise {
            corr = &corr + &x.apply(&x.components[l])?;
        }
        drift.push(&b.components[l] - &corr.scale(0.5));
    }
    VectorFieldSystem::new(PolyVectorField::new(drift)?, noise)
}

/// `Lw = Σ b_i ∂_i w + ½ Σ a_ij ∂_i ∂_j w`, exact.
pub fn apply_generator(b: &PolyVectorField, a: &PolyMatrix, w: &MultiPoly) -> Result<MultiPoly> {
    let m = b.dim();
    check_dim(m, w.dim())?;
    check_dim(m, a.rows())?;
    check_dim(m, a.cols())?;
    let mut acc = b.apply(w)?;
    for i in 0..m {
        let di = w.differentiate(i)?;
        if di.is_zero() {
            continue;
        }
        for j in 0..m {
            let aij = a.get(i, j);
            if aij.is_zero() {
                continue;
            }
            let dij = di.differentiate(j)?;
            acc = &acc + &(aij * &dij).scale(0.5);
        }
    }
    Ok(acc)
}
