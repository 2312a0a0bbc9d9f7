//! Domains with exact (or tolerance-controlled) interior/boundary/exterior
//! classification, and exhaustion sequences of the state space.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::poly::MultiPoly;
use crate::rng::PathStream;

/// Relative tolerance for boundary membership of balls and halfspaces.
pub const SURFACE_TOL: f64 = 1e-12;
/// Relative tolerance for `p(x) = 0` on polynomial sublevel sets.
pub const SUBLEVEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Open box `Π (lo_i, hi_i)`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Open ball `|x − center| < radius`.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Open halfspace `normal · x < offset`; `normal` points outward.
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `{x : p(x) < 0}`.
    Sublevel(MultiPoly),
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    dim: usize,
    shape: Shape,
    label: Option<String>,
}

impl Domain {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidArgument("box needs finite lo < hi on every axis".into()));
        }
        Ok(Self {
            dim: lo.len(),
            shape: Shape::Box { lo, hi },
            label: None,
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidArgument("ball needs dim >= 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        Ok(Self {
            dim: center.len(),
            shape: Shape::Ball { center, radius },
            label: None,
        })
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() || !(norm(&normal) > 0.0) {
            return Err(Error::InvalidArgument("halfspace normal must be nonzero".into()));
        }
        Ok(Self {
            dim: normal.len(),
            shape: Shape::HalfSpace { normal, offset },
            label: None,
        })
    }

    pub fn sublevel(p: MultiPoly) -> Self {
        Self {
            dim: p.dim(),
            shape: Shape::Sublevel(p),
            label: None,
        }
    }

    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            shape: Shape::Full,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::Box { .. } => "box",
            Shape::Ball { .. } => "ball",
            Shape::HalfSpace { .. } => "halfspace",
            Shape::Sublevel(_) => "sublevel",
            Shape::Full => "full",
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.shape, Shape::Box { .. } | Shape::Ball { .. })
    }

    /// Checked classification.
    pub fn membership(&self, x: &[f64]) -> Result<Membership> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.classify(x))
    }

    /// Unchecked classification for hot loops; `x.len()` must equal `dim`.
    #[inline]
    pub fn classify(&self, x: &[f64]) -> Membership {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut on_face = false;
                for ((&xi, &l), &h) in x.iter().zip(lo).zip(hi) {
                    if !(xi >= l && xi <= h) {
                        return Membership::Exterior;
                    }
                    if xi == l || xi == h {
                        on_face = true;
                    }
                }
                if on_face {
                    Membership::Boundary
                } else {
                    Membership::Interior
                }
            }
            Shape::Ball { center, radius } => {
                let d = dist(x, center);
                let tol = SURFACE_TOL * radius.max(1.0);
                if !(d.is_finite()) {
                    Membership::Exterior
                } else if (d - radius).abs() <= tol {
                    Membership::Boundary
                } else if d < *radius {
                    Membership::Interior
                } else {
                    Membership::Exterior
                }
            }
            Shape::HalfSpace { normal, offset } => {
                let s = dot(normal, x) - offset;
                let tol = SURFACE_TOL * (1.0 + offset.abs()) * norm(normal);
                if !s.is_finite() {
                    Membership::Exterior
                } else if s.abs() <= tol {
                    Membership::Boundary
                } else if s < 0.0 {
                    Membership::Interior
                } else {
                    Membership::Exterior
                }
            }
            Shape::Sublevel(p) => {
                let v = p.eval(x);
                let tol = SUBLEVEL_TOL * (1.0 + p.eval_abs_scale(x));
                if !v.is_finite() {
                    Membership::Exterior
                } else if v.abs() <= tol {
                    Membership::Boundary
                } else if v < 0.0 {
                    Membership::Interior
                } else {
                    Membership::Exterior
                }
            }
            Shape::Full => {
                if x.iter().all(|v| v.is_finite()) {
                    Membership::Interior
                } else {
                    Membership::Exterior
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.classify(x) == Membership::Interior
    }

    pub fn contains_closure(&self, x: &[f64]) -> bool {
        self.classify(x) != Membership::Exterior
    }

    /// Axis-aligned bounding box of the closure, if bounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            Shape::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            Shape::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            _ => None,
        }
    }

    /// Nearest point of the boundary (boxes, balls and halfspaces only).
    pub fn project_to_boundary(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut y: Vec<f64> = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&v, (&l, &h))| v.max(l).min(h))
                    .collect();
                if self.classify(&y) == Membership::Interior {
                    // snap the nearest face
                    let mut best = (f64::INFINITY, 0, 0.0);
                    for i in 0..self.dim {
                        for face in [lo[i], hi[i]] {
                            let d = (y[i] - face).abs();
                            if d < best.0 {
                                best = (d, i, face);
                            }
                        }
                    }
                    y[best.1] = best.2;
                }
                Some(y)
            }
            Shape::Ball { center, radius } => {
                let mut u: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let n = norm(&u);
                if n == 0.0 {
                    u.iter_mut().for_each(|v| *v = 0.0);
                    u[0] = 1.0;
                } else {
                    u.iter_mut().for_each(|v| *v /= n);
                }
                Some(center.iter().zip(&u).map(|(c, v)| c + radius * v).collect())
            }
            Shape::HalfSpace { normal, offset } => {
                let nn = dot(normal, normal);
                let s = (dot(normal, x) - offset) / nn;
                Some(x.iter().zip(normal).map(|(v, n)| v - s * n).collect())
            }
            _ => None,
        }
    }

    /// Boundary point on the segment from `inside` (in the closure) to
    /// `outside` (exterior). Falls back to `outside` for shapes without an
    /// exact intersection.
    pub fn crossing_point(&self, inside: &[f64], outside: &[f64]) -> Vec<f64> {
        let dirv: Vec<f64> = outside.iter().zip(inside).map(|(b, a)| b - a).collect();
        let theta = match &self.shape {
            Shape::Box { lo, hi } => {
                let mut th: f64 = 1.0;
                for i in 0..self.dim {
                    let d = dirv[i];
                    if outside[i] > hi[i] && d > 0.0 {
                        th = th.min((hi[i] - inside[i]) / d);
                    }
                    if outside[i] < lo[i] && d < 0.0 {
                        th = th.min((lo[i] - inside[i]) / d);
                    }
                }
                Some(th)
            }
            Shape::Ball { center, radius } => {
                // |a + θ d − c|² = r²
                let a: Vec<f64> = inside.iter().zip(center).map(|(p, c)| p - c).collect();
                let qa = dot(&dirv, &dirv);
                let qb = 2.0 * dot(&a, &dirv);
                let qc = dot(&a, &a) - radius * radius;
                if qa == 0.0 {
                    None
                } else {
                    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                    Some((-qb + disc.sqrt()) / (2.0 * qa))
                }
            }
            Shape::HalfSpace { normal, offset } => {
                let den = dot(normal, &dirv);
                if den == 0.0 {
                    None
                } else {
                    Some((offset - dot(normal, inside)) / den)
                }
            }
            Shape::Sublevel(p) => {
                let pa = p.eval(inside);
                let pb = p.eval(outside);
                if pb != pa {
                    Some(pa / (pa - pb))
                } else {
                    None
                }
            }
            Shape::Full => None,
        };
        let Some(theta) = theta else {
            return outside.to_vec();
        };
        let theta = theta.clamp(0.0, 1.0);
        let y: Vec<f64> = inside.iter().zip(&dirv).map(|(a, d)| a + theta * d).collect();
        match &self.shape {
            Shape::Sublevel(_) | Shape::Full => y,
            _ => self.project_to_boundary(&y).unwrap_or(y),
        }
    }

    /// Probability that a Brownian bridge between two points of the closure
    /// crossed the boundary during a step of length `dt`.
    ///
    /// Each flat face (or the tangent plane of a ball) contributes
    /// `exp(−2 d d' / (a_nn dt))`, with `a_nn` the normal diffusion
    /// coefficient frozen at `x`; faces are combined as independent.
    /// `a` is the m×m matrix σσᵀ(x), row-major.
    pub fn bridge_crossing_prob(&self, x: &[f64], x_next: &[f64], a: &[f64], dt: f64) -> f64 {
        let m = self.dim;
        let face = |d: f64, d2: f64, ann: f64| -> f64 {
            if !(ann > 0.0) {
                return 0.0;
            }
            let e = 2.0 * d.max(0.0) * d2.max(0.0) / (ann * dt);
            // e^{-40} is below the 2⁻⁵³ resolution of the bridge uniform
            if e > 40.0 {
                0.0
            } else {
                (-e).exp()
            }
        };
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut survive = 1.0;
                for k in 0..m {
                    let akk = a[k * m + k];
                    if !(akk > 0.0) {
                        continue;
                    }
                    survive *= 1.0 - face(x[k] - lo[k], x_next[k] - lo[k], akk);
                    survive *= 1.0 - face(hi[k] - x[k], hi[k] - x_next[k], akk);
                }
                1.0 - survive
            }
            Shape::Ball { center, radius } => {
                let r0 = dist(x, center);
                let r1 = dist(x_next, center);
                let base = if r0 > 0.0 { x } else { x_next };
                let rb = if r0 > 0.0 { r0 } else { r1 };
                if rb == 0.0 {
                    return 0.0;
                }
                let n: Vec<f64> = base.iter().zip(center).map(|(p, c)| (p - c) / rb).collect();
                face(radius - r0, radius - r1, quad_form(a, &n, m))
            }
            Shape::HalfSpace { normal, offset } => {
                let nn = norm(normal);
                let n: Vec<f64> = normal.iter().map(|v| v / nn).collect();
                let d0 = (offset - dot(normal, x)) / nn;
                let d1 = (offset - dot(normal, x_next)) / nn;
                face(d0, d1, quad_form(a, &n, m))
            }
            Shape::Sublevel(_) | Shape::Full => 0.0,
        }
    }

    /// Exterior unit normal at a boundary point, where defined.
    pub fn outward_normal(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut n = vec![0.0; self.dim];
                let mut count = 0;
                for i in 0..self.dim {
                    if x[i] == hi[i] {
                        n[i] = 1.0;
                        count += 1;
                    } else if x[i] == lo[i] {
                        n[i] = -1.0;
                        count += 1;
                    }
                }
                // corners have no unique normal
                (count == 1).then_some(n)
            }
            Shape::Ball { center, .. } => {
                let d = dist(x, center);
                (d > 0.0).then(|| x.iter().zip(center).map(|(a, c)| (a - c) / d).collect())
            }
            Shape::HalfSpace { normal, .. } => {
                let nn = norm(normal);
                Some(normal.iter().map(|v| v / nn).collect())
            }
            _ => None,
        }
    }

    /// True when the closure of `inner` lies inside this (open) domain.
    /// Decided for bounded `inner` against balls, boxes and halfspaces.
    pub fn contains_domain(&self, inner: &Domain) -> bool {
        if let Shape::Full = self.shape {
            return true;
        }
        match (&self.shape, &inner.shape) {
            (Shape::Ball { center: c, radius: r }, Shape::Ball { center: c2, radius: r2 }) => dist(c, c2) + r2 < *r,
            (_, Shape::Box { lo, hi }) => corners(lo, hi).iter().all(|p| self.contains(p)),
            (Shape::Box { lo, hi }, Shape::Ball { center, radius }) => center
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| c - radius > *l && c + radius < *h),
            (Shape::HalfSpace { normal, offset }, Shape::Ball { center, radius }) => {
                dot(normal, center) + radius * norm(normal) < *offset
            }
            _ => false,
        }
    }

    /// `n` points on the boundary: uniform in surface measure for balls,
    /// faces chosen proportionally to area for boxes.
    pub fn boundary_sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidArgument("need n >= 1".into()));
        }
        let mut rng = PathStream::new(seed, 0);
        match &self.shape {
            Shape::Ball { center, radius } => Ok((0..n)
                .map(|_| {
                    let mut z: Vec<f64> = (0..self.dim).map(|_| rng.gaussian()).collect();
                    let mut nz = norm(&z);
                    while nz == 0.0 {
                        z = (0..self.dim).map(|_| rng.gaussian()).collect();
                        nz = norm(&z);
                    }
                    let mut p: Vec<f64> = center.iter().zip(&z).map(|(c, v)| c + radius * v / nz).collect();
                    if self.classify(&p) != Membership::Boundary {
                        p = self.project_to_boundary(&p).expect("ball projection");
                    }
                    p
                })
                .collect()),
            Shape::Box { lo, hi } => {
                let m = self.dim;
                let widths: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                // area of the faces orthogonal to axis i
                let areas: Vec<f64> = (0..m)
                    .map(|i| (0..m).filter(|&j| j != i).map(|j| widths[j]).product::<f64>())
                    .collect();
                let total: f64 = 2.0 * areas.iter().sum::<f64>();
                Ok((0..n)
                    .map(|_| {
                        let mut u = rng.uniform() * total;
                        let mut axis = m - 1;
                        let mut upper = true;
                        'pick: for i in 0..m {
                            for up in [false, true] {
                                if u < areas[i] {
                                    axis = i;
                                    upper = up;
                                    break 'pick;
                                }
                                u -= areas[i];
                            }
                        }
                        (0..m)
                            .map(|j| {
                                if j == axis {
                                    if upper {
                                        hi[j]
                                    } else {
                                        lo[j]
                                    }
                                } else {
                                    (lo[j] + rng.uniform() * widths[j]).min(hi[j])
                                }
                            })
                            .collect()
                    })
                    .collect())
            }
            Shape::HalfSpace { .. } | Shape::Full => Err(Error::UnboundedDomain),
            Shape::Sublevel(_) => Err(Error::UnsupportedShape("sublevel")),
        }
    }
}

fn corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let m = lo.len();
    (0..(1usize << m))
        .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn quad_form(a: &[f64], v: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += a[i * m + j] * v[i] * v[j];
        }
    }
    s
}

/// Increasing family `𝒳ₙ`, `n ≥ 1`, with the closure of each member inside
/// the next.
#[derive(Clone, Debug, PartialEq)]
pub enum Exhaustion {
    /// Balls of radius `step · n`.
    Balls { center: Vec<f64>, step: f64 },
    /// Cubes of half-width `step · n`.
    Boxes { center: Vec<f64>, step: f64 },
}

impl Exhaustion {
    /// Balls of radius `n` about the origin.
    pub fn default_for(dim: usize) -> Self {
        Exhaustion::Balls {
            center: vec![0.0; dim],
            step: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Exhaustion::Balls { center, .. } | Exhaustion::Boxes { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let step = match self {
            Exhaustion::Balls { step, .. } | Exhaustion::Boxes { step, .. } => *step,
        };
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument("exhaustion step must be positive".into()));
        }
        Ok(())
    }

    pub fn member(&self, n: usize) -> Domain {
        let n = n.max(1) as f64;
        match self {
            Exhaustion::Balls { center, step } => Domain::ball(center.clone(), step * n).expect("validated exhaustion"),
            Exhaustion::Boxes { center, step } => Domain::boxed(
                center.iter().map(|c| c - step * n).collect(),
                center.iter().map(|c| c + step * n).collect(),
            )
            .expect("validated exhaustion"),
        }
    }

    /// Smallest `n ≤ n_max` whose member contains every point, if any.
    pub fn covering_index(&self, points: &[Vec<f64>], n_max: usize) -> Option<usize> {
        (1..=n_max).find(|&n| {
            let d = self.member(n);
            points.iter().all(|p| d.contains(p))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_trichotomy() {
        let d = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(d.membership(&[0.5]).unwrap(), Membership::Interior);
        assert_eq!(d.membership(&[1.0]).unwrap(), Membership::Boundary);
        assert_eq!(d.membership(&[1.5]).unwrap(), Membership::Exterior);
        assert!(d.membership(&[0.5, 0.5]).is_err());

        let sq = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(sq.classify(&[1.0, 0.0]), Membership::Boundary);
        assert_eq!(sq.classify(&[1.0, 1.0]), Membership::Boundary);
        assert_eq!(sq.classify(&[1.0, 1.5]), Membership::Exterior);
    }

    #[test]
    fn ball_and_halfspace() {
        let b = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.classify(&[0.6, 0.8]), Membership::Boundary);
        assert_eq!(b.classify(&[0.0, 1.0]), Membership::Boundary);
        assert_eq!(b.classify(&[0.1, 0.1]), Membership::Interior);
        let h = Domain::halfspace(vec![-1.0], 0.0).unwrap();
        assert_eq!(h.classify(&[3.0]), Membership::Interior);
        assert_eq!(h.classify(&[0.0]), Membership::Boundary);
        assert_eq!(h.classify(&[-1e-3]), Membership::Exterior);
    }

    #[test]
    fn sublevel_sign() {
        // unit disc as x² + y² − 1 < 0
        let p = MultiPoly::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -1.0)]).unwrap();
        let d = Domain::sublevel(p);
        assert_eq!(d.classify(&[0.0, 0.0]), Membership::Interior);
        assert_eq!(d.classify(&[1.0, 0.0]), Membership::Boundary);
        assert_eq!(d.classify(&[1.0, 0.1]), Membership::Exterior);
        assert_eq!(d.boundary_sample(3, 1), Err(Error::UnsupportedShape("sublevel")));
    }

    #[test]
    fn crossing_snaps_to_face() {
        let sq = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let y = sq.crossing_point(&[0.5, 0.9], &[0.6, 1.1]);
        assert_eq!(sq.classify(&y), Membership::Boundary);
        assert_eq!(y[1], 1.0);
        assert!((y[0] - 0.55).abs() < 1e-12);
        let b = Domain::ball(vec![0.0], 0.5).unwrap();
        assert_eq!(b.crossing_point(&[0.4], &[0.7]), vec![0.5]);
    }

    #[test]
    fn boundary_samples() {
        let b = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        for p in b.boundary_sample(4, 7).unwrap() {
            assert!((norm(&p) - 1.0).abs() < 1e-12);
            assert_eq!(b.classify(&p), Membership::Boundary);
        }
        let i = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        for p in i.boundary_sample(20, 3).unwrap() {
            assert!(p[0] == 0.0 || p[0] == 1.0);
        }
        assert_eq!(Domain::full(2).boundary_sample(1, 0), Err(Error::UnboundedDomain));
    }

    #[test]
    fn bridge_probability_edge_cases() {
        let i = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        // starting on the boundary with noise: certain crossing
        assert_eq!(i.bridge_crossing_prob(&[0.0], &[0.01], &[1.0], 1e-3), 1.0);
        // no normal noise: never
        assert_eq!(i.bridge_crossing_prob(&[0.0], &[0.01], &[0.0], 1e-3), 0.0);
        let p = i.bridge_crossing_prob(&[0.5], &[0.5], &[1.0], 1e-3);
        assert!(p < 1e-100);
    }

    #[test]
    fn exhaustion_members_nest() {
        let e = Exhaustion::default_for(2);
        let pts = [vec![0.5, 0.5], vec![2.5, -1.0], vec![-7.0, 3.0]];
        for n in 1..10 {
            let a = e.member(n);
            let b = e.member(n + 1);
            for p in &pts {
                if a.contains(p) {
                    assert!(b.contains(p));
                }
            }
        }
        assert_eq!(e.covering_index(&pts, 20), Some(8));
    }

    #[test]
    fn containment_of_domains() {
        let ball = Domain::ball(vec![0.0, 0.0], 2.0).unwrap();
        let sq = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!(ball.contains_domain(&sq));
        assert!(!Domain::ball(vec![0.0, 0.0], 1.4).unwrap().contains_domain(&sq));
        assert!(!ball.contains_domain(&Domain::halfspace(vec![-1.0, 0.0], 0.0).unwrap()));
    }
}
