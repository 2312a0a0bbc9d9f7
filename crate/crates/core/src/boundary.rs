//! Boundary points: empirical regularity probes, Lyapunov-type niceness
//! certificates, the exterior-sphere witness, and tail/escape diagnostics
//! for the hypotheses behind boundary convergence of `u_stoc`.
//!
//! None of these is a proof. Probes and diagnostics report evidence with
//! configurable thresholds; certificates check signs on a finite grid.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::domain::{dist, quad_form, Domain, Exhaustion, Membership};
use crate::error::{Error, Result};
use crate::estimate::{sample_paths, McProblem, ScalarFn};
use crate::exec::{map_blocks, Executor, BLOCK_SIZE};
use crate::grid::lattice;
use crate::model::DiffusionModel;
use crate::poly::MultiPoly;
use crate::rng::PathStream;
use crate::sim::{simulate_observed, NoObserver, RunOptions, SimConfig, StopAt};
use crate::stats::{Bias, MCEstimate, Moments};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularityVerdict {
    RegularEvidence,
    IrregularEvidence,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Regular evidence needs the smallest-`h` estimate at least this.
    pub regular: f64,
    /// Irregular evidence needs the largest-`h` estimate at most this.
    pub irregular: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            regular: 0.99,
            irregular: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityProbe {
    pub point: Vec<f64>,
    pub h_schedule: Vec<f64>,
    /// `P̂_{x*}{τ̄ ≤ h}` per entry of `h_schedule`, on one path set.
    pub estimates: Vec<MCEstimate>,
    pub thresholds: Thresholds,
    pub verdict: RegularityVerdict,
}

/// Estimates `P_{x*}{τ̄ ≤ h}` for each `h`. Requires `h ≥ 10·dt`.
pub fn probe_regularity<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    domain: &Domain,
    x_star: &[f64],
    h_schedule: &[f64],
    n_paths: usize,
    cfg: &SimConfig,
    thresholds: Thresholds,
) -> Result<RegularityProbe> {
    if domain.membership(x_star)? != Membership::Boundary {
        return Err(Error::NotOnBoundary);
    }
    if h_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty h schedule".into()));
    }
    let min_h = 10.0 * cfg.dt;
    let h_min = h_schedule.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = h_schedule.iter().cloned().fold(0.0, f64::max);
    if h_min < min_h * (1.0 - 1e-12) {
        return Err(Error::BelowResolution { h: h_min, min: min_h });
    }
    let cfg = cfg.clone().with_horizon(h_max + 2.0 * cfg.dt);
    let p = McProblem::new(exec, model, domain, &cfg);
    let samples = sample_paths(&p, x_star, n_paths, StopAt::TauBar, None)?;
    let estimates: Vec<MCEstimate> = h_schedule
        .iter()
        .map(|&h| {
            let mut m = Moments::new();
            for s in &samples {
                let hit = s.record.tau_bar.is_some_and(|t| t <= h * (1.0 + 1e-12));
                m.push(if hit { 1.0 } else { 0.0 });
            }
            MCEstimate::from_moments(&m, 0.0, Bias::None)
        })
        .collect();
    let at = |target: f64| {
        let i = h_schedule.iter().position(|&h| h == target).unwrap();
        estimates[i].mean
    };
    let verdict = if at(h_min) >= thresholds.regular {
        RegularityVerdict::RegularEvidence
    } else if at(h_max) <= thresholds.irregular {
        RegularityVerdict::IrregularEvidence
    } else {
        RegularityVerdict::Inconclusive
    };
    Ok(RegularityProbe {
        point: x_star.to_vec(),
        h_schedule: h_schedule.to_vec(),
        estimates,
        thresholds,
        verdict,
    })
}

/// A `C²` test function with exact first and second derivatives.
pub trait Witness: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `m×m` Hessian.
    fn hessian(&self, x: &[f64], out: &mut [f64]);
    /// Polynomial form, when available, for an exact `Lw`.
    fn as_poly(&self) -> Option<&MultiPoly> {
        None
    }
}

impl Witness for MultiPoly {
    fn dim(&self) -> usize {
        MultiPoly::dim(self)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.differentiate(i).expect("axis in range").eval(x);
        }
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let m = MultiPoly::dim(self);
        for i in 0..m {
            let di = self.differentiate(i).expect("axis in range");
            for j in 0..m {
                out[i * m + j] = di.differentiate(j).expect("axis in range").eval(x);
            }
        }
    }

    fn as_poly(&self) -> Option<&MultiPoly> {
        Some(self)
    }
}

/// `Lw(x)` from the model coefficients and the witness derivatives.
pub fn generator_at(model: &DiffusionModel, w: &dyn Witness, x: &[f64]) -> f64 {
    let m = model.dim_state();
    let mut ws = model.workspace();
    model.drift_into(x, &mut ws.b);
    model.diffusion_into(x, &mut ws);
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m * m];
    w.gradient(x, &mut grad);
    w.hessian(x, &mut hess);
    let drift: f64 = ws.b.iter().zip(&grad).map(|(b, g)| b * g).sum();
    let diff: f64 = ws.a.iter().zip(&hess).map(|(a, h)| a * h).sum();
    drift + 0.5 * diff
}

#[derive(Clone, Debug, PartialEq)]
pub struct NicenessCertificate {
    pub point: Vec<f64>,
    pub radius: f64,
    pub grid_n: usize,
    /// Grid points actually checked.
    pub n_checked: usize,
    pub w_at_point: f64,
    /// Minimum of `w` on the checked points (must be `> 0`).
    pub min_w: f64,
    /// Maximum of `Lw` on the checked points (must be `< 0`).
    pub max_lw: f64,
    /// Where `max_lw` is attained.
    pub max_lw_at: Vec<f64>,
    /// Exact `Lw` for polynomial witnesses on polynomial models.
    pub lw: Option<MultiPoly>,
    pub valid: bool,
}

/// Tolerance for `w(x*) = 0`.
pub const WITNESS_ZERO_TOL: f64 = 1e-12;

/// Checks `w(x*) ≈ 0`, `w > 0` and `Lw < 0` on the `grid_n^m` lattice of the
/// cube around `x*`, restricted to the ball of `radius` intersected with
/// `Ū`, leaving out points within `radius/grid_n` of `x*`.
pub fn certify_nice_point(
    model: &DiffusionModel,
    domain: &Domain,
    x_star: &[f64],
    w: &dyn Witness,
    radius: f64,
    grid_n: usize,
) -> Result<NicenessCertificate> {
    let m = model.dim_state();
    if w.dim() != m || x_star.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if w.dim() != m { w.dim() } else { x_star.len() },
        });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    if grid_n < 4 {
        return Err(Error::GridTooCoarse { n: grid_n });
    }
    let lw_poly = match (w.as_poly(), model.is_polynomial()) {
        (Some(p), true) => Some(model.generator(p)?),
        _ => None,
    };
    let lo: Vec<f64> = x_star.iter().map(|c| c - radius).collect();
    let hi: Vec<f64> = x_star.iter().map(|c| c + radius).collect();
    let exclude = radius / grid_n as f64;
    let mut n_checked = 0;
    let mut min_w = f64::INFINITY;
    let mut max_lw = f64::NEG_INFINITY;
    let mut max_lw_at = x_star.to_vec();
    for q in lattice(&lo, &hi, grid_n) {
        let d = dist(&q, x_star);
        if d > radius || d <= exclude || !domain.contains_closure(&q) {
            continue;
        }
        n_checked += 1;
        min_w = min_w.min(w.value(&q));
        let lw = match &lw_poly {
            Some(p) => p.eval(&q),
            None => generator_at(model, w, &q),
        };
        if lw > max_lw {
            max_lw = lw;
            max_lw_at = q;
        }
    }
    let w_at_point = w.value(x_star);
    let valid = n_checked > 0 && w_at_point.abs() <= WITNESS_ZERO_TOL && min_w > 0.0 && max_lw < 0.0;
    Ok(NicenessCertificate {
        point: x_star.to_vec(),
        radius,
        grid_n,
        n_checked,
        w_at_point,
        min_w,
        max_lw,
        max_lw_at,
        lw: lw_poly,
        valid,
    })
}

/// `w(x) = e^{−β|x'−x*|²} − e^{−β|x'−x|²}` with `x' = x* + λν`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereWitness {
    pub x_star: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub beta: f64,
    /// `νᵀ σσᵀ(x*) ν`.
    pub normal_form: f64,
    level: f64,
}

impl SphereWitness {
    /// Neighbourhood radius `|x' − x*|/2` on which the witness is meant to
    /// work.
    pub fn natural_radius(&self) -> f64 {
        0.5 * dist(&self.x_prime, &self.x_star)
    }
}

impl Witness for SphereWitness {
    fn dim(&self) -> usize {
        self.x_star.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.x_prime).map(|(a, b)| (a - b) * (a - b)).sum();
        self.level - (-self.beta * r2).exp()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().zip(&self.x_prime).map(|(a, b)| (a - b) * (a - b)).sum();
        let e = (-self.beta * r2).exp();
        for ((o, a), b) in out.iter_mut().zip(x).zip(&self.x_prime) {
            *o = 2.0 * self.beta * (a - b) * e;
        }
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let m = x.len();
        let d: Vec<f64> = x.iter().zip(&self.x_prime).map(|(a, b)| a - b).collect();
        let r2: f64 = d.iter().map(|v| v * v).sum();
        let e = (-self.beta * r2).exp();
        for i in 0..m {
            for j in 0..m {
                let delta = if i == j { 1.0 } else { 0.0 };
                out[i * m + j] = 2.0 * self.beta * e * (delta - 2.0 * self.beta * d[i] * d[j]);
            }
        }
    }
}

/// Tolerance below which the normal noise form counts as zero.
pub const NORMAL_NOISE_TOL: f64 = 1e-12;

/// Builds the exterior-sphere witness at `x*`. Fails unless the noise has a
/// component along the exterior normal `ν`, and unless `x'` lies outside
/// `Ū`.
pub fn construct_sphere_witness(
    model: &DiffusionModel,
    domain: &Domain,
    x_star: &[f64],
    nu: &[f64],
    lambda: f64,
    beta: f64,
) -> Result<SphereWitness> {
    let m = model.dim_state();
    if nu.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: nu.len(),
        });
    }
    if domain.membership(x_star)? != Membership::Boundary {
        return Err(Error::NotOnBoundary);
    }
    if !(lambda > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidArgument("lambda and beta must be positive".into()));
    }
    let len = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(len > 0.0) {
        return Err(Error::InvalidArgument("normal vector is zero".into()));
    }
    let nu: Vec<f64> = nu.iter().map(|v| v / len).collect();
    let mut ws = model.workspace();
    model.diffusion_into(x_star, &mut ws);
    let normal_form = quad_form(&ws.a, &nu, m);
    if !(normal_form > NORMAL_NOISE_TOL) {
        return Err(Error::NoNormalNoise { value: normal_form });
    }
    let x_prime: Vec<f64> = x_star.iter().zip(&nu).map(|(x, n)| x + lambda * n).collect();
    if domain.classify(&x_prime) != Membership::Exterior {
        return Err(Error::InvalidArgument(
            "x* + lambda nu is not outside the closure; nu must point outward".into(),
        ));
    }
    let level = (-beta * lambda * lambda).exp();
    Ok(SphereWitness {
        x_star: x_star.to_vec(),
        x_prime,
        beta,
        normal_form,
        level,
    })
}

/// Up to `n` points drawn uniformly from `B_δ(x*) ∩ U`.
pub fn sample_near(domain: &Domain, x_star: &[f64], delta: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = x_star.len();
    let mut rng = PathStream::derived(seed, 0x5A4D_504C, 0);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let mut z: Vec<f64> = (0..m).map(|_| rng.gaussian()).collect();
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nz == 0.0 {
            continue;
        }
        let r = delta * rng.uniform().powf(1.0 / m as f64);
        for (zi, c) in z.iter_mut().zip(x_star) {
            *zi = c + r * *zi / nz;
        }
        if domain.contains(&z) {
            out.push(z);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub m_schedule: Vec<f64>,
    pub starts: Vec<Vec<f64>>,
    /// `sup_x Ê[Y·1{Y > M}]` over uncensored paths only.
    pub tail_exited: Vec<f64>,
    /// Same, with censored paths contributing their truncated value.
    pub tail_conservative: Vec<f64>,
    /// Largest censored fraction across starts.
    pub censored_fraction: f64,
    pub tolerance: f64,
    /// Conservative tail at the largest `M` below `tolerance`. A diagnostic,
    /// not a proof of uniform integrability.
    pub passes: bool,
}

fn tail_report<E, F>(
    p: &McProblem<'_, E>,
    x_star: &[f64],
    delta: f64,
    m_schedule: &[f64],
    n_starts: usize,
    n_paths: usize,
    tolerance: f64,
    f: Option<&dyn ScalarFn>,
    value: F,
) -> Result<TailReport>
where
    E: Executor + ?Sized,
    F: Fn(&crate::estimate::PathSample) -> f64,
{
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if m_schedule.is_empty() || m_schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("M schedule must be strictly increasing".into()));
    }
    let starts = sample_near(p.domain, x_star, delta, n_starts, p.cfg.seed);
    if starts.is_empty() {
        return Err(Error::NoUncensoredStarts);
    }
    let k = m_schedule.len();
    let mut tail_exited = vec![0.0f64; k];
    let mut tail_conservative = vec![0.0f64; k];
    let mut any_exit = false;
    let mut worst_censored = 0.0f64;
    for x in &starts {
        let samples = sample_paths(p, x, n_paths, StopAt::Tau, f)?;
        let n = samples.len() as f64;
        let mut ex = vec![0.0; k];
        let mut cons = vec![0.0; k];
        let mut censored = 0usize;
        let mut exited = 0usize;
        for s in &samples {
            let y = value(s).abs();
            let c = s.record.is_censored();
            if c {
                censored += 1;
            } else {
                exited += 1;
            }
            for (i, &mm) in m_schedule.iter().enumerate() {
                if y > mm {
                    cons[i] += y;
                    if !c {
                        ex[i] += y;
                    }
                }
            }
        }
        if exited > 0 {
            any_exit = true;
            for i in 0..k {
                tail_exited[i] = tail_exited[i].max(ex[i] / exited as f64);
            }
        }
        for i in 0..k {
            tail_conservative[i] = tail_conservative[i].max(cons[i] / n);
        }
        worst_censored = worst_censored.max(censored as f64 / n);
    }
    if !any_exit {
        return Err(Error::NoUncensoredStarts);
    }
    let passes = tail_conservative[k - 1] < tolerance;
    Ok(TailReport {
        m_schedule: m_schedule.to_vec(),
        starts,
        tail_exited,
        tail_conservative,
        censored_fraction: worst_censored,
        tolerance,
        passes,
    })
}

/// Tail curve of `Y = g(x_τ)` for starts sampled in `B_δ(x*) ∩ U`.
#[allow(clippy::too_many_arguments)]
pub fn diagnose_uid<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    g: &dyn ScalarFn,
    x_star: &[f64],
    delta: f64,
    m_schedule: &[f64],
    n_starts: usize,
    n_paths: usize,
    tolerance: f64,
) -> Result<TailReport> {
    tail_report(p, x_star, delta, m_schedule, n_starts, n_paths, tolerance, None, |s| {
        g.eval(&s.record.final_state)
    })
}

/// Tail curve of `Y = ∫₀^τ f(x_s) ds` for starts sampled in `B_δ(x*) ∩ U`.
#[allow(clippy::too_many_arguments)]
pub fn diagnose_uip<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    f: &dyn ScalarFn,
    x_star: &[f64],
    delta: f64,
    m_schedule: &[f64],
    n_starts: usize,
    n_paths: usize,
    tolerance: f64,
) -> Result<TailReport> {
    tail_report(
        p,
        x_star,
        delta,
        m_schedule,
        n_starts,
        n_paths,
        tolerance,
        Some(f),
        |s| s.integral,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CeVerdict {
    Satisfied,
    NotSatisfied,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CeTrial {
    pub n: usize,
    pub delta2: f64,
    /// `max_x P̂_x{τ_{𝒳ₙ} < τ}` over sampled starts.
    pub max_prob: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CeReport {
    pub delta1: f64,
    pub trials: Vec<CeTrial>,
    /// First `(n, δ₂)` found, scanning `n` upward and `δ₂` downward.
    pub witness: Option<CeTrial>,
    /// The witness comes from `𝒳ₙ ⊇ Ū` (probability exactly zero).
    pub trivial: bool,
    pub verdict: CeVerdict,
}

/// Searches for `(n, δ₂)` with `P̂_x{τ_{𝒳ₙ} < τ} < δ₁` on sampled starts in
/// `B_{δ₂}(x*) ∩ U`. Paths censored before either event count as leaving
/// `𝒳ₙ` first.
#[allow(clippy::too_many_arguments)]
pub fn diagnose_ce<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x_star: &[f64],
    exhaustion: &Exhaustion,
    delta1: f64,
    n_max: usize,
    delta2_schedule: &[f64],
    n_starts: usize,
    n_paths: usize,
) -> Result<CeReport> {
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::InvalidArgument("delta1 must lie in (0, 1)".into()));
    }
    exhaustion.validate()?;
    if delta2_schedule.is_empty() || delta2_schedule.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("delta2 schedule must be positive".into()));
    }
    let mut d2: Vec<f64> = delta2_schedule.to_vec();
    d2.sort_by(|a, b| b.total_cmp(a));

    if p.domain.is_bounded() {
        if let Some(n) = (1..=n_max).find(|&n| exhaustion.member(n).contains_domain(p.domain)) {
            let t = CeTrial {
                n,
                delta2: d2[0],
                max_prob: 0.0,
                stderr: 0.0,
            };
            return Ok(CeReport {
                delta1,
                trials: vec![t],
                witness: Some(t),
                trivial: true,
                verdict: CeVerdict::Satisfied,
            });
        }
    }

    let mut trials = Vec::new();
    for n in 1..=n_max {
        let fence = exhaustion.member(n);
        for &delta2 in &d2 {
            let starts = sample_near(p.domain, x_star, delta2, n_starts, p.cfg.seed);
            let starts: Vec<Vec<f64>> = starts.into_iter().filter(|x| fence.contains(x)).collect();
            if starts.is_empty() {
                continue;
            }
            let mut worst = (0.0f64, 0.0f64);
            for x in &starts {
                let opts = RunOptions {
                    stop: StopAt::Tau,
                    fence: Some(&fence),
                };
                let blocks = map_blocks(p.exec, n_paths, BLOCK_SIZE, |range| {
                    let mut m = Moments::new();
                    for i in range {
                        let mut s = PathStream::new(p.cfg.seed, i as u64);
                        let r = simulate_observed(p.model, p.domain, x, p.cfg, &mut s, &opts, &mut NoObserver)?;
                        m.push(if r.is_censored() { 1.0 } else { 0.0 });
                    }
                    Ok::<_, Error>(m)
                });
                let mut m = Moments::new();
                for b in blocks {
                    m.merge(&b?);
                }
                if m.mean > worst.0 || (m.mean == worst.0 && m.stderr() > worst.1) {
                    worst = (m.mean, m.stderr());
                }
            }
            let t = CeTrial {
                n,
                delta2,
                max_prob: worst.0,
                stderr: worst.1,
            };
            trials.push(t);
            if t.max_prob < delta1 {
                return Ok(CeReport {
                    delta1,
                    trials,
                    witness: Some(t),
                    trivial: false,
                    verdict: CeVerdict::Satisfied,
                });
            }
        }
    }
    let clearly_fails = !trials.is_empty() && trials.iter().all(|t| t.max_prob - 3.0 * t.stderr >= delta1);
    Ok(CeReport {
        delta1,
        trials,
        witness: None,
        trivial: false,
        verdict: if clearly_fails {
            CeVerdict::NotSatisfied
        } else {
            CeVerdict::Inconclusive
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PolyMatrix, PolyVectorField};

    fn bm() -> DiffusionModel {
        DiffusionModel::polynomial(
            PolyVectorField::zero(1),
            PolyMatrix::constant(1, 1, &[1.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap()
    }

    #[test]
    fn sphere_witness_vanishes_at_point() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let w = construct_sphere_witness(&bm(), &u, &[0.0], &[-1.0], 0.1, 200.0).unwrap();
        assert_eq!(w.normal_form, 1.0);
        assert!(w.value(&[0.0]).abs() <= 1e-14);
        assert!(w.value(&[0.02]) > 0.0);
        // gradient and Hessian against central differences
        let x = [0.03];
        let (mut g, mut hs) = ([0.0], [0.0]);
        w.gradient(&x, &mut g);
        w.hessian(&x, &mut hs);
        let e = 1e-5;
        let fd_g = (w.value(&[x[0] + e]) - w.value(&[x[0] - e])) / (2.0 * e);
        let fd_h = (w.value(&[x[0] + e]) - 2.0 * w.value(&x) + w.value(&[x[0] - e])) / (e * e);
        assert!((g[0] - fd_g).abs() < 1e-6 * g[0].abs().max(1.0));
        assert!((hs[0] - fd_h).abs() < 1e-3 * hs[0].abs().max(1.0));
    }

    #[test]
    fn inward_normal_is_rejected() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        assert!(construct_sphere_witness(&bm(), &u, &[0.0], &[1.0], 0.1, 200.0).is_err());
        assert_eq!(
            construct_sphere_witness(&bm(), &u, &[0.5], &[-1.0], 0.1, 200.0),
            Err(Error::NotOnBoundary)
        );
    }

    #[test]
    fn certificate_checks() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let zero = MultiPoly::zero(1);
        let c = certify_nice_point(&bm(), &u, &[0.0], &zero, 0.05, 20).unwrap();
        assert!(!c.valid);
        assert_eq!(
            certify_nice_point(&bm(), &u, &[0.0], &zero, 0.05, 3),
            Err(Error::GridTooCoarse { n: 3 })
        );
        // |x|² has L|x|² = 1 > 0
        let sq = MultiPoly::from_terms(1, [(vec![2], 1.0)]).unwrap();
        let c = certify_nice_point(&bm(), &u, &[0.0], &sq, 0.05, 20).unwrap();
        assert!(!c.valid);
        assert!(c.min_w > 0.0);
        assert_eq!(c.max_lw, 1.0);
        assert_eq!(c.lw, Some(MultiPoly::constant(1, 1.0)));
    }

    #[test]
    fn near_samples_stay_in_domain() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let pts = sample_near(&u, &[0.0], 0.1, 16, 3);
        assert_eq!(pts.len(), 16);
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[0] < 0.1));
    }
}
