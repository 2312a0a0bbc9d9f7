//! Monte Carlo estimators of exit-time functionals, the Green's operator,
//! and residual checks of Dynkin's formula and of the boundary value problem.
//!
//! Conventions shared by every estimator:
//!
//! - path `i` uses stream `(cfg.seed, i)`, so two estimators called with the
//!   same configuration see the same paths;
//! - time integrals use left-endpoint quadrature, one full step `dt` per
//!   step taken before `τ` (the exit step included);
//! - stderr is the sample standard deviation (n − 1) over `√n`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::domain::{Domain, Membership};
use crate::error::{Error, Result};
use crate::exec::{map_blocks, Executor, BLOCK_SIZE};
use crate::grid::Grid;
use crate::model::DiffusionModel;
use crate::poly::MultiPoly;
use crate::rng::PathStream;
use crate::sim::{run_lockstep, simulate_observed, ExitRecord, Observer, RunOptions, SimConfig, StopAt};
use crate::stats::{Bias, MCEstimate, Moments};

/// A real function on state space (data `f`, `g`, test functions).
pub trait ScalarFn: Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

impl ScalarFn for MultiPoly {
    fn eval(&self, x: &[f64]) -> f64 {
        MultiPoly::eval(self, x)
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarFn for F {
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Everything a path needs: where to run, what to simulate, how.
pub struct McProblem<'a, E: ?Sized> {
    pub exec: &'a E,
    pub model: &'a DiffusionModel,
    pub domain: &'a Domain,
    pub cfg: &'a SimConfig,
}

impl<E: ?Sized> Clone for McProblem<'_, E> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<E: ?Sized> Copy for McProblem<'_, E> {}

impl<'a, E: Executor + ?Sized> McProblem<'a, E> {
    pub fn new(exec: &'a E, model: &'a DiffusionModel, domain: &'a Domain, cfg: &'a SimConfig) -> Self {
        Self {
            exec,
            model,
            domain,
            cfg,
        }
    }
}

/// One simulated path with its occupation integral `∫₀^τ f(x_s) ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub record: ExitRecord,
    pub integral: f64,
}

struct Integral<'f> {
    f: Option<&'f dyn ScalarFn>,
    acc: f64,
}

impl Observer for Integral<'_> {
    #[inline]
    fn step(&mut self, _t: f64, x: &[f64], h: f64) {
        if let Some(f) = self.f {
            self.acc += f.eval(x) * h;
        }
    }
}

fn require_interior(domain: &Domain, x: &[f64]) -> Result<()> {
    match domain.membership(x)? {
        Membership::Interior => Ok(()),
        Membership::Boundary => Err(Error::InvalidArgument("start point must be interior".into())),
        Membership::Exterior => Err(Error::StartOutsideClosure),
    }
}

/// Simulates `n_paths` paths from `x`, in path-index order.
pub fn sample_paths<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    n_paths: usize,
    stop: StopAt,
    f: Option<&dyn ScalarFn>,
) -> Result<Vec<PathSample>> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    p.cfg.validate()?;
    let opts = RunOptions { stop, fence: None };
    let blocks = map_blocks(p.exec, n_paths, BLOCK_SIZE, |range| {
        let mut out = Vec::with_capacity(range.len());
        for i in range {
            let mut s = PathStream::new(p.cfg.seed, i as u64);
            let mut obs = Integral { f, acc: 0.0 };
            let record = simulate_observed(p.model, p.domain, x, p.cfg, &mut s, &opts, &mut obs)?;
            out.push(PathSample {
                record,
                integral: obs.acc,
            });
        }
        Ok::<_, Error>(out)
    });
    let mut all = Vec::with_capacity(n_paths);
    for b in blocks {
        all.extend(b?);
    }
    Ok(all)
}

fn censored_fraction(samples: &[PathSample]) -> f64 {
    samples.iter().filter(|s| s.record.is_censored()).count() as f64 / samples.len() as f64
}

/// Mean of `payoff` over uncensored paths; error when every path is censored.
fn mean_uncensored(samples: &[PathSample], payoff: impl Fn(&PathSample) -> f64) -> Result<MCEstimate> {
    let mut m = Moments::new();
    for s in samples.iter().filter(|s| !s.record.is_censored()) {
        m.push(payoff(s));
    }
    let cf = censored_fraction(samples);
    if m.n == 0 {
        return Err(Error::AllCensored {
            n: samples.len(),
            censored_fraction: 1.0,
        });
    }
    let bias = if cf > 0.0 { Bias::CensoredDropped } else { Bias::None };
    Ok(MCEstimate::from_moments(&m, cf, bias))
}

/// `u(x) = E_x ∫₀^τ f(x_s) ds + E_x g(x_τ)`, censored paths dropped.
pub fn estimate_u_stoc<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    f: &dyn ScalarFn,
    g: &dyn ScalarFn,
    x: &[f64],
    n_paths: usize,
) -> Result<MCEstimate> {
    require_interior(p.domain, x)?;
    let samples = sample_paths(p, x, n_paths, StopAt::Tau, Some(f))?;
    mean_uncensored(&samples, |s| {
        s.integral + g.eval(s.record.exit_point.as_deref().expect("exited path has a point"))
    })
}

/// `E_x τᵏ` over uncensored paths (biased downward when censoring occurs).
pub fn estimate_exit_moment<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    k: u32,
    n_paths: usize,
) -> Result<MCEstimate> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    require_interior(p.domain, x)?;
    let samples = sample_paths(p, x, n_paths, StopAt::Tau, None)?;
    mean_uncensored(&samples, |s| s.record.exit_time.unwrap().powi(k as i32))
}

/// Which exit time a functional is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    /// `τ`, exit from `U`; start must be interior.
    Tau,
    /// `τ̄`, exit from the closure; start may be on the boundary.
    TauBar,
}

/// `E_x e^{δT}` for `T = τ` or `τ̄`.
///
/// For `δ ≤ 0` censored paths are dropped. For `δ > 0` censored paths
/// contribute `e^{δ·censor_time}` and the result is always flagged as a
/// lower bound: a finite horizon cannot exclude a heavier tail.
pub fn estimate_exp_moment<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    delta: f64,
    clock: Clock,
    n_paths: usize,
) -> Result<MCEstimate> {
    if !delta.is_finite() {
        return Err(Error::InvalidArgument("delta must be finite".into()));
    }
    let stop = match clock {
        Clock::Tau => {
            require_interior(p.domain, x)?;
            StopAt::Tau
        }
        Clock::TauBar => StopAt::TauBar,
    };
    let samples = sample_paths(p, x, n_paths, stop, None)?;
    let time = |r: &ExitRecord| match clock {
        Clock::Tau => r.exit_time,
        Clock::TauBar => r.tau_bar,
    };
    if delta <= 0.0 {
        let mut m = Moments::new();
        let mut censored = 0usize;
        for s in &samples {
            match time(&s.record) {
                Some(t) => m.push((delta * t).exp()),
                None => censored += 1,
            }
        }
        let cf = censored as f64 / samples.len() as f64;
        if m.n == 0 {
            return Err(Error::AllCensored {
                n: samples.len(),
                censored_fraction: 1.0,
            });
        }
        let bias = if censored > 0 {
            Bias::CensoredDropped
        } else {
            Bias::None
        };
        return Ok(MCEstimate::from_moments(&m, cf, bias));
    }
    let tc = p.cfg.censor_time();
    let mut m = Moments::new();
    let mut censored = 0usize;
    for s in &samples {
        let t = time(&s.record).unwrap_or_else(|| {
            censored += 1;
            tc
        });
        m.push((delta * t).exp());
    }
    if censored == samples.len() {
        return Err(Error::AllCensored {
            n: samples.len(),
            censored_fraction: 1.0,
        });
    }
    Ok(MCEstimate::from_moments(
        &m,
        censored as f64 / samples.len() as f64,
        Bias::LowerBound,
    ))
}

fn survival_from(samples: &[PathSample], t: f64) -> MCEstimate {
    let mut m = Moments::new();
    for s in samples {
        let alive = s.record.exit_time.is_none_or(|tau| tau > t);
        m.push(if alive { 1.0 } else { 0.0 });
    }
    MCEstimate::from_moments(&m, 0.0, Bias::None)
}

fn check_survival_time(cfg: &SimConfig, t: f64) -> Result<()> {
    if !(t >= 0.0) || t >= cfg.censor_time() {
        return Err(Error::InvalidArgument("survival time must lie in [0, horizon)".into()));
    }
    Ok(())
}

/// `P_x{τ > t}` for `t` below the horizon (censored paths survive).
pub fn estimate_survival<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    t: f64,
    n_paths: usize,
) -> Result<MCEstimate> {
    Ok(estimate_survival_curve(p, x, &[t], n_paths)?.remove(0))
}

/// Survival probabilities at several times on one path set; nonincreasing
/// in `t` by construction.
pub fn estimate_survival_curve<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    times: &[f64],
    n_paths: usize,
) -> Result<Vec<MCEstimate>> {
    for &t in times {
        check_survival_time(p.cfg, t)?;
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("no survival times".into()));
    }
    if p.domain.classify(x) == Membership::Exterior {
        return Err(Error::StartOutsideClosure);
    }
    let samples = sample_paths(p, x, n_paths, StopAt::Tau, None)?;
    Ok(times.iter().map(|&t| survival_from(&samples, t)).collect())
}

/// Upper estimates `P_x{τ > T_i}` of the escape probability `P_x{τ = ∞}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeReport {
    pub horizons: Vec<f64>,
    pub estimates: Vec<MCEstimate>,
    /// Estimates are nonincreasing along the schedule (always true on a
    /// shared path set; kept for reporting).
    pub monotone: bool,
    /// `[0, P̂{τ > T_max}]`; the exact value is never claimed.
    pub bracket: (f64, f64),
}

pub fn estimate_escape_prob<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    schedule: &[f64],
    n_paths: usize,
) -> Result<EscapeReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "horizon schedule must be strictly increasing".into(),
        ));
    }
    let t_max = *schedule.last().unwrap();
    let cfg = p.cfg.clone().with_horizon(t_max + p.cfg.dt);
    let q = McProblem { cfg: &cfg, ..*p };
    let estimates = estimate_survival_curve(&q, x, schedule, n_paths)?;
    let monotone = estimates.windows(2).all(|w| w[1].mean <= w[0].mean);
    let last = estimates.last().unwrap().mean;
    Ok(EscapeReport {
        horizons: schedule.to_vec(),
        estimates,
        monotone,
        bracket: (0.0, last),
    })
}

/// A scale function `φ` with its derivative.
pub struct Phi<'a> {
    pub value: &'a (dyn Fn(f64) -> f64 + Sync),
    pub derivative: &'a (dyn Fn(f64) -> f64 + Sync),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiReport {
    /// `E φ(τ)`.
    pub v1: MCEstimate,
    /// `E φ'(τ)`.
    pub v2: MCEstimate,
    /// `φ(0) + ∫ φ'(t) P̂{τ > t} dt` with the trapezoid rule for `φ'` on
    /// each step.
    pub representation: MCEstimate,
    /// Direct and representation values within 3 combined stderr.
    pub agrees: bool,
}

/// `v₁ = E φ(τ)`, `v₂ = E φ'(τ)`, and the survival-integral representation
/// of `v₁`. Censored paths enter with `τ` replaced by the censoring time,
/// which makes all three lower bounds (flagged) for increasing `φ`.
pub fn estimate_phi_functional<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    x: &[f64],
    phi: &Phi<'_>,
    n_paths: usize,
) -> Result<PhiReport> {
    require_interior(p.domain, x)?;
    let samples = sample_paths(p, x, n_paths, StopAt::Tau, None)?;
    let dt = p.cfg.dt;
    let tc = p.cfg.censor_time();
    let n_max = p.cfg.n_steps();
    // prefix[k] = Σ_{j<k} (φ'(t_j) + φ'(t_{j+1})) dt / 2
    let mut prefix = Vec::with_capacity(n_max + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    let mut left = (phi.derivative)(0.0);
    for k in 0..n_max {
        let right = (phi.derivative)((k + 1) as f64 * dt);
        acc += 0.5 * (left + right) * dt;
        prefix.push(acc);
        left = right;
    }
    let phi0 = (phi.value)(0.0);
    let (mut m1, mut m2, mut mr) = (Moments::new(), Moments::new(), Moments::new());
    for s in &samples {
        let (t, steps) = match s.record.exit_time {
            Some(t) => (t, s.record.steps),
            None => (tc, n_max),
        };
        m1.push((phi.value)(t));
        m2.push((phi.derivative)(t));
        mr.push(phi0 + prefix[steps.min(n_max)]);
    }
    let cf = censored_fraction(&samples);
    let bias = if cf > 0.0 { Bias::LowerBound } else { Bias::None };
    let v1 = MCEstimate::from_moments(&m1, cf, bias);
    let v2 = MCEstimate::from_moments(&m2, cf, bias);
    let representation = MCEstimate::from_moments(&mr, cf, bias);
    let combined = (v1.stderr * v1.stderr + representation.stderr * representation.stderr).sqrt();
    let agrees = (v1.mean - representation.mean).abs() <= 3.0 * combined + 1e-12 * v1.mean.abs();
    Ok(PhiReport {
        v1,
        v2,
        representation,
        agrees,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenEstimate {
    pub beta: f64,
    /// Estimate of `G_β f(x)`.
    pub value: MCEstimate,
    /// Bound on the truncation error from censored paths,
    /// `e^{−β·censor_time} sup|f| / β`, when `sup|f|` was supplied.
    pub censoring_bias_bound: Option<f64>,
    /// Mean discounted occupation mass per cell (only steps inside `U`).
    pub histogram: Option<(Grid, Vec<f64>)>,
}

struct GreenObserver<'a> {
    f: &'a dyn ScalarFn,
    beta: f64,
    weight: f64,
    acc: f64,
    hist: Option<(&'a Grid, &'a Domain, Vec<(usize, f64)>)>,
}

impl Observer for GreenObserver<'_> {
    #[inline]
    fn step(&mut self, t: f64, x: &[f64], _h: f64) {
        let w = (-self.beta * t).exp() * self.weight;
        self.acc += self.f.eval(x) * w;
        if let Some((grid, domain, cells)) = &mut self.hist {
            if domain.contains(x) {
                if let Some(c) = grid.cell_of(x) {
                    cells.push((c, w));
                }
            }
        }
    }
}

/// `G_β f(x) = E_x ∫₀^τ f(x_s) e^{−βs} ds`.
///
/// Each step `[t_k, t_k + dt)` contributes `f(x_k)·e^{−βt_k}(1 − e^{−βdt})/β`,
/// the exact discounted length of the step, so `f ≡ 1` reproduces
/// `(1 − e^{−βτ})/β` path by path. Censored paths are kept with their
/// truncated integral.
pub fn estimate_green<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    beta: f64,
    f: &dyn ScalarFn,
    x: &[f64],
    n_paths: usize,
    f_sup: Option<f64>,
    histogram: Option<&Grid>,
) -> Result<GreenEstimate> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    require_interior(p.domain, x)?;
    p.cfg.validate()?;
    if let Some(g) = histogram {
        if g.dim() != p.model.dim_state() {
            return Err(Error::DimensionMismatch {
                expected: p.model.dim_state(),
                found: g.dim(),
            });
        }
    }
    let weight = -(-beta * p.cfg.dt).exp_m1() / beta;
    let n_cells = histogram.map_or(0, |g| g.n_cells());
    let opts = RunOptions::default();
    let blocks = map_blocks(p.exec, n_paths, BLOCK_SIZE, |range| {
        let mut m = Moments::new();
        let mut censored = 0usize;
        let mut mass = vec![0.0; n_cells];
        for i in range {
            let mut s = PathStream::new(p.cfg.seed, i as u64);
            let mut obs = GreenObserver {
                f,
                beta,
                weight,
                acc: 0.0,
                hist: histogram.map(|g| (g, p.domain, Vec::new())),
            };
            let rec = simulate_observed(p.model, p.domain, x, p.cfg, &mut s, &opts, &mut obs)?;
            if rec.is_censored() {
                censored += 1;
            }
            m.push(obs.acc);
            if let Some((_, _, cells)) = obs.hist {
                for (c, w) in cells {
                    mass[c] += w;
                }
            }
        }
        Ok::<_, Error>((m, censored, mass))
    });
    let mut m = Moments::new();
    let mut censored = 0usize;
    let mut mass = vec![0.0; n_cells];
    for b in blocks {
        let (bm, bc, bmass) = b?;
        m.merge(&bm);
        censored += bc;
        for (a, v) in mass.iter_mut().zip(bmass) {
            *a += v;
        }
    }
    let cf = censored as f64 / n_paths as f64;
    let bound = f_sup.map(|s| (-beta * p.cfg.censor_time()).exp() * s.abs() / beta);
    let bias = match (censored > 0, bound) {
        (false, _) => Bias::None,
        (true, Some(b)) => Bias::Bounded(b),
        (true, None) => Bias::LowerBound,
    };
    let histogram = histogram.map(|g| {
        mass.iter_mut().for_each(|v| *v /= n_paths as f64);
        (g.clone(), mass)
    });
    Ok(GreenEstimate {
        beta,
        value: MCEstimate::from_moments(&m, cf, bias),
        censoring_bias_bound: bound,
        histogram,
    })
}

/// `E φ(x_{t∧τ_K}) − φ(x) − E ∫₀^{t∧τ_K} Lφ(x_s) ds` with `Lφ` exact and
/// `K` a bounded box. Zero up to Monte Carlo and discretization error.
pub fn dynkin_residual<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    phi: &MultiPoly,
    x: &[f64],
    t: f64,
    k_box: &Domain,
    n_paths: usize,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    if !matches!(k_box.shape(), crate::domain::Shape::Box { .. }) {
        return Err(Error::InvalidArgument(
            "Dynkin localisation set must be a bounded box".into(),
        ));
    }
    require_interior(k_box, x)?;
    let lphi = model.generator(phi)?;
    let lc = lphi.compile();
    let lf = move |y: &[f64]| lc.eval(y);
    let cfg = cfg.clone().with_horizon(t);
    let p = McProblem::new(exec, model, k_box, &cfg);
    let phi_x = phi.eval(x);
    let samples = sample_paths(&p, x, n_paths, StopAt::Tau, Some(&lf))?;
    let mut m = Moments::new();
    for s in &samples {
        m.push(phi.eval(&s.record.final_state) - phi_x - s.integral);
    }
    Ok(MCEstimate::from_moments(&m, 0.0, Bias::None))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeResidualPoint {
    pub x: Vec<f64>,
    /// `û(x)`.
    pub u_hat: MCEstimate,
    /// `L̂û(x) + f(x)`: mean and stderr of the per-path stencil combination.
    pub residual: MCEstimate,
    /// `3·residual.stderr + h²`.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeResidualReport {
    pub h: f64,
    pub points: Vec<PdeResidualPoint>,
    /// Fraction of (path, stencil point) pairs censored; censored values
    /// enter truncated.
    pub censored_fraction: f64,
}

struct StencilIndex {
    center: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
    /// `(i, j, ++, +−, −+, −−)` for `i < j` with `a_ij(x) ≠ 0`.
    mixed: Vec<(usize, usize, [usize; 4])>,
    b: Vec<f64>,
    a: Vec<f64>,
    f: f64,
}

fn intern(starts: &mut Vec<Vec<f64>>, p: Vec<f64>) -> usize {
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(u, v)| (u - v).abs() <= 1e-12 * (1.0 + u.abs()));
    if let Some(i) = starts.iter().position(|s| close(s, &p)) {
        return i;
    }
    starts.push(p);
    starts.len() - 1
}

/// Central finite differences of the Monte Carlo field
/// `û(y) = E_y[∫₀^τ f + g(x_τ)]` composed with the exact coefficients.
///
/// All stencil points of all grid points are driven by the same stream per
/// path (common random numbers), and the residual is estimated from the
/// per-path stencil combination, so its stderr already contains the `1/h²`
/// amplification. Censored paths contribute their truncated value; with
/// frozen dynamics this makes the residual equal `f(x)` exactly.
pub fn pde_residual_grid<E: Executor + ?Sized>(
    p: &McProblem<'_, E>,
    f: &dyn ScalarFn,
    g: &dyn ScalarFn,
    grid: &[Vec<f64>],
    h: f64,
    n_paths: usize,
) -> Result<PdeResidualReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    if grid.is_empty() || n_paths == 0 {
        return Err(Error::InvalidArgument("need grid points and paths".into()));
    }
    p.cfg.validate()?;
    let m = p.model.dim_state();
    let mut ws = p.model.workspace();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut stencils = Vec::with_capacity(grid.len());
    for (gi, x) in grid.iter().enumerate() {
        if x.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: x.len(),
            });
        }
        p.model.drift_into(x, &mut ws.b);
        p.model.diffusion_into(x, &mut ws);
        let shifted = |d: &[(usize, f64)]| {
            let mut y = x.clone();
            for &(i, s) in d {
                y[i] += s * h;
            }
            y
        };
        let mut pts: Vec<Vec<f64>> = vec![x.clone()];
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for i in 0..m {
            plus.push(shifted(&[(i, 1.0)]));
            minus.push(shifted(&[(i, -1.0)]));
        }
        let mut mixed_pts = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if ws.a[i * m + j] != 0.0 {
                    mixed_pts.push((
                        i,
                        j,
                        [
                            shifted(&[(i, 1.0), (j, 1.0)]),
                            shifted(&[(i, 1.0), (j, -1.0)]),
                            shifted(&[(i, -1.0), (j, 1.0)]),
                            shifted(&[(i, -1.0), (j, -1.0)]),
                        ],
                    ));
                }
            }
        }
        pts.extend(plus.iter().cloned());
        pts.extend(minus.iter().cloned());
        for (_, _, q) in &mixed_pts {
            pts.extend(q.iter().cloned());
        }
        for (k, q) in pts.iter().enumerate() {
            if !p.domain.contains(q) {
                return Err(Error::StencilOutsideDomain { point: gi, index: k });
            }
        }
        let center = intern(&mut starts, x.clone());
        let plus = plus.into_iter().map(|q| intern(&mut starts, q)).collect();
        let minus = minus.into_iter().map(|q| intern(&mut starts, q)).collect();
        let mixed = mixed_pts
            .into_iter()
            .map(|(i, j, q)| {
                let [a, b, c, d] = q;
                (
                    i,
                    j,
                    [
                        intern(&mut starts, a),
                        intern(&mut starts, b),
                        intern(&mut starts, c),
                        intern(&mut starts, d),
                    ],
                )
            })
            .collect();
        stencils.push(StencilIndex {
            center,
            plus,
            minus,
            mixed,
            b: ws.b.clone(),
            a: ws.a.clone(),
            f: f.eval(x),
        });
    }

    let n_starts = starts.len();
    let h2 = h * h;
    let opts = RunOptions::default();
    let blocks = map_blocks(p.exec, n_paths, BLOCK_SIZE, |range| {
        let mut res = vec![Moments::new(); stencils.len()];
        let mut uh = vec![Moments::new(); stencils.len()];
        let mut censored = 0usize;
        let mut v = vec![0.0; n_starts];
        for i in range {
            let mut s = PathStream::new(p.cfg.seed, i as u64);
            let mut obs: Vec<Integral<'_>> = (0..n_starts).map(|_| Integral { f: Some(f), acc: 0.0 }).collect();
            let recs = run_lockstep(p.model, p.domain, &starts, p.cfg, &mut s, &opts, &mut obs)?;
            for (k, (r, o)) in recs.iter().zip(&obs).enumerate() {
                if r.is_censored() {
                    censored += 1;
                }
                v[k] = o.acc + g.eval(&r.final_state);
            }
            for (si, st) in stencils.iter().enumerate() {
                let mut lu = 0.0;
                for d in 0..m {
                    let (vp, vm, vc) = (v[st.plus[d]], v[st.minus[d]], v[st.center]);
                    lu += st.b[d] * (vp - vm) / (2.0 * h);
                    lu += 0.5 * st.a[d * m + d] * (vp - 2.0 * vc + vm) / h2;
                }
                for &(a, b, q) in &st.mixed {
                    // ½(a_ij + a_ji) ∂_i∂_j with a symmetric
                    lu += st.a[a * m + b] * (v[q[0]] - v[q[1]] - v[q[2]] + v[q[3]]) / (4.0 * h2);
                }
                res[si].push(lu + st.f);
                uh[si].push(v[st.center]);
            }
        }
        Ok::<_, Error>((res, uh, censored))
    });
    let mut res = vec![Moments::new(); stencils.len()];
    let mut uh = vec![Moments::new(); stencils.len()];
    let mut censored = 0usize;
    for b in blocks {
        let (br, bu, bc) = b?;
        for (a, x) in res.iter_mut().zip(&br) {
            a.merge(x);
        }
        for (a, x) in uh.iter_mut().zip(&bu) {
            a.merge(x);
        }
        censored += bc;
    }
    let cf = censored as f64 / (n_paths * n_starts) as f64;
    let bias = if censored > 0 { Bias::LowerBound } else { Bias::None };
    let points = grid
        .iter()
        .zip(res.iter().zip(&uh))
        .map(|(x, (r, u))| {
            let residual = MCEstimate::from_moments(r, cf, bias);
            let tolerance = 3.0 * residual.stderr + h2;
            PdeResidualPoint {
                x: x.clone(),
                u_hat: MCEstimate::from_moments(u, cf, bias),
                within_tolerance: residual.mean.abs() <= tolerance,
                residual,
                tolerance,
            }
        })
        .collect();
    Ok(PdeResidualReport {
        h,
        points,
        censored_fraction: cf,
    })
}
