//! Euler–Maruyama paths stopped at the exit from a domain.
//!
//! Three stopping times are tracked per path, on the time grid `t_k = k·dt`:
//!
//! - `τ₀`: first `t ≥ 0` with `x_t ∉ U` (zero for boundary starts);
//! - `τ̄`: first `t ≥ 0` with `x_t ∉ Ū`;
//! - `τ`: first *positive* exit time. For interior starts `τ = τ₀`. A
//!   boundary start is stepped once before any exit logic applies, and `τ`
//!   is set only after the path has been observed inside `U` (then left `U`)
//!   or outside `Ū`.
//!
//! Exit times are the end of the step on which the exit was detected. With
//! the bridge correction, a step whose endpoints both lie in `Ū` also counts
//! as leaving `Ū` when a uniform draw falls below the Brownian-bridge
//! crossing probability.
//!
//! All steps have length `dt`; paths still running after `⌊T/dt⌋` steps are
//! censored at `censor_time = ⌊T/dt⌋·dt ≤ T`. Lengthening the horizon only
//! appends steps, so exit times of a fixed stream never change.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::domain::{Domain, Membership};
use crate::error::{Error, Result};
use crate::exec::{map_blocks, Executor, BLOCK_SIZE};
use crate::model::DiffusionModel;
use crate::rng::PathStream;

/// A coordinate beyond this magnitude flags the path as exploded.
pub const EXPLOSION_NORM: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Censoring horizon `T_max`.
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    pub store_path: bool,
    pub path_stride: usize,
}

impl SimConfig {
    /// Bridge correction on, no path storage.
    pub fn new(dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            dt,
            horizon,
            seed,
            bridge_correction: true,
            store_path: false,
            path_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bridge(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_path(mut self, stride: usize) -> Self {
        self.store_path = true;
        self.path_stride = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if !(self.horizon > self.dt) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument("horizon must exceed dt".into()));
        }
        if self.path_stride == 0 {
            return Err(Error::InvalidArgument("path_stride must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        // tolerate horizon/dt landing just below an integer
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    pub fn censor_time(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExitKind {
    /// Left `U` after having been inside it.
    ExitedU,
    /// Left `Ū` from a boundary start without entering `U`, or exploded.
    ExitedClosure,
    Censored,
}

impl ExitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitKind::ExitedU => "exited_U",
            ExitKind::ExitedClosure => "exited_closure",
            ExitKind::Censored => "censored",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExitRecord {
    /// `τ`; `None` iff censored.
    pub exit_time: Option<f64>,
    /// `x_τ`, snapped onto the boundary where the shape allows.
    pub exit_point: Option<Vec<f64>>,
    pub exit_kind: ExitKind,
    pub tau0: Option<f64>,
    /// First step outside the closure, `τ̄`.
    pub tau_bar: Option<f64>,
    pub exploded: bool,
    /// Time at which the optional fence domain was left.
    pub fence_time: Option<f64>,
    /// Exit point if exited, otherwise the last simulated state.
    pub final_state: Vec<f64>,
    pub steps: usize,
    /// `(t, x)` samples every `path_stride` steps plus the final state.
    pub path: Option<Vec<(f64, Vec<f64>)>>,
}

impl ExitRecord {
    pub fn is_censored(&self) -> bool {
        self.exit_kind == ExitKind::Censored
    }
}

/// Per-step callback for occupation integrals; called with the state at the
/// left end of every step taken before `τ`.
pub trait Observer {
    fn step(&mut self, t: f64, x: &[f64], h: f64);
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoObserver;

impl Observer for NoObserver {
    #[inline]
    fn step(&mut self, _t: f64, _x: &[f64], _h: f64) {}
}

/// Wraps a closure as an [`Observer`].
pub struct FnObserver<F>(pub F);

impl<F: FnMut(f64, &[f64], f64)> Observer for FnObserver<F> {
    #[inline]
    fn step(&mut self, t: f64, x: &[f64], h: f64) {
        (self.0)(t, x, h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopAt {
    /// Stop at `τ`.
    Tau,
    /// Continue past `τ` until `τ̄`.
    TauBar,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions<'a> {
    pub stop: StopAt,
    /// Also stop (without exiting) when the path leaves this open set.
    pub fence: Option<&'a Domain>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        Self {
            stop: StopAt::Tau,
            fence: None,
        }
    }
}

struct Walker {
    x: Vec<f64>,
    next: Vec<f64>,
    seen_inside: bool,
    tau: Option<f64>,
    tau0: Option<f64>,
    tau_bar: Option<f64>,
    exit_point: Option<Vec<f64>>,
    kind: ExitKind,
    exploded: bool,
    fence_time: Option<f64>,
    done: bool,
    steps: usize,
    path: Option<Vec<(f64, Vec<f64>)>>,
}

impl Walker {
    fn closure_exit(&mut self, t: f64, point: Vec<f64>) {
        self.tau0.get_or_insert(t);
        self.tau_bar = Some(t);
        if self.tau.is_none() {
            self.tau = Some(t);
            self.kind = if self.seen_inside && !self.exploded {
                ExitKind::ExitedU
            } else {
                ExitKind::ExitedClosure
            };
            self.exit_point = Some(point);
        }
        self.done = true;
    }

    fn into_record(self) -> ExitRecord {
        let final_state = match &self.exit_point {
            Some(p) => p.clone(),
            None => self.x,
        };
        ExitRecord {
            exit_time: self.tau,
            exit_point: self.exit_point,
            exit_kind: self.kind,
            tau0: self.tau0,
            tau_bar: self.tau_bar,
            exploded: self.exploded,
            fence_time: self.fence_time,
            final_state,
            steps: self.steps,
            path: self.path,
        }
    }
}

fn check_start(model: &DiffusionModel, domain: &Domain, x0: &[f64]) -> Result<Membership> {
    if domain.dim() != model.dim_state() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_state(),
            found: domain.dim(),
        });
    }
    if model.dim_noise() == 0 {
        return Err(Error::InvalidArgument(
            "simulation needs at least one noise column".into(),
        ));
    }
    match domain.membership(x0)? {
        Membership::Exterior => Err(Error::StartOutsideClosure),
        m => Ok(m),
    }
}

/// Runs one walker per start on a *shared* stream: at every step all
/// active walkers use the same gaussians and the same bridge uniform
/// (common random numbers). A single start reproduces the path of
/// [`simulate_stopped`] exactly.
pub fn run_lockstep<O: Observer>(
    model: &DiffusionModel,
    domain: &Domain,
    starts: &[Vec<f64>],
    cfg: &SimConfig,
    stream: &mut PathStream,
    opts: &RunOptions<'_>,
    observers: &mut [O],
) -> Result<Vec<ExitRecord>> {
    cfg.validate()?;
    if observers.len() != starts.len() {
        return Err(Error::DimensionMismatch {
            expected: starts.len(),
            found: observers.len(),
        });
    }
    let m = model.dim_state();
    let mut walkers = Vec::with_capacity(starts.len());
    for x0 in starts {
        let mem = check_start(model, domain, x0)?;
        walkers.push(Walker {
            x: x0.clone(),
            next: vec![0.0; m],
            seen_inside: mem == Membership::Interior,
            tau: None,
            tau0: (mem == Membership::Boundary).then_some(0.0),
            tau_bar: None,
            exit_point: None,
            kind: ExitKind::Censored,
            exploded: false,
            fence_time: None,
            done: false,
            steps: 0,
            path: cfg.store_path.then(|| vec![(0.0, x0.clone())]),
        });
    }

    let dt = cfg.dt;
    let n_steps = cfg.n_steps();
    let mut z = vec![0.0; model.dim_noise()];
    let mut ws = model.workspace();
    let mut active = walkers.len();

    for k in 0..n_steps {
        if active == 0 {
            break;
        }
        let t = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        stream.fill_gaussian(&mut z);
        let u = if cfg.bridge_correction { stream.uniform() } else { 1.0 };

        for (w, obs) in walkers.iter_mut().zip(observers.iter_mut()) {
            if w.done {
                continue;
            }
            if w.tau.is_none() {
                obs.step(t, &w.x, dt);
            }
            model.step_into(&w.x, dt, &z, &mut w.next, &mut ws);
            w.steps += 1;

            if w.next.iter().any(|v| !(v.abs() <= EXPLOSION_NORM)) {
                w.exploded = true;
                let p = w.next.clone();
                w.closure_exit(t1, p);
            } else if opts.fence.is_some_and(|f| !f.contains(&w.next)) {
                w.fence_time = Some(t1);
                w.done = true;
                core::mem::swap(&mut w.x, &mut w.next);
            } else {
                let mem = domain.classify(&w.next);
                let crossed = cfg.bridge_correction && mem != Membership::Exterior && {
                    model.diffusion_from_sigma(&mut ws);
                    u < domain.bridge_crossing_prob(&w.x, &w.next, &ws.a, dt)
                };
                if mem == Membership::Exterior {
                    let p = domain.crossing_point(&w.x, &w.next);
                    w.closure_exit(t1, p);
                } else if crossed {
                    let p = domain.project_to_boundary(&w.next).unwrap_or_else(|| w.next.clone());
                    w.closure_exit(t1, p);
                } else {
                    if mem == Membership::Boundary {
                        w.tau0.get_or_insert(t1);
                        if w.seen_inside && w.tau.is_none() {
                            w.tau = Some(t1);
                            w.kind = ExitKind::ExitedU;
                            w.exit_point = Some(w.next.clone());
                            if opts.stop == StopAt::Tau {
                                w.done = true;
                            }
                        }
                    } else if w.tau.is_none() {
                        w.seen_inside = true;
                    }
                    core::mem::swap(&mut w.x, &mut w.next);
                }
            }

            if let Some(path) = &mut w.path {
                if w.done || w.steps % cfg.path_stride == 0 {
                    let state = if w.done {
                        w.exit_point.clone().unwrap_or_else(|| w.x.clone())
                    } else {
                        w.x.clone()
                    };
                    path.push((t1, state));
                }
            }
            if w.done {
                active -= 1;
            }
        }
    }

    for w in &mut walkers {
        if let Some(path) = &mut w.path {
            if !w.done && path.last().is_none_or(|(t, _)| *t < cfg.censor_time()) {
                path.push((cfg.censor_time(), w.x.clone()));
            }
        }
    }
    Ok(walkers.into_iter().map(Walker::into_record).collect())
}

/// One path from `x0`, stopped at `τ`, with an observer.
pub fn simulate_observed<O: Observer>(
    model: &DiffusionModel,
    domain: &Domain,
    x0: &[f64],
    cfg: &SimConfig,
    stream: &mut PathStream,
    opts: &RunOptions<'_>,
    observer: &mut O,
) -> Result<ExitRecord> {
    let mut recs = run_lockstep(
        model,
        domain,
        &[x0.to_vec()],
        cfg,
        stream,
        opts,
        core::slice::from_mut(observer),
    )?;
    Ok(recs.pop().expect("one start"))
}

/// The stopped process `x_{t∧τ}` from `x0`.
pub fn simulate_stopped(
    model: &DiffusionModel,
    domain: &Domain,
    x0: &[f64],
    cfg: &SimConfig,
    stream: &mut PathStream,
) -> Result<ExitRecord> {
    simulate_observed(model, domain, x0, cfg, stream, &RunOptions::default(), &mut NoObserver)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitTriple {
    pub tau: Option<f64>,
    pub tau0: Option<f64>,
    pub tau_bar: Option<f64>,
    pub kind: ExitKind,
    pub exploded: bool,
}

/// `(τ, τ₀, τ̄)` for one path; `None` marks censoring.
pub fn exit_time_triple(
    model: &DiffusionModel,
    domain: &Domain,
    x0: &[f64],
    cfg: &SimConfig,
    stream: &mut PathStream,
) -> Result<ExitTriple> {
    let opts = RunOptions {
        stop: StopAt::TauBar,
        fence: None,
    };
    let r = simulate_observed(model, domain, x0, cfg, stream, &opts, &mut NoObserver)?;
    Ok(ExitTriple {
        tau: r.exit_time,
        tau0: r.tau0,
        tau_bar: r.tau_bar,
        kind: r.exit_kind,
        exploded: r.exploded,
    })
}

/// Records of paths `first_index .. first_index + n_paths` of one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryBatch {
    pub seed: u64,
    pub first_index: u64,
    pub records: Vec<ExitRecord>,
}

impl TrajectoryBatch {
    pub fn n_paths(&self) -> usize {
        self.records.len()
    }

    pub fn index_range(&self) -> Range<u64> {
        self.first_index..self.first_index + self.records.len() as u64
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.is_censored()).count() as f64 / self.records.len() as f64
    }

    pub fn explosion_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.exploded).count() as f64 / self.records.len() as f64
    }
}

/// `n_paths` stopped paths from `x0`; path `i` uses stream `(cfg.seed, i)`.
pub fn simulate_batch<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    domain: &Domain,
    x0: &[f64],
    cfg: &SimConfig,
    n_paths: usize,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    check_start(model, domain, x0)?;
    let blocks = map_blocks(exec, n_paths, BLOCK_SIZE, |range| {
        range
            .map(|i| {
                let mut s = PathStream::new(cfg.seed, i as u64);
                simulate_stopped(model, domain, x0, cfg, &mut s)
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut records = Vec::with_capacity(n_paths);
    for b in blocks {
        records.extend(b?);
    }
    Ok(TrajectoryBatch {
        seed: cfg.seed,
        first_index: 0,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PolyMatrix, PolyVectorField};
    use crate::poly::MultiPoly;
    use crate::Sequential;

    fn bm_interval() -> (DiffusionModel, Domain) {
        let m = DiffusionModel::polynomial(
            PolyVectorField::zero(1),
            PolyMatrix::constant(1, 1, &[1.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap();
        (m, Domain::boxed(vec![0.0], vec![1.0]).unwrap())
    }

    fn drift_only(b: f64) -> DiffusionModel {
        DiffusionModel::polynomial(
            PolyVectorField::constant(&[b]),
            PolyMatrix::constant(1, 1, &[0.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap()
    }

    #[test]
    fn outward_drift_from_boundary_exits_closure_in_one_step() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let cfg = SimConfig::new(0.01, 1.0, 0).unwrap();
        let r = simulate_stopped(&drift_only(1.0), &u, &[1.0], &cfg, &mut PathStream::new(0, 0)).unwrap();
        assert_eq!(r.exit_kind, ExitKind::ExitedClosure);
        assert_eq!(r.exit_time, Some(0.01));
        assert_eq!(r.exit_point, Some(vec![1.0]));
        assert_eq!(r.tau0, Some(0.0));
    }

    #[test]
    fn inward_drift_from_boundary_enters_then_exits() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let cfg = SimConfig::new(0.01, 5.0, 0).unwrap();
        let t = exit_time_triple(&drift_only(-1.0), &u, &[1.0], &cfg, &mut PathStream::new(0, 0)).unwrap();
        assert_eq!(t.kind, ExitKind::ExitedU);
        assert_eq!(t.tau0, Some(0.0));
        let tau = t.tau.unwrap();
        assert!((tau - 1.0).abs() < 0.011);
        assert!(t.tau_bar.unwrap() >= tau);
    }

    #[test]
    fn frozen_path_is_censored() {
        let u = Domain::boxed(vec![0.0], vec![1.0]).unwrap();
        let cfg = SimConfig::new(0.1, 1.0, 0).unwrap();
        let r = simulate_stopped(&drift_only(0.0), &u, &[0.5], &cfg, &mut PathStream::new(0, 0)).unwrap();
        assert!(r.is_censored());
        assert_eq!(r.exit_time, None);
        assert_eq!(r.exit_point, None);
        assert_eq!(r.steps, 10);
        assert_eq!(r.final_state, vec![0.5]);
    }

    #[test]
    fn start_outside_is_rejected() {
        let (m, u) = bm_interval();
        let cfg = SimConfig::new(0.1, 1.0, 0).unwrap();
        assert_eq!(
            simulate_stopped(&m, &u, &[1.5], &cfg, &mut PathStream::new(0, 0)),
            Err(Error::StartOutsideClosure)
        );
    }

    #[test]
    fn lockstep_matches_single_runs() {
        let (m, u) = bm_interval();
        let cfg = SimConfig::new(1e-3, 10.0, 5).unwrap();
        let starts = vec![vec![0.2], vec![0.5], vec![0.7]];
        for i in 0..20 {
            let mut obs = [NoObserver; 3];
            let joint = run_lockstep(
                &m,
                &u,
                &starts,
                &cfg,
                &mut PathStream::new(5, i),
                &RunOptions::default(),
                &mut obs,
            )
            .unwrap();
            for (s, rec) in starts.iter().zip(&joint) {
                let single = simulate_stopped(&m, &u, s, &cfg, &mut PathStream::new(5, i)).unwrap();
                assert_eq!(&single, rec);
            }
        }
    }

    #[test]
    fn explosion_is_flagged() {
        let cubic = DiffusionModel::polynomial(
            PolyVectorField::new(vec![MultiPoly::from_terms(1, [(vec![3], 1.0)]).unwrap()]).unwrap(),
            PolyMatrix::constant(1, 1, &[0.0]).unwrap(),
            Domain::full(1),
        )
        .unwrap();
        let cfg = SimConfig::new(0.1, 100.0, 0).unwrap();
        let r = simulate_stopped(&cubic, &Domain::full(1), &[2.0], &cfg, &mut PathStream::new(0, 0)).unwrap();
        assert!(r.exploded);
        assert_eq!(r.exit_kind, ExitKind::ExitedClosure);
        assert!(r.exit_time.unwrap() < 1.0);
    }

    #[test]
    fn stored_path_respects_stride() {
        let (m, u) = bm_interval();
        let cfg = SimConfig::new(1e-3, 10.0, 1).unwrap().with_path(10);
        let r = simulate_stopped(&m, &u, &[0.5], &cfg, &mut PathStream::new(1, 0)).unwrap();
        let path = r.path.unwrap();
        assert_eq!(path[0], (0.0, vec![0.5]));
        let (t_last, x_last) = path.last().unwrap();
        assert_eq!(Some(*t_last), r.exit_time);
        assert_eq!(Some(x_last), r.exit_point.as_ref());
    }

    #[test]
    fn batch_is_executor_independent() {
        let (m, u) = bm_interval();
        let cfg = SimConfig::new(1e-2, 10.0, 9).unwrap();
        let b = simulate_batch(&Sequential, &m, &u, &[0.5], &cfg, 300).unwrap();
        assert_eq!(b.n_paths(), 300);
        assert_eq!(b.index_range(), 0..300);
        let single = simulate_stopped(&m, &u, &[0.5], &cfg, &mut PathStream::new(9, 299)).unwrap();
        assert_eq!(b.records[299], single);
    }
}
