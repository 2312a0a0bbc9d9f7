//! Long-time behaviour: Lyapunov nonexplosivity certificates, the
//! two-sphere cycle construction of an invariant measure, recurrence
//! classification, and exponential moments of the exit time from `Ū`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

use crate::domain::{Domain, Exhaustion, Shape};
use crate::error::{Error, Result};
use crate::estimate::{sample_paths, McProblem};
use crate::exec::{map_blocks, Executor, BLOCK_SIZE};
use crate::grid::{lattice, Grid};
use crate::model::{DiffusionModel, Workspace};
use crate::poly::MultiPoly;
use crate::rng::PathStream;
use crate::sim::{SimConfig, StopAt, EXPLOSION_NORM};
use crate::stats::{batch_means_stderr, quantile, sorted, Bias, MCEstimate, Moments};

/// Default lower bound that `w_{k_max}` must reach.
pub const DEFAULT_GROWTH_FLOOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelCheck {
    pub k: usize,
    /// Grid maximum of `p = Lw − Cw − D` on `𝒳ₖ`.
    pub max_residual: f64,
    pub argmax: Vec<f64>,
    /// Grid minimum of `w` on `∂𝒳ₖ`.
    pub w_k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovCertificate {
    pub w: MultiPoly,
    pub c: f64,
    pub d: f64,
    /// `p = Lw − Cw − D`, exact.
    pub residual: MultiPoly,
    pub levels: Vec<LevelCheck>,
    /// Grid minimum of `w` over all levels.
    pub w_min: f64,
    pub growth_floor: f64,
    pub residual_ok: bool,
    pub growth_ok: bool,
    /// A grid point with `p > 0`, if any.
    pub witness_point: Option<Vec<f64>>,
    pub valid: bool,
}

fn boundary_grid(member: &Domain, grid_n: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = member.bounding_box().expect("exhaustion members are bounded");
    let centre: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    lattice(&lo, &hi, grid_n)
        .into_iter()
        .filter(|q| q != &centre)
        .filter_map(|q| member.project_to_boundary(&q))
        .collect()
}

/// Checks `Lw ≤ Cw + D` and growth of `w_k = min_{∂𝒳ₖ} w` on grids.
#[allow(clippy::too_many_arguments)]
pub fn certify_nonexplosive(
    model: &DiffusionModel,
    w: &MultiPoly,
    exhaustion: &Exhaustion,
    c: f64,
    d: f64,
    k_max: usize,
    grid_n: usize,
    growth_floor: f64,
) -> Result<LyapunovCertificate> {
    if !(c > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidArgument("C and D must be positive".into()));
    }
    if k_max == 0 || grid_n < 2 {
        return Err(Error::InvalidArgument("need k_max >= 1 and grid_n >= 2".into()));
    }
    if exhaustion.dim() != model.dim_state() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_state(),
            found: exhaustion.dim(),
        });
    }
    exhaustion.validate()?;
    let lw = model.generator(w)?;
    let residual = &(&lw - &w.scale(c)) - &MultiPoly::constant(w.dim(), d);
    let mut levels = Vec::with_capacity(k_max);
    let mut w_min = f64::INFINITY;
    let mut witness: Option<(f64, Vec<f64>)> = None;
    for k in 1..=k_max {
        let member = exhaustion.member(k);
        let (lo, hi) = member.bounding_box().expect("bounded");
        let mut max_residual = f64::NEG_INFINITY;
        let mut argmax = lo.clone();
        for q in lattice(&lo, &hi, grid_n) {
            if !member.contains_closure(&q) {
                continue;
            }
            let pv = residual.eval(&q);
            w_min = w_min.min(w.eval(&q));
            if pv > max_residual {
                max_residual = pv;
                argmax = q.clone();
            }
            if pv > 0.0 && witness.as_ref().is_none_or(|(v, _)| pv > *v) {
                witness = Some((pv, q));
            }
        }
        let w_k = boundary_grid(&member, grid_n)
            .iter()
            .map(|q| w.eval(q))
            .fold(f64::INFINITY, f64::min);
        levels.push(LevelCheck {
            k,
            max_residual,
            argmax,
            w_k,
        });
    }
    let residual_ok = levels.iter().all(|l| l.max_residual <= 0.0);
    let growth_ok =
        levels.windows(2).all(|p| p[1].w_k > p[0].w_k) && levels.last().is_some_and(|l| l.w_k >= growth_floor);
    let valid = residual_ok && growth_ok && w_min >= 0.0;
    Ok(LyapunovCertificate {
        w: w.clone(),
        c,
        d,
        residual,
        levels,
        w_min,
        growth_floor,
        residual_ok,
        growth_ok,
        witness_point: witness.map(|(_, q)| q),
        valid,
    })
}

/// Two concentric-or-nested balls: `Γ₂ = ∂U`, `Γ₁ = ∂V`, `Ū ⊂ V`.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleConfig {
    pub u: Domain,
    pub v: Domain,
}

impl CycleConfig {
    pub fn new(u: Domain, v: Domain) -> Result<Self> {
        if !matches!(u.shape(), Shape::Ball { .. }) || !matches!(v.shape(), Shape::Ball { .. }) {
            return Err(Error::UnsupportedShape("non-ball cycle"));
        }
        if !v.contains_domain(&u) {
            return Err(Error::InvalidArgument("closure of U must lie inside V".into()));
        }
        Ok(Self { u, v })
    }

    /// Balls of radii `r_u < r_v` about a common centre.
    pub fn concentric(center: Vec<f64>, r_u: f64, r_v: f64) -> Result<Self> {
        Self::new(Domain::ball(center.clone(), r_u)?, Domain::ball(center, r_v)?)
    }

    fn ball(d: &Domain) -> (&[f64], f64) {
        match d.shape() {
            Shape::Ball { center, radius } => (center, *radius),
            _ => unreachable!("checked in new"),
        }
    }

    /// Default chain start: the point of `Γ₂` in direction `+e₁`.
    pub fn default_start(&self) -> Vec<f64> {
        let (c, r) = Self::ball(&self.u);
        let mut x = c.to_vec();
        x[0] += r;
        x
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Crossing {
    /// Leave the ball (hit from inside).
    Leave,
    /// Enter the closed ball (hit from outside).
    Enter,
}

struct SphereWalk<'a> {
    model: &'a DiffusionModel,
    dt: f64,
    bridge: bool,
    ws: Workspace,
    z: Vec<f64>,
    next: Vec<f64>,
}

fn radial(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn project(x: &[f64], c: &[f64], r: f64) -> Vec<f64> {
    let d = radial(x, c);
    if d == 0.0 {
        let mut y = c.to_vec();
        y[0] += r;
        return y;
    }
    x.iter().zip(c).map(|(a, b)| b + r * (a - b) / d).collect()
}

impl<'a> SphereWalk<'a> {
    fn new(model: &'a DiffusionModel, cfg: &SimConfig) -> Self {
        Self {
            model,
            dt: cfg.dt,
            bridge: cfg.bridge_correction,
            ws: model.workspace(),
            z: vec![0.0; model.dim_noise()],
            next: vec![0.0; model.dim_state()],
        }
    }

    /// Steps `x` until it crosses the sphere `|x − c| = r` in the given
    /// direction, at most `max_steps` steps. On a hit `x` is placed on the
    /// sphere and the elapsed time is returned. `occupy(x_k, h)` sees the
    /// left endpoint of every step with its effective length (the last step
    /// is cut at the refined crossing time).
    fn run<F: FnMut(&[f64], f64)>(
        &mut self,
        c: &[f64],
        r: f64,
        dir: Crossing,
        x: &mut Vec<f64>,
        stream: &mut PathStream,
        max_steps: usize,
        mut occupy: F,
    ) -> Option<(f64, usize)> {
        let m = x.len();
        let crossed = |y: &[f64]| {
            let d = radial(y, c);
            match dir {
                Crossing::Leave => d >= r,
                Crossing::Enter => d <= r,
            }
        };
        let mut elapsed = 0.0;
        for k in 0..max_steps {
            stream.fill_gaussian(&mut self.z);
            let u = if self.bridge { stream.uniform() } else { 1.0 };
            self.model.step_into(x, self.dt, &self.z, &mut self.next, &mut self.ws);
            if self.next.iter().any(|v| !(v.abs() <= EXPLOSION_NORM)) {
                return None;
            }
            let hit_point = if crossed(&self.next) {
                // one bisection of the chord
                let mid: Vec<f64> = x.iter().zip(&self.next).map(|(a, b)| 0.5 * (a + b)).collect();
                let frac = if crossed(&mid) { 0.5 } else { 1.0 };
                Some((frac, project(&self.next, c, r)))
            } else if self.bridge {
                let d0 = (radial(x, c) - r).abs();
                let d1 = (radial(&self.next, c) - r).abs();
                self.model.diffusion_from_sigma(&mut self.ws);
                let rx = radial(x, c);
                let ann = if rx > 0.0 {
                    let n: Vec<f64> = x.iter().zip(c).map(|(a, b)| (a - b) / rx).collect();
                    crate::domain::quad_form(&self.ws.a, &n, m)
                } else {
                    0.0
                };
                let p = if ann > 0.0 {
                    (-2.0 * d0 * d1 / (ann * self.dt)).exp()
                } else {
                    0.0
                };
                (u < p).then(|| (0.5, project(&self.next, c, r)))
            } else {
                None
            };
            match hit_point {
                Some((frac, p)) => {
                    let h = frac * self.dt;
                    occupy(x, h);
                    elapsed += h;
                    *x = p;
                    return Some((elapsed, k + 1));
                }
                None => {
                    occupy(x, self.dt);
                    elapsed += self.dt;
                    core::mem::swap(x, &mut self.next);
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub chain: usize,
    /// `X_n ∈ Γ₂` at `σ_{2n}`.
    pub start: Vec<f64>,
    /// `X_{n+1} ∈ Γ₂` at `σ_{2n+2}`.
    pub end: Vec<f64>,
    /// `σ_{2n+2} − σ_{2n}`.
    pub duration: f64,
    /// Sparse `(cell, time)` occupation over the cycle, cells ascending.
    pub occupation: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleSample {
    pub config: CycleConfig,
    pub grid: Grid,
    pub n_chains: usize,
    /// Completed cycles, chain by chain, in chain order.
    pub cycles: Vec<CycleRecord>,
    /// Cycles that hit the horizon (or exploded) and were discarded.
    pub censored: usize,
}

impl CycleSample {
    pub fn censored_fraction(&self) -> f64 {
        let total = self.cycles.len() + self.censored;
        if total == 0 {
            0.0
        } else {
            self.censored as f64 / total as f64
        }
    }
}

const CHAIN_TAG: u64 = 0x00C1_C1E5;

/// Runs `n_chains` independent embedded chains with `n_cycles` cycle
/// attempts in total. Each cycle alternates a first hit of `Γ₁` and a
/// return to `Γ₂`, capped at `cfg.horizon` per cycle; a capped cycle is
/// discarded and its chain restarts from `x0`.
pub fn run_cycles<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    cycle: &CycleConfig,
    grid: &Grid,
    n_cycles: usize,
    n_chains: usize,
    x0: Option<&[f64]>,
    cfg: &SimConfig,
) -> Result<CycleSample> {
    cfg.validate()?;
    let m = model.dim_state();
    if cycle.u.dim() != m || grid.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if cycle.u.dim() != m { cycle.u.dim() } else { grid.dim() },
        });
    }
    if n_cycles == 0 || n_chains == 0 {
        return Err(Error::InvalidArgument("need n_cycles, n_chains >= 1".into()));
    }
    if !model.statespace().contains_domain(&cycle.v) {
        return Err(Error::InvalidArgument(
            "cycle balls must lie inside the state space".into(),
        ));
    }
    let (cu, ru) = CycleConfig::ball(&cycle.u);
    let (cv, rv) = CycleConfig::ball(&cycle.v);
    let start = match x0 {
        Some(p) => project(p, cu, ru),
        None => cycle.default_start(),
    };
    let n_cells = grid.n_cells();
    let max_steps = cfg.n_steps();
    let per_chain: Vec<usize> = (0..n_chains)
        .map(|j| n_cycles / n_chains + usize::from(j < n_cycles % n_chains))
        .collect();

    let results = exec.map(n_chains, |j| {
        let mut stream = PathStream::derived(cfg.seed, CHAIN_TAG, j as u64);
        let mut walk = SphereWalk::new(model, cfg);
        let mut x = start.clone();
        let mut cells = vec![0.0; n_cells];
        let mut touched: Vec<usize> = Vec::new();
        let mut records = Vec::new();
        let mut censored = 0usize;
        for _ in 0..per_chain[j] {
            let from = x.clone();
            let mut occupy = |y: &[f64], h: f64| {
                if let Some(cell) = grid.cell_of(y) {
                    if cells[cell] == 0.0 {
                        touched.push(cell);
                    }
                    cells[cell] += h;
                }
            };
            let first = walk.run(cv, rv, Crossing::Leave, &mut x, &mut stream, max_steps, &mut occupy);
            let done = first.and_then(|(t1, s1)| {
                walk.run(
                    cu,
                    ru,
                    Crossing::Enter,
                    &mut x,
                    &mut stream,
                    max_steps - s1,
                    &mut occupy,
                )
                .map(|(t2, _)| t1 + t2)
            });
            touched.sort_unstable();
            let occupation: Vec<(usize, f64)> = touched.iter().map(|&c| (c, cells[c])).collect();
            for &c in &touched {
                cells[c] = 0.0;
            }
            touched.clear();
            match done {
                Some(duration) => records.push(CycleRecord {
                    chain: j,
                    start: from,
                    end: x.clone(),
                    duration,
                    occupation,
                }),
                None => {
                    censored += 1;
                    x = start.clone();
                }
            }
        }
        (records, censored)
    });
    let mut cycles = Vec::new();
    let mut censored = 0;
    for (r, c) in results {
        cycles.extend(r);
        censored += c;
    }
    if cycles.is_empty() {
        return Err(Error::NoCompletedCycles { censored });
    }
    Ok(CycleSample {
        config: cycle.clone(),
        grid: grid.clone(),
        n_chains,
        cycles,
        censored,
    })
}

/// Cycles per chain after dropping the first `burn_in` of every chain.
fn after_burn_in(samples: &CycleSample, burn_in: usize) -> Vec<&CycleRecord> {
    let mut seen = vec![0usize; samples.n_chains];
    samples
        .cycles
        .iter()
        .filter(|c| {
            seen[c.chain] += 1;
            seen[c.chain] > burn_in
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainMeasure {
    /// Bin labels: in 1-D `[c − ρ, c + ρ]`; otherwise angle-bin centres in
    /// radians of the `(x₁, x₂)` projection.
    pub labels: Vec<f64>,
    pub mass: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
}

/// Empirical law `ν` of the embedded chain on `Γ₂`.
pub fn embedded_chain_stationary(samples: &CycleSample, burn_in: usize, n_bins: usize) -> Result<ChainMeasure> {
    let used = after_burn_in(samples, burn_in);
    if used.is_empty() {
        return Err(Error::InsufficientCycles {
            available: samples.cycles.len(),
            required: burn_in * samples.n_chains + 1,
        });
    }
    let (c, r) = CycleConfig::ball(&samples.config.u);
    let m = c.len();
    let (labels, bin_of): (Vec<f64>, &dyn Fn(&[f64]) -> usize) = if m == 1 {
        (vec![c[0] - r, c[0] + r], &|x: &[f64]| usize::from(x[0] > c[0]))
    } else {
        let nb = n_bins.max(1);
        let width = 2.0 * core::f64::consts::PI / nb as f64;
        (
            (0..nb)
                .map(|k| -core::f64::consts::PI + (k as f64 + 0.5) * width)
                .collect(),
            &move |x: &[f64]| {
                let a = (x[1] - c[1]).atan2(x[0] - c[0]);
                (((a + core::f64::consts::PI) / width) as usize).min(nb - 1)
            },
        )
    };
    let k = labels.len();
    let bins: Vec<usize> = used.iter().map(|cy| bin_of(&cy.end)).collect();
    let n = bins.len();
    let mut mass = vec![0.0; k];
    for &b in &bins {
        mass[b] += 1.0;
    }
    mass.iter_mut().for_each(|v| *v /= n as f64);
    let stderr = (0..k)
        .map(|b| {
            let ind: Vec<f64> = bins.iter().map(|&x| if x == b { 1.0 } else { 0.0 }).collect();
            batch_means_stderr(&ind, 20)
        })
        .collect();
    Ok(ChainMeasure {
        labels,
        mass,
        stderr,
        n,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantMeasureEstimate {
    pub grid: Grid,
    /// Mean occupation per cycle and cell, `μ(cell)`.
    pub mu: Vec<f64>,
    /// `N = Σ μ`.
    pub normalizer: f64,
    /// `μ̃ = μ / N`.
    pub mu_tilde: Vec<f64>,
    /// Batch-means stderr of `μ̃` per cell.
    pub stderr: Vec<f64>,
    pub n_cycles: usize,
}

impl InvariantMeasureEstimate {
    /// `μ̃(cell) / cell volume`.
    pub fn density(&self) -> Vec<f64> {
        let v = self.grid.cell_volume();
        self.mu_tilde.iter().map(|m| m / v).collect()
    }
}

/// Minimum completed cycles accepted by [`estimate_invariant_measure`].
pub const DEFAULT_MIN_CYCLES: usize = 100;

/// Normalized occupation measure on the grid of `samples`.
pub fn estimate_invariant_measure(
    samples: &CycleSample,
    burn_in: usize,
    min_cycles: usize,
) -> Result<InvariantMeasureEstimate> {
    let used = after_burn_in(samples, burn_in);
    if used.len() < min_cycles.max(1) {
        return Err(Error::InsufficientCycles {
            available: used.len(),
            required: min_cycles.max(1),
        });
    }
    let n_cells = samples.grid.n_cells();
    let n = used.len() as f64;
    let mut mu = vec![0.0; n_cells];
    for c in &used {
        for &(cell, t) in &c.occupation {
            mu[cell] += t;
        }
    }
    mu.iter_mut().for_each(|v| *v /= n);
    let normalizer: f64 = mu.iter().sum();
    if !(normalizer > 0.0) {
        return Err(Error::InvalidArgument("no occupation inside the grid".into()));
    }
    let mu_tilde: Vec<f64> = mu.iter().map(|v| v / normalizer).collect();
    let mut series = vec![vec![0.0; used.len()]; n_cells];
    for (i, c) in used.iter().enumerate() {
        for &(cell, t) in &c.occupation {
            series[cell][i] = t;
        }
    }
    let stderr = series.iter().map(|s| batch_means_stderr(s, 20) / normalizer).collect();
    Ok(InvariantMeasureEstimate {
        grid: samples.grid.clone(),
        mu,
        normalizer,
        mu_tilde,
        stderr,
        n_cycles: used.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecurrenceVerdict {
    TransientEvidence,
    PositiveRecurrentEvidence,
    NullRecurrentEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StartHitting {
    pub start: Vec<f64>,
    /// `P̂_x{hit B by T_i}`.
    pub hit_prob: Vec<MCEstimate>,
    /// `Ê_x[T_B | T_B ≤ T_i]`.
    pub conditional_mean: Vec<Option<MCEstimate>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    pub horizons: Vec<f64>,
    pub starts: Vec<StartHitting>,
    pub tolerance: f64,
    pub verdict: RecurrenceVerdict,
}

const CLASSIFY_TAG: u64 = 0x000C_1A55;

/// Relative growth of the conditional mean between the last two horizons
/// beyond which the mean counts as diverging. Schedules spaced by a decade
/// separate the regimes well: Brownian means grow about threefold.
pub const MEAN_GROWTH: f64 = 0.25;

/// Evidence verdict from hitting probabilities of the ball `b` and the
/// conditional mean hitting times, along an increasing horizon schedule.
#[allow(clippy::too_many_arguments)]
pub fn classify_recurrence<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    b: &Domain,
    starts: &[Vec<f64>],
    schedule: &[f64],
    n_paths: usize,
    cfg: &SimConfig,
    tolerance: f64,
) -> Result<RecurrenceReport> {
    let Shape::Ball { center, radius } = b.shape() else {
        return Err(Error::UnsupportedShape("non-ball probe"));
    };
    if schedule.len() < 2 || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("need at least two increasing horizons".into()));
    }
    if starts.is_empty() || n_paths == 0 {
        return Err(Error::InvalidArgument("need start points and paths".into()));
    }
    let t_max = *schedule.last().unwrap();
    let cfg = cfg.clone().with_horizon(t_max + cfg.dt);
    cfg.validate()?;
    let max_steps = cfg.n_steps();
    let mut reports = Vec::with_capacity(starts.len());
    for (si, x0) in starts.iter().enumerate() {
        if x0.len() != model.dim_state() {
            return Err(Error::DimensionMismatch {
                expected: model.dim_state(),
                found: x0.len(),
            });
        }
        let blocks = map_blocks(exec, n_paths, BLOCK_SIZE, |range| {
            let mut walk = SphereWalk::new(model, &cfg);
            range
                .map(|i| {
                    let mut s = PathStream::derived(cfg.seed, CLASSIFY_TAG + si as u64, i as u64);
                    let mut x = x0.clone();
                    if radial(&x, center) <= *radius {
                        return Some(0.0);
                    }
                    walk.run(center, *radius, Crossing::Enter, &mut x, &mut s, max_steps, |_, _| {})
                        .map(|(t, _)| t)
                })
                .collect::<Vec<Option<f64>>>()
        });
        let times: Vec<Option<f64>> = blocks.into_iter().flatten().collect();
        let mut hit_prob = Vec::with_capacity(schedule.len());
        let mut conditional_mean = Vec::with_capacity(schedule.len());
        for &t in schedule {
            let mut p = Moments::new();
            let mut cm = Moments::new();
            for tau in &times {
                let hit = tau.is_some_and(|v| v <= t);
                p.push(if hit { 1.0 } else { 0.0 });
                if hit {
                    cm.push(tau.unwrap());
                }
            }
            hit_prob.push(MCEstimate::from_moments(&p, 0.0, Bias::None));
            conditional_mean.push((cm.n > 0).then(|| MCEstimate::from_moments(&cm, 0.0, Bias::None)));
        }
        reports.push(StartHitting {
            start: x0.clone(),
            hit_prob,
            conditional_mean,
        });
    }

    let k = schedule.len();
    let final_hit = |s: &StartHitting| s.hit_prob[k - 1].mean >= 1.0 - tolerance;
    let plateau = |s: &StartHitting| {
        let (a, b) = (&s.hit_prob[k - 2], &s.hit_prob[k - 1]);
        (b.mean - a.mean).abs() <= 3.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt() + 0.01
    };
    // (ratio of the last two conditional means, growth significant at 2σ)
    let growth = |s: &StartHitting| match (&s.conditional_mean[k - 2], &s.conditional_mean[k - 1]) {
        (Some(a), Some(b)) if a.mean > 0.0 => {
            let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
            Some((b.mean / a.mean, b.mean - a.mean > 2.0 * se))
        }
        _ => None,
    };
    let stable = |s: &StartHitting| growth(s).is_some_and(|(r, _)| r <= 1.0 + MEAN_GROWTH);
    let diverging = |s: &StartHitting| growth(s).is_some_and(|(r, sig)| r > 1.0 + MEAN_GROWTH && sig);
    let verdict = if reports.iter().all(|s| final_hit(s) && stable(s)) {
        RecurrenceVerdict::PositiveRecurrentEvidence
    } else if reports.iter().any(|s| !final_hit(s) && plateau(s)) {
        RecurrenceVerdict::TransientEvidence
    } else if reports.iter().all(diverging) {
        RecurrenceVerdict::NullRecurrentEvidence
    } else {
        RecurrenceVerdict::Inconclusive
    };
    Ok(RecurrenceReport {
        horizons: schedule.to_vec(),
        starts: reports,
        tolerance,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpBoundEntry {
    pub delta: f64,
    /// Largest estimate of `E_x e^{δτ̄}` over the start grid (a lower bound
    /// of the true value when censoring occurred).
    pub sup_estimate: MCEstimate,
    /// Censored paths contribute at least half of the estimate.
    pub censor_dominated: bool,
    /// `δ` is at or above the fitted exponential tail rate.
    pub beyond_tail_rate: bool,
    pub finite: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpBoundReport {
    pub entries: Vec<ExpBoundEntry>,
    /// Smallest fitted tail rate `λ̂` over the starts (`None` if no start
    /// had enough exits to fit).
    pub tail_rate: Option<f64>,
    pub largest_finite_delta: Option<f64>,
}

/// Survival fraction levels used for the tail-rate fit.
const TAIL_FIT_LEVELS: (f64, f64) = (0.5, 0.01);

/// `sup_x Ê_x e^{δτ̄}` over `starts` for each `δ`, with a finiteness call
/// per `δ`: finite unless censored paths dominate the estimate or `δ`
/// reaches the tail rate `λ̂ = ln(S(t₁)/S(t₂))/(t₂ − t₁)` fitted between
/// the survival levels 0.5 and 0.01.
pub fn estimate_exp_exit_bound<E: Executor + ?Sized>(
    exec: &E,
    model: &DiffusionModel,
    ubar: &Domain,
    deltas: &[f64],
    starts: &[Vec<f64>],
    n_paths: usize,
    cfg: &SimConfig,
) -> Result<ExpBoundReport> {
    if !ubar.is_bounded() {
        return Err(Error::UnboundedDomain);
    }
    if deltas.is_empty() || starts.is_empty() {
        return Err(Error::InvalidArgument("need deltas and start points".into()));
    }
    let p = McProblem::new(exec, model, ubar, cfg);
    let tc = cfg.censor_time();
    let mut per_start = Vec::with_capacity(starts.len());
    let mut tail_rate: Option<f64> = None;
    for x in starts {
        let samples = sample_paths(&p, x, n_paths, StopAt::TauBar, None)?;
        let times: Vec<Option<f64>> = samples.iter().map(|s| s.record.tau_bar).collect();
        let exited = sorted(times.iter().flatten().cloned().collect());
        let n = times.len() as f64;
        // S(t) = 1 − F(t); the (1 − s) quantile of all paths sits at S = s
        let q = |s: f64| {
            let need = ((1.0 - s) * n).ceil() as usize;
            (need >= 1 && need <= exited.len())
                .then(|| quantile(&exited, (need as f64 - 1.0) / (exited.len() as f64 - 1.0).max(1.0)))
        };
        let rate = match (q(TAIL_FIT_LEVELS.0).flatten(), q(TAIL_FIT_LEVELS.1).flatten()) {
            (Some(t1), Some(t2)) if t2 > t1 => Some((TAIL_FIT_LEVELS.0 / TAIL_FIT_LEVELS.1).ln() / (t2 - t1)),
            _ => None,
        };
        if let Some(r) = rate {
            tail_rate = Some(tail_rate.map_or(r, |t: f64| t.min(r)));
        } else {
            tail_rate = Some(0.0);
        }
        per_start.push(times);
    }
    let mut entries = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut best: Option<(MCEstimate, bool)> = None;
        for times in &per_start {
            let mut m = Moments::new();
            let mut censored_sum = 0.0;
            let mut censored = 0usize;
            for t in times {
                let v = (delta * t.unwrap_or(tc)).exp();
                if t.is_none() {
                    censored += 1;
                    censored_sum += v;
                }
                m.push(v);
            }
            let cf = censored as f64 / times.len() as f64;
            let bias = if delta > 0.0 && censored > 0 {
                Bias::LowerBound
            } else {
                Bias::None
            };
            let est = MCEstimate::from_moments(&m, cf, bias);
            let dominated = delta > 0.0 && censored > 0 && censored_sum >= 0.5 * m.mean * times.len() as f64;
            if best.as_ref().is_none_or(|(b, _)| est.mean > b.mean) {
                best = Some((est, dominated));
            }
        }
        let (sup_estimate, censor_dominated) = best.expect("nonempty starts");
        let beyond_tail_rate = delta > 0.0 && tail_rate.is_none_or(|r| delta >= r);
        entries.push(ExpBoundEntry {
            delta,
            sup_estimate,
            censor_dominated,
            beyond_tail_rate,
            finite: !censor_dominated && !beyond_tail_rate,
        });
    }
    let largest_finite_delta = entries
        .iter()
        .filter(|e| e.finite)
        .map(|e| e.delta)
        .fold(None, |a: Option<f64>, d| Some(a.map_or(d, |v| v.max(d))));
    Ok(ExpBoundReport {
        entries,
        tail_rate,
        largest_finite_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::field::{PolyMatrix, PolyVectorField};

    fn model(b: PolyVectorField, s: f64) -> DiffusionModel {
        DiffusionModel::polynomial(b, PolyMatrix::constant(1, 1, &[s]).unwrap(), Domain::full(1)).unwrap()
    }

    #[test]
    fn lyapunov_for_brownian_motion() {
        let bm = model(PolyVectorField::zero(1), 1.0);
        let w = MultiPoly::from_terms(1, [(vec![0], 1.0), (vec![2], 1.0)]).unwrap();
        let cert = certify_nonexplosive(
            &bm,
            &w,
            &Exhaustion::default_for(1),
            1.0,
            1.0,
            5,
            21,
            DEFAULT_GROWTH_FLOOR,
        )
        .unwrap();
        assert!(cert.valid);
        let expected = MultiPoly::from_terms(1, [(vec![0], -1.0), (vec![2], -1.0)]).unwrap();
        assert_eq!(cert.residual, expected);
        let wk: Vec<f64> = cert.levels.iter().map(|l| l.w_k).collect();
        assert_eq!(wk, [2.0, 5.0, 10.0, 17.0, 26.0]);
    }

    #[test]
    fn constant_witness_fails_growth() {
        let bm = model(PolyVectorField::zero(1), 1.0);
        let w = MultiPoly::constant(1, 3.0);
        let cert = certify_nonexplosive(
            &bm,
            &w,
            &Exhaustion::default_for(1),
            1.0,
            1.0,
            4,
            11,
            DEFAULT_GROWTH_FLOOR,
        )
        .unwrap();
        assert!(cert.residual_ok);
        assert!(!cert.growth_ok);
        assert!(!cert.valid);
    }

    #[test]
    fn frozen_cycles_fail() {
        let frozen = model(PolyVectorField::zero(1), 0.0);
        let cyc = CycleConfig::concentric(vec![0.0], 0.5, 1.0).unwrap();
        let grid = Grid::uniform(vec![-3.0], vec![3.0], 10).unwrap();
        let cfg = SimConfig::new(0.01, 1.0, 0).unwrap();
        let r = run_cycles(&Sequential, &frozen, &cyc, &grid, 5, 1, None, &cfg);
        assert_eq!(r, Err(Error::NoCompletedCycles { censored: 5 }));
    }

    #[test]
    fn cycle_occupation_conserves_duration() {
        let ou = model(
            PolyVectorField::new(vec![MultiPoly::from_terms(1, [(vec![1], -1.0)]).unwrap()]).unwrap(),
            1.0,
        );
        let cyc = CycleConfig::concentric(vec![0.0], 0.5, 1.0).unwrap();
        let grid = Grid::uniform(vec![-10.0], vec![10.0], 40).unwrap();
        let cfg = SimConfig::new(0.01, 100.0, 4).unwrap();
        let s = run_cycles(&Sequential, &ou, &cyc, &grid, 50, 2, None, &cfg).unwrap();
        assert_eq!(s.cycles.len() + s.censored, 50);
        for c in &s.cycles {
            let total: f64 = c.occupation.iter().map(|(_, t)| t).sum();
            assert!((total - c.duration).abs() <= 1e-9 * c.duration);
            assert!((c.end[0].abs() - 0.5).abs() < 1e-12);
        }
        let nu = embedded_chain_stationary(&s, 0, 8).unwrap();
        assert!((nu.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nested_balls_required() {
        assert!(CycleConfig::concentric(vec![0.0], 1.0, 0.5).is_err());
    }
}
