//! The `stochar` command line.
//!
//! Every subcommand writes its CSV files and a `manifest.json` into
//! `--out-dir` and prints a short report. Exit codes: 0 success or
//! affirmative verdict, 1 negative verdict, 2 usage or model-file error,
//! 3 estimation failure at run time.
//!
//! Environment: `STOCHAR_OUT_DIR` and `STOCHAR_THREADS` supply defaults for
//! `--out-dir` and `--threads`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stochar_core::boundary::{
    certify_nice_point, construct_sphere_witness, probe_regularity, RegularityVerdict, Thresholds,
};
use stochar_core::ergodic::{
    certify_nonexplosive, classify_recurrence, embedded_chain_stationary, estimate_exp_exit_bound,
    estimate_invariant_measure, run_cycles, CycleConfig, CycleSample, RecurrenceVerdict, DEFAULT_GROWTH_FLOOR,
    DEFAULT_MIN_CYCLES,
};
use stochar_core::estimate::{
    estimate_exit_moment, estimate_exp_moment, estimate_green, estimate_survival_curve, estimate_u_stoc, Clock,
    McProblem,
};
use stochar_core::hormander::{check_hormander, HormanderMode, DEFAULT_RANK_TOL};
use stochar_core::rng::derive_seed;
use stochar_core::sim::simulate_batch;
use stochar_core::{Domain, Error, Grid, MCEstimate, SimConfig};

use crate::exec::RayonExecutor;
use crate::func::Func;
use crate::output::{
    coord_header, coords, read_points, write_file, Cell, PointsError, RunManifest, Table, Timings, MANIFEST_SCHEMA,
};
use crate::spec::{load_model, LoadedModel, NoiseRule, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Points(#[from] PointsError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                Error::AllCensored { .. }
                | Error::NoCompletedCycles { .. }
                | Error::InsufficientCycles { .. }
                | Error::Exploded
                | Error::NoUncensoredStarts,
            )
            | CliError::Io(_)
            | CliError::Pool(_) => EXIT_RUNTIME,
            _ => EXIT_USAGE,
        }
    }
}

/// A comma-separated coordinate list such as `0.5,-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn parse_coords(s: &str) -> Result<Coords, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("{c:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Coords)
}

#[derive(Parser, Debug)]
#[command(
    name = "stochar",
    version,
    about = "Monte Carlo stochastic characteristics for degenerate diffusions"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; generated and recorded in the manifest when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "STOCHAR_THREADS")]
    pub threads: Option<usize>,
    /// Directory for CSV files and the manifest.
    #[arg(long, global = true, env = "STOCHAR_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Do not print the report.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    /// Time step (default: model file, else 1e-3).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Censoring horizon (default: model file, else 100).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Disable the Brownian-bridge crossing correction.
    #[arg(long)]
    pub no_bridge: bool,
    /// Paths per start point.
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// CSV file of points, one per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// A point as comma-separated coordinates; repeatable.
    #[arg(long = "at", value_parser = parse_coords, allow_hyphen_values = true)]
    pub at: Vec<Coords>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Parabolic,
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// `E ∫₀^τ f + E g(x_τ)`.
    U,
    /// `E τᵏ`.
    ExitMoment,
    /// `E e^{δτ}`.
    ExpMoment,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bracket-spanning check at the given points.
    CheckHormander {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Parabolic)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Simulate stopped paths from one start and record exit data.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "at", value_parser = parse_coords, allow_hyphen_values = true)]
        at: Coords,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write sampled trajectories, every `stride` steps.
        #[arg(long)]
        store_path: Option<usize>,
    },
    /// Estimate the stochastic solution at points.
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Source term `f`.
        #[arg(long, default_value = "0")]
        f: String,
        /// Boundary data `g`.
        #[arg(long, default_value = "0")]
        g: String,
        #[arg(long, value_enum, default_value_t = Quantity::U)]
        quantity: Quantity,
        /// Moment order for `exit-moment`.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Rate for `exp-moment`.
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        delta: f64,
    },
    /// Survival probabilities `P{τ > t}`.
    Survival {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_parser = parse_coords)]
        times: Coords,
    },
    /// Green's operator `G_β f`.
    Green {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value = "1")]
        f: String,
        /// `sup |f|` for the censoring bound (default: known for constants
        /// and indicators).
        #[arg(long)]
        f_sup: Option<f64>,
        /// Cells per axis of an occupation histogram over the domain's
        /// bounding box.
        #[arg(long)]
        hist_cells: Option<usize>,
    },
    /// Regularity probe `P{τ̄ ≤ h}` at a boundary point.
    ProbeBoundary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "at", value_parser = parse_coords, allow_hyphen_values = true)]
        at: Coords,
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated h schedule.
        #[arg(long, value_parser = parse_coords)]
        h: Coords,
        #[arg(long, default_value_t = 0.99)]
        regular: f64,
        #[arg(long, default_value_t = 0.01)]
        irregular: f64,
    },
    /// Niceness certificate from the exterior-sphere witness.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "at", value_parser = parse_coords, allow_hyphen_values = true)]
        at: Coords,
        /// Exterior normal (default: the domain's outward normal).
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        normal: Option<Coords>,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 200.0)]
        beta: f64,
        /// Neighbourhood radius (default: half the distance to the sphere centre).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 41)]
        grid_n: usize,
    },
    /// Long-time behaviour: Lyapunov certificates, cycles, invariant measures.
    #[command(subcommand)]
    Ergodic(ErgodicCommand),
}

#[derive(Args, Debug, Clone)]
pub struct CycleArgs {
    /// Centre of the inner ball U (default: origin).
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub u_center: Option<Coords>,
    #[arg(long, default_value_t = 0.5)]
    pub u_radius: f64,
    /// Centre of the outer ball V (default: the centre of U).
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub v_center: Option<Coords>,
    #[arg(long, default_value_t = 1.0)]
    pub v_radius: f64,
    #[arg(long, default_value_t = 1000)]
    pub cycles: usize,
    #[arg(long, default_value_t = 8)]
    pub chains: usize,
    /// Occupation grid lower corner.
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub grid_lo: Coords,
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub grid_hi: Coords,
    #[arg(long, default_value_t = 50)]
    pub cells: usize,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Per-cycle censoring horizon.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub no_bridge: bool,
}

#[derive(Subcommand, Debug)]
pub enum ErgodicCommand {
    /// Lyapunov certificate `Lw ≤ Cw + D` with growth of `w`.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
        #[arg(long, default_value_t = 21)]
        grid_n: usize,
        #[arg(long, default_value_t = DEFAULT_GROWTH_FLOOR)]
        growth_floor: f64,
    },
    /// Run the two-ball cycle construction.
    Cycles {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        cycle: CycleArgs,
    },
    /// Normalized occupation measure from cycles.
    InvariantMeasure {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        cycle: CycleArgs,
        #[arg(long, default_value_t = 10)]
        burn_in: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_CYCLES)]
        min_cycles: usize,
        /// Angular bins for the embedded chain (dimension ≥ 2).
        #[arg(long, default_value_t = 16)]
        bins: usize,
    },
    /// Recurrence evidence from hitting a ball.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        ball_center: Option<Coords>,
        #[arg(long, default_value_t = 0.5)]
        ball_radius: f64,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, value_parser = parse_coords)]
        horizons: Coords,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long)]
        no_bridge: bool,
    },
    /// `sup_x E_x e^{δτ̄}` over start points, per δ.
    ExpBound {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        deltas: Coords,
    },
}

/// Result of a successful run.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub outputs: Vec<PathBuf>,
}

struct Ctx<'a> {
    exec: &'a RayonExecutor,
    seed: u64,
    seed_generated: bool,
    out_dir: PathBuf,
    outputs: Vec<PathBuf>,
    report: String,
}

impl Ctx<'_> {
    fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let p = write_file(&self.out_dir, name, &table.to_csv())?;
        self.outputs.push(p);
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        let p = write_file(
            &self.out_dir,
            name,
            &(serde_json::to_string_pretty(v).expect("json") + "\n"),
        )?;
        self.outputs.push(p);
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.report.push_str(line.as_ref());
        self.report.push('\n');
    }
}

fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    derive_seed(nanos, std::process::id() as u64)
}

fn points(p: &PointArgs, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = match &p.points {
        Some(path) => read_points(path, dim)?,
        None => Vec::new(),
    };
    for c in &p.at {
        if c.0.len() != dim {
            return Err(CliError::Usage(format!(
                "--at {:?} has {} coordinates, expected {dim}",
                c.0,
                c.0.len()
            )));
        }
        out.push(c.0.clone());
    }
    if out.is_empty() {
        return Err(CliError::Usage("no points given (use --at or --points)".into()));
    }
    Ok(out)
}

fn point(c: &Coords, dim: usize) -> Result<Vec<f64>, CliError> {
    if c.0.len() != dim {
        return Err(CliError::Usage(format!(
            "point {:?} has {} coordinates, expected {dim}",
            c.0,
            c.0.len()
        )));
    }
    Ok(c.0.clone())
}

fn sim_cfg(m: &LoadedModel, s: &SimArgs, seed: u64) -> Result<SimConfig, CliError> {
    let cfg = m.sim_config(s.dt, s.horizon, s.no_bridge.then_some(false), seed)?;
    cfg.validate()?;
    Ok(cfg)
}

fn sim_json(cfg: &SimConfig, paths: usize) -> Value {
    json!({"dt": cfg.dt, "horizon": cfg.horizon, "bridge": cfg.bridge_correction, "paths": paths})
}

fn estimate_row(x: &[f64], e: &MCEstimate) -> Vec<Cell> {
    let mut row = coords(x);
    row.extend([e.mean.into(), e.stderr.into(), e.n.into(), e.censored_fraction.into()]);
    row
}

fn estimate_header(dim: usize) -> Vec<String> {
    let mut h = coord_header("x", dim);
    h.extend(["mean", "stderr", "n", "censored_fraction"].map(String::from));
    h
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let threads = cli
        .common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let (seed, seed_generated) = match cli.common.seed {
        Some(s) => (s, false),
        None => (fresh_seed(), true),
    };
    let exec = RayonExecutor::new(threads)?;
    let mut ctx = Ctx {
        exec: &exec,
        seed,
        seed_generated,
        out_dir: cli.common.out_dir.clone(),
        outputs: Vec::new(),
        report: String::new(),
    };
    let (name, model_hash, config, code) = dispatch(&cli.command, &mut ctx)?;
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        model_sha256: model_hash,
        seed: ctx.seed,
        seed_generated: ctx.seed_generated,
        threads,
        config,
        outputs: ctx
            .outputs
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        timings: Timings::from(start.elapsed()),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = write_file(&ctx.out_dir, "manifest.json", &text)?;
    ctx.outputs.push(path);
    Ok(Outcome {
        code,
        report: ctx.report,
        outputs: ctx.outputs,
    })
}

type Dispatched = (&'static str, Option<String>, Value, i32);

fn dispatch(cmd: &Command, ctx: &mut Ctx<'_>) -> Result<Dispatched, CliError> {
    match cmd {
        Command::CheckHormander {
            model,
            points: pts,
            depth,
            mode,
            rank_tol,
        } => {
            let m = load_model(model, NoiseRule::Optional)?;
            let dim = m.model.dim_state();
            let pts = points(pts, dim)?;
            let system = m.model.hormander_form()?;
            let mode = match mode {
                ModeArg::Parabolic => HormanderMode::Parabolic,
                ModeArg::Full => HormanderMode::Full,
            };
            let rep = match check_hormander(&system, &pts, *depth, *rank_tol, mode) {
                Err(Error::EmptyGeneratingSet) => {
                    ctx.say("no vector fields to bracket: the condition fails");
                    return Ok((
                        "check-hormander",
                        Some(m.sha256),
                        json!({"depth": depth}),
                        EXIT_NEGATIVE,
                    ));
                }
                r => r?,
            };
            ctx.say(format!("{} field(s) up to depth {}:", rep.fields.len(), depth));
            for f in &rep.fields {
                let comps: Vec<String> = f.field.components().iter().map(|p| p.to_string()).collect();
                ctx.say(format!(
                    "  depth {}  {} = ({})",
                    f.depth,
                    f.derivation,
                    comps.join(", ")
                ));
            }
            let mut h = coord_header("x", dim);
            h.extend(["rank", "required", "depth_reached", "spans"].map(String::from));
            let mut t = Table::new(h);
            for p in &rep.points {
                let mut row = coords(&p.point);
                row.extend([
                    p.rank.into(),
                    p.required.into(),
                    p.depth_reached.map_or(Cell::Empty, Cell::from),
                    (p.rank == p.required).into(),
                ]);
                t.push(row);
                ctx.say(format!(
                    "  at {:?}: rank {}/{}{}",
                    p.point,
                    p.rank,
                    p.required,
                    p.depth_reached
                        .map(|d| format!(", spans at depth {d}"))
                        .unwrap_or_default()
                ));
            }
            ctx.csv("hormander.csv", &t)?;
            ctx.say(if rep.spans_everywhere {
                "spans at all points"
            } else {
                "does not span everywhere"
            });
            let code = if rep.spans_everywhere { EXIT_OK } else { EXIT_NEGATIVE };
            let cfg = json!({"depth": depth, "mode": format!("{mode:?}").to_lowercase(), "rank_tol": rank_tol, "points": pts});
            Ok(("check-hormander", Some(m.sha256), cfg, code))
        }

        Command::Simulate {
            model,
            at,
            sim,
            store_path,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let x0 = point(at, dim)?;
            let mut cfg = sim_cfg(&m, sim, ctx.seed)?;
            if let Some(stride) = store_path {
                if *stride == 0 {
                    return Err(CliError::Usage("--store-path stride must be positive".into()));
                }
                cfg = cfg.with_path(*stride);
            }
            let batch = simulate_batch(ctx.exec, &m.model, m.domain()?, &x0, &cfg, sim.paths)?;
            let mut h: Vec<String> = [
                "path_index",
                "exit_time",
                "exit_kind",
                "censored",
                "tau0",
                "tau_bar",
                "exploded",
                "steps",
            ]
            .map(String::from)
            .into();
            h.extend(coord_header("exit_x", dim));
            h.extend(coord_header("final_x", dim));
            let mut t = Table::new(h);
            let mut paths = Table::new(
                ["path_index".to_string(), "t".to_string()]
                    .into_iter()
                    .chain(coord_header("x", dim)),
            );
            for (i, r) in batch.records.iter().enumerate() {
                let mut row = vec![
                    i.into(),
                    r.exit_time.into(),
                    r.exit_kind.as_str().into(),
                    r.is_censored().into(),
                    r.tau0.into(),
                    r.tau_bar.into(),
                    r.exploded.into(),
                    r.steps.into(),
                ];
                match &r.exit_point {
                    Some(p) => row.extend(coords(p)),
                    None => row.extend((0..dim).map(|_| Cell::Empty)),
                }
                row.extend(coords(&r.final_state));
                t.push(row);
                if let Some(path) = &r.path {
                    for (s, x) in path {
                        let mut row = vec![i.into(), (*s).into()];
                        row.extend(coords(x));
                        paths.push(row);
                    }
                }
            }
            ctx.csv("simulate.csv", &t)?;
            if store_path.is_some() {
                ctx.csv("paths.csv", &paths)?;
            }
            ctx.say(format!(
                "{} paths, censored fraction {}, explosion fraction {}",
                batch.n_paths(),
                batch.censored_fraction(),
                batch.explosion_fraction()
            ));
            let cfgj = json!({"start": x0, "sim": sim_json(&cfg, sim.paths), "store_path": store_path});
            Ok(("simulate", Some(m.sha256), cfgj, EXIT_OK))
        }

        Command::Solve {
            model,
            points: pts,
            sim,
            f,
            g,
            quantity,
            k,
            delta,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let pts = points(pts, dim)?;
            let cfg = sim_cfg(&m, sim, ctx.seed)?;
            let fs = Func::parse(f, dim)?;
            let gs = Func::parse(g, dim)?;
            let domain = m.domain()?;
            let p = McProblem::new(ctx.exec, &m.model, domain, &cfg);
            let mut t = Table::new(estimate_header(dim));
            for x in &pts {
                let e = match quantity {
                    Quantity::U => estimate_u_stoc(&p, &fs, &gs, x, sim.paths)?,
                    Quantity::ExitMoment => estimate_exit_moment(&p, x, *k, sim.paths)?,
                    Quantity::ExpMoment => estimate_exp_moment(&p, x, *delta, Clock::Tau, sim.paths)?,
                };
                ctx.say(format!(
                    "x = {x:?}: {} ± {} (censored {})",
                    e.mean, e.stderr, e.censored_fraction
                ));
                t.push(estimate_row(x, &e));
            }
            ctx.csv("solve.csv", &t)?;
            let cfgj = json!({
                "quantity": format!("{quantity:?}"), "f": f, "g": g, "k": k, "delta": delta,
                "points": pts, "sim": sim_json(&cfg, sim.paths)
            });
            Ok(("solve", Some(m.sha256), cfgj, EXIT_OK))
        }

        Command::Survival {
            model,
            points: pts,
            sim,
            times,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let pts = points(pts, dim)?;
            let cfg = sim_cfg(&m, sim, ctx.seed)?;
            let p = McProblem::new(ctx.exec, &m.model, m.domain()?, &cfg);
            let mut h = coord_header("x", dim);
            h.extend(["t", "mean", "stderr", "n", "censored_fraction"].map(String::from));
            let mut t = Table::new(h);
            for x in &pts {
                let curve = estimate_survival_curve(&p, x, &times.0, sim.paths)?;
                for (s, e) in times.0.iter().zip(&curve) {
                    let mut row = coords(x);
                    row.extend([
                        (*s).into(),
                        e.mean.into(),
                        e.stderr.into(),
                        e.n.into(),
                        e.censored_fraction.into(),
                    ]);
                    t.push(row);
                }
                ctx.say(format!(
                    "x = {x:?}: P(tau > {}) = {}",
                    times.0.last().unwrap(),
                    curve.last().unwrap().mean
                ));
            }
            ctx.csv("survival.csv", &t)?;
            let cfgj = json!({"times": times.0, "points": pts, "sim": sim_json(&cfg, sim.paths)});
            Ok(("survival", Some(m.sha256), cfgj, EXIT_OK))
        }

        Command::Green {
            model,
            points: pts,
            sim,
            beta,
            f,
            f_sup,
            hist_cells,
        } => {
            if *beta <= 0.0 || !beta.is_finite() {
                return Err(CliError::Usage(format!("--beta must be positive, got {beta}")));
            }
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let pts = points(pts, dim)?;
            let cfg = sim_cfg(&m, sim, ctx.seed)?;
            let fs = Func::parse(f, dim)?;
            let domain = m.domain()?;
            let grid = match hist_cells {
                Some(n) => {
                    let (lo, hi) = domain.bounding_box().ok_or(Error::UnboundedDomain)?;
                    Some(Grid::uniform(lo, hi, *n)?)
                }
                None => None,
            };
            let p = McProblem::new(ctx.exec, &m.model, domain, &cfg);
            let sup = f_sup.or_else(|| fs.sup_abs());
            let mut h = estimate_header(dim);
            h.push("censoring_bias_bound".into());
            let mut t = Table::new(h);
            for (i, x) in pts.iter().enumerate() {
                let e = estimate_green(&p, *beta, &fs, x, sim.paths, sup, grid.as_ref())?;
                let mut row = estimate_row(x, &e.value);
                row.push(e.censoring_bias_bound.into());
                t.push(row);
                ctx.say(format!("x = {x:?}: G f = {} ± {}", e.value.mean, e.value.stderr));
                if let Some((g, mass)) = &e.histogram {
                    let mut hist = Table::new(coord_header("c", dim).into_iter().chain(["mass".to_string()]));
                    for (cell, v) in mass.iter().enumerate() {
                        let mut row = coords(&g.cell_center(cell));
                        row.push((*v).into());
                        hist.push(row);
                    }
                    ctx.csv(&format!("green_histogram_{i}.csv"), &hist)?;
                }
            }
            ctx.csv("green.csv", &t)?;
            let cfgj = json!({
                "beta": beta, "f": f, "f_sup": sup, "hist_cells": hist_cells,
                "points": pts, "sim": sim_json(&cfg, sim.paths)
            });
            Ok(("green", Some(m.sha256), cfgj, EXIT_OK))
        }

        Command::ProbeBoundary {
            model,
            at,
            sim,
            h,
            regular,
            irregular,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let x = point(at, m.model.dim_state())?;
            let cfg = sim_cfg(&m, sim, ctx.seed)?;
            let th = Thresholds {
                regular: *regular,
                irregular: *irregular,
            };
            let r = probe_regularity(ctx.exec, &m.model, m.domain()?, &x, &h.0, sim.paths, &cfg, th)?;
            let mut t = Table::new(["h", "estimate", "stderr"]);
            for (hv, e) in r.h_schedule.iter().zip(&r.estimates) {
                t.push(vec![(*hv).into(), e.mean.into(), e.stderr.into()]);
                ctx.say(format!("h = {hv}: P(exit closure by h) = {} ± {}", e.mean, e.stderr));
            }
            ctx.csv("probe.csv", &t)?;
            let verdict = match r.verdict {
                RegularityVerdict::RegularEvidence => "regular-evidence",
                RegularityVerdict::IrregularEvidence => "irregular-evidence",
                RegularityVerdict::Inconclusive => "inconclusive",
            };
            ctx.say(format!("verdict: {verdict}"));
            ctx.json(
                "probe_report.json",
                &json!({"point": x, "verdict": verdict, "thresholds": {"regular": regular, "irregular": irregular}}),
            )?;
            let code = if r.verdict == RegularityVerdict::RegularEvidence {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            let cfgj = json!({"point": x, "h": h.0, "regular": regular, "irregular": irregular, "sim": sim_json(&cfg, sim.paths)});
            Ok(("probe-boundary", Some(m.sha256), cfgj, code))
        }

        Command::Certify {
            model,
            at,
            normal,
            lambda,
            beta,
            radius,
            grid_n,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let x = point(at, dim)?;
            let domain = m.domain()?;
            let nu = match normal {
                Some(c) => point(c, dim)?,
                None => domain
                    .outward_normal(&x)
                    .ok_or_else(|| CliError::Usage("no outward normal at this point; pass --normal".into()))?,
            };
            let cfgj =
                json!({"point": x, "normal": nu, "lambda": lambda, "beta": beta, "radius": radius, "grid_n": grid_n});
            let w = match construct_sphere_witness(&m.model, domain, &x, &nu, *lambda, *beta) {
                Ok(w) => w,
                Err(e @ Error::NoNormalNoise { .. }) => {
                    ctx.say(format!("witness construction failed: {e}"));
                    ctx.json(
                        "certify_report.json",
                        &json!({"point": x, "valid": false, "error": e.to_string()}),
                    )?;
                    return Ok(("certify", Some(m.sha256), cfgj, EXIT_NEGATIVE));
                }
                Err(e) => return Err(e.into()),
            };
            let rad = radius.unwrap_or_else(|| w.natural_radius());
            let c = certify_nice_point(&m.model, domain, &x, &w, rad, *grid_n)?;
            let mut h: Vec<String> = ["radius", "grid_n", "n_checked", "w_at_point", "min_w", "max_lw"]
                .map(String::from)
                .into();
            h.extend(coord_header("max_lw_at_x", dim));
            h.push("valid".into());
            let mut t = Table::new(h);
            let mut row: Vec<Cell> = vec![
                c.radius.into(),
                c.grid_n.into(),
                c.n_checked.into(),
                c.w_at_point.into(),
                c.min_w.into(),
                c.max_lw.into(),
            ];
            row.extend(coords(&c.max_lw_at));
            row.push(c.valid.into());
            t.push(row);
            ctx.csv("certify.csv", &t)?;
            ctx.say(format!(
                "{} points checked, min w = {}, max Lw = {} (margin {}): {}",
                c.n_checked,
                c.min_w,
                c.max_lw,
                -c.max_lw,
                if c.valid { "valid" } else { "invalid" }
            ));
            ctx.json(
                "certify_report.json",
                &json!({"point": x, "valid": c.valid, "normal_form": w.normal_form, "min_w": c.min_w, "max_lw": c.max_lw, "lw_margin": -c.max_lw}),
            )?;
            Ok((
                "certify",
                Some(m.sha256),
                cfgj,
                if c.valid { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }

        Command::Ergodic(e) => ergodic(e, ctx),
    }
}

fn cycle_setup(m: &LoadedModel, a: &CycleArgs, seed: u64) -> Result<(CycleConfig, Grid, SimConfig), CliError> {
    let dim = m.model.dim_state();
    let uc = match &a.u_center {
        Some(c) => point(c, dim)?,
        None => vec![0.0; dim],
    };
    let vc = match &a.v_center {
        Some(c) => point(c, dim)?,
        None => uc.clone(),
    };
    let cycle = CycleConfig::new(Domain::ball(uc, a.u_radius)?, Domain::ball(vc, a.v_radius)?)?;
    let grid = Grid::uniform(point(&a.grid_lo, dim)?, point(&a.grid_hi, dim)?, a.cells)?;
    let cfg = m.sim_config(a.dt, a.horizon, a.no_bridge.then_some(false), seed)?;
    cfg.validate()?;
    Ok((cycle, grid, cfg))
}

fn cycles_json(a: &CycleArgs, cfg: &SimConfig) -> Value {
    json!({
        "u_center": a.u_center.as_ref().map(|c| c.0.clone()), "u_radius": a.u_radius,
        "v_center": a.v_center.as_ref().map(|c| c.0.clone()), "v_radius": a.v_radius,
        "cycles": a.cycles, "chains": a.chains,
        "grid_lo": a.grid_lo.0, "grid_hi": a.grid_hi.0, "cells": a.cells,
        "dt": cfg.dt, "horizon": cfg.horizon, "bridge": cfg.bridge_correction
    })
}

fn cycle_table(s: &CycleSample, dim: usize) -> Table {
    let mut h: Vec<String> = vec!["chain".into()];
    h.extend(coord_header("start_x", dim));
    h.extend(coord_header("end_x", dim));
    h.extend(["duration", "gridded_time"].map(String::from));
    let mut t = Table::new(h);
    for c in &s.cycles {
        let mut row: Vec<Cell> = vec![c.chain.into()];
        row.extend(coords(&c.start));
        row.extend(coords(&c.end));
        row.push(c.duration.into());
        row.push(c.occupation.iter().map(|(_, v)| v).sum::<f64>().into());
        t.push(row);
    }
    t
}

fn ergodic(cmd: &ErgodicCommand, ctx: &mut Ctx<'_>) -> Result<Dispatched, CliError> {
    match cmd {
        ErgodicCommand::Certify {
            model,
            w,
            c,
            d,
            k_max,
            grid_n,
            growth_floor,
        } => {
            let m = load_model(model, NoiseRule::Optional)?;
            let dim = m.model.dim_state();
            let wp = Func::parse(w, dim)?
                .as_poly(dim)
                .ok_or_else(|| CliError::Usage("--w must be a polynomial".into()))?;
            let cert = certify_nonexplosive(&m.model, &wp, &m.exhaustion, *c, *d, *k_max, *grid_n, *growth_floor)?;
            let mut h: Vec<String> = vec!["k".into(), "max_residual".into()];
            h.extend(coord_header("argmax_x", dim));
            h.push("w_k".into());
            let mut t = Table::new(h);
            for l in &cert.levels {
                let mut row: Vec<Cell> = vec![l.k.into(), l.max_residual.into()];
                row.extend(coords(&l.argmax));
                row.push(l.w_k.into());
                t.push(row);
            }
            ctx.csv("lyapunov.csv", &t)?;
            ctx.say(format!("residual Lw - Cw - D = {}", cert.residual));
            ctx.say(format!(
                "residual <= 0 on grids: {}; w_k increasing past {}: {}; min w = {}",
                cert.residual_ok, cert.growth_floor, cert.growth_ok, cert.w_min
            ));
            if let Some(p) = &cert.witness_point {
                ctx.say(format!("witness point with positive residual: {p:?}"));
            }
            ctx.say(if cert.valid {
                "certificate valid"
            } else {
                "certificate invalid"
            });
            ctx.json(
                "lyapunov_report.json",
                &json!({
                    "residual": cert.residual.to_string(), "valid": cert.valid,
                    "residual_ok": cert.residual_ok, "growth_ok": cert.growth_ok,
                    "w_min": cert.w_min, "witness_point": cert.witness_point
                }),
            )?;
            let cfgj = json!({"w": w, "c": c, "d": d, "k_max": k_max, "grid_n": grid_n, "growth_floor": growth_floor});
            Ok((
                "ergodic certify",
                Some(m.sha256),
                cfgj,
                if cert.valid { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }

        ErgodicCommand::Cycles { model, cycle } => {
            let m = load_model(model, NoiseRule::Required)?;
            let (cyc, grid, cfg) = cycle_setup(&m, cycle, ctx.seed)?;
            let s = run_cycles(ctx.exec, &m.model, &cyc, &grid, cycle.cycles, cycle.chains, None, &cfg)?;
            ctx.csv("cycles.csv", &cycle_table(&s, m.model.dim_state()))?;
            ctx.say(format!(
                "{} completed cycles, {} censored (fraction {})",
                s.cycles.len(),
                s.censored,
                s.censored_fraction()
            ));
            Ok(("ergodic cycles", Some(m.sha256), cycles_json(cycle, &cfg), EXIT_OK))
        }

        ErgodicCommand::InvariantMeasure {
            model,
            cycle,
            burn_in,
            min_cycles,
            bins,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let (cyc, grid, cfg) = cycle_setup(&m, cycle, ctx.seed)?;
            let s = run_cycles(ctx.exec, &m.model, &cyc, &grid, cycle.cycles, cycle.chains, None, &cfg)?;
            let est = estimate_invariant_measure(&s, *burn_in, *min_cycles)?;
            let mut h = coord_header("c", dim);
            h.extend(["mass", "stderr", "occupation"].map(String::from));
            let mut t = Table::new(h);
            for cell in 0..grid.n_cells() {
                let mut row = coords(&grid.cell_center(cell));
                row.extend([est.mu_tilde[cell].into(), est.stderr[cell].into(), est.mu[cell].into()]);
                t.push(row);
            }
            ctx.csv("invariant_measure.csv", &t)?;
            let nu = embedded_chain_stationary(&s, *burn_in, *bins)?;
            let mut nt = Table::new(["label", "mass", "stderr"]);
            for ((l, v), e) in nu.labels.iter().zip(&nu.mass).zip(&nu.stderr) {
                nt.push(vec![(*l).into(), (*v).into(), (*e).into()]);
            }
            ctx.csv("embedded_chain.csv", &nt)?;
            ctx.say(format!(
                "{} cycles used ({} censored), normalizer N = {}",
                est.n_cycles, s.censored, est.normalizer
            ));
            let mut cfgj = cycles_json(cycle, &cfg);
            cfgj["burn_in"] = json!(burn_in);
            cfgj["min_cycles"] = json!(min_cycles);
            cfgj["bins"] = json!(bins);
            Ok(("ergodic invariant-measure", Some(m.sha256), cfgj, EXIT_OK))
        }

        ErgodicCommand::Classify {
            model,
            ball_center,
            ball_radius,
            points: pts,
            horizons,
            paths,
            tol,
            dt,
            no_bridge,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let dim = m.model.dim_state();
            let pts = points(pts, dim)?;
            let center = match ball_center {
                Some(c) => point(c, dim)?,
                None => vec![0.0; dim],
            };
            let ball = Domain::ball(center.clone(), *ball_radius)?;
            let cfg =
                SimConfig::new(*dt, horizons.0.last().copied().unwrap_or(1.0) + dt, ctx.seed)?.with_bridge(!no_bridge);
            let r = classify_recurrence(ctx.exec, &m.model, &ball, &pts, &horizons.0, *paths, &cfg, *tol)?;
            let mut h = coord_header("x", dim);
            h.extend(["horizon", "hit_prob", "hit_stderr", "cond_mean", "cond_mean_stderr"].map(String::from));
            let mut t = Table::new(h);
            for s in &r.starts {
                for ((hz, p), cm) in r.horizons.iter().zip(&s.hit_prob).zip(&s.conditional_mean) {
                    let mut row = coords(&s.start);
                    row.extend([(*hz).into(), p.mean.into(), p.stderr.into()]);
                    row.push(cm.map(|c| c.mean).into());
                    row.push(cm.map(|c| c.stderr).into());
                    t.push(row);
                }
            }
            ctx.csv("classify.csv", &t)?;
            let verdict = match r.verdict {
                RecurrenceVerdict::PositiveRecurrentEvidence => "positive-recurrent-evidence",
                RecurrenceVerdict::NullRecurrentEvidence => "null-recurrent-evidence",
                RecurrenceVerdict::TransientEvidence => "transient-evidence",
                RecurrenceVerdict::Inconclusive => "inconclusive",
            };
            ctx.say(format!("verdict: {verdict}"));
            ctx.json("classify_report.json", &json!({"verdict": verdict, "tolerance": tol}))?;
            let code = if r.verdict == RecurrenceVerdict::PositiveRecurrentEvidence {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            let cfgj = json!({
                "ball_center": center, "ball_radius": ball_radius, "points": pts, "horizons": horizons.0,
                "paths": paths, "tol": tol, "dt": dt, "bridge": !no_bridge
            });
            Ok(("ergodic classify", Some(m.sha256), cfgj, code))
        }

        ErgodicCommand::ExpBound {
            model,
            points: pts,
            sim,
            deltas,
        } => {
            let m = load_model(model, NoiseRule::Required)?;
            let pts = points(pts, m.model.dim_state())?;
            let cfg = sim_cfg(&m, sim, ctx.seed)?;
            let r = estimate_exp_exit_bound(ctx.exec, &m.model, m.domain()?, &deltas.0, &pts, sim.paths, &cfg)?;
            let mut t = Table::new([
                "delta",
                "sup_estimate",
                "stderr",
                "censored_fraction",
                "censor_dominated",
                "beyond_tail_rate",
                "finite",
            ]);
            for e in &r.entries {
                t.push(vec![
                    e.delta.into(),
                    e.sup_estimate.mean.into(),
                    e.sup_estimate.stderr.into(),
                    e.sup_estimate.censored_fraction.into(),
                    e.censor_dominated.into(),
                    e.beyond_tail_rate.into(),
                    e.finite.into(),
                ]);
            }
            ctx.csv("exp_bound.csv", &t)?;
            ctx.say(format!(
                "fitted tail rate {:?}; largest finite delta {:?}",
                r.tail_rate, r.largest_finite_delta
            ));
            let cfgj = json!({"deltas": deltas.0, "points": pts, "sim": sim_json(&cfg, sim.paths)});
            Ok(("ergodic exp-bound", Some(m.sha256), cfgj, EXIT_OK))
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let quiet = cli.common.quiet;
    match run(cli) {
        Ok(o) => {
            if !quiet {
                let mut s = o.report;
                if !o.outputs.is_empty() {
                    let names: Vec<String> = o.outputs.iter().map(|p| display(p)).collect();
                    let _ = writeln!(s, "wrote {}", names.join(", "));
                }
                print!("{s}");
            }
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
