//! Command-line interface.
//!
//! Every subcommand writes a JSON report, any CSV sequences and a
//! `manifest.json` into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shiftwalk_core::limits::CtrwInit;
use shiftwalk_core::rng::path_rng;

use crate::config::{args_from_toml, MapSpec};
use crate::error::{RunError, RunResult};
use crate::experiments::{self as ex, DensityMethod, FcltMode};
use crate::io;
use crate::manifest::{Manifest, Timings};
use crate::parallel::{with_threads, THREADS_ENV};

/// Top-level arguments.
#[derive(Debug, Parser, Serialize)]
#[command(name = "shiftwalk", version, about = "Random walks, transfer operators and stochastic limits of shift-periodic maps")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// TOML file holding `command` and the flags; flags on the command line follow it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Experiment.
    #[command(subcommand)]
    pub command: Command,
}

/// Map family and parameters.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArgs {
    /// Family: example1, example2, climbing_sine, climbing_tangent, pomeau_manneville, nonint_example or conjugated_example1.
    #[arg(long, default_value = "example1")]
    pub map: String,
    /// Left spike parameter of example1, or the perturbation of pomeau_manneville.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Right spike parameter of example1.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Tail exponent of example2 and nonint_example.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Amplitude of climbing_sine and climbing_tangent, coefficient of pomeau_manneville.
    #[arg(long)]
    pub a: Option<f64>,
    /// Exponent of pomeau_manneville.
    #[arg(long)]
    pub b: Option<f64>,
    /// Further parameters as name=value.
    #[arg(long = "param")]
    pub params: Vec<String>,
}

impl MapArgs {
    /// The selected map.
    pub fn spec(&self) -> RunResult<MapSpec> {
        let named = [("eps", self.eps), ("delta", self.delta), ("kappa", self.kappa), ("a", self.a), ("b", self.b)];
        let given: Vec<(&str, f64)> = named.iter().filter_map(|(k, v)| v.map(|v| (*k, v))).collect();
        MapSpec::new(&self.map, &given).with_assignments(&self.params)
    }
}

/// Subcommands.
#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Checks the shift-periodic conditions; exits with status 3 if they fail.
    Validate {
        #[command(flatten)]
        map: MapArgs,
        /// Sample points per branch.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Distance to an integer accepted for a finite limit.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also require expansion and integer spikes.
        #[arg(long)]
        strict: bool,
    },
    /// Orbit with positions, fractional parts and cocycle.
    Trajectory {
        #[command(flatten)]
        map: MapArgs,
        /// Starting point; drawn uniformly from the seed when absent.
        #[arg(long)]
        x0: Option<f64>,
        /// Iterations.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Seed for a random start.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact transition probabilities against uniform sampling.
    Transitions {
        #[command(flatten)]
        map: MapArgs,
        /// Largest jump tabulated exactly.
        #[arg(long, default_value_t = 1000)]
        bound: u64,
        /// Uniform samples.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Random seed.
        #[arg(long)]
        seed: u64,
    },
    /// Chi-square test of independence of consecutive increments.
    Independence {
        #[command(flatten)]
        map: MapArgs,
        /// Steps per path.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Paths.
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        /// Random seed.
        #[arg(long)]
        seed: u64,
    },
    /// Conjugating homeomorphism, its residual and the invariance of `h(U)`.
    Conjugacy {
        #[command(flatten)]
        map: MapArgs,
        /// Refinement depth.
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Probe points for the residual.
        #[arg(long, default_value_t = 2000)]
        probes: usize,
        /// Draws per side of the invariance test.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Largest knot table written.
        #[arg(long, default_value_t = 1_000_000)]
        knot_budget: usize,
        /// Random seed.
        #[arg(long)]
        seed: u64,
    },
    /// Invariant density of the fractional-part map.
    Density {
        #[command(flatten)]
        map: MapArgs,
        /// Ulam approximation or closed form.
        #[arg(long, value_enum, default_value_t = DensityMethod::Ulam)]
        method: DensityMethod,
        /// Cells of the uniform grid.
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        /// Orbit points of each branch end added to the grid; 0 keeps it uniform.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// Iterates kept in the closed form.
        #[arg(long, default_value_t = 40)]
        terms: usize,
    },
    /// Convergence of the transfer operator with holes to its fixed point.
    FpConvergence {
        /// Left spike parameter.
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Right spike parameter.
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        /// Starting density value on (0, 1/2), in [0, 2].
        #[arg(long, default_value_t = 2.0)]
        x: f64,
        /// Steps.
        #[arg(long, default_value_t = 30)]
        n_max: usize,
    },
    /// Ulam density of example1(0.01, 0.01) against the published table.
    Table1 {
        /// Cells of the uniform grid.
        #[arg(long, default_value_t = 4000)]
        grid: usize,
    },
    /// Marginals of the rescaled walk against its stable limit.
    Fclt {
        #[command(flatten)]
        map: MapArgs,
        /// Path generation.
        #[arg(long, value_enum, default_value_t = FcltMode::Increments)]
        mode: FcltMode,
        /// Steps per unit time.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Paths.
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        /// Increasing times in [0, 1], comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
        t_grid: Vec<f64>,
        /// Largest jump tabulated for the mean and variance.
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
        /// Random seed.
        #[arg(long)]
        seed: u64,
    },
    /// Waiting times of the small-hole walk against the exponential law.
    Ctrw {
        /// Left spike parameter before scaling.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Right spike parameter before scaling.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Time scaling.
        #[arg(long, default_value_t = 200)]
        m: usize,
        /// Time horizon.
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        /// Paths.
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        /// Starting law.
        #[arg(long, value_enum, default_value_t = InitArg::Invariant)]
        init: InitArg,
        /// Random seed.
        #[arg(long)]
        seed: u64,
    },
}

/// Starting law of the continuous-time walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    /// Invariant density of the scaled map.
    Invariant,
    /// Conditionally invariant density.
    Conditional,
    /// Lebesgue measure.
    Uniform,
}

impl From<InitArg> for CtrwInit {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Invariant => CtrwInit::Invariant,
            InitArg::Conditional => CtrwInit::ConditionallyInvariant,
            InitArg::Uniform => CtrwInit::Uniform,
        }
    }
}

impl Command {
    /// Subcommand name.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Trajectory { .. } => "trajectory",
            Command::Transitions { .. } => "transitions",
            Command::Independence { .. } => "independence",
            Command::Conjugacy { .. } => "conjugacy",
            Command::Density { .. } => "density",
            Command::FpConvergence { .. } => "fp-convergence",
            Command::Table1 { .. } => "table1",
            Command::Fclt { .. } => "fclt",
            Command::Ctrw { .. } => "ctrw",
        }
    }

    /// Seed of a randomized run.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Trajectory { seed, .. } => *seed,
            Command::Transitions { seed, .. }
            | Command::Independence { seed, .. }
            | Command::Conjugacy { seed, .. }
            | Command::Fclt { seed, .. }
            | Command::Ctrw { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Output directory.
    pub out: PathBuf,
    /// Files written, relative to `out`; empty after `--help` or `--version`.
    pub artifacts: Vec<String>,
}

/// Expands `--config FILE` into the flags it holds.
pub fn expand_config(argv: &[String]) -> RunResult<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv.to_vec());
    };
    let (path, used) = match argv[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (argv.get(pos + 1).cloned().ok_or_else(|| RunError::Config("--config needs a file".into()))?, 2),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| RunError::Config(format!("cannot read {path}: {e}")))?;
    let mut out = vec![argv.first().cloned().unwrap_or_else(|| "shiftwalk".into())];
    out.extend(args_from_toml(&text)?);
    out.extend(argv.iter().skip(1).enumerate().filter(|(i, _)| !(pos - 1..pos - 1 + used).contains(i)).map(|(_, a)| a.clone()));
    Ok(out)
}

/// Parses `argv`, including the program name, runs the experiment and writes its artifacts.
pub fn run(argv: Vec<String>) -> RunResult<RunOutcome> {
    let argv = expand_config(&argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(RunOutcome { out: PathBuf::new(), artifacts: Vec::new() });
        }
        Err(e) => return Err(RunError::Config(e.to_string())),
    };
    std::fs::create_dir_all(&cli.out)?;
    let mut w = Writer { dir: cli.out.clone(), artifacts: Vec::new(), seconds: 0.0 };
    let start = Instant::now();
    let result = with_threads(cli.threads, || dispatch(&cli.command, &mut w));
    let compute_seconds = start.elapsed().as_secs_f64() - w.seconds;
    let manifest = Manifest {
        tool: "shiftwalk",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        argv: argv.iter().skip(1).cloned().collect(),
        config: serde_json::to_value(&cli)?,
        seed: cli.command.seed(),
        threads: cli.threads,
        artifacts: w.artifacts.clone(),
        timings: Timings { compute_seconds, write_seconds: w.seconds },
    };
    io::write_json(&cli.out.join("manifest.json"), &manifest)?;
    result?;
    w.artifacts.push("manifest.json".into());
    Ok(RunOutcome { out: cli.out, artifacts: w.artifacts })
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<String>,
    seconds: f64,
}

impl Writer {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> RunResult<()> {
        let t = Instant::now();
        io::write_json(&self.dir.join(name), value)?;
        self.done(name, t);
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut dyn std::io::Write) -> RunResult<()>) -> RunResult<()> {
        let t = Instant::now();
        let mut file = io::create(&self.dir.join(name))?;
        f(&mut file)?;
        std::io::Write::flush(&mut file)?;
        self.done(name, t);
        Ok(())
    }

    fn done(&mut self, name: &str, t: Instant) {
        self.artifacts.push(name.to_string());
        self.seconds += t.elapsed().as_secs_f64();
    }
}

fn dispatch(cmd: &Command, w: &mut Writer) -> RunResult<()> {
    match cmd {
        Command::Validate { map, grid, tol, strict } => {
            let spec = map.spec()?;
            let report = ex::validate_map(&spec.build()?, *grid, *tol)?;
            w.json("validate.json", &report)?;
            let r = &report.report;
            if !r.is_shift_periodic || (*strict && !r.has_integer_spikes) {
                let list: Vec<String> = r.violations.iter().map(|v| format!("{:?} on branch {}: {}", v.condition, v.branch, v.detail)).collect();
                return Err(RunError::Validation(list.join("; ")));
            }
        }
        Command::Trajectory { map, x0, steps, seed } => {
            let x0 = match (x0, seed) {
                (Some(x), _) => *x,
                (None, Some(s)) => rand::Rng::random::<f64>(&mut path_rng(*s, 0)),
                (None, None) => return Err(RunError::Config("trajectory needs --x0 or --seed".into())),
            };
            let rec = ex::trajectory(&map.spec()?.build()?, x0, *steps)?;
            w.csv("trajectory.csv", |f| io::write_walk_csv(f, &rec))?;
            #[derive(Serialize)]
            struct Summary {
                x0: f64,
                steps: usize,
                final_position: f64,
                singular_hit: Option<usize>,
            }
            w.json("trajectory.json", &Summary { x0, steps: *steps, final_position: *rec.positions.last().unwrap(), singular_hit: rec.singular_hit })?;
        }
        Command::Transitions { map, bound, samples, seed } => {
            let r = ex::transitions(&map.spec()?.build()?, *bound, *samples, *seed)?;
            w.json("transitions.json", &r)?;
        }
        Command::Independence { map, steps, paths, seed } => {
            let spec = map.spec()?;
            let r = ex::independence(&spec.build()?, *steps, *paths, *seed)?;
            w.json("independence.json", &r)?;
        }
        Command::Conjugacy { map, depth, probes, samples, knot_budget, seed } => {
            let (r, knots) = ex::conjugacy(&map.spec()?.build()?, *depth, *probes, *samples, *seed, *knot_budget)?;
            w.json("conjugacy.json", &r)?;
            if let Some(k) = knots {
                w.csv("knots.csv", |f| io::write_knots_csv(f, &k))?;
            }
        }
        Command::Density { map, method, grid, refine, terms } => {
            let (d, s) = ex::density(&map.spec()?.build()?, *method, *grid, *refine, *terms)?;
            w.csv("density.csv", |f| io::write_density_csv(f, &d))?;
            w.json("density.json", &s)?;
        }
        Command::FpConvergence { eps, delta, x, n_max } => {
            w.json("fp_convergence.json", &ex::fp_convergence(*eps, *delta, *x, *n_max)?)?;
        }
        Command::Table1 { grid } => {
            w.json("table1.json", &ex::table1(*grid)?)?;
        }
        Command::Fclt { map, mode, n, paths, t_grid, bound, seed } => {
            let m = map.spec()?.build()?;
            let plan = ex::fclt_plan(&m, *bound)?;
            let (r, values) = ex::fclt(&m, &plan, *mode, *n, *paths, t_grid, *seed)?;
            w.json("fclt.json", &r)?;
            w.csv("paths.csv", |f| io::write_paths_csv(f, t_grid, &values))?;
        }
        Command::Ctrw { eps, delta, m, horizon, paths, init, seed } => {
            let (r, records) = ex::ctrw(*eps, *delta, *m, *horizon, *paths, (*init).into(), *seed)?;
            w.json("ctrw.json", &r)?;
            w.csv("jumps.csv", |f| {
                let mut out = csv::Writer::from_writer(f);
                out.write_record(["path", "step", "time", "jump"])?;
                for (i, rec) in records.iter().enumerate() {
                    for (k, j) in rec.jump_steps.iter().zip(&rec.jumps) {
                        out.write_record([i.to_string(), k.to_string(), (*k as f64 / rec.m as f64).to_string(), j.to_string()])?;
                    }
                }
                out.flush()?;
                Ok(())
            })?;
        }
    }
    Ok(())
}

/// Reads a JSON artifact back.
pub fn read_json(path: &Path) -> RunResult<serde_json::Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
