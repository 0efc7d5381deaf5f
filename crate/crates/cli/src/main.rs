//! `spinbattery`: parameter sweeps and figure recipes for the spin-chain
//! quantum battery.

mod commands;
mod config;
mod error;
mod output;
mod recipes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinbattery_core::{DisorderTarget, StatePrep};

use commands::Kind;
use config::{BiasChoice, DisorderSection, EvalPoint, Format, RunConfig, SweepParameter};
use error::CliError;
use output::{emit, encode, Header};
use recipes::{Recipe, RecipeOptions};

#[derive(Parser, Debug)]
#[command(name = "spinbattery", version, about = "Spin-chain quantum battery: charging power sweeps and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximal charging power along one swept parameter.
    PowerSweep(RunArgs),
    /// Disorder-averaged maximal power along one swept parameter.
    DisorderSweep(RunArgs),
    /// Thermal minus ground-state maximal power on a (β, J) grid.
    ThermalMap(RunArgs),
    /// Middle-pair negativity and log-negativity.
    Entanglement(RunArgs),
    /// x-magnetization order parameters under a symmetry-breaking bias.
    OrderParams(RunArgs),
    /// Ground-state fidelity between neighbouring couplings.
    FidelityScan(RunArgs),
    /// First-jump critical couplings and their finite-size power law.
    ScalingFit(RunArgs),
    /// Run a stored configuration that regenerates one figure's data.
    Recipe(RecipeArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for independent sweep points.
    #[arg(long, env = "SPINBATTERY_WORKERS")]
    workers: Option<usize>,

    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    field_h: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Uniform xy coupling J.
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    /// Uniform zz coupling Δ.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Charging field strength ω.
    #[arg(long)]
    omega: Option<f64>,

    #[arg(long, value_enum)]
    sweep: Option<SweepParameter>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    step: Option<f64>,

    /// Start from the thermal state at this inverse temperature.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    beta_start: Option<f64>,
    #[arg(long)]
    beta_stop: Option<f64>,
    #[arg(long)]
    beta_step: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, value_enum)]
    disorder_target: Option<TargetArg>,
    #[arg(long, allow_hyphen_values = true)]
    disorder_mean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    disorder_sigma: Option<f64>,

    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    refine_tolerance: Option<f64>,

    /// Symmetry-breaking field for order parameters and fidelity scans.
    #[arg(long, value_enum)]
    bias: Option<BiasChoice>,
    #[arg(long)]
    bias_eps: Option<f64>,
    /// Coupling increment for fidelity scans.
    #[arg(long)]
    delta_j: Option<f64>,
    /// Evaluate entanglement on the initial state or at the optimal time.
    #[arg(long, value_enum)]
    at: Option<EvalPoint>,

    /// System sizes for scaling fits.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    j_c_infinity: Option<f64>,
    #[arg(long)]
    jump_factor: Option<f64>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum TargetArg {
    Xy,
    Zz,
}

impl From<TargetArg> for DisorderTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Xy => DisorderTarget::Xy,
            TargetArg::Zz => DisorderTarget::Zz,
        }
    }
}

#[derive(Args, Debug)]
struct RecipeArgs {
    #[arg(value_enum)]
    name: Recipe,
    /// Directory for the recipe's files (default `recipe-<name>`).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, env = "SPINBATTERY_WORKERS")]
    workers: Option<usize>,
    /// Coupling grid spacing for J sweeps.
    #[arg(long, default_value_t = 0.01)]
    j_step: f64,
    #[arg(long, default_value_t = 5000)]
    realizations: usize,
    /// Disorder strengths for the disorder recipes.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid_points: Option<usize>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn workers_or_default(w: Option<usize>) -> Result<usize, CliError> {
    match w {
        Some(0) => Err(config::field_error("workers", "must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.model;
        set(&mut m.n_sites, self.n_sites);
        set(&mut m.field_h, self.field_h);
        set(&mut m.gamma, self.gamma);
        set(&mut m.j, self.j);
        set(&mut m.delta, self.delta);
        set(&mut m.omega, self.omega);

        if self.sweep.is_some() || self.start.is_some() || self.stop.is_some() || self.step.is_some() {
            let mut s = cfg.sweep();
            set(&mut s.parameter, self.sweep);
            set(&mut s.start, self.start);
            set(&mut s.stop, self.stop);
            set(&mut s.step, self.step);
            cfg.sweep = Some(s);
        }
        if let Some(beta) = self.beta {
            cfg.state = StatePrep::Thermal { beta };
        }
        if self.beta_start.is_some() || self.beta_stop.is_some() || self.beta_step.is_some() {
            let mut g = cfg.thermal_map.unwrap_or(commands::DEFAULT_BETA_GRID);
            set(&mut g.start, self.beta_start);
            set(&mut g.stop, self.beta_stop);
            set(&mut g.step, self.beta_step);
            cfg.thermal_map = Some(g);
        }

        let disorder_flags = self.disorder_target.is_some()
            || self.disorder_mean.is_some()
            || self.disorder_sigma.is_some()
            || self.realizations.is_some()
            || self.seed.is_some();
        if disorder_flags {
            let mut d = cfg.disorder.take().unwrap_or(DisorderSection {
                target: DisorderTarget::Xy,
                mean: 0.0,
                sigma: 0.0,
                realizations: spinbattery_core::DisorderSpec::DEFAULT_REALIZATIONS,
                seed: 0,
            });
            set(&mut d.target, self.disorder_target.map(Into::into));
            set(&mut d.mean, self.disorder_mean);
            set(&mut d.sigma, self.disorder_sigma);
            set(&mut d.realizations, self.realizations);
            set(&mut d.seed, self.seed);
            cfg.disorder = Some(d);
        }

        set(&mut cfg.optimizer.grid_points, self.grid_points);
        set(&mut cfg.optimizer.refine_tolerance, self.refine_tolerance);
        let o = &mut cfg.observables;
        set(&mut o.bias, self.bias);
        set(&mut o.bias_eps, self.bias_eps);
        set(&mut o.delta_j, self.delta_j);
        set(&mut o.at, self.at);
        set(&mut cfg.scaling.sizes, self.sizes.clone());
        set(&mut cfg.scaling.j_c_infinity, self.j_c_infinity);
        set(&mut cfg.scaling.jump_factor, self.jump_factor);
        if self.output.is_some() {
            cfg.output.path = self.output.clone();
        }
        set(&mut cfg.output.format, self.format);
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run_command(kind: Kind, args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let workers = workers_or_default(args.workers)?;
    let outcome = commands::run(kind, &cfg, workers)?;
    let header = Header {
        command: kind.name(),
        seed: outcome.seed,
        config: &cfg,
    };
    emit(&encode(&outcome.table, &header, cfg.output.format)?, cfg.output.path.as_deref())
}

fn run_recipe(args: &RecipeArgs) -> Result<(), CliError> {
    if !(args.j_step > 0.0) {
        return Err(config::field_error("j_step", format!("must be positive, got {}", args.j_step)));
    }
    if args.realizations == 0 {
        return Err(config::field_error("realizations", "must be at least 1"));
    }
    if let Some(s) = args.sigmas.iter().find(|s| !(**s >= 0.0)) {
        return Err(config::field_error("sigmas", format!("{s} must be non-negative")));
    }
    let opts = RecipeOptions {
        out_dir: args
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("recipe-{}", args.name.name()))),
        format: args.format,
        workers: workers_or_default(args.workers)?,
        j_step: args.j_step,
        realizations: args.realizations,
        sigmas: args.sigmas.clone(),
        seed: args.seed,
        grid_points: args.grid_points,
    };
    for path in recipes::run(args.name, &opts)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::PowerSweep(a) => run_command(Kind::PowerSweep, a),
        Command::DisorderSweep(a) => run_command(Kind::DisorderSweep, a),
        Command::ThermalMap(a) => run_command(Kind::ThermalMap, a),
        Command::Entanglement(a) => run_command(Kind::Entanglement, a),
        Command::OrderParams(a) => run_command(Kind::OrderParams, a),
        Command::FidelityScan(a) => run_command(Kind::FidelityScan, a),
        Command::ScalingFit(a) => run_command(Kind::ScalingFit, a),
        Command::Recipe(a) => run_recipe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinbattery: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::try_parse_from([
            "spinbattery",
            "power-sweep",
            "--n-sites",
            "4",
            "--start",
            "-1",
            "--stop",
            "1",
            "--step",
            "0.5",
            "--disorder-sigma",
            "0.3",
        ])
        .unwrap();
        let Command::PowerSweep(args) = cli.command else { panic!() };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.model.n_sites, 4);
        let s = cfg.sweep();
        assert_eq!((s.start, s.stop, s.step), (-1.0, 1.0, 0.5));
        assert_eq!(cfg.disorder.unwrap().sigma, 0.3);
    }
}
