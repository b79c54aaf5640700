//! Thin command-line front end over the `entropic_lp` library.
//!
//! Exit codes: 0 success, 1 failed verification or failed scan rows,
//! 2 usage, I/O, or instance validation errors.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entropic_lp::bench::{
    self, EtaGrid, InstanceSource, OutputFormat, RouteChoice, ScanConfig, DEFAULT_SEED,
};
use entropic_lp::bounds::worst_case_assignment_cost;
use entropic_lp::model::LpInstance;
use entropic_lp::solver::DEFAULT_FEASIBILITY_TOL;
use entropic_lp::{profile_instance, verify};

#[derive(Parser)]
#[command(
    name = "entropic-lp",
    about = "Entropy-penalized LP solving, polytope profiling, and convergence-rate checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one (instance, eta) pair and print the solution with every
    /// bound checked against it, as JSON.
    Solve(SolveArgs),
    /// Sweep a grid of eta values and emit one row per grid point.
    Scan(ScanArgs),
    /// Print the structural profile of an instance (vertices, gap, radii).
    Profile(ProfileArgs),
    /// Run the built-in acceptance suite and print the per-criterion table.
    Verify,
}

/// Instance selection, shared by the data-facing subcommands. Exactly one
/// source must be given.
#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file ({"A":..,"b":..,"c":..}, {"simplex":..} or {"assignment":..}).
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,

    /// Built-in simplex family, e.g. d=4,alpha=1,beta=1
    #[arg(long, value_name = "d=..,alpha=..,beta=..")]
    simplex: Option<String>,

    /// Built-in worst-case assignment cost, e.g. n=3
    #[arg(long = "assignment-worst-case", value_name = "n=..")]
    assignment_worst_case: Option<String>,

    /// Random integer-cost assignment, e.g. n=5,k=10 (costs uniform in 0..=k)
    #[arg(long = "assignment-random", value_name = "n=..,k=..")]
    assignment_random: Option<String>,

    /// Seed for the random families.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl InstanceArgs {
    fn build(&self) -> Result<LpInstance, String> {
        let sources = [
            self.file.is_some(),
            self.simplex.is_some(),
            self.assignment_worst_case.is_some(),
            self.assignment_random.is_some(),
        ]
        .iter()
        .filter(|&&s| s)
        .count();
        if sources != 1 {
            return Err(
                "give exactly one of --file, --simplex, --assignment-worst-case, --assignment-random"
                    .into(),
            );
        }
        if let Some(path) = &self.file {
            return bench::load_instance(path).map_err(|e| e.to_string());
        }
        if let Some(spec) = &self.simplex {
            let kv = parse_kv(spec)?;
            let d = kv_usize(&kv, "d")?;
            let alpha = kv_f64(&kv, "alpha")?;
            let beta = kv_f64(&kv, "beta")?;
            let fam = entropic_lp::SimplexFamily::new(d, alpha, beta).map_err(|e| e.to_string())?;
            return Ok(fam.to_instance());
        }
        if let Some(spec) = &self.assignment_worst_case {
            let kv = parse_kv(spec)?;
            let n = kv_usize(&kv, "n")?;
            return worst_case_assignment_cost(n)
                .map(|a| a.to_instance())
                .map_err(|e| e.to_string());
        }
        let spec = self.assignment_random.as_ref().expect("checked above");
        let kv = parse_kv(spec)?;
        let n = kv_usize(&kv, "n")?;
        let k = kv_usize(&kv, "k").unwrap_or(10);
        bench::random_assignment(n, k as u64, self.seed)
            .map(|a| a.to_instance())
            .map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Penalization parameter.
    #[arg(long)]
    eta: f64,

    /// Solver route: auto (default), gibbs, sinkhorn, or dual.
    #[arg(long, default_value = "auto")]
    route: RouteChoice,

    /// Feasibility / marginal tolerance.
    #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
    tol: f64,

    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Eta grid start:stop:count:log|lin (spacing defaults to lin).
    #[arg(long = "eta-grid", value_name = "START:STOP:COUNT[:log|lin]")]
    eta_grid: Option<EtaGrid>,

    /// Single eta value (shorthand for a one-point grid).
    #[arg(long, conflicts_with = "eta_grid")]
    eta: Option<f64>,

    /// Solver route: auto (default), gibbs, sinkhorn, or dual.
    #[arg(long, default_value = "auto")]
    route: RouteChoice,

    /// Feasibility / marginal tolerance.
    #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
    tol: f64,

    /// Worker threads for the grid sweep (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Output format.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve(args) => {
            let instance = args.instance.build()?;
            let doc = bench::run_solve(&instance, args.eta, args.route, args.tol)
                .map_err(|e| e.to_string())?;
            bench::write_output(&bench::to_json_pretty(&doc), args.out.as_deref())
                .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan(args) => {
            let instance = args.instance.build()?;
            let grid = match (args.eta_grid, args.eta) {
                (Some(grid), None) => grid,
                (None, Some(eta)) => EtaGrid::single(eta).map_err(|e| e.to_string())?,
                _ => return Err("give exactly one of --eta-grid or --eta".into()),
            };
            let config = ScanConfig {
                source: InstanceSource::Instance(instance),
                grid,
                route: args.route,
                tol: args.tol,
                workers: args.workers,
                out: args.out,
                format: args.format,
            };
            let outcome = bench::run_scan_to_output(&config).map_err(|e| e.to_string())?;
            if outcome.any_failed() {
                eprintln!("error: some grid points failed; see the error column");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile(args) => {
            let instance = args.instance.build()?;
            let profile = profile_instance(&instance).map_err(|e| e.to_string())?;
            bench::write_output(&bench::to_json_pretty(&profile), args.out.as_deref())
                .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let results = verify::run_all();
            print!("{}", verify::render_table(&results));
            if results.iter().all(|r| r.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn parse_kv(spec: &str) -> Result<HashMap<String, String>, String> {
    let mut out = HashMap::new();
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn kv_usize(kv: &HashMap<String, String>, key: &str) -> Result<usize, String> {
    kv.get(key)
        .ok_or_else(|| format!("missing '{key}='"))?
        .parse()
        .map_err(|_| format!("'{key}' must be a nonnegative integer"))
}

fn kv_f64(kv: &HashMap<String, String>, key: &str) -> Result<f64, String> {
    kv.get(key)
        .ok_or_else(|| format!("missing '{key}='"))?
        .parse()
        .map_err(|_| format!("'{key}' must be a number"))
}
