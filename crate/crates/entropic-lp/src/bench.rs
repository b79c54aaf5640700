//! Experiment harness behind the CLI: instance loading, route dispatch,
//! eta-scan experiments with CSV/JSON emission, and single-solve documents.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundReport, CheckedReport};
use crate::model::{
    AssignmentInstance, InstanceSpec, LpInstance, ModelError, PolytopeProfile, SimplexFamily,
};
use crate::solver::{self, PenalizedSolution, Route, SolverError, DEFAULT_SINKHORN_MAX_ITER};

/// Fixed default seed for the built-in random families.
pub const DEFAULT_SEED: u64 = 17;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse instance file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid eta grid: {0}")]
    BadGrid(String),
    #[error("route {route} does not apply: {reason}")]
    RouteNotApplicable {
        route: &'static str,
        reason: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("writing output failed: {0}")]
    Output(std::io::Error),
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

/// Eta grid `start..stop` with `count` points, linear or logarithmic.
/// Construct through [`EtaGrid::new`] or `FromStr`, which validate the
/// endpoints.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl EtaGrid {
    pub fn new(start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Self, BenchError> {
        if count < 1 {
            return Err(BenchError::BadGrid("count must be at least 1".into()));
        }
        if !(start > 0.0 && stop > 0.0) {
            return Err(BenchError::BadGrid(format!(
                "start and stop must be positive, got {start}:{stop}"
            )));
        }
        if start > stop {
            return Err(BenchError::BadGrid(format!(
                "start {start} exceeds stop {stop}"
            )));
        }
        Ok(EtaGrid {
            start,
            stop,
            count,
            spacing,
        })
    }

    pub fn single(eta: f64) -> Result<Self, BenchError> {
        EtaGrid::new(eta, eta, 1, Spacing::Lin)
    }

    /// Grid points in increasing order; endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let steps = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let t = i as f64 / steps;
                match self.spacing {
                    Spacing::Lin => self.start + t * (self.stop - self.start),
                    Spacing::Log => {
                        (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

/// Solver selection: `Auto` picks the fastest exact route the structure
/// admits (Gibbs on simplices, Sinkhorn on the Birkhoff polytope, dual
/// ascent otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    Auto,
    Gibbs,
    Sinkhorn,
    Dual,
}

impl std::str::FromStr for RouteChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(RouteChoice::Auto),
            "gibbs" => Ok(RouteChoice::Gibbs),
            "sinkhorn" => Ok(RouteChoice::Sinkhorn),
            "dual" => Ok(RouteChoice::Dual),
            other => Err(format!(
                "unknown route '{other}' (expected auto|gibbs|sinkhorn|dual)"
            )),
        }
    }
}

impl std::str::FromStr for Spacing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lin" => Ok(Spacing::Lin),
            "log" => Ok(Spacing::Log),
            other => Err(format!("unknown spacing '{other}' (expected lin|log)")),
        }
    }
}

impl std::str::FromStr for EtaGrid {
    type Err = String;

    /// Parse `start:stop:count[:lin|log]`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(format!(
                "bad grid '{s}' (expected start:stop:count:log|lin)"
            ));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| format!("bad grid start '{}'", parts[0]))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| format!("bad grid stop '{}'", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        let spacing = match parts.get(3) {
            Some(raw) => raw.parse()?,
            None => Spacing::Lin,
        };
        EtaGrid::new(start, stop, count, spacing).map_err(|e| e.to_string())
    }
}

/// Where a scan's instance comes from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// Instance document on disk.
    File(PathBuf),
    /// Built-in family or inline document.
    Spec(InstanceSpec),
    /// Already-constructed instance.
    Instance(LpInstance),
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<LpInstance, BenchError> {
        match self {
            InstanceSource::File(path) => load_instance(path),
            InstanceSource::Spec(spec) => Ok(spec.build()),
            InstanceSource::Instance(inst) => Ok(inst.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub source: InstanceSource,
    pub grid: EtaGrid,
    pub route: RouteChoice,
    pub tol: f64,
    /// Worker threads for the grid; `None` uses the process default.
    pub workers: Option<usize>,
    /// Output file; `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv|json)")),
        }
    }
}

// ---------------------------------------------------------------------------
// instance loading and built-in families
// ---------------------------------------------------------------------------

/// Parse an instance document from a JSON file.
pub fn load_instance(path: &Path) -> Result<LpInstance, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: InstanceSpec = serde_json::from_str(&text).map_err(|source| BenchError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(spec.build())
}

/// Random assignment instance with integer costs uniform in `{0..=max_cost}`.
pub fn random_assignment(
    n: usize,
    max_cost: u64,
    seed: u64,
) -> Result<AssignmentInstance, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| rng.random_range(0..=max_cost) as f64)
                .collect()
        })
        .collect();
    AssignmentInstance::new(cost)
}

// ---------------------------------------------------------------------------
// route dispatch
// ---------------------------------------------------------------------------

/// Solve one `(instance, eta)` pair on the requested route.
pub fn solve_with_route(
    inst: &LpInstance,
    eta: f64,
    route: RouteChoice,
    tol: f64,
) -> Result<PenalizedSolution, BenchError> {
    match route {
        RouteChoice::Auto => {
            if inst.as_simplex().is_some() {
                solve_with_route(inst, eta, RouteChoice::Gibbs, tol)
            } else if inst.as_birkhoff().is_some() {
                solve_with_route(inst, eta, RouteChoice::Sinkhorn, tol)
            } else {
                solve_with_route(inst, eta, RouteChoice::Dual, tol)
            }
        }
        RouteChoice::Gibbs => Ok(solver::solve_gibbs(inst, eta)?),
        RouteChoice::Sinkhorn => {
            let assignment =
                AssignmentInstance::from_lp(inst).ok_or(BenchError::RouteNotApplicable {
                    route: "sinkhorn",
                    reason: "constraints do not match the Birkhoff pattern",
                })?;
            let (solution, _) =
                solver::solve_sinkhorn(&assignment, eta, tol, DEFAULT_SINKHORN_MAX_ITER)?;
            Ok(solution)
        }
        RouteChoice::Dual => Ok(solver::solve_dual_ascent(inst, eta, tol)?),
    }
}

/// Family-specific gap floor, when one of the lower-bound constructions
/// recognizably applies.
fn family_gap_floor(inst: &LpInstance, eta: f64) -> Option<f64> {
    if let Some(fam) = SimplexFamily::from_instance(inst) {
        return bounds::simplex_gap_floor(&fam, eta);
    }
    if let Some(assignment) = AssignmentInstance::from_lp(inst) {
        let n = assignment.size();
        if let Ok(worst) = bounds::worst_case_assignment_cost(n) {
            if worst.cost() == assignment.cost() {
                return Some(bounds::assignment_gap_floor(n, eta));
            }
        }
    }
    None
}

fn family_kind(inst: &LpInstance) -> Option<&'static str> {
    if SimplexFamily::from_instance(inst).is_some() {
        return Some("simplex_family");
    }
    if let Some(assignment) = AssignmentInstance::from_lp(inst) {
        let n = assignment.size();
        if let Ok(worst) = bounds::worst_case_assignment_cost(n) {
            if worst.cost() == assignment.cost() {
                return Some("worst_case_assignment");
            }
        }
        return Some("assignment");
    }
    inst.as_simplex().map(|_| "simplex")
}

// ---------------------------------------------------------------------------
// solve documents
// ---------------------------------------------------------------------------

/// Structural summary included in solve documents (the full vertex list
/// stays in `profile` output).
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub num_vertices: usize,
    pub num_optimal_vertices: usize,
    pub optimal_value: f64,
    pub gap: f64,
    pub l1_radius: f64,
    pub entropic_radius: f64,
    pub fast_threshold: f64,
}

impl From<&PolytopeProfile> for ProfileSummary {
    fn from(p: &PolytopeProfile) -> Self {
        ProfileSummary {
            num_vertices: p.vertices.len(),
            num_optimal_vertices: p.optimal_vertices.len(),
            optimal_value: p.optimal_value,
            gap: p.gap,
            l1_radius: p.l1_radius,
            entropic_radius: p.entropic_radius,
            fast_threshold: p.fast_threshold(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyInfo {
    pub kind: &'static str,
    /// Lower bound on the gap implied by the family's threshold theorems at
    /// this eta, when applicable.
    pub gap_floor: Option<f64>,
}

/// Output of the `solve` subcommand: the solution plus every bound checked
/// against it.
#[derive(Debug, Clone, Serialize)]
pub struct SolveDocument {
    pub eta: f64,
    pub route: Route,
    pub profile: ProfileSummary,
    pub report: CheckedReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyInfo>,
    pub solution: PenalizedSolution,
}

/// Profile, solve, and evaluate every bound for one eta.
pub fn run_solve(
    inst: &LpInstance,
    eta: f64,
    route: RouteChoice,
    tol: f64,
) -> Result<SolveDocument, BenchError> {
    let profile = crate::profile_instance(inst)?;
    let solution =
        solve_with_route(inst, eta, route, tol)?.with_optimal_value(profile.optimal_value);
    let report = bounds::check_report(&profile, &solution);
    let family = family_kind(inst).map(|kind| FamilyInfo {
        kind,
        gap_floor: family_gap_floor(inst, eta),
    });
    Ok(SolveDocument {
        eta,
        route: solution.route,
        profile: ProfileSummary::from(&profile),
        report,
        family,
        solution,
    })
}

// ---------------------------------------------------------------------------
// scans
// ---------------------------------------------------------------------------

/// One grid point of an eta scan. `None` entries render as empty CSV cells.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub eta: f64,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub slow_bound: Option<f64>,
    pub fast_bound: Option<f64>,
    pub face_dist: Option<f64>,
    pub face_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub iters: Option<usize>,
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    pub profile: PolytopeProfile,
}

impl ScanOutcome {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }
}

/// Run the scan: one row per grid eta, solved concurrently, output ordered
/// by eta. Per-row failures are recorded in the row, not raised.
pub fn run_scan(config: &ScanConfig) -> Result<ScanOutcome, BenchError> {
    let instance = config.source.resolve()?;
    let profile = crate::profile_instance(&instance)?;
    let etas = config.grid.values();

    let solve_row = |&eta: &f64| -> ScanRow {
        match solve_with_route(&instance, eta, config.route, config.tol) {
            Ok(solution) => {
                let report = bounds::check_report(&profile, &solution);
                ScanRow {
                    eta,
                    objective: Some(solution.primal_objective),
                    gap: Some(report.measured_gap),
                    slow_bound: Some(report.report.slow_bound),
                    fast_bound: report.report.fast_bound,
                    face_dist: Some(report.measured_face_distance),
                    face_bound: report.report.face_distance_bound,
                    lower_bound: family_gap_floor(&instance, eta),
                    iters: Some(solution.iterations),
                    route: Some(solution.route),
                    error: None,
                }
            }
            Err(err) => ScanRow {
                eta,
                objective: None,
                gap: None,
                slow_bound: None,
                fast_bound: None,
                face_dist: None,
                face_bound: None,
                lower_bound: None,
                iters: None,
                route: None,
                error: Some(err.to_string()),
            },
        }
    };

    let rows: Vec<ScanRow> = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool")
            .install(|| etas.par_iter().map(solve_row).collect()),
        None => etas.par_iter().map(solve_row).collect(),
    };

    Ok(ScanOutcome { rows, profile })
}

/// Run the scan and emit it in the configured format to the configured
/// destination. Returns the outcome so callers can inspect failures.
pub fn run_scan_to_output(config: &ScanConfig) -> Result<ScanOutcome, BenchError> {
    let outcome = run_scan(config)?;
    let rendered = match config.format {
        OutputFormat::Csv => rows_to_csv(&outcome.rows),
        OutputFormat::Json => rows_to_json(&outcome.rows),
    };
    write_output(&rendered, config.out.as_deref())?;
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

/// Fixed float formatting for CSV: 17 significant digits, `.` separator,
/// bit-stable across runs.
pub fn fmt_float(v: f64) -> String {
    format!("{:.16e}", v)
}

fn csv_cell_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV header used by scans. An `error` column is appended only when some
/// row actually failed.
pub const CSV_HEADER: &str =
    "eta,objective,gap,slow_bound,fast_bound,face_dist,face_bound,lower_bound,iters,route";

/// Render scan rows as CSV, one line per grid point.
pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let with_errors = rows.iter().any(|r| r.error.is_some());
    let mut out = String::from(CSV_HEADER);
    if with_errors {
        out.push_str(",error");
    }
    out.push('\n');
    for row in rows {
        let mut cells = vec![
            fmt_float(row.eta),
            csv_cell_float(row.objective),
            csv_cell_float(row.gap),
            csv_cell_float(row.slow_bound),
            csv_cell_float(row.fast_bound),
            csv_cell_float(row.face_dist),
            csv_cell_float(row.face_bound),
            csv_cell_float(row.lower_bound),
            row.iters.map(|i| i.to_string()).unwrap_or_default(),
            row.route
                .map(|r| r.as_str().to_string())
                .unwrap_or_default(),
        ];
        if with_errors {
            cells.push(csv_escape(row.error.as_deref().unwrap_or("")));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Render scan rows as a JSON array.
pub fn rows_to_json(rows: &[ScanRow]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("scan rows serialize");
    out.push('\n');
    out
}

/// Write to the given path, or to stdout when no path is set.
pub fn write_output(content: &str, out: Option<&Path>) -> Result<(), BenchError> {
    match out {
        Some(path) => fs::write(path, content).map_err(BenchError::Output),
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(content.as_bytes())
                .map_err(BenchError::Output)
        }
    }
}

/// Convenience wrapper shared by doc builders: pretty JSON with a trailing
/// newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("document serializes");
    out.push('\n');
    out
}

/// A bound report alone, recomputed from `(profile, eta)`; used to verify
/// that scan rows carry no hidden state.
pub fn report_for(profile: &PolytopeProfile, eta: f64) -> BoundReport {
    BoundReport::new(profile, eta, None)
}
