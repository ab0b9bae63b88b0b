//! Command-line front end: puzzle generation, the three solvers,
//! verification, SVG rendering and seeded benchmarks.

pub mod bench;
pub mod render;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgematch::generate::{
    dissection_puzzle, generate_grid_puzzle, scramble_orientations, two_solution_puzzle,
};
use edgematch::io::{load_puzzle, placement_from_json, puzzle_to_json};
use edgematch::oracle::brute_force_solve;
use edgematch::relax_lp::{solve_preset, LpOptions};
use edgematch::relax_sdp::{solve_sdp_pipeline, SdpPipelineOptions};
use edgematch::{validate_solution, Error, Placement, Puzzle, Vec2, DEFAULT_VALIDITY_TOL};
use serde::{Deserialize, Serialize};

use report::RunReport;

/// Solutions the brute-force method collects before picking the first in
/// canonical order.
const BRUTE_LIMIT: usize = 100_000;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_UNSOLVED: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "edgematch",
    version,
    about = "Edge-matching puzzles as polynomial systems and convex relaxations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a puzzle with its planted solution.
    Generate(GenerateArgs),
    /// Solve a puzzle and write the run report with the placement.
    Solve(SolveArgs),
    /// Exit 0 iff the placement solves the puzzle.
    Verify(VerifyArgs),
    /// Draw a puzzle, scrambled or solved, as SVG.
    Render(RenderArgs),
    /// Solve a seeded batch of grid puzzles and summarize.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lp,
    Sdp,
    Brute,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lp => "lp",
            Method::Sdp => "sdp",
            Method::Brute => "brute",
        })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instance {
    Grid,
    TwoSolution,
    Dissection,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Method::Lp)]
    pub method: Method,
    /// Iteration cap of the relaxation.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Rounding tolerance (lp) or validation tolerance (sdp).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cap on the per-type degree of the polynomial system.
    #[arg(long)]
    pub degree_cap: Option<u32>,
    /// Seed of the stall perturbation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rotation order, overriding the puzzle's.
    #[arg(long)]
    pub rotations: Option<u32>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Instance::Grid)]
    pub instance: Instance,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    #[arg(long, default_value_t = 6)]
    pub colors: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scramble piece orientations by multiples of 1/r turn.
    #[arg(long)]
    pub rotations: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub puzzle: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub puzzle: PathBuf,
    /// Placement file or solve report.
    pub placement: PathBuf,
    #[arg(long, default_value_t = DEFAULT_VALIDITY_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    pub puzzle: PathBuf,
    /// Placement file or solve report; the scrambled pieces are drawn when absent.
    #[arg(long)]
    pub placement: Option<PathBuf>,
    /// SVG path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    #[arg(long, default_value_t = 6)]
    pub colors: u32,
    /// Number of instances, seeded consecutively from `--seed`.
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: message and process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. }
            | Error::InvalidPuzzle(_)
            | Error::Dimension(_)
            | Error::Precondition(_) => EXIT_PARSE,
            Error::Unsolvable(_)
            | Error::Infeasible(_)
            | Error::Extraction { .. }
            | Error::Recovery(_)
            | Error::SearchTooLarge(_) => EXIT_UNSOLVED,
            Error::Numerical(_) | Error::Kernel(_) => EXIT_NUMERICAL,
            Error::Io(_) => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Solve(args) => solve(&args),
        Command::Verify(args) => verify(&args),
        Command::Render(args) => render_command(&args),
        Command::Bench(args) => bench::run(&args),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_puzzle(path: &Path) -> Result<Puzzle, Failure> {
    match load_puzzle(path) {
        Ok((puzzle, _)) => Ok(puzzle),
        Err(Error::Io(e)) => Err(Failure::new(
            EXIT_FAILURE,
            format!("{}: {e}", path.display()),
        )),
        Err(e) => {
            let f = Failure::from(e);
            Err(Failure::new(
                f.code,
                format!("{}: {}", path.display(), f.message),
            ))
        }
    }
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let (puzzle, planted) = match args.instance {
        Instance::Grid => generate_grid_puzzle(args.rows, args.cols, args.colors, args.seed)?,
        Instance::TwoSolution => two_solution_puzzle()?,
        Instance::Dissection => dissection_puzzle()?,
    };
    let (puzzle, planted) = match args.rotations {
        Some(r) if r > 1 => scramble_orientations(&puzzle, &planted, r, args.seed)?,
        _ => (puzzle, planted),
    };
    write_output(
        Some(&args.out),
        &(puzzle_to_json(&puzzle, Some(&planted)) + "\n"),
    )
}

/// Result of one solve: the placement, if any, and its report.
pub struct SolveOutcome {
    pub placement: Option<Placement>,
    pub report: RunReport,
}

/// Runs one solver on `puzzle` with the command-line options applied.
pub fn solve_puzzle(puzzle: &Puzzle, args: &SolverArgs) -> Result<SolveOutcome, Error> {
    let mut puzzle = puzzle.clone();
    if let Some(r) = args.rotations {
        if r == 0 {
            return Err(Error::Precondition(
                "rotation order must be at least 1".into(),
            ));
        }
        puzzle.rotation_order = r;
    }
    let mut report = RunReport::new(args.method);
    let placement = match args.method {
        Method::Lp => {
            if puzzle.preset_locations.is_none() {
                return Err(Error::Precondition(
                    "--method lp needs a puzzle with preset locations".into(),
                ));
            }
            let defaults = LpOptions::default();
            let opts = LpOptions {
                max_iter: args.max_iter.unwrap_or(defaults.max_iter),
                tol_round: args.tol.unwrap_or(defaults.tol_round),
                degree_cap: args.degree_cap.unwrap_or(defaults.degree_cap),
                seed: args.seed,
                ..defaults
            };
            let (placement, state) = solve_preset(&puzzle, &opts)?;
            let presets = puzzle.preset_locations.as_ref().expect("checked above");
            let r = puzzle.rotation_order.max(1) as usize;
            report.status = state.status.to_string();
            report.iterations = state.iteration;
            report.objective_history = state.objective_history;
            report.perturbed_at = state.perturbed_at;
            report.warnings = state.warnings;
            report.trace = state
                .trace
                .iter()
                .map(|p| {
                    (0..p.nrows())
                        .map(|i| {
                            let t = (0..p.ncols())
                                .fold(Vec2::zeros(), |acc, j| acc + presets[j / r] * p[(i, j)]);
                            [t.x, t.y]
                        })
                        .collect()
                })
                .collect();
            placement
        }
        Method::Sdp => {
            let defaults = SdpPipelineOptions::default();
            let opts = SdpPipelineOptions {
                max_iter: args.max_iter.unwrap_or(defaults.max_iter),
                tol_pos: args.tol.unwrap_or(defaults.tol_pos),
                degree_cap: args.degree_cap.unwrap_or(defaults.degree_cap),
                ..defaults
            };
            let (placement, state) = solve_sdp_pipeline(&puzzle, &opts)?;
            report.status = state.status.to_string();
            report.iterations = state.iteration;
            report.objective_history = state.objective_history;
            report.rank_ratios = state.rank_ratios;
            report.warnings = state.warnings;
            report.trace = state
                .locations
                .iter()
                .map(|ts| ts.iter().map(|t| [t.x, t.y]).collect())
                .collect();
            placement
        }
        Method::Brute => {
            let set = brute_force_solve(&puzzle, BRUTE_LIMIT)?;
            report.iterations = set.placements.len();
            report.status = if set.placements.is_empty() {
                "unsolvable"
            } else {
                "solved"
            }
            .into();
            if !set.exhausted {
                report
                    .warnings
                    .push(format!("search stopped after {BRUTE_LIMIT} solutions"));
            }
            set.placements.into_iter().next()
        }
    };
    report.solved = placement.is_some();
    report.placement = placement.as_ref().map(report::placement_value);
    Ok(SolveOutcome { placement, report })
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let puzzle = read_puzzle(&args.puzzle)?;
    let outcome = solve_puzzle(&puzzle, &args.solver)?;
    write_output(args.out.as_deref(), &(outcome.report.to_json() + "\n"))?;
    if outcome.placement.is_none() {
        return Err(Failure::new(
            EXIT_UNSOLVED,
            format!("no solution found (status {})", outcome.report.status),
        ));
    }
    Ok(())
}

/// Reads a placement from a placement file or from the `placement` field of
/// a solve report.
pub fn load_placement_any(path: &Path) -> Result<Placement, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_PARSE,
            format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ),
        )
    })?;
    let inner = match value.get("placement") {
        Some(serde_json::Value::Null) => {
            return Err(Failure::new(
                EXIT_UNSOLVED,
                format!("{} holds no placement", path.display()),
            ))
        }
        Some(v) => v.clone(),
        None => value,
    };
    Ok(placement_from_json(&inner.to_string())?)
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let puzzle = read_puzzle(&args.puzzle)?;
    let placement = load_placement_any(&args.placement)?;
    let report = validate_solution(&puzzle, &placement, args.tol)?;
    if report.is_valid {
        println!(
            "valid (max position error {:.3e})",
            report.max_position_error
        );
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_UNSOLVED,
            format!("invalid: {} unmatched edges", report.unmatched_edges.len()),
        ))
    }
}

fn render_command(args: &RenderArgs) -> Result<(), Failure> {
    let puzzle = read_puzzle(&args.puzzle)?;
    let (placement, strip) = match &args.placement {
        Some(path) => {
            let strip = report::load_trace(path).unwrap_or_default();
            (Some(load_placement_any(path)?), strip)
        }
        None => (None, Vec::new()),
    };
    if let Some(p) = &placement {
        if p.len() != puzzle.num_pieces() {
            return Err(Failure::new(
                EXIT_PARSE,
                format!(
                    "placement has {} entries for {} pieces",
                    p.len(),
                    puzzle.num_pieces()
                ),
            ));
        }
    }
    write_output(
        args.out.as_deref(),
        &render::render_svg(&puzzle, placement.as_ref(), &strip),
    )
}
