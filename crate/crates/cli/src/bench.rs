//! Seeded batches of generated grid puzzles.

use std::time::Instant;

use edgematch::generate::{generate_grid_puzzle, scramble_orientations};
use edgematch::{validate_solution, Error, DEFAULT_VALIDITY_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::SCHEMA_VERSION;
use crate::{solve_puzzle, write_output, BenchArgs, Failure, Method, SolverArgs, EXIT_PARSE};

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "EDGEMATCH_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub seed: u64,
    pub status: String,
    pub solved: bool,
    pub valid: bool,
    pub iterations: usize,
}

/// Batch summary. Wall times are printed but kept out of the report so
/// that reruns produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub method: Method,
    pub rows: usize,
    pub cols: usize,
    pub colors: u32,
    pub rotations: u32,
    pub instances: Vec<BenchEntry>,
    pub success_rate: f64,
    pub median_iterations: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Worker count from the environment; `None` leaves the pool default.
pub fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::new(
                EXIT_PARSE,
                format!("{THREADS_VAR} must be a positive integer, got {v:?}"),
            )),
        },
        Err(_) => Ok(None),
    }
}

fn one(args: &BenchArgs, solver: &SolverArgs, seed: u64) -> Result<(BenchEntry, f64), Error> {
    let (puzzle, planted) = generate_grid_puzzle(args.rows, args.cols, args.colors, seed)?;
    let r = solver.rotations.unwrap_or(1);
    let puzzle = if r > 1 {
        scramble_orientations(&puzzle, &planted, r, seed)?.0
    } else {
        puzzle
    };
    let start = Instant::now();
    let outcome = solve_puzzle(
        &puzzle,
        &SolverArgs {
            seed,
            ..solver.clone()
        },
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    let tol = match solver.method {
        Method::Sdp => solver
            .tol
            .unwrap_or(edgematch::relax_sdp::SdpPipelineOptions::default().tol_pos),
        _ => DEFAULT_VALIDITY_TOL,
    };
    let valid = match &outcome.placement {
        Some(p) => validate_solution(&puzzle, p, tol)?.is_valid,
        None => false,
    };
    let entry = BenchEntry {
        seed,
        status: outcome.report.status,
        solved: outcome.placement.is_some(),
        valid,
        iterations: outcome.report.iterations,
    };
    Ok((entry, elapsed))
}

pub fn run(args: &BenchArgs) -> Result<(), Failure> {
    if args.count == 0 {
        return Err(Failure::new(EXIT_PARSE, "--count must be positive"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::new(crate::EXIT_FAILURE, e.to_string()))?;
    let base = args.solver.seed;
    let results: Vec<Result<(BenchEntry, f64), Error>> = pool.install(|| {
        (base..base + args.count)
            .into_par_iter()
            .map(|seed| one(args, &args.solver, seed))
            .collect()
    });

    let mut entries = Vec::with_capacity(results.len());
    let mut times = Vec::with_capacity(results.len());
    println!(
        "{:>8}  {:<18} {:>6}  {:<5}  {:>9}",
        "seed", "status", "iters", "valid", "time_s"
    );
    for (seed, r) in (base..).zip(results) {
        let (entry, t) = match r {
            Ok(x) => x,
            Err(e) => {
                let entry = BenchEntry {
                    seed,
                    status: format!("error: {e}"),
                    solved: false,
                    valid: false,
                    iterations: 0,
                };
                (entry, 0.0)
            }
        };
        println!(
            "{:>8}  {:<18} {:>6}  {:<5}  {:>9.3}",
            entry.seed, entry.status, entry.iterations, entry.valid, t
        );
        entries.push(entry);
        times.push(t);
    }
    let solved_iterations: Vec<f64> = entries
        .iter()
        .filter(|e| e.solved && e.valid)
        .map(|e| e.iterations as f64)
        .collect();
    let solved = solved_iterations.len();
    let report = BenchReport {
        schema_version: SCHEMA_VERSION,
        method: args.solver.method,
        rows: args.rows,
        cols: args.cols,
        colors: args.colors,
        rotations: args.solver.rotations.unwrap_or(1),
        success_rate: solved as f64 / entries.len() as f64,
        median_iterations: median(solved_iterations),
        instances: entries,
    };
    println!(
        "success {}/{} ({:.1}%), median iterations {}, median wall time {:.3}s, total {:.3}s",
        solved,
        report.instances.len(),
        100.0 * report.success_rate,
        report
            .median_iterations
            .map_or("-".into(), |m| format!("{m}")),
        median(times.clone()).unwrap_or(0.0),
        times.iter().sum::<f64>()
    );
    if let Some(path) = &args.out {
        let text =
            serde_json::to_string_pretty(&report).expect("bench reports always serialize") + "\n";
        write_output(Some(path), &text)?;
    }
    Ok(())
}
