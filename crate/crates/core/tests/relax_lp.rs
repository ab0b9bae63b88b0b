use edgematch::algebra::{assemble_complete, AssembleOptions, Family, Mode, DEFAULT_DEGREE_CAP};
use edgematch::generate::{generate_grid_puzzle, two_solution_puzzle};
use edgematch::oracle::{assignment_vector, brute_force_solve};
use edgematch::relax_lp::{
    build_vandermonde, lp_iterate, solve_preset, LpOptions, LpStatus, RelaxLp,
};
use edgematch::{validate_solution, Puzzle, Vec2};
use nalgebra::DMatrix;

fn permutation_matrix(sigma: &[usize]) -> DMatrix<f64> {
    let n = sigma.len();
    DMatrix::from_fn(n, n, |i, j| if sigma[i] == j { 1.0 } else { 0.0 })
}

fn lp_parts(
    p: &Puzzle,
) -> (
    edgematch::algebra::PolySystem,
    edgematch::relax_lp::PresetVandermonde,
) {
    let opts = AssembleOptions {
        family: Family::ComplexPower,
        mode: Mode::Point,
        degree_cap: DEFAULT_DEGREE_CAP,
    };
    let system = assemble_complete(p, &opts).unwrap();
    let degree = system.degrees.values().copied().max().unwrap();
    let presets: Vec<Vec2> = p
        .preset_locations
        .as_ref()
        .unwrap()
        .iter()
        .map(|s| system.normalization.apply(s))
        .collect();
    let y = build_vandermonde(&presets, degree, Family::ComplexPower).unwrap();
    (system, y)
}

#[test]
fn small_puzzles_return_oracle_members() {
    for (rows, cols) in [(1, 2), (2, 2), (2, 3)] {
        for seed in 0..4 {
            let (p, _) = generate_grid_puzzle(rows, cols, 3, seed).unwrap();
            let set = brute_force_solve(&p, 1000).unwrap();
            let truth: Vec<_> = set
                .placements
                .iter()
                .map(|s| assignment_vector(&p, s, 1e-9).unwrap())
                .collect();
            let (placement, state) = solve_preset(&p, &LpOptions::default()).unwrap();
            let placement =
                placement.unwrap_or_else(|| panic!("{rows}x{cols} seed {seed}: {}", state.status));
            assert_eq!(state.status, LpStatus::PermutationFound);
            assert!(validate_solution(&p, &placement, 1e-9).unwrap().is_valid);
            assert!(truth.contains(&assignment_vector(&p, &placement, 1e-9).unwrap()));
            let n = p.num_pieces() as f64;
            for w in state.objective_history.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "objective decreased: {w:?}");
            }
            assert!(state.objective_history.iter().all(|&v| v <= n + 1e-9));
        }
    }
}

#[test]
fn oracle_solutions_are_feasible_and_fixed() {
    for seed in 0..3 {
        let (p, _) = generate_grid_puzzle(2, 3, 3, seed).unwrap();
        let (system, y) = lp_parts(&p);
        let lp = RelaxLp::orthonormal(&p, &system, &y, 1e-8).unwrap();
        let direct = RelaxLp::from_system(&system, &y, 1, 1e-8).unwrap();
        for s in brute_force_solve(&p, 1000).unwrap().placements {
            let pm = permutation_matrix(&assignment_vector(&p, &s, 1e-9).unwrap());
            assert!(lp.constraint_residual(&pm) < 1e-8);
            assert!(direct.constraint_residual(&pm) < 1e-8);
            let (next, objective) = lp_iterate(&system, &y, &pm).unwrap();
            assert!(
                (objective - p.num_pieces() as f64).abs() < 1e-6,
                "{objective}"
            );
            assert!((next - &pm).amax() < 1e-6);
        }
    }
}

#[test]
fn two_solution_instance_returns_one_solution() {
    let (p, _) = two_solution_puzzle().unwrap();
    let set = brute_force_solve(&p, 10).unwrap();
    let truth: Vec<_> = set
        .placements
        .iter()
        .map(|s| assignment_vector(&p, s, 1e-9).unwrap())
        .collect();
    let (placement, _) = solve_preset(
        &p,
        &LpOptions {
            perturb: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(truth.contains(&assignment_vector(&p, &placement.unwrap(), 1e-9).unwrap()));
}

#[test]
fn missing_presets_are_rejected() {
    let (mut p, _) = generate_grid_puzzle(1, 2, 3, 0).unwrap();
    p.preset_locations = None;
    assert!(solve_preset(&p, &LpOptions::default()).is_err());
}
