mod common;

use edgematch_kernels::{
    max_assignment, solve_block_sdp, solve_lp, sym_eig, BlockSdp, LinearProgram, SdpConstraint,
    SolveStatus,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn brute_force_assignment(p: &DMatrix<f64>) -> f64 {
    fn rec(p: &DMatrix<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
        if row == p.nrows() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..p.ncols() {
            if !used[j] {
                used[j] = true;
                best = best.max(p[(row, j)] + rec(p, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    rec(p, 0, &mut vec![false; p.ncols()])
}

#[test]
fn analytic_lp_optima() {
    for case in common::analytic_lps() {
        let r = solve_lp(&case.lp, 1e-9).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{}", case.name);
        assert!(
            (r.objective - case.optimum).abs() <= 1e-8,
            "{}: {} vs {}",
            case.name,
            r.objective,
            case.optimum
        );
        let x = DVector::from_column_slice(&r.primal.x);
        let ax = &case.lp.equality_matrix * &x;
        let b = DVector::from_column_slice(&case.lp.equality_rhs);
        assert!((ax - &b).norm() <= 1e-8 * (1.0 + b.norm()), "{}", case.name);
        assert!(r.primal.x.iter().all(|&v| v >= -1e-9), "{}", case.name);
        // strong duality certificate
        let dual: f64 = b.iter().zip(&r.primal.y).map(|(b, y)| b * y).sum();
        assert!(
            (dual - r.objective).abs() <= 1e-8,
            "{}: dual {}",
            case.name,
            dual
        );
    }
}

#[test]
fn contradictory_equalities_are_infeasible() {
    let r = solve_lp(&common::contradictory_lp(), 1e-8).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
}

#[test]
fn analytic_sdp_optima() {
    for case in common::analytic_sdps() {
        let r = solve_block_sdp(&case.sdp, 1e-8).unwrap();
        assert_eq!(
            r.status,
            SolveStatus::Optimal,
            "{}: {:?}",
            case.name,
            r.message
        );
        assert!(
            (r.objective - case.optimum).abs() <= 1e-6,
            "{}: {}",
            case.name,
            r.objective
        );
        assert!(
            (&r.primal.x[0] - &case.solution).amax() <= 1e-4,
            "{}",
            case.name
        );
    }
}

#[test]
fn sdp_with_several_blocks() {
    // block 0: minimize trace with Z11 = 2; block 1 scalar s with s + Z22 = 3
    let mut sdp = BlockSdp::new(vec![2, 1]);
    sdp.costs[0] = DMatrix::identity(2, 2);
    sdp.costs[1][(0, 0)] = 2.0;
    sdp.constraints.push(SdpConstraint {
        terms: vec![(0, common::sym_unit(2, 0, 0))],
        rhs: 2.0,
    });
    sdp.constraints.push(SdpConstraint {
        terms: vec![
            (0, common::sym_unit(2, 1, 1)),
            (1, DMatrix::from_element(1, 1, 1.0)),
        ],
        rhs: 3.0,
    });
    // cost Z11 + Z22 + 2s = 2 + Z22 + 2(3 - Z22), minimized with Z22 = 3
    let r = solve_block_sdp(&sdp, 1e-8).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 5.0).abs() < 1e-6, "{}", r.objective);
}

#[test]
fn sdp_iteration_cap_returns_best_iterate() {
    let case = &common::analytic_sdps()[1];
    let opts = edgematch_kernels::SdpOptions {
        tol: 1e-12,
        max_iter: 3,
    };
    let r = edgematch_kernels::solve_block_sdp_with(&case.sdp, &opts).unwrap();
    assert_eq!(r.status, SolveStatus::MaxIter);
    assert!(r.message.is_some());
}

#[test]
fn six_by_six_assignment_matches_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let p = DMatrix::from_fn(6, 6, |_, _| rng.gen::<f64>());
        let sigma = max_assignment(&p).unwrap();
        let value: f64 = sigma.iter().enumerate().map(|(i, &j)| p[(i, j)]).sum();
        assert!((value - brute_force_assignment(&p)).abs() < 1e-12);
    }
}

fn symmetric_strategy(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        (&m + m.transpose()) * 0.5
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignment_is_exact(n in 1usize..=7, extra in 0usize..2, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = (n + extra).min(7);
        let p = DMatrix::from_fn(n, m, |_, _| rng.gen_range(0.0..1.0));
        let sigma = max_assignment(&p).unwrap();
        let mut seen = vec![false; m];
        for &j in &sigma {
            prop_assert!(!seen[j]);
            seen[j] = true;
        }
        let value: f64 = sigma.iter().enumerate().map(|(i, &j)| p[(i, j)]).sum();
        prop_assert!((value - brute_force_assignment(&p)).abs() < 1e-12);
    }

    #[test]
    fn eigendecomposition_identities(m in symmetric_strategy(10)) {
        let e = sym_eig(&m);
        let scale = m.norm().max(1.0);
        prop_assert!((e.reconstruct() - &m).norm() <= 1e-10 * scale);
        let vtv = e.vectors.transpose() * &e.vectors;
        prop_assert!((vtv - DMatrix::identity(10, 10)).amax() <= 1e-10);
        prop_assert!((e.values.iter().sum::<f64>() - m.trace()).abs() <= 1e-10 * scale);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn lp_weak_duality(
        rows in 1usize..5,
        cols in 2usize..8,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
        let x0 = DVector::from_fn(cols, |_, _| rng.gen_range(0.0..1.0));
        let b = &a * &x0;
        let c: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        let lp = LinearProgram::new(c.clone(), a.clone(), b.iter().copied().collect()).unwrap();
        let r = solve_lp(&lp, 1e-9).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let y = DVector::from_column_slice(&r.primal.y);
        let dual_obj = b.dot(&y);
        // the planted point is feasible, so any dual feasible bound sits below it
        let planted: f64 = c.iter().zip(x0.iter()).map(|(c, x)| c * x).sum();
        prop_assert!(dual_obj <= r.objective + 1e-8);
        prop_assert!(r.objective <= planted + 1e-8);
        // reduced costs c - Aᵀy are non-negative at the optimum
        let reduced = DVector::from_column_slice(&c) - a.transpose() * &y;
        prop_assert!(reduced.min() >= -1e-8);
    }

    #[test]
    fn sdp_iterate_is_psd(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        // b from a PSD point keeps the problem feasible, C = I keeps it bounded
        let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let z0 = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
        let mut sdp = BlockSdp::new(vec![d]);
        sdp.costs[0] = DMatrix::identity(d, d);
        for _ in 0..3 {
            let h = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            let a = (&h + h.transpose()) * 0.5;
            sdp.constraints.push(SdpConstraint { rhs: a.dot(&z0), terms: vec![(0, a)] });
        }
        let r = solve_block_sdp(&sdp, 1e-7).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let lmin = *sym_eig(&r.primal.x[0]).values.last().unwrap();
        prop_assert!(lmin >= -1e-7);
        prop_assert!(r.objective <= z0.trace() + 1e-6);
    }
}
