//! Small programs with optima known in closed form.

#![allow(dead_code)]

use edgematch_kernels::{BlockSdp, LinearProgram, SdpConstraint};
use nalgebra::DMatrix;

pub struct LpCase {
    pub name: &'static str,
    pub lp: LinearProgram,
    pub optimum: f64,
}

fn case(name: &'static str, c: &[f64], rows: usize, a: &[f64], b: &[f64], optimum: f64) -> LpCase {
    let lp = LinearProgram::new(
        c.to_vec(),
        DMatrix::from_row_slice(rows, c.len(), a),
        b.to_vec(),
    )
    .expect("fixture is well formed");
    LpCase { name, lp, optimum }
}

pub fn analytic_lps() -> Vec<LpCase> {
    vec![
        // x = 1, y = 0
        case("vertex", &[-1.0, 0.0], 1, &[1.0, 1.0], &[1.0], -1.0),
        // identity beats the swap: 2 vs 0
        case(
            "birkhoff_2x2",
            &[-1.0, 0.0, 0.0, -1.0],
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 1.0, //
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0,
            ],
            &[1.0, 1.0, 1.0, 1.0],
            -2.0,
        ),
        // all mass on the cheapest coordinate
        case(
            "simplex_cheapest",
            &[1.0, 2.0, 3.0],
            1,
            &[1.0, 1.0, 1.0],
            &[1.0],
            1.0,
        ),
        // with x21 = t in [0, 1] the cost is 9 + 3t
        case(
            "transportation",
            &[1.0, 3.0, 2.0, 1.0],
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 1.0, //
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0,
            ],
            &[3.0, 2.0, 1.0, 4.0],
            9.0,
        ),
        // covering rows with surplus variables; optimum at x = 3, y = 1
        case(
            "covering",
            &[2.0, 3.0, 0.0, 0.0],
            2,
            &[
                1.0, 1.0, -1.0, 0.0, //
                1.0, 3.0, 0.0, -1.0,
            ],
            &[4.0, 6.0],
            9.0,
        ),
        // textbook production problem, optimum x = 2, y = 6
        case(
            "production",
            &[-3.0, -5.0, 0.0, 0.0, 0.0],
            3,
            &[
                1.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 2.0, 0.0, 1.0, 0.0, //
                3.0, 2.0, 0.0, 0.0, 1.0,
            ],
            &[4.0, 12.0, 18.0],
            -36.0,
        ),
        // optimal face is an edge, several tight bounds
        case(
            "degenerate_face",
            &[-1.0, -1.0, 0.0, 0.0, 0.0],
            3,
            &[
                1.0, 1.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, 1.0,
            ],
            &[1.0, 1.0, 1.0],
            -1.0,
        ),
        // cycles under naive pivoting; optimum x = (3/4, 0, 0, 1, 0, 1, 0)
        case(
            "cycling_example",
            &[0.0, 0.0, 0.0, -0.75, 20.0, -0.5, 6.0],
            3,
            &[
                1.0, 0.0, 0.0, 0.25, -8.0, -1.0, 9.0, //
                0.0, 1.0, 0.0, 0.5, -12.0, -0.5, 3.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
            ],
            &[0.0, 0.0, 1.0],
            -1.25,
        ),
        // y = x + 2 so the cost is 2 + 2x
        case("shifted_line", &[1.0, 1.0], 1, &[1.0, -1.0], &[-2.0], 2.0),
        // 3x3 assignment, best permutation (1, 0, 2) with cost 5
        {
            let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
            let mut a = vec![0.0; 6 * 9];
            for i in 0..3 {
                for j in 0..3 {
                    a[i * 9 + i * 3 + j] = 1.0;
                    a[(3 + j) * 9 + i * 3 + j] = 1.0;
                }
            }
            case("assignment_3x3", &cost, 6, &a, &[1.0; 6], 5.0)
        },
        // second row is twice the first
        case(
            "redundant_row",
            &[-1.0, 0.0],
            2,
            &[1.0, 1.0, 2.0, 2.0],
            &[1.0, 2.0],
            -1.0,
        ),
        // pure feasibility
        case("zero_objective", &[0.0, 0.0], 1, &[1.0, 1.0], &[1.0], 0.0),
    ]
}

pub fn contradictory_lp() -> LinearProgram {
    LinearProgram::new(
        vec![0.0],
        DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
        vec![1.0, 2.0],
    )
    .unwrap()
}

pub fn sym_unit(d: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(d, d);
    a[(i, j)] += 0.5;
    a[(j, i)] += 0.5;
    a
}

pub struct SdpCase {
    pub name: &'static str,
    pub sdp: BlockSdp,
    pub optimum: f64,
    pub solution: DMatrix<f64>,
}

pub fn analytic_sdps() -> Vec<SdpCase> {
    // minimize trace(Z) s.t. Z11 = 1: Z22 >= Z12^2 / Z11 so Z = e1 e1ᵀ
    let mut pinned = BlockSdp::new(vec![2]);
    pinned.costs[0] = DMatrix::identity(2, 2);
    pinned.constraints.push(SdpConstraint {
        terms: vec![(0, sym_unit(2, 0, 0))],
        rhs: 1.0,
    });

    // adding Z12 = 1 forces Z22 >= 1, attained by [1 1]ᵀ[1 1]
    let mut coupled = BlockSdp::new(vec![2]);
    coupled.costs[0] = DMatrix::identity(2, 2);
    coupled.constraints.push(SdpConstraint {
        terms: vec![(0, sym_unit(2, 0, 0))],
        rhs: 1.0,
    });
    coupled.constraints.push(SdpConstraint {
        terms: vec![(0, sym_unit(2, 0, 1))],
        rhs: 1.0,
    });

    vec![
        SdpCase {
            name: "pinned_corner",
            sdp: pinned,
            optimum: 1.0,
            solution: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        },
        SdpCase {
            name: "coupled_corner",
            sdp: coupled,
            optimum: 2.0,
            solution: DMatrix::from_element(2, 2, 1.0),
        },
    ]
}
