//! Plain-text problem dumps for cross-checking against external solvers.
//!
//! LPs are written in fixed-column MPS (all rows equalities, all variables
//! non-negative). SDPs are written in SDPA sparse format with `c = b`,
//! `F_i = A_i` and `F_0 = −C`, so the SDPA dual `max ⟨F_0, Y⟩` subject to
//! `⟨F_i, Y⟩ = c_i`, `Y ⪰ 0` is the primal of [`crate::sdp`] up to sign.

use std::fmt::Write;

use crate::lp::LinearProgram;
use crate::sdp::BlockSdp;

pub fn lp_to_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let m = lp.num_rows();
    let n = lp.num_vars();
    let _ = writeln!(out, "NAME          {name}");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  COST");
    for i in 0..m {
        let _ = writeln!(out, " E  R{i}");
    }
    let _ = writeln!(out, "COLUMNS");
    for j in 0..n {
        let col = format!("X{j}");
        if lp.objective[j] != 0.0 {
            let _ = writeln!(out, "    {col:<8}  {:<8}  {:>14e}", "COST", lp.objective[j]);
        }
        for i in 0..m {
            let a = lp.equality_matrix[(i, j)];
            if a != 0.0 {
                let _ = writeln!(out, "    {col:<8}  {:<8}  {:>14e}", format!("R{i}"), a);
            }
        }
    }
    let _ = writeln!(out, "RHS");
    for (i, &b) in lp.equality_rhs.iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>14e}", "RHS", format!("R{i}"), b);
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

/// SDPA sparse text. Entries are upper triangular, blocks and indices 1-based.
pub fn sdp_to_sdpa(sdp: &BlockSdp) -> String {
    let mut out = String::new();
    let m = sdp.constraints.len();
    let _ = writeln!(out, "\"block SDP, F0 = -C\"");
    let _ = writeln!(out, "{m} = mDIM");
    let _ = writeln!(out, "{} = nBLOCK", sdp.block_dims.len());
    let dims: Vec<String> = sdp.block_dims.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "{} = bLOCKsTRUCT", dims.join(" "));
    let rhs: Vec<String> = sdp
        .constraints
        .iter()
        .map(|c| format!("{:e}", c.rhs))
        .collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for (blk, c) in sdp.costs.iter().enumerate() {
        write_block(&mut out, 0, blk, c, -1.0);
    }
    for (i, con) in sdp.constraints.iter().enumerate() {
        for (blk, a) in &con.terms {
            write_block(&mut out, i + 1, *blk, a, 1.0);
        }
    }
    out
}

fn write_block(out: &mut String, mat: usize, blk: usize, a: &nalgebra::DMatrix<f64>, sign: f64) {
    let d = a.nrows();
    for r in 0..d {
        for c in r..d {
            let v = a[(r, c)];
            if v != 0.0 {
                let _ = writeln!(out, "{mat} {} {} {} {:e}", blk + 1, r + 1, c + 1, sign * v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::SdpConstraint;
    use nalgebra::DMatrix;

    #[test]
    fn mps_lists_every_nonzero() {
        let lp = LinearProgram::new(
            vec![1.0, 0.0],
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            vec![2.0],
        )
        .unwrap();
        let text = lp_to_mps(&lp, "tiny");
        assert!(text.starts_with("NAME          tiny"));
        assert_eq!(text.lines().filter(|l| l.contains("R0")).count(), 4);
        assert!(text.trim_end().ends_with("ENDATA"));
    }

    #[test]
    fn sdpa_header_and_entries() {
        let mut sdp = BlockSdp::new(vec![2, 1]);
        sdp.costs[0] = DMatrix::identity(2, 2);
        sdp.constraints.push(SdpConstraint {
            terms: vec![(0, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]))],
            rhs: 1.0,
        });
        let text = sdp_to_sdpa(&sdp);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "1 = mDIM");
        assert_eq!(lines[3], "2 1 = bLOCKsTRUCT");
        assert!(lines.contains(&"0 1 1 1 -1e0"));
        assert!(lines.contains(&"1 1 1 2 5e-1"));
        assert_eq!(lines.len(), 8);
    }
}
