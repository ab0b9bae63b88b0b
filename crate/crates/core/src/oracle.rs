//! Exhaustive search and power-sum checks used as ground truth.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{placed_edge, validate_solution, Placement, Puzzle, DEFAULT_VALIDITY_TOL};
use crate::polygon::{self, Vec2};
use crate::turn::Turn;

/// Largest number of pieces the search accepts.
pub const MAX_ORACLE_PIECES: usize = 12;

/// Upper bound on the estimated search size, `N! · r^N`.
pub const MAX_SEARCH_ESTIMATE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    /// Distinct solutions in canonical order.
    pub placements: Vec<Placement>,
    /// Whether the whole search space was explored.
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
struct OpenEdge {
    mid: Vec2,
    orientation: Turn,
    color: u32,
    length: f64,
    matched: bool,
}

struct Search<'a> {
    puzzle: &'a Puzzle,
    rotations: Vec<Turn>,
    tol: f64,
    limit: usize,
    found: Vec<Placement>,
    stopped: bool,
    polygons: Vec<Option<Vec<Vec2>>>,
}

/// All solutions (up to `limit`) by depth-first anchoring: the first open
/// edge, frame edges first, must be covered by some unplaced piece in some
/// allowed rotation, which fixes that piece's translation. Each solution is
/// therefore reached exactly once.
pub fn brute_force_solve(puzzle: &Puzzle, limit: usize) -> Result<SolutionSet> {
    if puzzle.augmented_copies.is_some() {
        return Err(Error::Precondition(
            "search runs on the original puzzle, not its rotation augmentation".into(),
        ));
    }
    let n = puzzle.num_pieces();
    let r = puzzle.rotation_order.max(1);
    let estimate = (1..=n).map(|k| k as f64).product::<f64>() * f64::from(r).powi(n as i32);
    if n > MAX_ORACLE_PIECES || estimate > MAX_SEARCH_ESTIMATE {
        return Err(Error::SearchTooLarge(format!(
            "{n} pieces with {r} rotations give an estimated {estimate:.3e} nodes (limit {MAX_SEARCH_ESTIMATE:e})"
        )));
    }
    let scale = puzzle
        .frame
        .region
        .iter()
        .map(|v| v.amax())
        .fold(1.0, f64::max);
    let mut search = Search {
        puzzle,
        rotations: (0..r).map(|k| Turn::fraction(k.into(), r)).collect(),
        tol: DEFAULT_VALIDITY_TOL * scale,
        limit,
        found: Vec::new(),
        stopped: false,
        polygons: vec![None; n],
    };
    let open: Vec<OpenEdge> = puzzle
        .frame
        .edges
        .iter()
        .map(|e| OpenEdge {
            mid: e.offset,
            orientation: e.orientation,
            color: e.color,
            length: e.length(),
            matched: false,
        })
        .collect();
    let mut poses = vec![None; n];
    if limit > 0 {
        search.descend(&mut poses, open);
    }
    let mut placements = search.found;
    sort_canonically(puzzle, &mut placements);
    Ok(SolutionSet {
        placements,
        exhausted: !search.stopped,
    })
}

impl Search<'_> {
    fn descend(&mut self, poses: &mut Vec<Option<(Vec2, Turn)>>, open: Vec<OpenEdge>) {
        if self.stopped {
            return;
        }
        if poses.iter().all(|p| p.is_some()) {
            let placement = Placement {
                translations: poses.iter().map(|p| p.unwrap().0).collect(),
                orientations: poses.iter().map(|p| p.unwrap().1).collect(),
            };
            if validate_solution(self.puzzle, &placement, self.tol)
                .map(|r| r.is_valid)
                .unwrap_or(false)
            {
                self.found.push(placement);
                if self.found.len() >= self.limit {
                    self.stopped = true;
                }
            }
            return;
        }
        let Some(anchor) = open.iter().find(|o| !o.matched).cloned() else {
            return;
        };
        let target = anchor.orientation.opposite();
        for i in 0..self.puzzle.num_pieces() {
            if poses[i].is_some() {
                continue;
            }
            let piece = &self.puzzle.pieces[i];
            for phi in self.rotations.clone() {
                for e in &piece.edges {
                    if e.orientation + phi != target
                        || e.color != anchor.color
                        || (e.length() - anchor.length).abs() > self.tol
                    {
                        continue;
                    }
                    let t = anchor.mid - phi.rotate(&e.offset);
                    if let Some(next) = self.try_place(i, &t, phi, &open) {
                        poses[i] = Some((t, phi));
                        self.polygons[i] =
                            Some(piece.vertices.iter().map(|v| t + phi.rotate(v)).collect());
                        self.descend(poses, next);
                        poses[i] = None;
                        self.polygons[i] = None;
                        if self.stopped {
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Open-edge list after placing piece `i`, or `None` if the pose conflicts.
    fn try_place(&self, i: usize, t: &Vec2, phi: Turn, open: &[OpenEdge]) -> Option<Vec<OpenEdge>> {
        let piece = &self.puzzle.pieces[i];
        let outline: Vec<Vec2> = piece.vertices.iter().map(|v| t + phi.rotate(v)).collect();
        if !outline
            .iter()
            .all(|v| polygon::contains_point(&self.puzzle.frame.region, v, self.tol))
        {
            return None;
        }
        if self
            .polygons
            .iter()
            .flatten()
            .any(|q| polygon::overlap(&outline, q, self.tol))
        {
            return None;
        }
        let mut next = open.to_vec();
        for e in &piece.edges {
            let (mid, orientation) = placed_edge(e, t, phi);
            let opposite = orientation.opposite();
            let hit = next.iter_mut().find(|o| {
                !o.matched && o.orientation == opposite && (o.mid - mid).norm() <= self.tol
            });
            match hit {
                Some(o) => {
                    if o.color != e.color || (o.length - e.length()).abs() > self.tol {
                        return None;
                    }
                    o.matched = true;
                }
                None => next.push(OpenEdge {
                    mid,
                    orientation,
                    color: e.color,
                    length: e.length(),
                    matched: false,
                }),
            }
        }
        Some(next)
    }
}

/// Sorts by the preset index (then rotation) of each piece when presets
/// exist, otherwise by translations rounded to `1e−6`.
fn sort_canonically(puzzle: &Puzzle, placements: &mut [Placement]) {
    let key = |p: &Placement| -> Vec<i64> {
        let mut k = Vec::with_capacity(2 * p.len());
        for (t, phi) in p.translations.iter().zip(&p.orientations) {
            match &puzzle.preset_locations {
                Some(s) => {
                    let idx = s
                        .iter()
                        .enumerate()
                        .min_by(|a, b| (a.1 - t).norm().total_cmp(&(b.1 - t).norm()))
                        .map_or(0, |(j, _)| j);
                    k.push(idx as i64);
                }
                None => {
                    k.push((t.x * 1e6).round() as i64);
                    k.push((t.y * 1e6).round() as i64);
                }
            }
            k.push(phi.numer() * (360 / phi.denom().max(1)));
        }
        k
    };
    placements.sort_by_cached_key(key);
}

/// Preset index assigned to each piece by a placement, if every translation is a preset.
pub fn assignment_vector(puzzle: &Puzzle, placement: &Placement, tol: f64) -> Option<Vec<usize>> {
    let presets = puzzle.preset_locations.as_ref()?;
    placement
        .translations
        .iter()
        .map(|t| presets.iter().position(|s| (s - t).norm() <= tol))
        .collect()
}

/// `max_{k ≤ K} |Σ u_i^k − Σ v_i^k|`.
pub fn power_sum_check(u: &[Complex64], v: &[Complex64], k: u32) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "power sums of {} and {} values",
            u.len(),
            v.len()
        )));
    }
    if k == 0 {
        return Err(Error::Precondition(
            "power-sum degree must be at least 1".into(),
        ));
    }
    let pu = power_sums(u, k);
    let pv = power_sums(v, k);
    Ok(pu
        .iter()
        .zip(&pv)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// `p_1, …, p_K`.
pub fn power_sums(u: &[Complex64], k: u32) -> Vec<Complex64> {
    (1..=k as i32)
        .map(|d| u.iter().map(|x| x.powi(d)).sum())
        .collect()
}

/// Elementary symmetric polynomials `e_1, …, e_K` from power sums by
/// Newton's identities `k e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} p_i`.
pub fn elementary_from_power_sums(p: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=p.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * p[i - 1] * sign;
        }
        e.push(acc / k as f64);
    }
    e.remove(0);
    e
}

/// Elementary symmetric polynomials by expanding `Π (1 + u_i x)`.
pub fn elementary_symmetric(u: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); u.len() + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for (m, x) in u.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            let prev = c[k - 1];
            c[k] += prev * x;
        }
    }
    c.remove(0);
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Number of permutations of `v` checked (`N!`).
    pub permutations: usize,
    pub max_permutation_violation: f64,
    pub trials: usize,
    pub min_witness_violation: f64,
    /// Permutations pass at `1e−10` and all witnesses violate by more than `1e−6`.
    pub passed: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Checks that the power sums up to degree `N` determine `v` up to
/// permutation: every permutation of `v` matches, and `trials` random
/// vectors that are not permutations of `v` do not.
pub fn power_sum_witness_test(v: &[Complex64], trials: usize, seed: u64) -> Result<WitnessReport> {
    let n = v.len();
    if n == 0 || n > 4 {
        return Err(Error::Precondition(format!(
            "witness test needs 1 to 4 values, got {n}"
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (v[i] - v[j]).norm() <= 1e-8 {
                return Err(Error::Precondition(
                    "values must be pairwise distinct".into(),
                ));
            }
        }
    }
    let k = n as u32;
    let perms = permutations(n);
    let mut max_perm = 0.0f64;
    for p in &perms {
        let u: Vec<Complex64> = p.iter().map(|&j| v[j]).collect();
        max_perm = max_perm.max(power_sum_check(&u, v, k)?);
    }

    let real = v.iter().all(|x| x.im == 0.0);
    let lo = v
        .iter()
        .fold(Complex64::new(f64::INFINITY, f64::INFINITY), |a, x| {
            Complex64::new(a.re.min(x.re), a.im.min(x.im))
        });
    let hi = v.iter().fold(
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        |a, x| Complex64::new(a.re.max(x.re), a.im.max(x.im)),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_witness = f64::INFINITY;
    for _ in 0..trials {
        let u = loop {
            let u: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re = rng.gen_range(lo.re - 1.0..hi.re + 1.0);
                    let im = if real {
                        0.0
                    } else {
                        rng.gen_range(lo.im - 1.0..hi.im + 1.0)
                    };
                    Complex64::new(re, im)
                })
                .collect();
            let near = perms.iter().any(|p| {
                p.iter()
                    .enumerate()
                    .all(|(i, &j)| (u[i] - v[j]).norm() <= 1e-8)
            });
            if !near {
                break u;
            }
        };
        min_witness = min_witness.min(power_sum_check(&u, v, k)?);
    }
    Ok(WitnessReport {
        permutations: perms.len(),
        max_permutation_violation: max_perm,
        trials,
        min_witness_violation: min_witness,
        passed: max_perm <= 1e-10 && (trials == 0 || min_witness > 1e-6),
    })
}
