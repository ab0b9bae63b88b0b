//! Assembly and evaluation of the polynomial system of a puzzle.
//!
//! For every canonical edge type `τ` and monomial `m` the system holds
//!
//! ```text
//! Σ_i Σ_l α_{i,l} · m(R_l t_i) + α_0 = 0,   α_{i,l} = Σ_j s_{ij}(τ) · coef(edge_ij, m)
//! ```
//!
//! where `l` ranges over the rotation links of rotation-augmented puzzles
//! (a single zero link otherwise) and `α_0` collects the frame edges.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;

use super::monomial::{edge_coefficient, Family, Mode, Monomial};
use crate::error::{Error, Result};
use crate::geometry::{canonical_edge_type, Placement, Puzzle, TypeKey};
use crate::normalize::{normalize_coordinates, AffineTransform};
use crate::polygon::Vec2;
use crate::turn::Turn;

/// Default cap on the per-type degree.
pub const DEFAULT_DEGREE_CAP: u32 = 12;

/// Equations whose net coefficients are this small relative to the summed
/// edge contributions are treated as identically zero.
const CANCELLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    pub family: Family,
    pub mode: Mode,
    pub degree_cap: u32,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            family: Family::ComplexPower,
            mode: Mode::Point,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyEquation {
    pub type_key: TypeKey,
    pub monomial: Monomial,
    /// `α_{i,l}` stored piece-major: index `i · links + l`.
    pub coeffs: Vec<Complex64>,
    /// Frame contribution `α_0`.
    pub constant: Complex64,
}

#[derive(Debug, Clone)]
pub struct PolySystem {
    pub equations: Vec<PolyEquation>,
    /// Maps original coordinates to the normalized ones the coefficients use.
    pub normalization: AffineTransform,
    /// Degree used per type after capping.
    pub degrees: BTreeMap<TypeKey, u32>,
    pub family: Family,
    pub mode: Mode,
    pub num_pieces: usize,
    /// Rotations linking the copies of each piece; `[0]` for plain puzzles.
    pub links: Vec<Turn>,
    /// Notes such as degree capping that make the representation incomplete.
    pub warnings: Vec<String>,
}

impl PolyEquation {
    pub fn coeff(&self, piece: usize, link: usize, links: usize) -> Complex64 {
        self.coeffs[piece * links + link]
    }
}

impl PolySystem {
    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    /// Equation value and magnitude scale `1 + Σ|α·m|` at normalized translations.
    pub fn evaluate(&self, eq: &PolyEquation, translations: &[Vec2]) -> (Complex64, f64) {
        let nl = self.links.len();
        let mut value = eq.constant;
        let mut scale = 1.0;
        for (i, t) in translations.iter().enumerate() {
            for (l, link) in self.links.iter().enumerate() {
                let a = eq.coeffs[i * nl + l];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let term = a * eq.monomial.eval(&link.rotate(t));
                value += term;
                scale += term.norm();
            }
        }
        (value, scale)
    }

    /// Largest scaled equation violation at translations already in normalized coordinates.
    pub fn residual_normalized(&self, translations: &[Vec2]) -> f64 {
        self.equations
            .iter()
            .map(|eq| {
                let (v, s) = self.evaluate(eq, translations);
                v.norm() / s
            })
            .fold(0.0, f64::max)
    }

    /// Plain-text dump: one equation per line with the type key, the degree,
    /// then `α_0, α_1, …` as real/imaginary pairs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# family={:?} mode={:?} pieces={} links={}",
            self.family,
            self.mode,
            self.num_pieces,
            self.links.len()
        );
        for eq in &self.equations {
            let degree = match eq.monomial {
                Monomial::Complex(k) => k.to_string(),
                Monomial::Real(kx, ky) => format!("{kx},{ky}"),
            };
            let _ = write!(
                out,
                "{} {}/{} {} {:e} {:e}",
                eq.type_key.color,
                eq.type_key.angle.numer(),
                eq.type_key.angle.denom(),
                degree,
                eq.constant.re,
                eq.constant.im
            );
            for a in &eq.coeffs {
                let _ = write!(out, " {:e} {:e}", a.re, a.im);
            }
            out.push('\n');
        }
        out
    }
}

/// `K(c, θ)`: the number of edges, on pieces or the frame, of each canonical
/// type with the canonical orientation. In a solution each of them pairs
/// with exactly one edge of the opposite orientation.
pub fn completeness_degrees(puzzle: &Puzzle) -> BTreeMap<TypeKey, u32> {
    puzzle
        .type_counts()
        .into_iter()
        .map(|(k, (plus, minus))| (k, plus.max(minus) as u32))
        .collect()
}

/// Assembles the system over all types with `completeness_degrees`, capped.
pub fn assemble_complete(puzzle: &Puzzle, opts: &AssembleOptions) -> Result<PolySystem> {
    assemble_system(puzzle, &completeness_degrees(puzzle), opts)
}

/// Assembles one equation per type and monomial up to the type's degree
/// (capped by `opts.degree_cap`). Coordinates are normalized first; every
/// equation is scaled so its largest coefficient has magnitude 1 and
/// equations whose coefficients cancel to zero are dropped.
pub fn assemble_system(
    puzzle: &Puzzle,
    degrees: &BTreeMap<TypeKey, u32>,
    opts: &AssembleOptions,
) -> Result<PolySystem> {
    if opts.degree_cap == 0 {
        return Err(Error::Precondition("degree cap must be positive".into()));
    }
    if puzzle.augmented_copies.is_none() {
        puzzle.check_balanced()?;
    }
    let n = puzzle.num_pieces();
    let mut warnings = Vec::new();
    if n == 0 {
        return Ok(PolySystem {
            equations: Vec::new(),
            normalization: AffineTransform::identity(),
            degrees: BTreeMap::new(),
            family: opts.family,
            mode: opts.mode,
            num_pieces: 0,
            links: vec![Turn::ZERO],
            warnings,
        });
    }
    let (norm, transform) = normalize_coordinates(puzzle)?;

    let mut links: Vec<Turn> = norm
        .pieces
        .iter()
        .flat_map(|p| p.edges.iter().map(|e| e.link))
        .collect();
    links.sort();
    links.dedup();
    let nl = links.len();

    let mut used = BTreeMap::new();
    for (key, &k) in degrees {
        if k == 0 {
            return Err(Error::Precondition(format!(
                "degree for color {} must be positive",
                key.color
            )));
        }
        let capped = k.min(opts.degree_cap);
        if capped < k {
            let msg = format!(
                "color {} at {:?}: degree {k} capped to {capped}; possibly incomplete representation",
                key.color, key.angle
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        used.insert(*key, capped);
    }

    // edges grouped by type: (owner, link index, sign, edge)
    let mut by_type: BTreeMap<TypeKey, Vec<(usize, usize, f64, &crate::geometry::EdgeElement)>> =
        BTreeMap::new();
    for (owner, e) in norm.all_edges() {
        let (key, sign) = canonical_edge_type(e);
        let l = if owner == 0 {
            0
        } else {
            links.binary_search(&e.link).expect("link collected above")
        };
        by_type
            .entry(key)
            .or_default()
            .push((owner, l, f64::from(sign), e));
    }

    let mut equations = Vec::new();
    for (key, &k) in &used {
        let Some(edges) = by_type.get(key) else {
            continue;
        };
        for monomial in Monomial::up_to(opts.family, k) {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); n * nl];
            let mut constant = Complex64::new(0.0, 0.0);
            let mut gross = 0.0;
            for &(owner, l, sign, e) in edges {
                let c = edge_coefficient(e, &monomial, opts.mode) * sign;
                gross += c.norm();
                if owner == 0 {
                    constant += c;
                } else {
                    coeffs[(owner - 1) * nl + l] += c;
                }
            }
            let big = coeffs
                .iter()
                .map(|c| c.norm())
                .fold(constant.norm(), f64::max);
            // contributions that cancel exactly leave rounding noise, which
            // equilibration would blow up into a spurious equation
            if big <= CANCELLATION_TOL * gross {
                continue;
            }
            coeffs.iter_mut().for_each(|c| *c /= big);
            constant /= big;
            equations.push(PolyEquation {
                type_key: *key,
                monomial,
                coeffs,
                constant,
            });
        }
    }
    Ok(PolySystem {
        equations,
        normalization: transform,
        degrees: used,
        family: opts.family,
        mode: opts.mode,
        num_pieces: n,
        links,
        warnings,
    })
}

/// Largest scaled violation `|Σ α m + α_0| / (1 + Σ|α m|)` at a placement
/// given in the puzzle's original coordinates. Orientations are ignored: the
/// system describes translations only (rotations enter through augmentation).
pub fn residual(system: &PolySystem, placement: &Placement) -> f64 {
    let ts: Vec<Vec2> = placement
        .translations
        .iter()
        .map(|t| system.normalization.apply(t))
        .collect();
    system.residual_normalized(&ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_grid_puzzle;
    use crate::geometry::{Frame, Piece};

    #[test]
    fn single_cell_distinct_colors() {
        let (p, planted) = generate_grid_puzzle(1, 1, 1_000_000, 4).unwrap();
        let degrees: BTreeMap<TypeKey, u32> =
            completeness_degrees(&p).keys().map(|k| (*k, 1)).collect();
        assert_eq!(degrees.len(), 4);
        let sys = assemble_system(&p, &degrees, &AssembleOptions::default()).unwrap();
        assert_eq!(sys.equations.len(), 4);
        for eq in &sys.equations {
            // α_1 T + α_0 = 0 with T the planted root: α_1 = −α_0 e^{−(b_frame − b_piece)·k}
            assert!(eq.coeffs[0].norm() > 0.0 && eq.constant.norm() > 0.0);
        }
        assert!(residual(&sys, &planted) < 1e-12);
    }

    #[test]
    fn one_color_grid_counts_pieces_and_frame() {
        let (p, _) = generate_grid_puzzle(6, 6, 1, 0).unwrap();
        let degrees = completeness_degrees(&p);
        assert_eq!(degrees.len(), 2);
        // vertical sides: 36 pieces plus 6 frame rows per orientation; the
        // 30 interior adjacencies alone would undercount by the frame pairs
        let vertical: usize = p
            .pieces
            .iter()
            .flat_map(|q| q.edges.iter().map(|e| e.endpoints))
            .chain(p.frame.edges.iter().map(|e| e.endpoints))
            .filter(|[a, b]| (a.x - b.x).abs() < 1e-12)
            .count();
        assert_eq!(vertical, 84);
        for k in degrees.values() {
            assert_eq!(*k as usize, vertical / 2);
        }
    }

    #[test]
    fn empty_puzzle() {
        let region = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let frame = Frame::from_region(region, &[0, 1, 0, 1]).unwrap();
        let p = Puzzle {
            frame,
            pieces: Vec::<Piece>::new(),
            rotation_order: 1,
            augmented_copies: None,
            preset_locations: None,
        };
        assert!(
            completeness_degrees(&Puzzle {
                frame: p.frame.clone(),
                ..p.clone()
            })
            .len()
                == 2
        );
        let sys = assemble_system(&p, &BTreeMap::new(), &AssembleOptions::default()).unwrap();
        assert!(sys.equations.is_empty());
        assert_eq!(residual(&sys, &Placement::translation_only(vec![])), 0.0);
    }

    #[test]
    fn opposite_pair_on_one_piece() {
        // a piece whose two same-colored vertical sides sit at b = (±½, 0)
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let (piece, _) = Piece::from_polygon(1, &sq, &[1, 0, 2, 0]).unwrap();
        let frame = Frame::from_region(sq.to_vec(), &[1, 0, 2, 0]).unwrap();
        let mut p = Puzzle::new(frame, vec![piece], 1, None).unwrap();
        // shift so the frame is the unit box about the origin and normalization is the identity
        p = crate::generate::translate_puzzle(
            &p,
            &Placement::translation_only(vec![Vec2::zeros()]),
            &Vec2::new(-0.5, -0.5),
        )
        .0;
        let key = TypeKey {
            color: 0,
            angle: Turn::ZERO,
        };
        let degrees = BTreeMap::from([(key, 1)]);
        let sys = assemble_system(&p, &degrees, &AssembleOptions::default()).unwrap();
        assert_eq!(sys.normalization, AffineTransform::identity());
        let alpha: Complex64 = p.pieces[0]
            .edges
            .iter()
            .filter(|e| canonical_edge_type(e).0 == key)
            .map(|e| {
                edge_coefficient(e, &Monomial::Complex(1), Mode::Point)
                    * f64::from(canonical_edge_type(e).1)
            })
            .sum();
        assert!((alpha.re - 1.042_190_610_987_494_7).abs() < 1e-15 && alpha.im.abs() < 1e-15);
        // after equilibration the piece and frame terms cancel at t = 0
        let eq = &sys.equations[0];
        assert!((eq.coeffs[0] + eq.constant).norm() < 1e-15);
    }

    #[test]
    fn dump_is_one_line_per_equation() {
        let (p, _) = generate_grid_puzzle(2, 2, 3, 1).unwrap();
        let sys = assemble_complete(&p, &AssembleOptions::default()).unwrap();
        let text = sys.to_text();
        assert_eq!(text.lines().count(), sys.equations.len() + 1);
        let fields = text.lines().nth(1).unwrap().split_whitespace().count();
        assert_eq!(fields, 3 + 2 + 2 * p.num_pieces());
    }
}
