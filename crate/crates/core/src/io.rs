//! JSON puzzle and placement files.
//!
//! Coordinates are plain numbers and orientations are `[numerator,
//! denominator]` pairs of a full turn. Numbers are written in shortest
//! round-trip form, so saving and loading reproduces every coordinate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeElement, Frame, Piece, Placement, Puzzle};
use crate::polygon::Vec2;
use crate::turn::Turn;

type Point = [f64; 2];
type Fraction = [i64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    endpoints: [Point; 2],
    color: u32,
    orientation: Fraction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    link: Option<Fraction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    region: Vec<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    extra_regions: Vec<Vec<Point>>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceRecord {
    id: u32,
    vertices: Vec<Point>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRecord {
    translations: Vec<Point>,
    orientations: Vec<Fraction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PuzzleRecord {
    frame: FrameRecord,
    pieces: Vec<PieceRecord>,
    rotation_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    augmented_copies: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset_locations: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<PlacementRecord>,
}

fn pt(v: &Vec2) -> Point {
    [v.x, v.y]
}

fn vec2(p: &Point) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn frac(t: &Turn) -> Fraction {
    [t.numer(), t.denom()]
}

fn turn(f: &Fraction, what: &str) -> Result<Turn> {
    Turn::new(f[0], f[1]).map_err(|e| Error::InvalidPuzzle(format!("{what}: {e}")))
}

fn edge_record(e: &EdgeElement) -> EdgeRecord {
    EdgeRecord {
        endpoints: [pt(&e.endpoints[0]), pt(&e.endpoints[1])],
        color: e.color,
        orientation: frac(&e.orientation),
        link: (e.link != Turn::ZERO).then(|| frac(&e.link)),
    }
}

fn edge_from(r: &EdgeRecord, what: &str) -> Result<EdgeElement> {
    let a = vec2(&r.endpoints[0]);
    let b = vec2(&r.endpoints[1]);
    Ok(EdgeElement {
        endpoints: [a, b],
        offset: (a + b) * 0.5,
        color: r.color,
        orientation: turn(&r.orientation, what)?,
        link: match &r.link {
            Some(l) => turn(l, what)?,
            None => Turn::ZERO,
        },
    })
}

fn placement_record(p: &Placement) -> PlacementRecord {
    PlacementRecord {
        translations: p.translations.iter().map(pt).collect(),
        orientations: p.orientations.iter().map(frac).collect(),
    }
}

fn placement_from(r: &PlacementRecord) -> Result<Placement> {
    if r.translations.len() != r.orientations.len() {
        return Err(Error::InvalidPuzzle(format!(
            "placement: {} translations but {} orientations",
            r.translations.len(),
            r.orientations.len()
        )));
    }
    Ok(Placement {
        translations: r.translations.iter().map(vec2).collect(),
        orientations: r
            .orientations
            .iter()
            .enumerate()
            .map(|(i, f)| turn(f, &format!("placement orientation {i}")))
            .collect::<Result<_>>()?,
    })
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn puzzle_to_json(puzzle: &Puzzle, planted: Option<&Placement>) -> String {
    let record = PuzzleRecord {
        frame: FrameRecord {
            region: puzzle.frame.region.iter().map(pt).collect(),
            extra_regions: puzzle
                .frame
                .extra_regions
                .iter()
                .map(|r| r.iter().map(pt).collect())
                .collect(),
            edges: puzzle.frame.edges.iter().map(edge_record).collect(),
        },
        pieces: puzzle
            .pieces
            .iter()
            .map(|p| PieceRecord {
                id: p.id,
                vertices: p.vertices.iter().map(pt).collect(),
                edges: p.edges.iter().map(edge_record).collect(),
            })
            .collect(),
        rotation_order: puzzle.rotation_order,
        augmented_copies: puzzle.augmented_copies,
        preset_locations: puzzle
            .preset_locations
            .as_ref()
            .map(|s| s.iter().map(pt).collect()),
        planted: planted.map(placement_record),
    };
    serde_json::to_string_pretty(&record).expect("puzzle records always serialize")
}

/// Parses a puzzle document and checks all structural invariants.
pub fn puzzle_from_json(text: &str) -> Result<(Puzzle, Option<Placement>)> {
    let record: PuzzleRecord = serde_json::from_str(text).map_err(parse_error)?;
    let frame = Frame {
        region: record.frame.region.iter().map(vec2).collect(),
        extra_regions: record
            .frame
            .extra_regions
            .iter()
            .map(|r| r.iter().map(vec2).collect())
            .collect(),
        edges: record
            .frame
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| edge_from(e, &format!("frame edge {k}")))
            .collect::<Result<_>>()?,
    };
    let pieces = record
        .pieces
        .iter()
        .map(|p| {
            Ok(Piece {
                id: p.id,
                vertices: p.vertices.iter().map(vec2).collect(),
                edges: p
                    .edges
                    .iter()
                    .enumerate()
                    .map(|(k, e)| edge_from(e, &format!("piece {} edge {k}", p.id)))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let puzzle = Puzzle {
        frame,
        pieces,
        rotation_order: record.rotation_order,
        augmented_copies: record.augmented_copies,
        preset_locations: record
            .preset_locations
            .as_ref()
            .map(|s| s.iter().map(vec2).collect()),
    };
    puzzle.check()?;
    let planted = record.planted.as_ref().map(placement_from).transpose()?;
    if let Some(p) = &planted {
        if p.len() != puzzle.num_pieces() {
            return Err(Error::InvalidPuzzle(format!(
                "planted placement has {} entries for {} pieces",
                p.len(),
                puzzle.num_pieces()
            )));
        }
    }
    Ok((puzzle, planted))
}

pub fn placement_to_json(placement: &Placement) -> String {
    serde_json::to_string_pretty(&placement_record(placement))
        .expect("placement records always serialize")
}

pub fn placement_from_json(text: &str) -> Result<Placement> {
    let record: PlacementRecord = serde_json::from_str(text).map_err(parse_error)?;
    placement_from(&record)
}

pub fn save_puzzle(
    path: impl AsRef<Path>,
    puzzle: &Puzzle,
    planted: Option<&Placement>,
) -> Result<()> {
    std::fs::write(path, puzzle_to_json(puzzle, planted) + "\n")?;
    Ok(())
}

pub fn load_puzzle(path: impl AsRef<Path>) -> Result<(Puzzle, Option<Placement>)> {
    puzzle_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_placement(path: impl AsRef<Path>, placement: &Placement) -> Result<()> {
    std::fs::write(path, placement_to_json(placement) + "\n")?;
    Ok(())
}

pub fn load_placement(path: impl AsRef<Path>) -> Result<Placement> {
    placement_from_json(&std::fs::read_to_string(path)?)
}
