//! SVG 1.1 drawings of puzzles.
//!
//! Multi-colored pieces are drawn as one triangle per edge, spanned by the
//! edge and the piece center and filled with the edge color. Pieces whose
//! edges all share one color get a per-piece fill instead. A rotated piece
//! is drawn over a transparent copy of its unrotated shape. Without a
//! placement the pieces are laid out in a row below the frame.

use std::fmt::Write;

use edgematch::{Piece, Placement, Puzzle, Turn, Vec2};

const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
    "#bcf60c", "#008080", "#9a6324", "#800000",
];
/// Pixels per unit of length.
const SCALE: f64 = 60.0;
const MARGIN: f64 = 0.5;
const GAP: f64 = 0.4;
const STRIP_COLUMNS: usize = 6;

fn color(c: u32) -> &'static str {
    PALETTE[c as usize % PALETTE.len()]
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Edges,
    Pieces,
}

struct Canvas {
    body: String,
    lo: Vec2,
    hi: Vec2,
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            body: String::new(),
            lo: Vec2::repeat(f64::INFINITY),
            hi: Vec2::repeat(f64::NEG_INFINITY),
        }
    }

    fn include(&mut self, p: &Vec2) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    /// World points are stored as is and flipped when the document is
    /// finished, so `y` points up.
    fn polygon(&mut self, points: &[Vec2], class: &str, attrs: &str) {
        points.iter().for_each(|p| self.include(p));
        let pts: Vec<String> = points
            .iter()
            .map(|p| format!("{:.4},{:.4}", p.x, p.y))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{}" {attrs}/>"#,
            pts.join(" ")
        );
    }

    fn line(&mut self, a: &Vec2, b: &Vec2, attrs: &str) {
        self.include(a);
        self.include(b);
        let _ = writeln!(
            self.body,
            r#"<line class="frame-edge" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" {attrs}/>"#,
            a.x, a.y, b.x, b.y
        );
    }

    fn label(&mut self, at: &Vec2, text: &str) {
        self.include(at);
        // text is placed in flipped coordinates so it reads upright
        let _ = writeln!(
            self.body,
            r#"<text x="{:.4}" y="{:.4}" transform="scale(1,-1)" font-size="0.25" font-family="sans-serif">{text}</text>"#,
            at.x, -at.y
        );
    }

    fn finish(self) -> String {
        let lo = self.lo - Vec2::repeat(MARGIN);
        let hi = self.hi + Vec2::repeat(MARGIN);
        let size = hi - lo;
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{:.4} {:.4} {:.4} {:.4}\">\n",
                "<g transform=\"scale(1,-1)\" stroke-linejoin=\"round\">\n{}</g>\n</svg>\n"
            ),
            size.x * SCALE,
            size.y * SCALE,
            lo.x,
            -hi.y,
            size.x,
            size.y,
            self.body
        )
    }
}

fn style_of(puzzle: &Puzzle) -> Style {
    let mut colors = puzzle
        .pieces
        .iter()
        .flat_map(|p| p.base_edges().map(|e| e.color));
    let first = colors.next();
    if colors.all(|c| Some(c) == first) {
        Style::Pieces
    } else {
        Style::Edges
    }
}

fn place(v: &Vec2, t: &Vec2, phi: Turn) -> Vec2 {
    t + phi.rotate(v)
}

fn draw_piece(canvas: &mut Canvas, piece: &Piece, t: &Vec2, phi: Turn, style: Style, opacity: f64) {
    if phi != Turn::ZERO {
        let ghost: Vec<Vec2> = piece.vertices.iter().map(|v| t + v).collect();
        canvas.polygon(
            &ghost,
            "ghost",
            r##"fill="#888888" fill-opacity="0.3" stroke="#555555" stroke-width="0.01""##,
        );
    }
    let o = if opacity < 1.0 {
        format!(r#" opacity="{opacity}""#)
    } else {
        String::new()
    };
    match style {
        Style::Edges => {
            for e in piece.base_edges() {
                let tri = [
                    *t,
                    place(&e.endpoints[0], t, phi),
                    place(&e.endpoints[1], t, phi),
                ];
                let attrs = format!(
                    r##"fill="{}" stroke="#333333" stroke-width="0.01"{o}"##,
                    color(e.color)
                );
                canvas.polygon(&tri, "edge", &attrs);
            }
        }
        Style::Pieces => {
            let outline: Vec<Vec2> = piece.vertices.iter().map(|v| place(v, t, phi)).collect();
            let attrs = format!(
                r##"fill="{}" stroke="#333333" stroke-width="0.02"{o}"##,
                color(piece.id)
            );
            canvas.polygon(&outline, "piece", &attrs);
        }
    }
}

fn draw_frame(canvas: &mut Canvas, puzzle: &Puzzle, shift: &Vec2) {
    let region: Vec<Vec2> = puzzle.frame.region.iter().map(|v| v + shift).collect();
    canvas.polygon(
        &region,
        "frame",
        r##"fill="none" stroke="#222222" stroke-width="0.04""##,
    );
    if style_of(puzzle) == Style::Edges {
        for e in &puzzle.frame.edges {
            let attrs = format!(
                r#"stroke="{}" stroke-width="0.08" stroke-opacity="0.8""#,
                color(e.color)
            );
            canvas.line(&(e.endpoints[0] + shift), &(e.endpoints[1] + shift), &attrs);
        }
    }
}

/// Translations laying the pieces out left to right below the frame.
fn scrambled_layout(puzzle: &Puzzle) -> Vec<Vec2> {
    let (lo, _) = edgematch::polygon::bounding_box(puzzle.frame.region.iter().copied())
        .expect("frame has vertices");
    let mut x = lo.x;
    puzzle
        .pieces
        .iter()
        .map(|p| {
            let (plo, phi) = edgematch::polygon::bounding_box(p.vertices.iter().copied())
                .expect("piece has vertices");
            let t = Vec2::new(x - plo.x, lo.y - GAP - phi.y);
            x += phi.x - plo.x + GAP;
            t
        })
        .collect()
}

/// The whole drawing: frame with pieces (solved or scrambled), then one
/// small panel per entry of `strip` showing that iteration's locations.
pub fn render_svg(puzzle: &Puzzle, placement: Option<&Placement>, strip: &[Vec<Vec2>]) -> String {
    let mut canvas = Canvas::new();
    let style = style_of(puzzle);
    draw_frame(&mut canvas, puzzle, &Vec2::zeros());
    match placement {
        Some(p) => {
            for (i, piece) in puzzle.pieces.iter().enumerate() {
                draw_piece(
                    &mut canvas,
                    piece,
                    &p.translations[i],
                    p.orientations[i],
                    style,
                    1.0,
                );
            }
        }
        None => {
            for (piece, t) in puzzle.pieces.iter().zip(scrambled_layout(puzzle)) {
                draw_piece(&mut canvas, piece, &t, Turn::ZERO, style, 1.0);
            }
        }
    }
    if !strip.is_empty() {
        let (lo, hi) = edgematch::polygon::bounding_box(puzzle.frame.region.iter().copied())
            .expect("frame has vertices");
        let size = hi - lo;
        let top = canvas.lo.y - 2.0 * GAP;
        for (k, locations) in strip.iter().enumerate() {
            let (row, col) = (k / STRIP_COLUMNS, k % STRIP_COLUMNS);
            let corner = Vec2::new(
                lo.x + col as f64 * (size.x + 2.0 * GAP),
                top - (row + 1) as f64 * (size.y + 3.0 * GAP),
            );
            let shift = corner - lo;
            draw_frame(&mut canvas, puzzle, &shift);
            for (piece, t) in puzzle.pieces.iter().zip(locations) {
                draw_piece(
                    &mut canvas,
                    piece,
                    &(t + shift),
                    Turn::ZERO,
                    Style::Pieces,
                    0.6,
                );
            }
            canvas.label(
                &(corner + Vec2::new(0.0, size.y + 0.1)),
                &format!("iteration {}", k + 1),
            );
        }
    }
    canvas.finish()
}
