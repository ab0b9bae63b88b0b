//! Planar polygon predicates.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Shoelace area, positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| cross(&poly[i], &poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

pub fn vertex_centroid(poly: &[Vec2]) -> Vec2 {
    poly.iter().fold(Vec2::zeros(), |acc, p| acc + p) / poly.len().max(1) as f64
}

pub fn bounding_box(points: impl IntoIterator<Item = Vec2>) -> Option<(Vec2, Vec2)> {
    let mut it = points.into_iter();
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), p| (lo.inf(&p), hi.sup(&p))))
}

fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let s = if len2 > 0.0 {
        ((p - a).dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + d * s)).norm()
}

pub fn boundary_distance(poly: &[Vec2], p: &Vec2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, &poly[i], &poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Whether `p` lies inside `poly` or within `tol` of its boundary.
pub fn contains_point(poly: &[Vec2], p: &Vec2, tol: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        if point_segment_distance(p, a, b) <= tol {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Proper crossing of two closed segments, touching excluded up to `tol`.
fn segments_cross(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2, tol: f64) -> bool {
    let d1 = cross(&(b - a), &(c - a));
    let d2 = cross(&(b - a), &(d - a));
    let d3 = cross(&(d - c), &(a - c));
    let d4 = cross(&(d - c), &(b - c));
    let s1 = (b - a).norm().max(f64::MIN_POSITIVE);
    let s2 = (d - c).norm().max(f64::MIN_POSITIVE);
    d1 * d2 < 0.0
        && d3 * d4 < 0.0
        && d1.abs() > tol * s1
        && d2.abs() > tol * s1
        && d3.abs() > tol * s2
        && d4.abs() > tol * s2
}

/// No two non-adjacent sides intersect and no vertex repeats.
pub fn is_simple(poly: &[Vec2], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (poly[i] - poly[j]).norm() <= tol {
                return false;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (&poly[i], &poly[(i + 1) % n]);
            let (c, d) = (&poly[j], &poly[(j + 1) % n]);
            if segments_cross(a, b, c, d, tol) || point_segment_distance(c, a, b) <= tol {
                return false;
            }
        }
    }
    true
}

/// Whether two simple polygons share interior area (touching boundaries do not count).
pub fn overlap(p: &[Vec2], q: &[Vec2], tol: f64) -> bool {
    for i in 0..p.len() {
        for j in 0..q.len() {
            if segments_cross(
                &p[i],
                &p[(i + 1) % p.len()],
                &q[j],
                &q[(j + 1) % q.len()],
                tol,
            ) {
                return true;
            }
        }
    }
    let strictly_inside =
        |poly: &[Vec2], x: &Vec2| contains_point(poly, x, 0.0) && boundary_distance(poly, x) > tol;
    // a vertex strictly inside, or identical polygons, means shared area
    p.iter().any(|v| strictly_inside(q, v))
        || q.iter().any(|v| strictly_inside(p, v))
        || strictly_inside(q, &vertex_centroid(p))
        || strictly_inside(p, &vertex_centroid(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, s: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(x, y),
            Vec2::new(x + s, y),
            Vec2::new(x + s, y + s),
            Vec2::new(x, y + s),
        ]
    }

    #[test]
    fn area_and_orientation() {
        let sq = square(0.0, 0.0, 2.0);
        assert_eq!(signed_area(&sq), 4.0);
        let rev: Vec<Vec2> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&rev), -4.0);
    }

    #[test]
    fn containment_with_boundary() {
        let sq = square(0.0, 0.0, 1.0);
        assert!(contains_point(&sq, &Vec2::new(0.5, 0.5), 0.0));
        assert!(contains_point(&sq, &Vec2::new(1.0, 0.5), 1e-9));
        assert!(!contains_point(&sq, &Vec2::new(1.5, 0.5), 1e-9));
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&square(0.0, 0.0, 1.0), 1e-12));
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bowtie, 1e-12));
    }

    #[test]
    fn overlap_cases() {
        let a = square(0.0, 0.0, 1.0);
        assert!(!overlap(&a, &square(1.0, 0.0, 1.0), 1e-9));
        assert!(overlap(&a, &square(0.5, 0.5, 1.0), 1e-9));
        assert!(overlap(&a, &square(0.0, 0.0, 1.0), 1e-9));
        assert!(overlap(
            &square(0.0, 0.0, 3.0),
            &square(1.0, 1.0, 1.0),
            1e-9
        ));
        assert!(!overlap(&a, &square(5.0, 5.0, 1.0), 1e-9));
    }
}
