use crate::geom::Point;
use crate::glyph::GlyphContour;

const MAX_DEPTH: u32 = 16;

/// Largest distance between a quadratic and its chord.
#[inline]
pub fn quad_deviation(p0: Point, p1: Point, p2: Point) -> f64 {
    (p0 - p1 * 2.0 + p2).norm() / 4.0
}

fn subdivide(p0: Point, p1: Point, p2: Point, tolerance: f64, depth: u32, out: &mut Vec<Point>) {
    if depth >= MAX_DEPTH || quad_deviation(p0, p1, p2) <= tolerance {
        out.push(p2);
        return;
    }
    let a = p0.midpoint(p1);
    let b = p1.midpoint(p2);
    let m = a.midpoint(b);
    subdivide(p0, a, m, tolerance, depth + 1, out);
    subdivide(m, b, p2, tolerance, depth + 1, out);
}

/// Closed polyline approximating `contour` within `tolerance` (same units as
/// the contour). The first vertex is not repeated at the end.
pub fn flatten_contour(contour: &GlyphContour, tolerance: f64) -> Vec<Point> {
    let contour = if contour.has_implicit_points() {
        contour.explicitize()
    } else {
        contour.clone()
    };
    let n = contour.len();
    let Some(start) = contour.on_curve.iter().position(|&on| on) else {
        return Vec::new();
    };
    let at = |k: usize| (contour.points[(start + k) % n], contour.on_curve[(start + k) % n]);
    let mut out = vec![at(0).0];
    let mut k = 0;
    while k < n {
        let (p0, _) = at(k);
        let (p1, on1) = at(k + 1);
        if on1 {
            out.push(p1);
            k += 1;
        } else {
            let (p2, _) = at(k + 2);
            subdivide(p0, p1, p2, tolerance, 0, &mut out);
            k += 2;
        }
    }
    // the walk ends back on the start point
    out.pop();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(t: f64, p0: Point, p1: Point, p2: Point) -> Point {
        p0 * ((1.0 - t) * (1.0 - t)) + p1 * (2.0 * t * (1.0 - t)) + p2 * (t * t)
    }

    fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
        let ab = b - a;
        let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
        p.dist(a + ab * t)
    }

    #[test]
    fn polygon_passes_through() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert_eq!(flatten_contour(&GlyphContour::polygon(pts.clone()), 0.1), pts);
    }

    #[test]
    fn loose_tolerance_gives_a_chord() {
        let (p0, p1, p2) = (Point::new(0.0, 0.0), Point::new(0.5, 1.0), Point::new(1.0, 0.0));
        let c = GlyphContour::new(vec![p0, p1, p2], vec![true, false, true]);
        let out = flatten_contour(&c, quad_deviation(p0, p1, p2));
        assert_eq!(out, vec![p0, p2]);
    }

    #[test]
    fn dense_sampling_stays_within_tolerance() {
        let (p0, p1, p2) = (Point::new(0.0, 0.0), Point::new(0.5, 1.0), Point::new(1.0, 0.0));
        let c = GlyphContour::new(vec![p0, p1, p2], vec![true, false, true]);
        let mut poly = flatten_contour(&c, 0.01);
        poly.push(poly[0]);
        // only the curved half: p0 .. p2
        let end = poly.iter().position(|&p| p == p2).unwrap();
        let curve = &poly[..=end];
        for s in 0..=10_000 {
            let q = quad(s as f64 / 10_000.0, p0, p1, p2);
            let d = curve.windows(2).map(|w| seg_dist(q, w[0], w[1])).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.01 + 1e-12, "deviation {d}");
        }
    }

    #[test]
    fn contour_starting_off_curve() {
        let c = GlyphContour::new(
            vec![Point::new(0.5, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0)],
            vec![false, true, true],
        );
        let out = flatten_contour(&c, 1e-3);
        assert_eq!(out[0], Point::new(1.0, 0.0));
        assert!(out.len() > 3);
    }
}
