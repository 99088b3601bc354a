use serde::{Deserialize, Serialize};

use crate::geom::Point;

/// A closed quadratic-bezier contour. `on_curve[k]` flags whether
/// `points[k]` lies on the outline or is a bezier handle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphContour {
    pub points: Vec<Point>,
    pub on_curve: Vec<bool>,
}

impl GlyphContour {
    pub fn new(points: Vec<Point>, on_curve: Vec<bool>) -> GlyphContour {
        assert_eq!(points.len(), on_curve.len(), "flag count must match point count");
        GlyphContour { points, on_curve }
    }

    /// All-on-curve polygon.
    pub fn polygon(points: Vec<Point>) -> GlyphContour {
        let n = points.len();
        GlyphContour::new(points, vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True if some pair of cyclically consecutive points are both off-curve.
    pub fn has_implicit_points(&self) -> bool {
        let n = self.len();
        (0..n).any(|k| !self.on_curve[k] && !self.on_curve[(k + 1) % n])
    }

    /// Inserts the implied on-curve midpoint between every pair of
    /// consecutive off-curve points (including the wrap-around pair).
    pub fn explicitize(&self) -> GlyphContour {
        let n = self.len();
        let mut points = Vec::with_capacity(n + n / 2);
        let mut on_curve = Vec::with_capacity(n + n / 2);
        for k in 0..n {
            points.push(self.points[k]);
            on_curve.push(self.on_curve[k]);
            let next = (k + 1) % n;
            if !self.on_curve[k] && !self.on_curve[next] {
                points.push(self.points[k].midpoint(self.points[next]));
                on_curve.push(true);
            }
        }
        GlyphContour { points, on_curve }
    }

    pub fn translated(&self, d: Point) -> GlyphContour {
        GlyphContour {
            points: self.points.iter().map(|&p| p + d).collect(),
            on_curve: self.on_curve.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoints_between_off_curve_pairs() {
        let c = GlyphContour::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(3.0, 1.0),
                Point::new(4.0, 0.0),
            ],
            vec![true, false, false, true],
        );
        let e = c.explicitize();
        assert_eq!(e.len(), 5);
        assert_eq!(e.points[2], Point::new(2.0, 1.0));
        assert_eq!(e.on_curve, vec![true, false, true, false, true]);
        assert!(!e.has_implicit_points());
    }

    #[test]
    fn wrap_around_pair() {
        let c = GlyphContour::new(
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(2.0, 2.0)],
            vec![false, true, false],
        );
        let e = c.explicitize();
        assert_eq!(e.len(), 4);
        assert_eq!(*e.points.last().unwrap(), Point::new(1.0, 1.0));
    }

    #[test]
    fn all_off_curve_circle() {
        let c = GlyphContour::new(
            vec![
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(-1.0, 0.0),
                Point::new(0.0, -1.0),
            ],
            vec![false; 4],
        );
        let e = c.explicitize();
        assert_eq!(e.len(), 8);
        assert_eq!(e.on_curve.iter().filter(|&&b| b).count(), 4);
    }

    proptest! {
        #[test]
        fn explicitize_is_idempotent(flags in prop::collection::vec(any::<bool>(), 1..40)) {
            let points = (0..flags.len()).map(|k| Point::new(k as f64, (k * k % 7) as f64)).collect();
            let c = GlyphContour::new(points, flags);
            let once = c.explicitize();
            prop_assert!(!once.has_implicit_points() || once.len() == 1);
            prop_assert_eq!(once.explicitize(), once);
        }
    }
}
