//! Keypoint trajectories and their JSON file format.
//!
//! ```json
//! {"version": 1, "n": 10, "f": 16, "source": "extracted",
//!  "positions": [[[x, y], ...F entries], ...N entries]}
//! ```
//!
//! Coordinates are normalized to `[0, 1]²`, origin top-left.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;

pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectorySource {
    Extracted,
    Imported,
    UserCorrected,
}

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("invalid trajectory JSON: {0}")]
    Json(String),
    #[error("unsupported trajectory schema version {0}")]
    Version(u32),
    #[error("trajectory must have at least one keypoint and one frame (n={n}, f={f})")]
    Empty { n: usize, f: usize },
    #[error("declared n={declared} but found {found} keypoint rows")]
    KeypointCount { declared: usize, found: usize },
    #[error("keypoint {i} has {found} frames, expected {expected}")]
    FrameCount { i: usize, found: usize, expected: usize },
    /// Indices are 1-based.
    #[error("keypoint {i}, frame {f}: coordinate ({x}, {y}) outside [0,1]²")]
    OutOfRange { i: usize, f: usize, x: f64, y: f64 },
}

/// `positions[i][f]` is keypoint `i` at frame `f` (both 0-based here).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeypointTrajectorySet {
    pub version: u32,
    pub n: usize,
    pub f: usize,
    pub source: TrajectorySource,
    pub positions: Vec<Vec<Point>>,
}

impl KeypointTrajectorySet {
    /// Builds a set from frame-major rows (`frames[f][i]`).
    pub fn from_frames(frames: &[Vec<Point>], source: TrajectorySource) -> Result<Self, TrajectoryError> {
        let f = frames.len();
        let n = frames.first().map_or(0, Vec::len);
        let mut positions = vec![Vec::with_capacity(f); n];
        for row in frames {
            if row.len() != n {
                return Err(TrajectoryError::KeypointCount {
                    declared: n,
                    found: row.len(),
                });
            }
            for (i, &p) in row.iter().enumerate() {
                positions[i].push(p);
            }
        }
        let set = KeypointTrajectorySet {
            version: TRAJECTORY_VERSION,
            n,
            f,
            source,
            positions,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.version != TRAJECTORY_VERSION {
            return Err(TrajectoryError::Version(self.version));
        }
        if self.n == 0 || self.f == 0 {
            return Err(TrajectoryError::Empty { n: self.n, f: self.f });
        }
        if self.positions.len() != self.n {
            return Err(TrajectoryError::KeypointCount {
                declared: self.n,
                found: self.positions.len(),
            });
        }
        for (i, row) in self.positions.iter().enumerate() {
            if row.len() != self.f {
                return Err(TrajectoryError::FrameCount {
                    i: i + 1,
                    found: row.len(),
                    expected: self.f,
                });
            }
            for (f, p) in row.iter().enumerate() {
                if !p.is_finite() || !p.in_unit_square() {
                    return Err(TrajectoryError::OutOfRange {
                        i: i + 1,
                        f: f + 1,
                        x: p.x,
                        y: p.y,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, i: usize, f: usize) -> Point {
        self.positions[i][f]
    }

    pub fn set(&mut self, i: usize, f: usize, p: Point) {
        self.positions[i][f] = p;
    }

    /// All keypoints at frame `f`.
    pub fn frame(&self, f: usize) -> Vec<Point> {
        self.positions.iter().map(|row| row[f]).collect()
    }

    /// Mean keypoint position at frame `f`.
    pub fn centroid(&self, f: usize) -> Point {
        let sum = self.positions.iter().fold(Point::ZERO, |acc, row| acc + row[f]);
        sum / self.n as f64
    }
}

pub fn import_trajectories(json: &str) -> Result<KeypointTrajectorySet, TrajectoryError> {
    let mut set: KeypointTrajectorySet =
        serde_json::from_str(json).map_err(|e| TrajectoryError::Json(e.to_string()))?;
    set.validate()?;
    set.source = TrajectorySource::Imported;
    Ok(set)
}

pub fn export_trajectories(set: &KeypointTrajectorySet) -> String {
    serde_json::to_string(set).expect("trajectory serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> KeypointTrajectorySet {
        KeypointTrajectorySet::from_frames(
            &[
                vec![Point::new(0.1, 0.2), Point::new(0.3, 0.4)],
                vec![Point::new(0.15, 0.2), Point::new(0.35, 0.45)],
                vec![Point::new(0.2, 0.25), Point::new(0.4, 0.5)],
            ],
            TrajectorySource::Extracted,
        )
        .unwrap()
    }

    #[test]
    fn layout_is_keypoint_major() {
        let s = sample();
        assert_eq!((s.n, s.f), (2, 3));
        assert_eq!(s.get(1, 2), Point::new(0.4, 0.5));
        assert_eq!(s.frame(1), vec![Point::new(0.15, 0.2), Point::new(0.35, 0.45)]);
    }

    #[test]
    fn export_has_version_and_stable_keys() {
        let s = sample();
        let a = export_trajectories(&s);
        assert!(a.starts_with(r#"{"version":1,"n":2,"f":3,"source":"extracted","positions":"#), "{a}");
        assert_eq!(a, export_trajectories(&s.clone()));
    }

    #[test]
    fn import_marks_source() {
        let s = sample();
        let back = import_trajectories(&export_trajectories(&s)).unwrap();
        assert_eq!(back.positions, s.positions);
        assert_eq!(back.source, TrajectorySource::Imported);
    }

    #[test]
    fn out_of_range_names_index() {
        let json = r#"{"version":1,"n":2,"f":2,"source":"imported",
            "positions":[[[0.1,0.1],[0.2,0.2]],[[0.3,0.3],[1.5,0.4]]]}"#;
        assert_eq!(
            import_trajectories(json).unwrap_err(),
            TrajectoryError::OutOfRange { i: 2, f: 2, x: 1.5, y: 0.4 }
        );
    }

    #[test]
    fn shape_mismatches() {
        let short_row = r#"{"version":1,"n":2,"f":2,"source":"imported",
            "positions":[[[0.1,0.1],[0.2,0.2]],[[0.3,0.3]]]}"#;
        assert_eq!(
            import_trajectories(short_row).unwrap_err(),
            TrajectoryError::FrameCount { i: 2, found: 1, expected: 2 }
        );
        let missing_row = r#"{"version":1,"n":3,"f":1,"source":"imported",
            "positions":[[[0.1,0.1]],[[0.3,0.3]]]}"#;
        assert_eq!(
            import_trajectories(missing_row).unwrap_err(),
            TrajectoryError::KeypointCount { declared: 3, found: 2 }
        );
        let bad_version = r#"{"version":9,"n":1,"f":1,"source":"imported","positions":[[[0.1,0.1]]]}"#;
        assert_eq!(import_trajectories(bad_version).unwrap_err(), TrajectoryError::Version(9));
        assert!(matches!(import_trajectories("{"), Err(TrajectoryError::Json(_))));
    }

    proptest! {
        #[test]
        fn export_import_identity(
            n in 1usize..6,
            f in 1usize..6,
            seed in prop::collection::vec(0.0f64..=1.0, 72),
        ) {
            let frames: Vec<Vec<Point>> = (0..f)
                .map(|fi| (0..n).map(|i| Point::new(seed[(fi * 6 + i) * 2 % 72], seed[(fi * 6 + i) * 2 % 72 + 1])).collect())
                .collect();
            let s = KeypointTrajectorySet::from_frames(&frames, TrajectorySource::UserCorrected).unwrap();
            let back = import_trajectories(&export_trajectories(&s)).unwrap();
            prop_assert_eq!(back.positions, s.positions);
        }
    }
}
