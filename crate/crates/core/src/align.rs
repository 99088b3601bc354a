//! Keypoint-to-control-point motion transfer.
//!
//! Each control point moves by a blend of keypoint displacements measured
//! against frame 1. The blend weights are normalized inverse distances to the
//! frame-1 keypoints raised to the power `e`, so they are computed once and
//! reused for every frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::motion::KeypointTrajectorySet;
use crate::par::{self, Execution};

/// Distances below this are clamped before exponentiation.
pub const DISTANCE_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("no control points to align")]
    NoControls,
    #[error("exponent e must be a finite number > 0 (got {0})")]
    BadExponent(f64),
    #[error("control trajectory has {found} points in frame {frame}, expected {expected}")]
    Shape { frame: usize, found: usize, expected: usize },
}

/// `raw[f][j]` and `optimized[f][j]`; frame 1 of `raw` is the undeformed set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlTrajectory {
    pub m: usize,
    pub f: usize,
    pub raw: Vec<Vec<Point>>,
    pub optimized: Option<Vec<Vec<Point>>>,
}

impl ControlTrajectory {
    pub fn from_raw(raw: Vec<Vec<Point>>) -> Result<Self, AlignError> {
        let m = raw.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(AlignError::NoControls);
        }
        for (frame, row) in raw.iter().enumerate() {
            if row.len() != m {
                return Err(AlignError::Shape {
                    frame: frame + 1,
                    found: row.len(),
                    expected: m,
                });
            }
        }
        Ok(ControlTrajectory {
            m,
            f: raw.len(),
            raw,
            optimized: None,
        })
    }

    /// Optimized positions when present, otherwise the aligned ones.
    pub fn latest(&self) -> &[Vec<Point>] {
        self.optimized.as_deref().unwrap_or(&self.raw)
    }
}

fn pow_e(ratio: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
        ratio.powi(e as i32)
    } else {
        ratio.powf(e)
    }
}

/// Normalized weights `w_i ∝ 1 / max(|p - a_i|, eps)^e`.
///
/// Evaluated as `(d_min / d_i)^e` so large exponents never overflow.
pub fn interpolation_weights(point: Point, anchors: &[Point], e: f64) -> Vec<f64> {
    assert!(!anchors.is_empty(), "at least one anchor is required");
    let d: Vec<f64> = anchors.iter().map(|a| point.dist(*a).max(DISTANCE_EPSILON)).collect();
    let d_min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = d.iter().map(|&di| pow_e(d_min / di, e)).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    w
}

/// Weight matrix `w[j][i]` for every control point against the frame-1 keypoints.
pub fn weight_matrix(controls: &[Point], anchors: &[Point], e: f64) -> Vec<Vec<f64>> {
    controls.iter().map(|&c| interpolation_weights(c, anchors, e)).collect()
}

pub fn align_frames(controls: &[Point], traj: &KeypointTrajectorySet, e: f64) -> Result<ControlTrajectory, AlignError> {
    align_frames_with(Execution::default(), controls, traj, e)
}

pub fn align_frames_with(
    exec: Execution,
    controls: &[Point],
    traj: &KeypointTrajectorySet,
    e: f64,
) -> Result<ControlTrajectory, AlignError> {
    if controls.is_empty() {
        return Err(AlignError::NoControls);
    }
    if !(e.is_finite() && e > 0.0) {
        return Err(AlignError::BadExponent(e));
    }
    let anchors = traj.frame(0);
    let weights = weight_matrix(controls, &anchors, e);
    let raw = par::map_indexed(exec, traj.f, |f| {
        if f == 0 {
            return controls.to_vec();
        }
        let disp: Vec<Point> = (0..traj.n).map(|i| traj.get(i, f) - anchors[i]).collect();
        controls
            .iter()
            .zip(&weights)
            .map(|(&c, w)| {
                let mut d = Point::ZERO;
                for (wi, di) in w.iter().zip(&disp) {
                    d += *di * *wi;
                }
                c + d
            })
            .collect()
    });
    ControlTrajectory::from_raw(raw)
}
