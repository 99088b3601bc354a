//! Classical foreground keypoint tracker.
//!
//! Per frame: the background is the modal border color, foreground pixels
//! are those farther than a threshold from it, and `n` keypoints are the
//! k-means centers of the foreground pixel coordinates. Frame 1 is seeded by
//! farthest-point sampling from the foreground centroid; later frames are
//! warm-started from the previous centers (shifted by the foreground
//! centroid motion) and re-matched to the previous identities by an optimal
//! assignment. No randomness is involved.

use thiserror::Error;

use super::assign::min_cost_assignment;
use super::trajectory::{KeypointTrajectorySet, TrajectoryError, TrajectorySource};
use crate::frame::{FrameSequence, Raster, Rgba};
use crate::geom::Point;

pub const DEFAULT_KEYPOINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractParams {
    pub n: usize,
    /// Euclidean RGB distance (0..=255 scale) above which a pixel is foreground.
    pub threshold: f64,
    pub max_iterations: usize,
    /// Convergence tolerance on the largest center shift, normalized units.
    pub tolerance: f64,
}

impl Default for ExtractParams {
    fn default() -> Self {
        ExtractParams {
            n: DEFAULT_KEYPOINTS,
            threshold: 40.0,
            max_iterations: 50,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("no foreground detected in the first frame")]
    NoForeground,
    #[error("keypoint count must be at least 1")]
    ZeroKeypoints,
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub trajectories: KeypointTrajectorySet,
    /// 0-based frames whose foreground was empty; keypoints were carried
    /// over from the previous frame.
    pub carried_frames: Vec<usize>,
    pub backgrounds: Vec<Rgba>,
}

/// Foreground pixel centers in normalized coordinates, scan order.
pub fn foreground_points(frame: &Raster, background: Rgba, threshold: f64) -> Vec<Point> {
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    let mut pts = Vec::new();
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            if frame.get(x, y).rgb_distance(background) > threshold {
                pts.push(Point::new((x as f64 + 0.5) / w, (y as f64 + 0.5) / h));
            }
        }
    }
    pts
}

/// Farthest-point seeds: each new seed maximizes its distance to the
/// centroid and every earlier seed. Ties keep the earliest pixel.
pub fn farthest_point_seeds(points: &[Point], n: usize) -> Vec<Point> {
    assert!(!points.is_empty());
    let centroid = mean(points);
    let mut min_d: Vec<f64> = points.iter().map(|p| p.dist_sq(centroid)).collect();
    let mut seeds = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = 0;
        for (k, &d) in min_d.iter().enumerate() {
            if d > min_d[best] {
                best = k;
            }
        }
        let s = points[best];
        seeds.push(s);
        for (d, p) in min_d.iter_mut().zip(points) {
            *d = d.min(p.dist_sq(s));
        }
    }
    seeds
}

fn nearest(centers: &[Point], p: Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centers.iter().enumerate() {
        let d = p.dist_sq(*c);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

fn mean(points: &[Point]) -> Point {
    points.iter().fold(Point::ZERO, |a, &p| a + p) / points.len() as f64
}

/// Lloyd iterations from `centers`.
///
/// An empty cluster is moved to the point farthest from its nearest center,
/// as long as there are more distinct points than clusters; otherwise it
/// keeps its center.
pub fn kmeans(points: &[Point], mut centers: Vec<Point>, max_iterations: usize, tolerance: f64) -> Vec<Point> {
    let k = centers.len();
    let mut sums = vec![Point::ZERO; k];
    let mut counts = vec![0usize; k];
    for _ in 0..max_iterations {
        sums.iter_mut().for_each(|s| *s = Point::ZERO);
        counts.iter_mut().for_each(|c| *c = 0);
        for &p in points {
            let c = nearest(&centers, p);
            sums[c] += p;
            counts[c] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] > 0 {
                let next = sums[c] / counts[c] as f64;
                shift = shift.max(next.dist(centers[c]));
                centers[c] = next;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = 0.0;
            for &p in points {
                let d = p.dist_sq(centers[nearest(&centers, p)]);
                if d > far_d {
                    far_d = d;
                    far = Some(p);
                }
            }
            if let Some(p) = far {
                shift = shift.max(p.dist(centers[c]));
                centers[c] = p;
            }
        }
        if shift < tolerance {
            break;
        }
    }
    centers
}

pub fn extract_keypoints(frames: &FrameSequence, params: &ExtractParams) -> Result<Extraction, ExtractError> {
    if params.n == 0 {
        return Err(ExtractError::ZeroKeypoints);
    }
    let mut rows: Vec<Vec<Point>> = Vec::with_capacity(frames.len());
    let mut carried = Vec::new();
    let mut backgrounds = Vec::with_capacity(frames.len());
    let mut prev_pts: Vec<Point> = Vec::new();
    for (fi, frame) in frames.frames().iter().enumerate() {
        let bg = frame.modal_border_color().unwrap_or(Rgba::WHITE);
        backgrounds.push(bg);
        let pts = foreground_points(frame, bg, params.threshold);
        let Some(prev) = rows.last() else {
            if pts.is_empty() {
                return Err(ExtractError::NoForeground);
            }
            let seeds = farthest_point_seeds(&pts, params.n);
            rows.push(kmeans(&pts, seeds, params.max_iterations, params.tolerance));
            prev_pts = pts;
            continue;
        };
        if pts.is_empty() {
            log::warn!("frame {} has no foreground; carrying keypoints over", fi + 1);
            carried.push(fi);
            rows.push(prev.clone());
            continue;
        }
        // Shift the warm start by the foreground centroid motion so fast
        // movers do not leave their previous centers outside the object.
        let shift = mean(&pts) - mean(&prev_pts);
        let start: Vec<Point> = prev.iter().map(|&p| p + shift).collect();
        let centers = kmeans(&pts, start.clone(), params.max_iterations, params.tolerance);
        let cost: Vec<Vec<f64>> = start
            .iter()
            .map(|p| centers.iter().map(|c| p.dist(*c)).collect())
            .collect();
        let matched = min_cost_assignment(&cost);
        rows.push(matched.iter().map(|&c| centers[c]).collect());
        prev_pts = pts;
    }
    let trajectories = KeypointTrajectorySet::from_frames(&rows, TrajectorySource::Extracted)?;
    Ok(Extraction {
        trajectories,
        carried_frames: carried,
        backgrounds,
    })
}
