//! Synthetic driving animations with known ground truth.
//!
//! Every scene is a single hard-edged ellipse on a white background, so it
//! uses two colors and survives a GIF round trip losslessly. The analytic
//! center path is kept alongside the frames for tracker checks.

use std::f64::consts::PI;

use crate::frame::{FrameSequence, LoopCount, Raster, Rgba};
use crate::geom::Point;
use crate::motion::{KeypointTrajectorySet, TrajectorySource};

pub const DISK_COLOR: Rgba = Rgba::rgb(220, 80, 40);
pub const SCENE_SIZE: u32 = 256;
pub const SCENE_FRAMES: usize = 16;
pub const SCENE_DELAY: u16 = 8;

/// One ellipse per frame, in pixel units.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskScene {
    pub width: u32,
    pub height: u32,
    pub centers: Vec<Point>,
    pub radii: Vec<(f64, f64)>,
    pub delay: u16,
}

impl DiskScene {
    pub fn frame_count(&self) -> usize {
        self.centers.len()
    }

    /// Analytic centers in normalized coordinates.
    pub fn normalized_centers(&self) -> Vec<Point> {
        self.centers
            .iter()
            .map(|c| Point::new(c.x / self.width as f64, c.y / self.height as f64))
            .collect()
    }

    pub fn render_frame(&self, f: usize) -> Raster {
        let mut img = Raster::filled(self.width, self.height, Rgba::WHITE);
        let c = self.centers[f];
        let (rx, ry) = self.radii[f];
        let y0 = (c.y - ry).floor().max(0.0) as u32;
        let y1 = ((c.y + ry).ceil() as u32).min(self.height);
        let x0 = (c.x - rx).floor().max(0.0) as u32;
        let x1 = ((c.x + rx).ceil() as u32).min(self.width);
        for y in y0..y1 {
            let dy = (y as f64 + 0.5 - c.y) / ry;
            for x in x0..x1 {
                let dx = (x as f64 + 0.5 - c.x) / rx;
                if dx * dx + dy * dy <= 1.0 {
                    img.set(x, y, DISK_COLOR);
                }
            }
        }
        img
    }

    pub fn render(&self) -> FrameSequence {
        let frames = (0..self.frame_count()).map(|f| self.render_frame(f)).collect();
        FrameSequence::new(frames, vec![self.delay; self.frame_count()], LoopCount::Infinite)
            .expect("scene frames are uniform")
    }
}

fn scene(centers: Vec<Point>, radii: Vec<(f64, f64)>) -> DiskScene {
    DiskScene {
        width: SCENE_SIZE,
        height: SCENE_SIZE,
        centers,
        radii,
        delay: SCENE_DELAY,
    }
}

/// Disk of radius 30 moving right by 4 px per frame.
pub fn translating_disk(frames: usize) -> DiskScene {
    let centers = (0..frames).map(|f| Point::new(60.0 + 4.0 * f as f64, 128.0)).collect();
    scene(centers, vec![(30.0, 30.0); frames])
}

fn bounce_path(f: usize) -> Point {
    let t = f as f64;
    Point::new(64.0 + 8.0 * t, 190.0 - 110.0 * (PI * t / 8.0).sin().abs())
}

/// Rigid disk on a bouncing arc.
pub fn bouncing_disk() -> DiskScene {
    let centers = (0..SCENE_FRAMES).map(bounce_path).collect();
    scene(centers, vec![(30.0, 30.0); SCENE_FRAMES])
}

/// Same arc, but the ball squashes and stretches, so keypoints spread apart
/// and the transferred motion is non-rigid.
pub fn squash_ball() -> DiskScene {
    let centers = (0..SCENE_FRAMES).map(bounce_path).collect();
    let radii = (0..SCENE_FRAMES)
        .map(|f| {
            let s = 0.3 * (PI * f as f64 / 4.0).cos();
            (30.0 * (1.0 + s), 30.0 * (1.0 - s))
        })
        .collect();
    scene(centers, radii)
}

pub fn static_disk(frames: usize) -> DiskScene {
    scene(vec![Point::new(128.0, 128.0); frames], vec![(40.0, 40.0); frames])
}

/// Ten keypoints on a ring that rotates and breathes; a stand-in for
/// trajectories produced by an external detector.
pub fn wave_trajectory(n: usize, frames: usize) -> KeypointTrajectorySet {
    let rows: Vec<Vec<Point>> = (0..frames)
        .map(|f| {
            let t = f as f64 / frames as f64;
            let radius = 0.2 + 0.05 * (2.0 * PI * t).sin();
            let spin = 0.4 * (2.0 * PI * t).sin();
            (0..n)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / n as f64 + spin;
                    let sway = 0.08 * (2.0 * PI * t).sin();
                    Point::new(0.5 + sway + radius * a.cos(), 0.5 + radius * a.sin())
                })
                .collect()
        })
        .collect();
    KeypointTrajectorySet::from_frames(&rows, TrajectorySource::Imported).expect("ring stays in the canvas")
}
