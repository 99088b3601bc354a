//! Keypoint trajectories: extraction from a driving GIF and file import/export.

pub mod assign;
mod extract;
mod trajectory;

pub use extract::{
    extract_keypoints, farthest_point_seeds, foreground_points, kmeans, ExtractError,
    ExtractParams, Extraction, DEFAULT_KEYPOINTS,
};
pub use trajectory::{
    export_trajectories, import_trajectories, KeypointTrajectorySet, TrajectoryError,
    TrajectorySource, TRAJECTORY_VERSION,
};
