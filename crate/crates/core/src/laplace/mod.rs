//! Laplacian shape regularization of aligned control points.

mod graph;
mod kdtree;
mod optimize;

pub use graph::{
    build_neighbor_graph, laplacian_coords, laplacian_with_weights, neighbor_weights, GraphError,
    NeighborGraph, WEIGHT_EPSILON,
};
pub use kdtree::{nearest_brute_force, KdTree};
pub use optimize::{optimize_all, optimize_frame, FrameObjective, FrameReport, OptimizeError, SMOOTHING};
