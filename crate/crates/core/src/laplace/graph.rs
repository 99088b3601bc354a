use thiserror::Error;

use super::kdtree::KdTree;
use crate::geom::Point;

/// Neighbor distances below this are clamped before inverting.
pub const WEIGHT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("need more than K control points (M={m}, K={k})")]
    TooFewPoints { m: usize, k: usize },
    #[error("K must be at least 1")]
    ZeroNeighbors,
}

/// K nearest neighbors of every control point in the undeformed set.
/// Fixed for the whole animation.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborGraph {
    pub k: usize,
    pub neighbors: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

pub fn build_neighbor_graph(points: &[Point], k: usize) -> Result<NeighborGraph, GraphError> {
    if k == 0 {
        return Err(GraphError::ZeroNeighbors);
    }
    if points.len() <= k {
        return Err(GraphError::TooFewPoints { m: points.len(), k });
    }
    let tree = KdTree::new(points);
    let neighbors = points
        .iter()
        .enumerate()
        .map(|(j, &p)| tree.nearest(p, k, Some(j)))
        .collect();
    Ok(NeighborGraph { k, neighbors })
}

/// Raw weight `1 / max(|u|, eps)^2` for an offset `u` to a neighbor.
#[inline]
pub(crate) fn inverse_sq(u: Point) -> f64 {
    let d2 = u.norm_sq().max(WEIGHT_EPSILON * WEIGHT_EPSILON);
    1.0 / d2
}

/// Normalized neighbor weights `omega[j][n]` for the `n`-th neighbor of `j`,
/// evaluated on `positions`.
pub fn neighbor_weights(graph: &NeighborGraph, positions: &[Point]) -> Vec<Vec<f64>> {
    graph
        .neighbors
        .iter()
        .enumerate()
        .map(|(j, nb)| {
            let mut w: Vec<f64> = nb.iter().map(|&k| inverse_sq(positions[k] - positions[j])).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        })
        .collect()
}

/// `L_j = sum_k omega_jk C_k - C_j` with explicit weights.
pub fn laplacian_with_weights(positions: &[Point], graph: &NeighborGraph, omega: &[Vec<f64>]) -> Vec<Point> {
    graph
        .neighbors
        .iter()
        .zip(omega)
        .enumerate()
        .map(|(j, (nb, w))| {
            let mut acc = Point::ZERO;
            for (&k, &wk) in nb.iter().zip(w) {
                acc += positions[k] * wk;
            }
            acc - positions[j]
        })
        .collect()
}

/// Laplacian coordinates of `positions`, with weights taken from `weight_positions`.
pub fn laplacian_coords(positions: &[Point], graph: &NeighborGraph, weight_positions: &[Point]) -> Vec<Point> {
    laplacian_with_weights(positions, graph, &neighbor_weights(graph, weight_positions))
}
