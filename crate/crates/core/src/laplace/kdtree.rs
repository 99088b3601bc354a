//! Two-dimensional k-d tree for exact K-nearest-neighbor queries.
//!
//! Neighbors are ordered by squared distance, then by index, which makes the
//! result identical to a brute-force scan even with duplicate points.

use std::cmp::Ordering;

use crate::geom::Point;

const LEAF_SIZE: usize = 8;

#[derive(Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [Point],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

fn coord(p: Point, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

fn cmp_candidate(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let pts = self.points;
        let slice = &mut self.order[start..end];
        let spread = |axis: usize| {
            let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let c = coord(pts[i], axis);
                (lo.min(c), hi.max(c))
            });
            hi - lo
        };
        let axis = if spread(0) >= spread(1) { 0 } else { 1 };
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| coord(pts[a], axis).total_cmp(&coord(pts[b], axis)));
        let value = coord(pts[slice[mid]], axis);
        // placeholder, patched once children exist
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// The `k` nearest points to `query` (excluding index `skip`, if any),
    /// ordered by (squared distance, index).
    pub fn nearest(&self, query: Point, k: usize, skip: Option<usize>) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.search(0, query, k, skip, &mut best);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    fn search(&self, node: usize, q: Point, k: usize, skip: Option<usize>, best: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == skip {
                        continue;
                    }
                    let cand = (self.points[i].dist_sq(q), i);
                    if best.len() == k && cmp_candidate(&cand, &best[k - 1]) != Ordering::Less {
                        continue;
                    }
                    let pos = best.partition_point(|b| cmp_candidate(b, &cand) == Ordering::Less);
                    best.insert(pos, cand);
                    best.truncate(k);
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = coord(q, axis) - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, skip, best);
                // Equal distances still matter for the index tie-break.
                if best.len() < k || diff * diff <= best[k - 1].0 {
                    self.search(far, q, k, skip, best);
                }
            }
        }
    }
}

/// Reference O(M²) scan with the same ordering rule.
pub fn nearest_brute_force(points: &[Point], query: Point, k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, p)| (p.dist_sq(query), i))
        .collect();
    all.sort_by(cmp_candidate);
    all.into_iter().take(k).map(|(_, i)| i).collect()
}
