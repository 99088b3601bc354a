//! Per-frame shape-preserving position optimization.
//!
//! For an aligned frame `T` the optimizer minimizes
//!
//! ```text
//! alpha * sum_j |L_j(X) - L_j(C0)|^e  +  sum_j |X_j - T_j|^e
//! ```
//!
//! by gradient descent from `X = T`, halving the step until the loss drops.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::graph::{inverse_sq, laplacian_with_weights, neighbor_weights, NeighborGraph, WEIGHT_EPSILON};
use crate::deform::{DeformParams, WeightMode};
use crate::geom::Point;
use crate::par::{self, Execution};

/// Added to squared norms when `e < 2` so the gradient stays finite at zero.
pub const SMOOTHING: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizeError {
    #[error("loss became non-finite in frame {frame} at iteration {iteration}")]
    NonFinite { frame: usize, iteration: usize },
    #[error("frame {frame} has {found} points, expected {expected}")]
    Shape { frame: usize, found: usize, expected: usize },
}

/// Loss breakdown for one frame. Frame numbers are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame: usize,
    /// Unweighted shape term.
    pub glyph_loss: f64,
    pub motion_loss: f64,
    pub total_loss: f64,
    pub initial_loss: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Power {
    e: f64,
    eps: f64,
}

impl Power {
    fn new(e: f64) -> Self {
        Power {
            e,
            eps: if e < 2.0 { SMOOTHING } else { 0.0 },
        }
    }

    fn pow(base: f64, p: f64) -> f64 {
        if p.fract() == 0.0 && p.abs() < 64.0 {
            base.powi(p as i32)
        } else {
            base.powf(p)
        }
    }

    /// `|r|^e` given `s = |r|^2`.
    fn value(self, s: f64) -> f64 {
        Self::pow(s + self.eps, self.e / 2.0)
    }

    /// Gradient of `|r|^e` is `coef(s) * r`.
    fn coef(self, s: f64) -> f64 {
        self.e * Self::pow(s + self.eps, self.e / 2.0 - 1.0)
    }
}

/// The objective for a single frame.
#[derive(Clone, Debug)]
pub struct FrameObjective<'a> {
    graph: &'a NeighborGraph,
    target: &'a [Point],
    reference: Vec<Point>,
    frozen: Option<Vec<Vec<f64>>>,
    alpha: f64,
    power: Power,
}

impl<'a> FrameObjective<'a> {
    /// `initial` is the undeformed set, `target` the aligned frame.
    pub fn new(graph: &'a NeighborGraph, initial: &[Point], target: &'a [Point], params: &DeformParams) -> Self {
        let reference = laplacian_with_weights(initial, graph, &neighbor_weights(graph, initial));
        let frozen = match params.weight_mode {
            WeightMode::Frozen => Some(neighbor_weights(graph, target)),
            WeightMode::Differentiated => None,
        };
        FrameObjective {
            graph,
            target,
            reference,
            frozen,
            alpha: params.alpha,
            power: Power::new(params.e),
        }
    }

    fn laplacian(&self, x: &[Point]) -> Vec<Point> {
        match &self.frozen {
            Some(w) => laplacian_with_weights(x, self.graph, w),
            None => laplacian_with_weights(x, self.graph, &neighbor_weights(self.graph, x)),
        }
    }

    /// Unweighted (glyph, motion) terms.
    pub fn terms(&self, x: &[Point]) -> (f64, f64) {
        let glyph = self
            .laplacian(x)
            .iter()
            .zip(&self.reference)
            .map(|(l, l0)| self.power.value((*l - *l0).norm_sq()))
            .sum();
        let motion = x
            .iter()
            .zip(self.target)
            .map(|(p, t)| self.power.value((*p - *t).norm_sq()))
            .sum();
        (glyph, motion)
    }

    pub fn loss(&self, x: &[Point]) -> f64 {
        let (g, m) = self.terms(x);
        self.alpha * g + m
    }

    pub fn gradient(&self, x: &[Point]) -> Vec<Point> {
        let mut grad: Vec<Point> = x
            .iter()
            .zip(self.target)
            .map(|(p, t)| {
                let r = *p - *t;
                r * self.power.coef(r.norm_sq())
            })
            .collect();
        if self.alpha == 0.0 {
            return grad;
        }
        let mut q = Vec::with_capacity(self.graph.k);
        for (j, nb) in self.graph.neighbors.iter().enumerate() {
            q.clear();
            q.extend(nb.iter().map(|&k| inverse_sq(x[k] - x[j])));
            let s: f64 = q.iter().sum();
            let omega: &[f64] = match &self.frozen {
                Some(w) => &w[j],
                None => {
                    q.iter_mut().for_each(|v| *v /= s);
                    &q
                }
            };
            let mut l = Point::ZERO;
            for (&k, &w) in nb.iter().zip(omega) {
                l += x[k] * w;
            }
            let r = l - x[j] - self.reference[j];
            let g = r * (self.alpha * self.power.coef(r.norm_sq()));
            for (&k, &w) in nb.iter().zip(omega) {
                grad[k] += g * w;
            }
            grad[j] -= g;
            if self.frozen.is_none() {
                // Chain rule through omega = q / sum(q), q = 1 / |x_k - x_j|^2.
                let h_bar: f64 = nb.iter().zip(omega).map(|(&k, &w)| w * g.dot(x[k] - x[j])).sum();
                for &k in nb {
                    let u = x[k] - x[j];
                    let d2 = u.norm_sq();
                    if d2 <= WEIGHT_EPSILON * WEIGHT_EPSILON {
                        continue;
                    }
                    let dq = u * (-2.0 / (d2 * d2));
                    let t = dq * ((g.dot(u) - h_bar) / s);
                    grad[k] += t;
                    grad[j] -= t;
                }
            }
        }
        grad
    }
}

fn step(x: &[Point], grad: &[Point], t: f64) -> Vec<Point> {
    x.iter().zip(grad).map(|(p, g)| *p - *g * t).collect()
}

/// Optimizes one aligned frame. `frame` is 1-based and only used for reporting.
pub fn optimize_frame(
    frame: usize,
    raw: &[Point],
    initial: &[Point],
    graph: &NeighborGraph,
    params: &DeformParams,
) -> Result<(Vec<Point>, FrameReport), OptimizeError> {
    let started = Instant::now();
    if raw.len() != graph.len() || initial.len() != graph.len() {
        return Err(OptimizeError::Shape {
            frame,
            found: raw.len(),
            expected: graph.len(),
        });
    }
    let objective = FrameObjective::new(graph, initial, raw, params);
    let mut x = raw.to_vec();
    let mut loss = objective.loss(&x);
    if !loss.is_finite() {
        return Err(OptimizeError::NonFinite { frame, iteration: 0 });
    }
    let initial_loss = loss;
    let mut history = vec![loss];
    let mut iterations = 0;
    let opt = params.optimizer;
    if params.alpha > 0.0 {
        for it in 1..=opt.max_iterations {
            if loss == 0.0 {
                break;
            }
            let grad = objective.gradient(&x);
            if grad.iter().all(|g| g.x == 0.0 && g.y == 0.0) {
                break;
            }
            let mut t = opt.initial_step;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand = step(&x, &grad, t);
                let l = objective.loss(&cand);
                if !l.is_finite() {
                    return Err(OptimizeError::NonFinite { frame, iteration: it });
                }
                if l < loss {
                    accepted = Some((cand, l));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, next_loss)) = accepted else {
                break;
            };
            iterations = it;
            let rel = (loss - next_loss) / loss;
            x = next;
            loss = next_loss;
            history.push(loss);
            if rel < opt.tolerance {
                break;
            }
        }
    }
    let (glyph_loss, motion_loss) = objective.terms(&x);
    let report = FrameReport {
        frame,
        glyph_loss,
        motion_loss,
        total_loss: loss,
        initial_loss,
        iterations,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        history,
    };
    log::debug!(
        "frame {frame}: glyph {glyph_loss:.3e} motion {motion_loss:.3e} after {iterations} iterations"
    );
    Ok((x, report))
}

/// Optimizes every frame independently. Frame 1 passes through untouched.
pub fn optimize_all(
    exec: Execution,
    raw: &[Vec<Point>],
    initial: &[Point],
    graph: &NeighborGraph,
    params: &DeformParams,
) -> Result<(Vec<Vec<Point>>, Vec<FrameReport>), OptimizeError> {
    let results = par::try_map_indexed(exec, raw.len(), |f| {
        if f == 0 {
            let report = FrameReport {
                frame: 1,
                glyph_loss: 0.0,
                motion_loss: 0.0,
                total_loss: 0.0,
                initial_loss: 0.0,
                iterations: 0,
                wall_ms: 0.0,
                history: vec![0.0],
            };
            return Ok((raw[0].clone(), report));
        }
        optimize_frame(f + 1, &raw[f], initial, graph, params)
    })?;
    Ok(results.into_iter().unzip())
}
