//! Parameters shared by alignment and per-frame optimization.

use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_EXPONENT: f64 = 2.0;
pub const DEFAULT_NEIGHBORS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Stop once the relative loss decrease of an accepted step falls below this.
    pub tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            max_iterations: 200,
            initial_step: 0.1,
            tolerance: 1e-6,
        }
    }
}

/// Which keypoints drive the alignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySourceKind {
    /// Keypoints tracked on (or imported for) the driving GIF.
    #[default]
    DrivingGif,
    /// Keypoints extracted on the text itself. Accepted but not implemented.
    ExtractedText,
}

/// How the neighbor weights of the Laplacian coordinates treat the unknowns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Weights computed once from the aligned frame and held fixed.
    #[default]
    Frozen,
    /// Weights recomputed from the current iterate and differentiated through.
    Differentiated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeformParams {
    pub alpha: f64,
    pub e: f64,
    pub k_neighbors: usize,
    pub optimizer: OptimizerSettings,
    pub trajectory_source: TrajectorySourceKind,
    pub weight_mode: WeightMode,
}

impl Default for DeformParams {
    fn default() -> Self {
        DeformParams {
            alpha: DEFAULT_ALPHA,
            e: DEFAULT_EXPONENT,
            k_neighbors: DEFAULT_NEIGHBORS,
            optimizer: OptimizerSettings::default(),
            trajectory_source: TrajectorySourceKind::default(),
            weight_mode: WeightMode::default(),
        }
    }
}

impl DeformParams {
    /// Every violated constraint, in a fixed order. `m` is the control point
    /// count when known.
    pub fn violations(&self, m: Option<usize>) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            out.push(format!("alpha must be a finite number >= 0 (got {})", self.alpha));
        }
        if !(self.e.is_finite() && self.e > 0.0) {
            out.push(format!("e must be a finite number > 0 (got {})", self.e));
        }
        if self.k_neighbors < 1 {
            out.push("k_neighbors must be >= 1".to_string());
        }
        if let Some(m) = m {
            if self.k_neighbors >= m {
                out.push(format!("k_neighbors must be < M (k={}, M={m})", self.k_neighbors));
            }
        }
        let o = &self.optimizer;
        if o.max_iterations == 0 {
            out.push("optimizer.max_iterations must be >= 1".to_string());
        }
        if !(o.initial_step.is_finite() && o.initial_step > 0.0) {
            out.push(format!("optimizer.initial_step must be > 0 (got {})", o.initial_step));
        }
        if !(o.tolerance.is_finite() && o.tolerance >= 0.0) {
            out.push(format!("optimizer.tolerance must be >= 0 (got {})", o.tolerance));
        }
        out
    }
}
