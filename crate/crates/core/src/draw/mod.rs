//! Tilted-whiteboard drawing: board geometry, camera projection, stroke
//! extraction and the pentagon, star and hash costs.

mod costs;
mod geometry;
mod strokes;

use thiserror::Error;

pub use costs::{
    cost_hash, cost_pentagon, cost_star, hash_breakdown, pentagon_breakdown, star_breakdown,
    star_ratio_term, DrawCostConfig, HashCost, PentagonCost, StarCost, SIZE_PENALTY,
    STRUCTURE_PENALTY,
};
pub use geometry::{BoardGeometry, CameraModel};
pub use strokes::{extract_strokes, Stroke, StrokeSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DrawError {
    #[error("point is not below the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("invalid geometry: {0}")]
    BadGeometry(String),
    #[error("trajectory has {phases} phases but the plan has {actions} draw actions")]
    PhaseMismatch { phases: usize, actions: usize },
}
