//! Planar pushing: a quasi-static point-push simulator and the avoid,
//! circle and line costs.

mod costs;
pub mod scenes;
mod sim;

use thiserror::Error;

pub use costs::{
    avoid_breakdown, circle_breakdown, cost_circle, cost_line, cost_push_avoid, line_breakdown,
    AvoidCost, AvoidSnapshot, CircleCost, LineCost, BOX_FRAME, CIRCLE_RADIUS, TARGET_FRAME,
};
pub use sim::{max_block_overlap, simulate, PushTrace, Rect, CONTACT_EPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PushError {
    #[error("pushing needs a planar trajectory, got dimension {dim}")]
    NonPlanarTrajectory { dim: usize },
    #[error("plan contains actions other than push_motion")]
    NotAPushPlan,
    #[error("trajectory has {phases} phases but the plan has {actions} push actions")]
    PhaseMismatch { phases: usize, actions: usize },
    #[error("scene has no frame `{0}`")]
    MissingFrame(String),
}
