//! The six benchmark tasks: goals, initial scenes and metric constants.

use serde::{Deserialize, Serialize};

use crate::nlp::Domain;
use crate::push::scenes;
use crate::scene::SceneState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    Pentagon,
    Star,
    Hash,
    Circle,
    Line,
    Avoid,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [
        TaskId::Pentagon,
        TaskId::Star,
        TaskId::Hash,
        TaskId::Circle,
        TaskId::Line,
        TaskId::Avoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::Pentagon => "pentagon",
            TaskId::Star => "star",
            TaskId::Hash => "hash",
            TaskId::Circle => "circle",
            TaskId::Line => "line",
            TaskId::Avoid => "avoid",
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            TaskId::Pentagon | TaskId::Star | TaskId::Hash => Domain::Draw,
            TaskId::Circle | TaskId::Line | TaskId::Avoid => Domain::Push,
        }
    }

    pub fn goal(self) -> &'static str {
        match self {
            TaskId::Pentagon => {
                "Draw a pentagon on the tilted whiteboard. In the top-down camera image it must look \
                 like a regular pentagon with sides of at least 50 pixels."
            }
            TaskId::Star => {
                "Draw a five-pointed star on the tilted whiteboard as ten connected lines alternating \
                 between outer tips and inner corners. In the camera image the outer radius should be \
                 twice the inner radius and the lines at least 35 pixels long."
            }
            TaskId::Hash => {
                "Draw the hash character # on the tilted whiteboard: two horizontal and two vertical \
                 lines crossing each other at one and two thirds of their length. In the camera image \
                 the lines should be at least 75 pixels long."
            }
            TaskId::Circle => {
                "Push all blocks so that they form a circle of radius 0.2 with evenly spaced neighbours."
            }
            TaskId::Line => {
                "Push all blocks so that they form a straight line with equal spacing between them."
            }
            TaskId::Avoid => {
                "Push the big red block to the target pose. The wall between them cannot be moved, \
                 so the block has to go around it."
            }
        }
    }

    /// Initial scene; the drawing tasks start from an empty board.
    pub fn scene(self) -> SceneState {
        match self {
            TaskId::Pentagon | TaskId::Star | TaskId::Hash => SceneState::empty(),
            TaskId::Circle => scenes::circle_scene(),
            TaskId::Line => scenes::line_scene(),
            TaskId::Avoid => scenes::avoid_scene(),
        }
    }

    /// Cost at or below which a run counts as converged.
    pub fn default_target_cost(self) -> f64 {
        match self {
            TaskId::Pentagon | TaskId::Star | TaskId::Hash => 1.0,
            TaskId::Circle => 0.05,
            TaskId::Line => 0.2,
            TaskId::Avoid => 0.1,
        }
    }

    /// Added to raw costs before normalization so the metric argument is
    /// non-negative. Only the avoid cost has log terms that go negative.
    pub fn min_cost_offset(self) -> f64 {
        match self {
            TaskId::Avoid => 0.3,
            _ => 0.0,
        }
    }

    pub fn default_budget(self) -> usize {
        match self.domain() {
            Domain::Draw => 1000,
            Domain::Push => 1500,
        }
    }

    pub fn default_sigma0(self) -> f64 {
        match self.domain() {
            Domain::Draw => 0.01,
            Domain::Push => 0.05,
        }
    }
}

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TaskId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}
