use serde::{Deserialize, Serialize};

use super::{CameraModel, DrawError};
use crate::dsl::{Action, ActionKind};
use crate::nlp::Trajectory;

/// Image-space line segment: start point and direction vector, pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub start: [f64; 2],
    pub dir: [f64; 2],
}

impl Stroke {
    pub fn new(start: [f64; 2], dir: [f64; 2]) -> Self {
        Self { start, dir }
    }

    pub fn between(a: [f64; 2], b: [f64; 2]) -> Self {
        Self {
            start: a,
            dir: [b[0] - a[0], b[1] - a[1]],
        }
    }

    pub fn end(&self) -> [f64; 2] {
        [self.start[0] + self.dir[0], self.start[1] + self.dir[1]]
    }

    pub fn length(&self) -> f64 {
        self.dir[0].hypot(self.dir[1])
    }

    pub fn translated(&self, t: [f64; 2]) -> Self {
        Self::new([self.start[0] + t[0], self.start[1] + t[1]], self.dir)
    }

    /// Rotation about the image origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        Self::new(r(self.start), r(self.dir))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.start.map(|v| v * k), self.dir.map(|v| v * k))
    }
}

pub type StrokeSet = Vec<Stroke>;

/// Pen-down segments of a drawing rollout: one stroke per draw phase, from
/// the projected phase-start point to the projected phase-end point.
pub fn extract_strokes(
    x: &Trajectory,
    plan: &[Action],
    cam: &CameraModel,
) -> Result<StrokeSet, DrawError> {
    if plan.is_empty() {
        return Ok(Vec::new());
    }
    let phases = x.phase_bounds();
    if phases.len() != plan.len() || x.dim() != 3 {
        return Err(DrawError::PhaseMismatch {
            phases: phases.len(),
            actions: plan.len(),
        });
    }
    if plan.iter().any(|a| a.kind != ActionKind::DrawLine) {
        return Err(DrawError::PhaseMismatch {
            phases: phases.len(),
            actions: plan.len(),
        });
    }
    phases
        .iter()
        .map(|&(s, e)| {
            let row = |t: usize| {
                let r = x.row(t);
                [r[0], r[1], r[2]]
            };
            let a = cam.project(row(s))?;
            let b = cam.project(row(e - 1))?;
            Ok(Stroke::between(a, b))
        })
        .collect()
}
