use serde::{Deserialize, Serialize};

use super::{PushError, PushTrace};
use crate::scene::SceneState;

pub const BOX_FRAME: &str = "big_red_block";
pub const TARGET_FRAME: &str = "target_pose";
const LOG_FLOOR: f64 = 1e-9;

/// Which trace frames the gripper terms of the avoid cost read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvoidSnapshot {
    /// Position terms at the final frame, gripper terms averaged over the trace.
    #[default]
    FinalAndAveraged,
    AllFinal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AvoidCost {
    pub pos: f64,
    pub wall: f64,
    pub init: f64,
    pub endeff: f64,
    pub endeff_wall: f64,
}

impl AvoidCost {
    pub fn total(&self) -> f64 {
        2.0 * self.pos + 0.01 * self.wall + 0.01 * self.init + 0.7 * self.endeff + 0.2 * self.endeff_wall
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn scaled_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    (4.0 * (a[0] - b[0])).powi(2) + (4.0 * (a[1] - b[1])).powi(2)
}

/// Push-the-box-around-the-wall cost. `scene` is the initial scene.
pub fn avoid_breakdown(
    trace: &PushTrace,
    scene: &SceneState,
    snapshot: AvoidSnapshot,
) -> Result<AvoidCost, PushError> {
    let need = |name: &str| {
        scene
            .frame(name)
            .map(|f| f.xy())
            .ok_or_else(|| PushError::MissingFrame(name.to_string()))
    };
    let init = need(BOX_FRAME)?;
    let target = need(TARGET_FRAME)?;
    let wall = scene
        .walls()
        .next()
        .map(|f| f.xy())
        .ok_or_else(|| PushError::MissingFrame("wall".to_string()))?;
    let b = trace
        .block_index(BOX_FRAME)
        .ok_or_else(|| PushError::MissingFrame(BOX_FRAME.to_string()))?;
    if trace.is_empty() {
        return Err(PushError::MissingFrame("gripper".to_string()));
    }
    let last = trace.len() - 1;
    let p_box = trace.poses[last][b];

    let frames: Vec<usize> = match snapshot {
        AvoidSnapshot::FinalAndAveraged => (0..trace.len()).collect(),
        AvoidSnapshot::AllFinal => vec![last],
    };
    let n = frames.len() as f64;
    let endeff = frames
        .iter()
        .map(|&t| scaled_sq(trace.poses[t][b], trace.pusher[t]))
        .sum::<f64>()
        / n;
    let endeff_wall = -frames.iter().map(|&t| dist(wall, trace.pusher[t])).sum::<f64>() / n;

    Ok(AvoidCost {
        pos: scaled_sq(p_box, target),
        wall: -dist(wall, p_box).max(LOG_FLOOR).ln(),
        init: -dist(p_box, init).max(0.001).ln(),
        endeff,
        endeff_wall,
    })
}

pub fn cost_push_avoid(trace: &PushTrace, scene: &SceneState) -> Result<f64, PushError> {
    avoid_breakdown(trace, scene, AvoidSnapshot::default()).map(|c| c.total())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircleCost {
    pub rad: f64,
    pub neigh: f64,
}

impl CircleCost {
    pub fn total(&self) -> f64 {
        1000.0 * self.rad + self.neigh
    }
}

pub const CIRCLE_RADIUS: f64 = 0.2;

pub fn circle_breakdown(points: &[[f64; 2]]) -> CircleCost {
    let n = points.len();
    if n == 0 {
        return CircleCost::default();
    }
    let c = [
        points.iter().map(|p| p[0]).sum::<f64>() / n as f64,
        points.iter().map(|p| p[1]).sum::<f64>() / n as f64,
    ];
    let rad = points
        .iter()
        .map(|p| (CIRCLE_RADIUS - dist(*p, c)).powi(2))
        .sum();
    let neigh = (0..n)
        .map(|i| {
            let d = (0..n)
                .filter(|&j| j != i)
                .map(|j| dist(points[i], points[j]))
                .fold(f64::INFINITY, f64::min);
            if d.is_finite() {
                (CIRCLE_RADIUS - d).powi(2)
            } else {
                0.0
            }
        })
        .sum();
    CircleCost { rad, neigh }
}

pub fn cost_circle(points: &[[f64; 2]]) -> f64 {
    circle_breakdown(points).total()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LineCost {
    pub fit: f64,
    pub space: f64,
    pub slope: f64,
    pub intercept: f64,
    /// The fit regressed x on y because the points were (nearly) vertical.
    pub swapped: bool,
}

impl LineCost {
    pub fn total(&self) -> f64 {
        1e4 * self.fit + 1e2 * self.space
    }
}

pub fn line_breakdown(points: &[[f64; 2]]) -> LineCost {
    let n = points.len();
    if n < 2 {
        return LineCost::default();
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / nf;
    let var_x = points.iter().map(|p| (p[0] - mx).powi(2)).sum::<f64>() / nf;
    let swapped = var_x < 1e-9;
    let pts: Vec<[f64; 2]> = if swapped {
        points.iter().map(|p| [p[1], p[0]]).collect()
    } else {
        points.to_vec()
    };
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p[0] - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let fit = pts
        .iter()
        .map(|p| (p[1] - (slope * p[0] + intercept)).powi(2))
        .sum::<f64>()
        / nf;

    let norm = (1.0 + slope * slope).sqrt();
    let mut along: Vec<f64> = pts
        .iter()
        .map(|p| (p[0] + slope * (p[1] - intercept)) / norm)
        .collect();
    along.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = along.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let space = gaps.iter().map(|d| (d - mean_gap).powi(2)).sum::<f64>() / gaps.len() as f64;
    LineCost {
        fit,
        space,
        slope,
        intercept,
        swapped,
    }
}

pub fn cost_line(points: &[[f64; 2]]) -> f64 {
    line_breakdown(points).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring(n: usize, r: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                [0.1 + r * a.cos(), -0.05 + r * a.sin()]
            })
            .collect()
    }

    #[test]
    fn hexagon_is_a_perfect_circle() {
        assert!(cost_circle(&ring(6, 0.2)) < 1e-12);
    }

    #[test]
    fn pentagon_ring_neighbour_term() {
        let c = circle_breakdown(&ring(5, 0.2));
        assert!(c.rad < 1e-28);
        let chord = 2.0 * 0.2 * (PI / 5.0).sin();
        assert!((c.neigh - 5.0 * (0.2 - chord).powi(2)).abs() < 1e-15);
        assert!((c.neigh - 6.17e-3).abs() < 1e-5);
    }

    #[test]
    fn coincident_points() {
        let pts = vec![[0.1, 0.1]; 4];
        assert!((cost_circle(&pts) - (1000.0 * 4.0 * 0.04 + 4.0 * 0.04)).abs() < 1e-12);
    }

    #[test]
    fn line_examples() {
        let even: Vec<[f64; 2]> = (0..5).map(|i| [0.1 * i as f64, 0.05 * i as f64]).collect();
        assert!(cost_line(&even) < 1e-12);
        let uneven = [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]];
        let c = line_breakdown(&uneven);
        assert!(c.fit < 1e-30);
        assert!((c.space - 0.25).abs() < 1e-15);
        assert!((c.total() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_line_swaps_axes() {
        let pts = [[0.2, -0.3], [0.2, -0.1], [0.2, 0.1], [0.2, 0.3]];
        let c = line_breakdown(&pts);
        assert!(c.swapped);
        assert!(c.total() < 1e-12);
    }
}
