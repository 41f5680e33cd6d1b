use serde::{Deserialize, Serialize};

use super::PushError;
use crate::dsl::{Action, ActionKind};
use crate::nlp::Trajectory;
use crate::scene::{Frame, SceneState};

/// Slack used for touching-versus-overlapping decisions, meters.
pub const CONTACT_EPS: f64 = 1e-9;

/// Planar oriented rectangle: center, yaw, half extents along local axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub center: [f64; 2],
    pub axes: [[f64; 2]; 2],
    pub half: [f64; 2],
}

impl Rect {
    pub fn from_frame(f: &Frame) -> Self {
        let (s, c) = f.z_rot.sin_cos();
        let hx = 0.5 * f.size.first().copied().unwrap_or(0.0);
        let hy = 0.5 * f.size.get(1).copied().unwrap_or(hx * 2.0);
        Self {
            center: [f.x_pos, f.y_pos],
            axes: [[c, s], [-s, c]],
            half: [hx, hy],
        }
    }

    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        [dot(d, self.axes[0]), dot(d, self.axes[1])]
    }

    /// Strictly inside, by more than `eps` on both axes.
    pub fn contains(&self, p: [f64; 2], eps: f64) -> bool {
        let q = self.to_local(p);
        q[0].abs() < self.half[0] - eps && q[1].abs() < self.half[1] - eps
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        let [a, b] = self.axes;
        let [hx, hy] = self.half;
        [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].map(|(sx, sy)| {
            [
                self.center[0] + sx * hx * a[0] + sy * hy * b[0],
                self.center[1] + sx * hx * a[1] + sy * hy * b[1],
            ]
        })
    }

    fn interval(&self, axis: [f64; 2]) -> (f64, f64) {
        self.corners()
            .iter()
            .map(|c| dot(*c, axis))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Axis-aligned extent `[[xmin, xmax], [ymin, ymax]]`.
    pub fn aabb(&self) -> [[f64; 2]; 2] {
        let (x0, x1) = self.interval([1.0, 0.0]);
        let (y0, y1) = self.interval([0.0, 1.0]);
        [[x0, x1], [y0, y1]]
    }

    /// Overlap depth along the least-separating axis; positive when the
    /// interiors intersect.
    pub fn penetration(&self, other: &Rect) -> f64 {
        let axes = [self.axes[0], self.axes[1], other.axes[0], other.axes[1]];
        axes.iter()
            .map(|&ax| {
                let (a0, a1) = self.interval(ax);
                let (b0, b1) = other.interval(ax);
                a1.min(b1) - a0.max(b0)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance `self` can translate along unit `dir` before touching
    /// `other`; `None` if it never does. Already-overlapping pairs give 0.
    pub fn time_of_contact(&self, other: &Rect, dir: [f64; 2]) -> Option<f64> {
        let axes = [self.axes[0], self.axes[1], other.axes[0], other.axes[1]];
        let (mut enter, mut exit) = (f64::NEG_INFINITY, f64::INFINITY);
        for ax in axes {
            let (a0, a1) = self.interval(ax);
            let (b0, b1) = other.interval(ax);
            let v = dot(ax, dir);
            if v.abs() < 1e-12 {
                if a1 <= b0 + CONTACT_EPS || a0 >= b1 - CONTACT_EPS {
                    return None;
                }
                continue;
            }
            let (t0, t1) = if v > 0.0 {
                ((b0 - a1) / v, (b1 - a0) / v)
            } else {
                ((b1 - a0) / v, (b0 - a1) / v)
            };
            enter = enter.max(t0);
            exit = exit.min(t1);
        }
        (enter < exit && exit > CONTACT_EPS).then_some(enter.max(0.0))
    }

    /// Distance along unit `dir` before the rectangle leaves `bounds`.
    fn travel_within(&self, bounds: [[f64; 2]; 2], dir: [f64; 2]) -> f64 {
        let b = self.aabb();
        let mut limit = f64::INFINITY;
        for k in 0..2 {
            if dir[k] > 1e-12 {
                limit = limit.min((bounds[k][1] - b[k][1]) / dir[k]);
            } else if dir[k] < -1e-12 {
                limit = limit.min((bounds[k][0] - b[k][0]) / dir[k]);
            }
        }
        limit.max(0.0)
    }

    fn translate(&mut self, d: [f64; 2], s: f64) {
        self.center[0] += s * d[0];
        self.center[1] += s * d[1];
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Rollout of a pushing trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushTrace {
    /// Effective pusher position per timestep; held on a block face when
    /// the block it pushes is blocked.
    pub pusher: Vec<[f64; 2]>,
    pub block_names: Vec<String>,
    /// `poses[t][b]` is the center of `block_names[b]` after step `t`.
    pub poses: Vec<Vec<[f64; 2]>>,
    /// Whether the pusher touched any block during step `t`.
    pub contact: Vec<bool>,
    pub final_scene: SceneState,
}

impl PushTrace {
    pub fn len(&self) -> usize {
        self.pusher.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pusher.is_empty()
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.block_names.iter().position(|n| n == name)
    }

    pub fn final_positions(&self) -> Vec<[f64; 2]> {
        self.poses.last().cloned().unwrap_or_default()
    }
}

struct World {
    blocks: Vec<Rect>,
    walls: Vec<Rect>,
    bounds: [[f64; 2]; 2],
}

impl World {
    /// Moves block `i` up to `dist` along unit `dir`, shoving any block in
    /// its way. Returns the distance actually travelled.
    fn push(&mut self, i: usize, dir: [f64; 2], dist: f64, chain: &mut Vec<usize>) -> f64 {
        if dist <= 0.0 {
            return 0.0;
        }
        let me = self.blocks[i];
        let mut allowed = dist.min(me.travel_within(self.bounds, dir));
        for w in &self.walls {
            if let Some(t) = me.time_of_contact(w, dir) {
                allowed = allowed.min(t);
            }
        }
        chain.push(i);
        // nearest obstacles first; each one shoved absorbs part of the motion
        let mut hits: Vec<(f64, usize)> = (0..self.blocks.len())
            .filter(|j| !chain.contains(j))
            .filter_map(|j| me.time_of_contact(&self.blocks[j], dir).map(|t| (t, j)))
            .collect();
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, j) in hits {
            let Some(t) = me.time_of_contact(&self.blocks[j], dir) else {
                continue;
            };
            if t >= allowed {
                continue;
            }
            let moved = self.push(j, dir, allowed - t, chain);
            allowed = allowed.min(t + moved);
        }
        chain.pop();
        let allowed = allowed.max(0.0);
        self.blocks[i].translate(dir, allowed);
        allowed
    }

    /// Pusher contact for one step from `from` to `to`; returns the
    /// effective pusher position and whether any block was touched.
    fn step(&mut self, from: [f64; 2], to: [f64; 2]) -> ([f64; 2], bool) {
        let mut p = to;
        let mut touched = false;
        for i in 0..self.blocks.len() {
            let r = self.blocks[i];
            let Some((axis, sign, depth)) = entry(&r, from, p) else {
                continue;
            };
            touched = true;
            let n = r.axes[axis];
            let dir = [-sign * n[0], -sign * n[1]];
            let moved = self.push(i, dir, depth, &mut Vec::new());
            let short = depth - moved;
            if short > 0.0 {
                p = [p[0] - short * dir[0], p[1] - short * dir[1]];
            }
        }
        (p, touched)
    }
}

/// Contact face and penetration depth for a pusher step into `r`.
///
/// A step that starts outside enters through the face its segment first
/// crosses; a step that starts inside resolves through the nearest face.
fn entry(r: &Rect, from: [f64; 2], to: [f64; 2]) -> Option<(usize, f64, f64)> {
    let q0 = r.to_local(from);
    let q1 = r.to_local(to);
    let h = r.half;
    if r.contains(from, CONTACT_EPS) {
        if !r.contains(to, 0.0) {
            return None;
        }
        let mut best = (0, 1.0, f64::INFINITY);
        for a in 0..2 {
            for s in [1.0, -1.0] {
                let d = h[a] - s * q1[a];
                if d < best.2 {
                    best = (a, s, d);
                }
            }
        }
        return Some(best);
    }
    // slab test on the segment q0 -> q1 against the open box
    // a segment starting on a face has its entry parameter at (or just below) zero
    let (mut t0, mut t1) = (f64::NEG_INFINITY, 1.0f64);
    let mut face = None;
    for a in 0..2 {
        let d = q1[a] - q0[a];
        if d.abs() < 1e-15 {
            if q0[a].abs() >= h[a] - CONTACT_EPS {
                return None;
            }
            continue;
        }
        let (ta, tb) = ((-h[a] - q0[a]) / d, (h[a] - q0[a]) / d);
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        if lo > t0 {
            t0 = lo;
            face = Some((a, if d > 0.0 { -1.0 } else { 1.0 }));
        }
        t1 = t1.min(hi);
    }
    let (a, s) = face?;
    if t0 >= t1 || t0 > 1.0 || t1 <= 0.0 {
        return None;
    }
    let depth = h[a] - s * q1[a];
    (depth > CONTACT_EPS).then_some((a, s, depth))
}

/// Quasi-static rollout: the pusher is a point in contact only during push
/// phases (it lifts between them); blocks translate without rotating.
pub fn simulate(x: &Trajectory, plan: &[Action], scene: &SceneState) -> Result<PushTrace, PushError> {
    if x.dim() != 2 {
        return Err(PushError::NonPlanarTrajectory { dim: x.dim() });
    }
    if plan.iter().any(|a| a.kind != ActionKind::PushMotion) {
        return Err(PushError::NotAPushPlan);
    }
    let phases = x.phase_bounds();
    if !plan.is_empty() && phases.len() != plan.len() {
        return Err(PushError::PhaseMismatch {
            phases: phases.len(),
            actions: plan.len(),
        });
    }
    let movable: Vec<&Frame> = scene.movable_blocks().collect();
    let block_names: Vec<String> = movable.iter().map(|f| f.name.clone()).collect();
    let mut world = World {
        blocks: movable.iter().map(|f| Rect::from_frame(f)).collect(),
        walls: scene.walls().map(Rect::from_frame).collect(),
        bounds: scene.table_bounds,
    };
    let mut in_contact_phase = vec![false; x.steps()];
    if !plan.is_empty() {
        for &(s, e) in phases {
            for flag in &mut in_contact_phase[s + 1..e] {
                *flag = true;
            }
        }
    }

    let first = x.row(0);
    let mut pusher = vec![[first[0], first[1]]];
    let mut contact = vec![false];
    let mut poses = vec![world.blocks.iter().map(|b| b.center).collect::<Vec<_>>()];
    for t in 1..x.steps() {
        let r = x.row(t);
        let to = [r[0], r[1]];
        let (p, touched) = if in_contact_phase[t] {
            world.step(pusher[t - 1], to)
        } else {
            (to, false)
        };
        pusher.push(p);
        contact.push(touched);
        poses.push(world.blocks.iter().map(|b| b.center).collect());
    }

    let mut final_scene = scene.clone();
    for (name, rect) in block_names.iter().zip(&world.blocks) {
        if let Some(f) = final_scene.frame_mut(name) {
            f.x_pos = rect.center[0];
            f.y_pos = rect.center[1];
        }
    }
    Ok(PushTrace {
        pusher,
        block_names,
        poses,
        contact,
        final_scene,
    })
}

/// Deepest pairwise overlap among blocks and walls in `scene`, meters
/// (non-positive when nothing interpenetrates).
pub fn max_block_overlap(scene: &SceneState) -> f64 {
    let rects: Vec<Rect> = scene.movable_blocks().map(Rect::from_frame).collect();
    let walls: Vec<Rect> = scene.walls().map(Rect::from_frame).collect();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            worst = worst.max(rects[i].penetration(&rects[j]));
        }
        for w in &walls {
            worst = worst.max(rects[i].penetration(w));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(name: &str, x: f64, y: f64) -> Frame {
        Frame::new(name, x, y, 0.7).with_size(&[0.04, 0.04, 0.12])
    }

    fn line(rows: &[[f64; 2]]) -> Trajectory {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Trajectory::from_rows(&rows, 0.1).unwrap()
    }

    fn push() -> Vec<Action> {
        vec![Action::push_motion(0.0, 0.0, 0.0, 0.0)]
    }

    #[test]
    fn no_contact_leaves_scene_unchanged() {
        let scene = SceneState::new(vec![block("block_a", 0.0, 0.0)]).unwrap();
        let x = line(&[[-0.3, 0.2], [-0.1, 0.2], [0.3, 0.2]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        assert_eq!(tr.final_scene, scene);
        assert!(tr.contact.iter().all(|c| !c));
    }

    #[test]
    fn sweep_displaces_by_penetration_depth() {
        let scene = SceneState::new(vec![block("block_a", 0.0, 0.0)]).unwrap();
        // left face at -0.02; pusher ends 0.2 past it
        let x = line(&[[-0.1, 0.0], [-0.1, 0.0], [0.18, 0.0]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        let f = tr.final_scene.frame("block_a").unwrap();
        assert!((f.x_pos - 0.2).abs() < 1e-12);
        assert_eq!(f.y_pos, 0.0);
    }

    #[test]
    fn wall_clamps_block() {
        let wall = Frame::new("wall_0", 0.1, 0.0, 0.7).with_size(&[0.02, 0.3, 0.1]);
        let scene = SceneState::new(vec![block("block_a", 0.0, 0.0), wall]).unwrap();
        let x = line(&[[-0.1, 0.0], [-0.05, 0.0], [0.05, 0.0], [0.2, 0.0]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        let f = tr.final_scene.frame("block_a").unwrap();
        // wall face at 0.09, block half width 0.02
        assert!((f.x_pos - 0.07).abs() < 1e-12);
        assert!(max_block_overlap(&tr.final_scene) <= 1e-9);
        for p in &tr.pusher {
            assert!(p[0] <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn chained_blocks_move_together() {
        let scene =
            SceneState::new(vec![block("block_a", 0.0, 0.0), block("block_b", 0.06, 0.0)]).unwrap();
        let x = line(&[[-0.1, 0.0], [-0.1, 0.0], [0.08, 0.0]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        let a = tr.final_scene.frame("block_a").unwrap().x_pos;
        let b = tr.final_scene.frame("block_b").unwrap().x_pos;
        assert!((a - 0.1).abs() < 1e-12);
        assert!((b - 0.14).abs() < 1e-12);
    }

    #[test]
    fn rotated_block_pushed_along_face_normal() {
        let f = block("block_a", 0.0, 0.0).with_yaw(std::f64::consts::FRAC_PI_4);
        let scene = SceneState::new(vec![f]).unwrap();
        let x = line(&[[-0.1, -0.1], [-0.1, -0.1], [0.0, 0.0]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        let g = tr.final_scene.frame("block_a").unwrap();
        // the approach hits a corner region; the block must end clear of the pusher
        let r = Rect::from_frame(g);
        assert!(!r.contains(*tr.pusher.last().unwrap(), 1e-9));
    }

    #[test]
    fn table_bounds_clamp() {
        let scene = SceneState::new(vec![block("block_a", 0.45, 0.0)]).unwrap();
        let x = line(&[[0.3, 0.0], [0.3, 0.0], [0.5, 0.0]]);
        let tr = simulate(&x, &push(), &scene).unwrap();
        assert!((tr.final_scene.frame("block_a").unwrap().x_pos - 0.48).abs() < 1e-12);
    }

    #[test]
    fn non_planar_is_rejected() {
        let rows = vec![vec![0.0; 3]; 3];
        let x = Trajectory::from_rows(&rows, 0.1).unwrap();
        assert!(matches!(
            simulate(&x, &push(), &SceneState::empty()),
            Err(PushError::NonPlanarTrajectory { dim: 3 })
        ));
    }
}
