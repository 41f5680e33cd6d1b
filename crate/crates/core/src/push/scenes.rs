//! Initial scenes for the three pushing tasks.

use crate::scene::{Frame, SceneState};

const BLOCK: [f64; 4] = [0.04, 0.04, 0.12, 0.0];
const TABLE_Z: f64 = 0.71;

fn small_block(name: &str, x: f64, y: f64, rgb: [f64; 3]) -> Frame {
    Frame::new(name, x, y, TABLE_Z).with_size(&BLOCK).with_color(rgb)
}

/// Four blocks staggered about `y = 0`, to be pushed into a straight line.
pub fn line_scene() -> SceneState {
    SceneState::new(vec![
        small_block("block_red", -0.3, 0.12, [255.0, 0.0, 0.0]),
        small_block("block_green", -0.1, -0.15, [0.0, 255.0, 0.0]),
        small_block("block_blue", 0.1, 0.18, [0.0, 0.0, 255.0]),
        small_block("block_yellow", 0.3, -0.1, [255.0, 255.0, 0.0]),
    ])
    .expect("static scene is valid")
}

/// Six blocks on alternating radii around the origin, to be pushed onto a
/// circle of radius 0.2.
pub fn circle_scene() -> SceneState {
    let names = ["red", "green", "blue", "yellow", "cyan", "magenta"];
    let frames = names
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let a = std::f64::consts::PI * k as f64 / 3.0;
            let r = if k % 2 == 0 { 0.3 } else { 0.1 };
            small_block(&format!("block_{c}"), r * a.cos(), r * a.sin(), [128.0; 3])
        })
        .collect();
    SceneState::new(frames).expect("static scene is valid")
}

/// A large block left of a wall, with its target on the other side.
pub fn avoid_scene() -> SceneState {
    let size = [0.1, 0.2, 0.1, 0.0];
    SceneState::new(vec![
        Frame::new("big_red_block", -0.25, 0.0, 0.7)
            .with_size(&size)
            .with_color([204.0, 51.0, 63.0]),
        Frame::new("target_pose", 0.25, 0.0, 0.7)
            .with_size(&size)
            .with_color([0.0, 255.0, 0.0]),
        Frame::new("wall_0", 0.0, 0.0, 0.7)
            .with_size(&[0.04, 0.3, 0.1])
            .with_color([60.0, 60.0, 60.0]),
    ])
    .expect("static scene is valid")
}
