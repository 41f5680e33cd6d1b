//! Scene state: named frames with pose, size and color.
//!
//! The JSON layout mirrors the `Frame` dataclass used in the pushing prompt,
//! field for field, so scene files can be pasted into prompts unchanged.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub const TABLE_BOUNDS: [[f64; 2]; 2] = [[-0.5, 0.5], [-0.5, 0.5]];

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("duplicate frame name `{0}`")]
    DuplicateFrame(String),
    #[error("frame `{name}` has non-positive size entry {value}")]
    BadSize { name: String, value: f64 },
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("scene file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub name: String,
    pub x_pos: f64,
    pub y_pos: f64,
    pub z_pos: f64,
    pub x_rot: f64,
    pub y_rot: f64,
    pub z_rot: f64,
    #[serde(deserialize_with = "scalar_or_list")]
    pub size: Vec<f64>,
    #[serde(deserialize_with = "color_list", default)]
    pub color: Vec<f64>,
}

impl Frame {
    pub fn new(name: impl Into<String>, x: f64, y: f64, z: f64) -> Self {
        Self {
            name: name.into(),
            x_pos: x,
            y_pos: y,
            z_pos: z,
            x_rot: 0.0,
            y_rot: 0.0,
            z_rot: 0.0,
            size: vec![],
            color: vec![],
        }
    }

    pub fn with_size(mut self, size: &[f64]) -> Self {
        self.size = size.to_vec();
        self
    }

    pub fn with_yaw(mut self, yaw: f64) -> Self {
        self.z_rot = yaw;
        self
    }

    pub fn with_color(mut self, rgb: [f64; 3]) -> Self {
        self.color = rgb.to_vec();
        self
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x_pos, self.y_pos]
    }

    /// Scalar attribute lookup used by the plan DSL's `frame("..").attr`.
    pub fn attribute(&self, attr: &str) -> Option<f64> {
        match attr {
            "x_pos" => Some(self.x_pos),
            "y_pos" => Some(self.y_pos),
            "z_pos" => Some(self.z_pos),
            "x_rot" => Some(self.x_rot),
            "y_rot" => Some(self.y_rot),
            "z_rot" => Some(self.z_rot),
            _ => None,
        }
    }

    /// Indexed attribute lookup (`size[i]`, `color[i]`).
    pub fn indexed_attribute(&self, attr: &str, index: usize) -> Option<f64> {
        match attr {
            "size" => self.size.get(index).copied(),
            "color" => self.color.get(index).copied(),
            _ => None,
        }
    }

    pub fn is_wall(&self) -> bool {
        self.name.starts_with("wall")
    }

    pub fn is_movable(&self) -> bool {
        self.name.contains("block") && self.size.len() >= 2
    }
}

/// Accepts `0.03` as well as `[0.03]`.
fn scalar_or_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match Repr::deserialize(d)? {
        Repr::One(v) => vec![v],
        Repr::Many(v) => v,
    })
}

/// Accepts `[255, 0, 0]` as well as the prompt's quoted `"[255, 0, 0]"`.
fn color_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Many(Vec<f64>),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Many(v) => Ok(v),
        Repr::Text(s) => serde_json::from_str::<Vec<f64>>(&s).map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub frames: Vec<Frame>,
    #[serde(default = "default_bounds")]
    pub table_bounds: [[f64; 2]; 2],
}

fn default_bounds() -> [[f64; 2]; 2] {
    TABLE_BOUNDS
}

impl Default for SceneState {
    fn default() -> Self {
        Self::empty()
    }
}

impl SceneState {
    pub fn empty() -> Self {
        Self {
            frames: vec![],
            table_bounds: TABLE_BOUNDS,
        }
    }

    pub fn new(frames: Vec<Frame>) -> Result<Self, SceneError> {
        let scene = Self {
            frames,
            table_bounds: TABLE_BOUNDS,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for (i, f) in self.frames.iter().enumerate() {
            if self.frames[..i].iter().any(|g| g.name == f.name) {
                return Err(SceneError::DuplicateFrame(f.name.clone()));
            }
            // extents (first three entries) must be positive; the prompt's trailing
            // fourth entry is a corner radius and may be zero
            let bad = f.size.iter().enumerate().find(|&(k, &s)| {
                !s.is_finite() || s < 0.0 || (k < 3 && s == 0.0)
            });
            if let Some((_, &value)) = bad {
                return Err(SceneError::BadSize {
                    name: f.name.clone(),
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn frame(&self, name: &str) -> Option<&Frame> {
        self.frames.iter().find(|f| f.name == name)
    }

    pub fn frame_mut(&mut self, name: &str) -> Option<&mut Frame> {
        self.frames.iter_mut().find(|f| f.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Frame, SceneError> {
        self.frame(name)
            .ok_or_else(|| SceneError::UnknownFrame(name.to_string()))
    }

    pub fn movable_blocks(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter().filter(|f| f.is_movable())
    }

    pub fn walls(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter().filter(|f| f.is_wall())
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: Self = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }
}

/// Renders the scene the way the prompt's state dictionary looks.
impl fmt::Display for SceneState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PushState(frames=[")?;
        for (i, fr) in self.frames.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(
                f,
                "Frame(name=\"{}\", x_pos={:.3}, y_pos={:.3}, z_pos={:.3}, x_rot={:.2}, y_rot={:.2}, z_rot={:.2}, size={:?}, color={:?})",
                fr.name, fr.x_pos, fr.y_pos, fr.z_pos, fr.x_rot, fr.y_rot, fr.z_rot, fr.size, fr.color
            )?;
        }
        write!(f, "])")
    }
}
