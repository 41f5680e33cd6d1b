use serde::{Deserialize, Serialize};

use super::DrawError;

/// The tilted whiteboard. Board coordinates `(u, v)` are meters from the
/// lower-left corner; `u` runs along world x, `v` up the tilted surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardGeometry {
    pub width: f64,
    pub height: f64,
    pub center_world: [f64; 3],
    /// Rotation about the board's horizontal (world x) axis.
    pub tilt_deg: f64,
}

impl Default for BoardGeometry {
    fn default() -> Self {
        Self {
            width: 0.64,
            height: 0.48,
            center_world: [0.0, 0.4, 0.96],
            tilt_deg: 40.0,
        }
    }
}

impl BoardGeometry {
    pub fn flat() -> Self {
        Self {
            tilt_deg: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DrawError> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(DrawError::BadGeometry("board extents must be positive".into()));
        }
        if !(self.tilt_deg.abs() < 90.0) {
            return Err(DrawError::BadGeometry("tilt must lie in (-90, 90) degrees".into()));
        }
        Ok(())
    }

    pub fn u_axis(&self) -> [f64; 3] {
        [1.0, 0.0, 0.0]
    }

    pub fn v_axis(&self) -> [f64; 3] {
        let th = self.tilt_deg.to_radians();
        [0.0, th.cos(), th.sin()]
    }

    /// Lower-left corner in world coordinates.
    pub fn origin(&self) -> [f64; 3] {
        let (u, v, c) = (self.u_axis(), self.v_axis(), self.center_world);
        let (hu, hv) = (0.5 * self.width, 0.5 * self.height);
        [0, 1, 2].map(|k| c[k] - hu * u[k] - hv * v[k])
    }

    pub fn board_to_world(&self, u: f64, v: f64) -> [f64; 3] {
        let (o, ua, va) = (self.origin(), self.u_axis(), self.v_axis());
        [0, 1, 2].map(|k| o[k] + u * ua[k] + v * va[k])
    }

    pub fn world_to_board(&self, p: [f64; 3]) -> [f64; 2] {
        let o = self.origin();
        let d = [0, 1, 2].map(|k| p[k] - o[k]);
        let dot = |a: [f64; 3]| a.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>();
        [dot(self.u_axis()), dot(self.v_axis())]
    }

    /// Unit normal and offset with `normal . p = offset` on the board.
    pub fn plane(&self) -> ([f64; 3], f64) {
        let th = self.tilt_deg.to_radians();
        let normal = [0.0, -th.sin(), th.cos()];
        let c = self.center_world;
        let offset = normal[0] * c[0] + normal[1] * c[1] + normal[2] * c[2];
        (normal, offset)
    }

    pub fn corners(&self) -> [[f64; 3]; 4] {
        [
            self.board_to_world(0.0, 0.0),
            self.board_to_world(self.width, 0.0),
            self.board_to_world(self.width, self.height),
            self.board_to_world(0.0, self.height),
        ]
    }
}

/// Top-down pinhole camera looking along world -z. Image y grows downward
/// (towards smaller world y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub position: [f64; 3],
    pub focal_px: f64,
    pub principal_px: [f64; 2],
    pub image_size: [u32; 2],
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            position: [0.0, 0.45, 1.5],
            focal_px: 500.0,
            principal_px: [320.0, 240.0],
            image_size: [640, 480],
        }
    }
}

impl CameraModel {
    pub fn validate(&self, board: &BoardGeometry) -> Result<(), DrawError> {
        if !(self.focal_px > 0.0) {
            return Err(DrawError::BadGeometry("focal length must be positive".into()));
        }
        if board.corners().iter().any(|p| p[2] >= self.position[2]) {
            return Err(DrawError::BadGeometry("camera must sit above the whole board".into()));
        }
        Ok(())
    }

    pub fn project(&self, p: [f64; 3]) -> Result<[f64; 2], DrawError> {
        let c = self.position;
        let depth = c[2] - p[2];
        if !(depth > 1e-6) {
            return Err(DrawError::BehindCamera { depth });
        }
        Ok([
            self.principal_px[0] + self.focal_px * (p[0] - c[0]) / depth,
            self.principal_px[1] + self.focal_px * (c[1] - p[1]) / depth,
        ])
    }
}
