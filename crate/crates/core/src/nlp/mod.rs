//! Parameterized nonlinear programs over discretized end-effector trajectories.
//!
//! A [`NlpSpec`] couples a squared-acceleration objective with a list of
//! constraint instances drawn from a fixed library. Equality kinds stack into
//! `h(x) = 0`, inequality kinds into `g(x) <= 0`.

mod assemble;
pub(crate) mod constraints;
pub(crate) mod objective;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble, assemble_actions, AssemblyContext, Domain};
pub use constraints::{constraints_eval, ConstraintEval, SparseRows};
pub use objective::{objective_value_grad, ObjectiveEval};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_STEPS_PER_PHASE: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlpError {
    #[error("trajectory needs at least 3 timesteps, got {0}")]
    TooShort(usize),
    #[error("trajectory data has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("phase bounds must be contiguous and cover [0, {steps})")]
    BadPhases { steps: usize },
    #[error("trajectory contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("constraint {index} ({kind:?}) is malformed: {reason}")]
    BadConstraint {
        index: usize,
        kind: ConstraintKind,
        reason: String,
    },
    #[error("no equality constraint pins the start state")]
    MissingStart,
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("action `{0}` is not supported in this domain")]
    UnknownAction(String),
    #[error("plan has no actions")]
    EmptyPlan,
    #[error("template evaluation failed: {0}")]
    Template(crate::dsl::DslError),
}

/// Discretized path: `steps` rows of `dim` state coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    steps: usize,
    dim: usize,
    data: Vec<f64>,
    /// Half-open `(start, end)` index ranges, one per plan action.
    phase_bounds: Vec<(usize, usize)>,
    dt: f64,
}

impl Trajectory {
    pub fn new(
        steps: usize,
        dim: usize,
        data: Vec<f64>,
        phase_bounds: Vec<(usize, usize)>,
        dt: f64,
    ) -> Result<Self, NlpError> {
        if steps < 3 {
            return Err(NlpError::TooShort(steps));
        }
        if data.len() != steps * dim {
            return Err(NlpError::BadShape {
                expected: steps * dim,
                got: data.len(),
            });
        }
        check_phases(&phase_bounds, steps)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NlpError::NonFinite);
        }
        Ok(Self {
            steps,
            dim,
            data,
            phase_bounds,
            dt,
        })
    }

    /// Single-phase trajectory from rows.
    pub fn from_rows(rows: &[Vec<f64>], dt: f64) -> Result<Self, NlpError> {
        let dim = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), dim, data, vec![(0, rows.len())], dt)
    }

    pub fn constant(nlp: &NlpSpec, value: &[f64]) -> Self {
        let data = (0..nlp.steps).flat_map(|_| value.iter().copied()).collect();
        Self {
            steps: nlp.steps,
            dim: nlp.dim,
            data,
            phase_bounds: nlp.phase_bounds.clone(),
            dt: nlp.dt,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn phase_bounds(&self) -> &[(usize, usize)] {
        &self.phase_bounds
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    /// Same layout with replaced values; fails on non-finite data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self, NlpError> {
        Self::new(self.steps, self.dim, data, self.phase_bounds.clone(), self.dt)
    }

    pub(crate) fn with_data_unchecked(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            data,
            ..self.clone()
        }
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v + offset[i % self.dim])
            .collect();
        self.with_data_unchecked(data)
    }
}

fn check_phases(bounds: &[(usize, usize)], steps: usize) -> Result<(), NlpError> {
    let mut cursor = 0;
    for &(s, e) in bounds {
        if s != cursor || e <= s {
            return Err(NlpError::BadPhases { steps });
        }
        cursor = e;
    }
    if cursor != steps {
        return Err(NlpError::BadPhases { steps });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `x_t - target = 0`. Params: target (n).
    PointAt,
    /// `normal . x_t - offset = 0` with unit normal. Params: normal (n), offset.
    OnPlane,
    /// `lo - x_t <= 0`, `x_t - hi <= 0`. Params: lo (n), hi (n).
    InBox,
    /// `margin - |x_t - center| <= 0`. Params: center (n), margin.
    MinClearance,
    /// `x_0 - start = 0`. Params: start (n).
    StartAt,
    /// `x_t - x_{t-1} = 0` at a phase's last timestep. No params.
    RestAtPhaseEnd,
}

impl ConstraintKind {
    pub fn param_len(self, dim: usize) -> usize {
        match self {
            ConstraintKind::PointAt | ConstraintKind::StartAt => dim,
            ConstraintKind::OnPlane | ConstraintKind::MinClearance => dim + 1,
            ConstraintKind::InBox => 2 * dim,
            ConstraintKind::RestAtPhaseEnd => 0,
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            ConstraintKind::InBox | ConstraintKind::MinClearance => Sense::Inequality,
            _ => Sense::Equality,
        }
    }

    /// Stacked rows contributed per timestep.
    pub fn rows_per_step(self, dim: usize) -> usize {
        match self {
            ConstraintKind::PointAt | ConstraintKind::StartAt | ConstraintKind::RestAtPhaseEnd => {
                dim
            }
            ConstraintKind::OnPlane | ConstraintKind::MinClearance => 1,
            ConstraintKind::InBox => 2 * dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Equality,
    Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSlice {
    At(usize),
    /// Half-open range.
    Range(usize, usize),
}

impl TimeSlice {
    pub fn iter(self) -> std::ops::Range<usize> {
        match self {
            TimeSlice::At(t) => t..t + 1,
            TimeSlice::Range(a, b) => a..b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintInstance {
    pub kind: ConstraintKind,
    pub time: TimeSlice,
    pub params: Vec<f64>,
    pub sense: Sense,
}

impl ConstraintInstance {
    pub fn point_at(t: usize, target: &[f64]) -> Self {
        Self::make(ConstraintKind::PointAt, TimeSlice::At(t), target.to_vec())
    }

    pub fn start_at(start: &[f64]) -> Self {
        Self::make(ConstraintKind::StartAt, TimeSlice::At(0), start.to_vec())
    }

    /// Plane through `offset / |normal|` along the normalized `normal`.
    pub fn on_plane(time: TimeSlice, normal: &[f64], offset: f64) -> Self {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut params: Vec<f64> = normal.iter().map(|v| v / norm).collect();
        params.push(offset / norm);
        Self::make(ConstraintKind::OnPlane, time, params)
    }

    pub fn in_box(time: TimeSlice, lo: &[f64], hi: &[f64]) -> Self {
        let mut params = lo.to_vec();
        params.extend_from_slice(hi);
        Self::make(ConstraintKind::InBox, time, params)
    }

    pub fn min_clearance(time: TimeSlice, center: &[f64], margin: f64) -> Self {
        let mut params = center.to_vec();
        params.push(margin);
        Self::make(ConstraintKind::MinClearance, time, params)
    }

    pub fn rest_at_phase_end(t: usize) -> Self {
        Self::make(ConstraintKind::RestAtPhaseEnd, TimeSlice::At(t), vec![])
    }

    fn make(kind: ConstraintKind, time: TimeSlice, params: Vec<f64>) -> Self {
        Self {
            kind,
            time,
            params,
            sense: kind.sense(),
        }
    }

    pub fn row_count(&self, dim: usize) -> usize {
        self.time.iter().len() * self.kind.rows_per_step(dim)
    }
}

/// Objective: `acc_weight * sum |second difference / dt^2|^2 + state_weight * sum |x_t|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub acc_weight: f64,
    #[serde(default)]
    pub state_weight: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Self {
            acc_weight: 1.0,
            state_weight: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlpSpec {
    pub steps: usize,
    pub dim: usize,
    pub dt: f64,
    pub phase_bounds: Vec<(usize, usize)>,
    pub constraints: Vec<ConstraintInstance>,
    pub objective: Objective,
}

impl NlpSpec {
    pub fn new(
        steps: usize,
        dim: usize,
        dt: f64,
        phase_bounds: Vec<(usize, usize)>,
        constraints: Vec<ConstraintInstance>,
        objective: Objective,
    ) -> Result<Self, NlpError> {
        let nlp = Self {
            steps,
            dim,
            dt,
            phase_bounds,
            constraints,
            objective,
        };
        nlp.validate()?;
        Ok(nlp)
    }

    /// Single-phase program.
    pub fn single_phase(
        steps: usize,
        dim: usize,
        dt: f64,
        constraints: Vec<ConstraintInstance>,
    ) -> Result<Self, NlpError> {
        Self::new(steps, dim, dt, vec![(0, steps)], constraints, Objective::default())
    }

    pub fn validate(&self) -> Result<(), NlpError> {
        if self.steps < 3 {
            return Err(NlpError::TooShort(self.steps));
        }
        check_phases(&self.phase_bounds, self.steps)?;
        for (index, c) in self.constraints.iter().enumerate() {
            let bad = |reason: &str| NlpError::BadConstraint {
                index,
                kind: c.kind,
                reason: reason.to_string(),
            };
            let expected = c.kind.param_len(self.dim);
            if c.params.len() != expected {
                return Err(bad(&format!(
                    "expected {expected} params, got {}",
                    c.params.len()
                )));
            }
            if c.sense != c.kind.sense() {
                return Err(bad("sense does not match kind"));
            }
            if c.params.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite parameter"));
            }
            let range = c.time.iter();
            if range.is_empty() || range.end > self.steps {
                return Err(bad("time slice outside the horizon"));
            }
            match c.kind {
                ConstraintKind::StartAt if c.time != TimeSlice::At(0) => {
                    return Err(bad("start_at must bind timestep 0"))
                }
                ConstraintKind::RestAtPhaseEnd if range.start == 0 => {
                    return Err(bad("rest_at_phase_end needs a previous timestep"))
                }
                ConstraintKind::OnPlane => {
                    let n2: f64 = c.params[..self.dim].iter().map(|v| v * v).sum();
                    if (n2 - 1.0).abs() > 1e-9 {
                        return Err(bad("plane normal must be unit length"));
                    }
                }
                _ => {}
            }
        }
        let pins_start = self.constraints.iter().any(|c| {
            matches!(c.kind, ConstraintKind::StartAt | ConstraintKind::PointAt)
                && c.time.iter().start == 0
        });
        if !pins_start {
            return Err(NlpError::MissingStart);
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.steps * self.dim
    }

    pub fn equality_rows(&self) -> usize {
        self.rows_of(Sense::Equality)
    }

    pub fn inequality_rows(&self) -> usize {
        self.rows_of(Sense::Inequality)
    }

    fn rows_of(&self, sense: Sense) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.sense == sense)
            .map(|c| c.row_count(self.dim))
            .sum()
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.constraints.iter().filter(|c| c.kind == kind).count()
    }

    pub fn check_horizon(&self, x: &Trajectory) -> Result<(), NlpError> {
        if x.steps() != self.steps || x.dim() != self.dim {
            return Err(NlpError::DimensionMismatch {
                expected: (self.steps, self.dim),
                got: (x.steps(), x.dim()),
            });
        }
        Ok(())
    }
}
