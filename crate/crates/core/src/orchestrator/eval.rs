use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::draw::{self, CameraModel, DrawCostConfig, Stroke};
use crate::dsl::{self, Action, PlanTemplate};
use crate::nlp::{assemble_actions, AssemblyContext, Domain, Trajectory};
use crate::push::{self, PushTrace};
use crate::scene::SceneState;
use crate::task::TaskId;
use crate::trajopt::{default_init, solve, Solution, SolverOptions};

/// Cost assigned to candidates whose program cannot be built, solved or rolled out.
pub const FAILURE_COST: f64 = 1e6;
/// Multiplies the remaining constraint violation of an unconverged solve.
pub const VIOLATION_PENALTY: f64 = 10.0;

/// Solver settings used for every candidate. Drawing costs weigh endpoint
/// gaps in squared pixels, so constraints are solved much tighter than the
/// solver's generic default.
pub fn pipeline_solver_options() -> SolverOptions {
    SolverOptions {
        tol_constraint: 1e-8,
        rho_init: 1e4,
        ..SolverOptions::default()
    }
}

/// What a rollout left behind, in a form that can be re-rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RolloutRecord {
    Drawing {
        strokes: Vec<Stroke>,
    },
    Pushing {
        pusher: Vec<[f64; 2]>,
        contact: Vec<bool>,
        phase_bounds: Vec<(usize, usize)>,
        initial: SceneState,
        final_scene: SceneState,
    },
}

impl RolloutRecord {
    /// Text for the proposer: strokes in image pixels or final frame poses.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self {
            RolloutRecord::Drawing { strokes } => {
                if strokes.is_empty() {
                    s.push_str("no strokes were drawn");
                }
                for (i, k) in strokes.iter().enumerate() {
                    let e = k.end();
                    let _ = writeln!(
                        s,
                        "stroke {i}: ({:.1}, {:.1}) -> ({:.1}, {:.1}) px",
                        k.start[0], k.start[1], e[0], e[1]
                    );
                }
            }
            RolloutRecord::Pushing { final_scene, .. } => {
                for f in final_scene.movable_blocks() {
                    let _ = writeln!(s, "{}: x_pos={:.3}, y_pos={:.3}", f.name, f.x_pos, f.y_pos);
                }
            }
        }
        s.trim_end().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    /// Extrinsic cost of the rollout, before any solver penalty.
    pub psi: Option<f64>,
    pub converged: bool,
    pub max_violation: f64,
    pub failure: Option<String>,
}

pub struct Rollout {
    pub actions: Vec<Action>,
    pub solution: Solution,
    pub record: RolloutRecord,
    pub psi: f64,
}

impl Rollout {
    pub fn cost(&self) -> f64 {
        if self.solution.converged {
            self.psi
        } else {
            self.psi + VIOLATION_PENALTY * self.solution.max_violation()
        }
    }
}

/// Everything needed to score a parameter vector for one template.
pub struct Evaluator<'a> {
    pub task: TaskId,
    pub template: &'a PlanTemplate,
    pub scene: &'a SceneState,
    pub ctx: AssemblyContext,
    pub solver: SolverOptions,
    pub draw_costs: DrawCostConfig,
    pub camera: CameraModel,
}

impl<'a> Evaluator<'a> {
    pub fn new(task: TaskId, template: &'a PlanTemplate, scene: &'a SceneState, solver: SolverOptions) -> Self {
        Self {
            task,
            template,
            scene,
            ctx: AssemblyContext::new(task.domain()),
            solver,
            draw_costs: DrawCostConfig::default(),
            camera: CameraModel::default(),
        }
    }

    /// instantiate, assemble, solve from the default guess, then roll out.
    pub fn rollout(&self, alpha: &[f64]) -> Result<Rollout, String> {
        let actions = dsl::instantiate(self.template, alpha, self.scene).map_err(|e| e.to_string())?;
        let nlp = assemble_actions(&actions, &self.ctx).map_err(|e| e.to_string())?;
        let solution = match solve(&nlp, &default_init(&nlp), &self.solver) {
            Ok(s) => s,
            Err(e) => return Err(e.to_string()),
        };
        let (record, psi) = self.score(&solution.x, &actions)?;
        if !psi.is_finite() {
            return Err(format!("non-finite task cost {psi}"));
        }
        Ok(Rollout { actions, solution, record, psi })
    }

    pub fn evaluate(&self, alpha: &[f64]) -> Evaluation {
        match self.rollout(alpha) {
            Ok(r) => Evaluation {
                cost: r.cost(),
                psi: Some(r.psi),
                converged: r.solution.converged,
                max_violation: r.solution.max_violation(),
                failure: None,
            },
            Err(msg) => Evaluation {
                cost: FAILURE_COST,
                psi: None,
                converged: false,
                max_violation: f64::NAN,
                failure: Some(msg),
            },
        }
    }

    fn score(&self, x: &Trajectory, actions: &[Action]) -> Result<(RolloutRecord, f64), String> {
        match self.task.domain() {
            Domain::Draw => {
                let strokes = draw::extract_strokes(x, actions, &self.camera).map_err(|e| e.to_string())?;
                let psi = draw_cost(self.task, &strokes, &self.draw_costs);
                Ok((RolloutRecord::Drawing { strokes }, psi))
            }
            Domain::Push => {
                let trace = push::simulate(x, actions, self.scene).map_err(|e| e.to_string())?;
                let psi = push_cost(self.task, &trace, self.scene)?;
                let record = RolloutRecord::Pushing {
                    pusher: trace.pusher.clone(),
                    contact: trace.contact.clone(),
                    phase_bounds: x.phase_bounds().to_vec(),
                    initial: self.scene.clone(),
                    final_scene: trace.final_scene,
                };
                Ok((record, psi))
            }
        }
    }
}

pub fn draw_cost(task: TaskId, strokes: &[Stroke], cfg: &DrawCostConfig) -> f64 {
    match task {
        TaskId::Pentagon => draw::cost_pentagon(strokes, cfg),
        TaskId::Star => draw::cost_star(strokes, cfg),
        TaskId::Hash => draw::cost_hash(strokes, cfg),
        _ => f64::NAN,
    }
}

pub fn push_cost(task: TaskId, trace: &PushTrace, scene: &SceneState) -> Result<f64, String> {
    match task {
        TaskId::Circle => Ok(push::cost_circle(&trace.final_positions())),
        TaskId::Line => Ok(push::cost_line(&trace.final_positions())),
        TaskId::Avoid => push::cost_push_avoid(trace, scene).map_err(|e| e.to_string()),
        _ => Err(format!("{task} is not a pushing task")),
    }
}

/// Extrinsic cost of executing nothing: an empty drawing, or the initial
/// scene with the pusher resting on the block it should move.
pub fn null_plan_cost(task: TaskId, scene: &SceneState) -> f64 {
    match task.domain() {
        Domain::Draw => draw_cost(task, &[], &DrawCostConfig::default()),
        Domain::Push => {
            let blocks: Vec<_> = scene.movable_blocks().collect();
            let positions: Vec<[f64; 2]> = blocks.iter().map(|f| f.xy()).collect();
            let rest = scene
                .frame(push::BOX_FRAME)
                .or(blocks.first().copied())
                .map_or([0.0, 0.0], |f| f.xy());
            let trace = PushTrace {
                pusher: vec![rest],
                block_names: blocks.iter().map(|f| f.name.clone()).collect(),
                poses: vec![positions],
                contact: vec![false],
                final_scene: scene.clone(),
            };
            push_cost(task, &trace, scene).unwrap_or(FAILURE_COST)
        }
    }
}
