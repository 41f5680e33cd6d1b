use serde::{Deserialize, Serialize};

use super::{
    ConstraintInstance, NlpError, NlpSpec, Objective, TimeSlice, DEFAULT_DT,
    DEFAULT_STEPS_PER_PHASE,
};
use crate::draw::BoardGeometry;
use crate::dsl::{self, Action, ActionKind, DslError, ParamEnv, PlanTemplate};
use crate::scene::SceneState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Draw,
    Push,
}

impl Domain {
    pub fn state_dim(self) -> usize {
        match self {
            Domain::Draw => 3,
            Domain::Push => 2,
        }
    }

    pub fn action(self) -> ActionKind {
        match self {
            Domain::Draw => ActionKind::DrawLine,
            Domain::Push => ActionKind::PushMotion,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Draw => "draw",
            Domain::Push => "push",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyContext {
    pub domain: Domain,
    pub board: BoardGeometry,
    pub steps_per_phase: usize,
    pub dt: f64,
    pub objective: Objective,
}

impl AssemblyContext {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            board: BoardGeometry::default(),
            steps_per_phase: DEFAULT_STEPS_PER_PHASE,
            dt: DEFAULT_DT,
            objective: Objective::default(),
        }
    }
}

/// Instantiates `template` under `alpha_c` and builds its trajectory program.
pub fn assemble(
    template: &PlanTemplate,
    alpha_c: &ParamEnv,
    scene: &SceneState,
    ctx: &AssemblyContext,
) -> Result<NlpSpec, NlpError> {
    for p in &template.params {
        match alpha_c.get(&p.name) {
            Some(v) if v.len() == p.initial.len() => {}
            _ => return Err(NlpError::UnboundParameter(p.name.clone())),
        }
    }
    if let Some(missing) = template
        .referenced_frames()
        .into_iter()
        .find(|f| scene.frame(f).is_none())
    {
        return Err(NlpError::UnknownFrame(missing));
    }
    let actions = instantiate_env(template, alpha_c, scene)?;
    assemble_actions(&actions, ctx)
}

fn instantiate_env(
    template: &PlanTemplate,
    env: &ParamEnv,
    scene: &SceneState,
) -> Result<Vec<Action>, NlpError> {
    let flat: Vec<f64> = template
        .params
        .iter()
        .flat_map(|p| env[&p.name].iter().copied())
        .collect();
    dsl::instantiate(template, &flat, scene).map_err(|e| match e {
        DslError::UnboundParameter(n) => NlpError::UnboundParameter(n),
        DslError::UnknownFrame(n) => NlpError::UnknownFrame(n),
        other => NlpError::Template(other),
    })
}

/// One phase of `steps_per_phase` timesteps per action.
pub fn assemble_actions(actions: &[Action], ctx: &AssemblyContext) -> Result<NlpSpec, NlpError> {
    if actions.is_empty() {
        return Err(NlpError::EmptyPlan);
    }
    if let Some(bad) = actions.iter().find(|a| a.kind != ctx.domain.action()) {
        return Err(NlpError::UnknownAction(bad.kind.name().to_string()));
    }
    let k = ctx.steps_per_phase.max(3);
    let n = ctx.domain.state_dim();
    let steps = (k * actions.len()).max(3);
    let phases: Vec<(usize, usize)> = (0..actions.len()).map(|i| (i * k, (i + 1) * k)).collect();
    let (normal, offset) = ctx.board.plane();
    let table = crate::scene::TABLE_BOUNDS;

    let mut constraints = Vec::new();
    for (i, (action, &(start, end))) in actions.iter().zip(&phases).enumerate() {
        let [x0, y0, x1, y1] = action
            .segment()
            .ok_or_else(|| NlpError::UnknownAction(action.kind.name().to_string()))?;
        let (a, b) = match ctx.domain {
            Domain::Draw => (
                ctx.board.board_to_world(x0, y0).to_vec(),
                ctx.board.board_to_world(x1, y1).to_vec(),
            ),
            Domain::Push => (vec![x0, y0], vec![x1, y1]),
        };
        if i == 0 {
            constraints.push(ConstraintInstance::start_at(&a));
        }
        constraints.push(ConstraintInstance::point_at(start, &a));
        constraints.push(ConstraintInstance::point_at(end - 1, &b));
        match ctx.domain {
            Domain::Draw => constraints.push(ConstraintInstance::on_plane(
                TimeSlice::Range(start, end),
                &normal,
                offset,
            )),
            Domain::Push => constraints.push(ConstraintInstance::in_box(
                TimeSlice::Range(start, end),
                &[table[0][0], table[1][0]],
                &[table[0][1], table[1][1]],
            )),
        }
        // both sides of an internal boundary come to rest, so the jump
        // between phases carries no velocity into the next one
        if i + 1 < actions.len() {
            constraints.push(ConstraintInstance::rest_at_phase_end(end - 1));
            constraints.push(ConstraintInstance::rest_at_phase_end(end + 1));
        }
    }
    NlpSpec::new(steps, n, ctx.dt, phases, constraints, ctx.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::ConstraintKind;

    #[test]
    fn single_line() {
        let t = dsl::parse("plan { draw_line(0.1, 0.1, 0.3, 0.1); }").unwrap();
        let nlp = assemble(
            &t,
            &ParamEnv::new(),
            &SceneState::empty(),
            &AssemblyContext::new(Domain::Draw),
        )
        .unwrap();
        assert_eq!(nlp.phase_bounds, vec![(0, 16)]);
        assert_eq!(nlp.count(ConstraintKind::PointAt), 2);
        assert_eq!(nlp.count(ConstraintKind::OnPlane), 1);
        assert_eq!(nlp.count(ConstraintKind::StartAt), 1);
        assert_eq!(nlp.constraints.len(), 4);
        assert_eq!((nlp.steps, nlp.dim), (16, 3));
    }

    #[test]
    fn unbound_parameter() {
        let t = dsl::parse("params { yaw = 0.0; } plan { draw_line(cos(yaw), 0, 0, 0); }").unwrap();
        let err = assemble(
            &t,
            &ParamEnv::new(),
            &SceneState::empty(),
            &AssemblyContext::new(Domain::Draw),
        )
        .unwrap_err();
        assert_eq!(err, NlpError::UnboundParameter("yaw".into()));
    }

    #[test]
    fn unknown_frame_and_action() {
        let t = dsl::parse("plan { push_motion(frame(\"box\").x_pos, 0, 0, 0); }").unwrap();
        let ctx = AssemblyContext::new(Domain::Push);
        assert_eq!(
            assemble(&t, &ParamEnv::new(), &SceneState::empty(), &ctx).unwrap_err(),
            NlpError::UnknownFrame("box".into())
        );
        let t = dsl::parse("plan { pick(\"box\"); }").unwrap();
        let scene = SceneState::new(vec![crate::scene::Frame::new("box", 0.0, 0.0, 0.0)]).unwrap();
        assert_eq!(
            assemble(&t, &ParamEnv::new(), &scene, &ctx).unwrap_err(),
            NlpError::UnknownAction("pick".into())
        );
        let t = dsl::parse("plan { draw_line(0, 0, 1, 1); }").unwrap();
        assert_eq!(
            assemble(&t, &ParamEnv::new(), &scene, &ctx).unwrap_err(),
            NlpError::UnknownAction("draw_line".into())
        );
    }

    #[test]
    fn push_phases_have_table_bounds_and_rests() {
        let acts = vec![
            Action::push_motion(0.0, 0.0, 0.2, 0.0),
            Action::push_motion(0.2, 0.1, 0.2, 0.3),
        ];
        let nlp = assemble_actions(&acts, &AssemblyContext::new(Domain::Push)).unwrap();
        assert_eq!(nlp.dim, 2);
        assert_eq!(nlp.count(ConstraintKind::InBox), 2);
        assert_eq!(nlp.count(ConstraintKind::RestAtPhaseEnd), 2);
        assert_eq!(nlp.count(ConstraintKind::PointAt), 4);
        assert_eq!(nlp.steps, 32);
    }
}
