//! Quick self-tests behind `mops check`: finite-difference gradients, the
//! camera projection, the metric, and one solve per domain.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::Serialize;

use super::{normalized_performance, pipeline_solver_options, Evaluator};
use crate::draw::{BoardGeometry, CameraModel};
use crate::dsl;
use crate::nlp::{assemble_actions, constraints_eval, objective_value_grad, AssemblyContext, NlpSpec, Trajectory};
use crate::proposer::builtin_fixture;
use crate::task::TaskId;
use crate::trajopt::default_init;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), passed, detail }
}

pub fn self_check() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for task in [TaskId::Pentagon, TaskId::Line] {
        out.push(match fixture_nlp(task) {
            Ok(nlp) => gradient_check(task, &nlp),
            Err(e) => result(&format!("gradients ({task})"), false, e),
        });
    }
    out.push(projection_check());
    out.push(metric_check());
    for task in [TaskId::Pentagon, TaskId::Line] {
        out.push(solve_check(task));
    }
    out
}

fn fixture_nlp(task: TaskId) -> Result<NlpSpec, String> {
    let t = dsl::parse(builtin_fixture(task, "perfect").ok_or("missing fixture")?[0]).map_err(|e| e.to_string())?;
    let actions = dsl::instantiate(&t, &t.initial_guess(), &task.scene()).map_err(|e| e.to_string())?;
    assemble_actions(&actions, &AssemblyContext::new(task.domain())).map_err(|e| e.to_string())
}

/// Central differences with step 1e-6 against the analytic gradient and
/// Jacobians at a perturbed trajectory.
fn gradient_check(task: TaskId, nlp: &NlpSpec) -> CheckResult {
    let mut rng = crate::bbo::rng(7);
    let x0 = default_init(nlp);
    let z: Vec<f64> = x0.as_slice().iter().map(|v| v + rng.random_range(-0.05..0.05)).collect();
    let x = x0.with_data(z.clone()).expect("same shape");
    let (obj, con) = match (objective_value_grad(nlp, &x), constraints_eval(nlp, &x)) {
        (Ok(o), Ok(c)) => (o, c),
        (Err(e), _) | (_, Err(e)) => return result(&format!("gradients ({task})"), false, e.to_string()),
    };
    let (jh, jg) = (con.dense_jh(z.len()), con.dense_jg(z.len()));
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    let at = |d: Vec<f64>| -> Trajectory { x0.with_data(d).expect("same shape") };
    for j in 0..z.len() {
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[j] += eps;
        zm[j] -= eps;
        let (xp, xm) = (at(zp), at(zm));
        let fp = objective_value_grad(nlp, &xp).unwrap().value;
        let fm = objective_value_grad(nlp, &xm).unwrap().value;
        let scale = 1.0 + obj.grad[j].abs();
        worst = worst.max(((fp - fm) / (2.0 * eps) - obj.grad[j]).abs() / scale);
        let (cp, cm) = (constraints_eval(nlp, &xp).unwrap(), constraints_eval(nlp, &xm).unwrap());
        for r in 0..cp.h.len() {
            worst = worst.max(((cp.h[r] - cm.h[r]) / (2.0 * eps) - jh[(r, j)]).abs() / (1.0 + jh[(r, j)].abs()));
        }
        for r in 0..cp.g.len() {
            worst = worst.max(((cp.g[r] - cm.g[r]) / (2.0 * eps) - jg[(r, j)]).abs() / (1.0 + jg[(r, j)].abs()));
        }
    }
    result(
        &format!("gradients ({task})"),
        worst < 1e-5,
        format!("max relative error {worst:.2e} over {} variables", z.len()),
    )
}

/// Pinhole projection of the board center compared with an explicit
/// homogeneous `K [R | t]` product.
fn projection_check() -> CheckResult {
    let cam = CameraModel::default();
    let p = BoardGeometry::default().board_to_world(0.32, 0.24);
    let Ok(direct) = cam.project(p) else {
        return result("camera projection", false, "board center is behind the camera".into());
    };
    let k = Matrix3::new(cam.focal_px, 0.0, cam.principal_px[0], 0.0, cam.focal_px, cam.principal_px[1], 0.0, 0.0, 1.0);
    // looking down -z with image v growing towards -y
    let r = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    let c = Vector3::from(cam.position);
    let h = k * (r * (Vector3::from(p) - c));
    let oracle = [h[0] / h[2], h[1] / h[2]];
    let err = (direct[0] - oracle[0]).abs().max((direct[1] - oracle[1]).abs());
    let expected = (direct[0] - 320.0).abs() < 1e-9 && (direct[1] - 286.3).abs() < 0.05;
    result(
        "camera projection",
        err < 1e-9 && expected,
        format!("({:.3}, {:.3}) px, oracle gap {err:.1e}", direct[0], direct[1]),
    )
}

fn metric_check() -> CheckResult {
    let cases = [(0.0, 15.0, 1.0), (3.0, 15.0, 0.5), (15.0, 15.0, 0.0), (1e9, 15.0, 0.0)];
    let worst = cases
        .iter()
        .map(|&(c, m, want)| (normalized_performance(c, m).unwrap_or(f64::NAN) - want).abs())
        .fold(0.0, f64::max);
    result("normalized metric", worst < 1e-12, format!("max error {worst:.1e}"))
}

fn solve_check(task: TaskId) -> CheckResult {
    let name = format!("solve perfect {task} plan");
    let Some(src) = builtin_fixture(task, "perfect") else {
        return result(&name, false, "missing fixture".into());
    };
    let t = match dsl::parse(src[0]) {
        Ok(t) => t,
        Err(e) => return result(&name, false, e.to_string()),
    };
    let scene = task.scene();
    let e = Evaluator::new(task, &t, &scene, pipeline_solver_options()).evaluate(&t.initial_guess());
    result(
        &name,
        e.converged && e.cost < 0.05,
        format!("cost {:.3e}, max violation {:.1e}", e.cost, e.max_violation),
    )
}
