use super::{NlpError, NlpSpec, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    /// Gradient in the trajectory's row-major layout.
    pub grad: Vec<f64>,
}

/// Squared accelerations over interior timesteps plus the optional state term.
pub fn objective_value_grad(nlp: &NlpSpec, x: &Trajectory) -> Result<ObjectiveEval, NlpError> {
    nlp.check_horizon(x)?;
    Ok(eval_flat(nlp, x.as_slice()))
}

pub(crate) fn eval_flat(nlp: &NlpSpec, z: &[f64]) -> ObjectiveEval {
    let (steps, n) = (nlp.steps, nlp.dim);
    let w = nlp.objective.acc_weight;
    let inv_dt2 = 1.0 / (nlp.dt * nlp.dt);
    let mut value = 0.0;
    let mut grad = vec![0.0; z.len()];
    if w != 0.0 {
        for t in 1..steps - 1 {
            for d in 0..n {
                let a = (z[(t + 1) * n + d] - 2.0 * z[t * n + d] + z[(t - 1) * n + d]) * inv_dt2;
                value += w * a * a;
                let g = 2.0 * w * a * inv_dt2;
                grad[(t - 1) * n + d] += g;
                grad[t * n + d] -= 2.0 * g;
                grad[(t + 1) * n + d] += g;
            }
        }
    }
    let ws = nlp.objective.state_weight;
    if ws != 0.0 {
        for (i, v) in z.iter().enumerate() {
            value += ws * v * v;
            grad[i] += 2.0 * ws * v;
        }
    }
    ObjectiveEval { value, grad }
}

/// Calls `add(i, j, v)` for every entry of the (constant) objective Hessian
/// with `j >= i`.
pub(crate) fn hessian_entries(nlp: &NlpSpec, mut add: impl FnMut(usize, usize, f64)) {
    let (steps, n) = (nlp.steps, nlp.dim);
    let w = nlp.objective.acc_weight;
    let inv_dt2 = 1.0 / (nlp.dt * nlp.dt);
    if w != 0.0 {
        let c = 2.0 * w * inv_dt2 * inv_dt2;
        let stencil = [1.0, -2.0, 1.0];
        for t in 1..steps - 1 {
            for d in 0..n {
                for (a, sa) in stencil.iter().enumerate() {
                    for (b, sb) in stencil.iter().enumerate().skip(a) {
                        add((t - 1 + a) * n + d, (t - 1 + b) * n + d, c * sa * sb);
                    }
                }
            }
        }
    }
    let ws = nlp.objective.state_weight;
    if ws != 0.0 {
        for i in 0..steps * n {
            add(i, i, 2.0 * ws);
        }
    }
}
