use nalgebra::DMatrix;

use super::{ConstraintInstance, ConstraintKind, NlpError, NlpSpec, Sense, Trajectory};

/// Jacobian rows as `(variable index, value)` pairs; every row touches at
/// most two timesteps.
pub type SparseRows = Vec<Vec<(usize, f64)>>;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintEval {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub jh: SparseRows,
    pub jg: SparseRows,
}

impl ConstraintEval {
    pub fn dense_jh(&self, num_vars: usize) -> DMatrix<f64> {
        dense(&self.jh, num_vars)
    }

    pub fn dense_jg(&self, num_vars: usize) -> DMatrix<f64> {
        dense(&self.jg, num_vars)
    }

    pub fn max_h_violation(&self) -> f64 {
        self.h.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_g_violation(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(*v))
    }
}

fn dense(rows: &SparseRows, num_vars: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), num_vars);
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            m[(r, c)] += v;
        }
    }
    m
}

pub fn constraints_eval(nlp: &NlpSpec, x: &Trajectory) -> Result<ConstraintEval, NlpError> {
    nlp.check_horizon(x)?;
    Ok(eval_flat(nlp, x.as_slice()))
}

pub(crate) fn eval_flat(nlp: &NlpSpec, z: &[f64]) -> ConstraintEval {
    let mut out = ConstraintEval {
        h: Vec::with_capacity(nlp.equality_rows()),
        g: Vec::with_capacity(nlp.inequality_rows()),
        jh: Vec::with_capacity(nlp.equality_rows()),
        jg: Vec::with_capacity(nlp.inequality_rows()),
    };
    for c in &nlp.constraints {
        let (vals, jac) = match c.sense {
            Sense::Equality => (&mut out.h, &mut out.jh),
            Sense::Inequality => (&mut out.g, &mut out.jg),
        };
        eval_instance(c, nlp.dim, z, vals, jac);
    }
    out
}

fn eval_instance(
    c: &ConstraintInstance,
    n: usize,
    z: &[f64],
    vals: &mut Vec<f64>,
    jac: &mut SparseRows,
) {
    let p = &c.params;
    for t in c.time.iter() {
        let xt = &z[t * n..(t + 1) * n];
        match c.kind {
            ConstraintKind::PointAt | ConstraintKind::StartAt => {
                for d in 0..n {
                    vals.push(xt[d] - p[d]);
                    jac.push(vec![(t * n + d, 1.0)]);
                }
            }
            ConstraintKind::OnPlane => {
                let normal = &p[..n];
                let s: f64 = normal.iter().zip(xt).map(|(a, b)| a * b).sum();
                vals.push(s - p[n]);
                jac.push((0..n).map(|d| (t * n + d, normal[d])).collect());
            }
            ConstraintKind::InBox => {
                for d in 0..n {
                    vals.push(p[d] - xt[d]);
                    jac.push(vec![(t * n + d, -1.0)]);
                }
                for d in 0..n {
                    vals.push(xt[d] - p[n + d]);
                    jac.push(vec![(t * n + d, 1.0)]);
                }
            }
            ConstraintKind::MinClearance => {
                let center = &p[..n];
                let diff: Vec<f64> = xt.iter().zip(center).map(|(a, b)| a - b).collect();
                let dist = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                vals.push(p[n] - dist);
                // at the center the distance has no gradient; pick the first axis
                let row = if dist > 1e-12 {
                    (0..n).map(|d| (t * n + d, -diff[d] / dist)).collect()
                } else {
                    vec![(t * n, -1.0)]
                };
                jac.push(row);
            }
            ConstraintKind::RestAtPhaseEnd => {
                for d in 0..n {
                    vals.push(xt[d] - z[(t - 1) * n + d]);
                    jac.push(vec![(t * n + d, 1.0), ((t - 1) * n + d, -1.0)]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::TimeSlice;

    fn traj(rows: &[Vec<f64>]) -> Trajectory {
        Trajectory::from_rows(rows, 0.1).unwrap()
    }

    #[test]
    fn satisfied_point_at() {
        let target = [0.2, -0.1, 0.5];
        let mut rows = vec![vec![0.0; 3]; 8];
        rows[5] = target.to_vec();
        let nlp = NlpSpec::single_phase(
            8,
            3,
            0.1,
            vec![
                ConstraintInstance::start_at(&[0.0; 3]),
                ConstraintInstance::point_at(5, &target),
            ],
        )
        .unwrap();
        let e = constraints_eval(&nlp, &traj(&rows)).unwrap();
        assert_eq!(e.h, vec![0.0; 6]);
        assert!(e.g.is_empty());
    }

    #[test]
    fn clearance_sign_convention() {
        let rows = vec![vec![0.25, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]];
        let nlp = NlpSpec::single_phase(
            3,
            2,
            0.1,
            vec![
                ConstraintInstance::start_at(&[0.25, 0.0]),
                ConstraintInstance::min_clearance(TimeSlice::At(0), &[0.0, 0.0], 0.1),
            ],
        )
        .unwrap();
        let e = constraints_eval(&nlp, &traj(&rows)).unwrap();
        assert!((e.g[0] + 0.15).abs() < 1e-15);
        assert_eq!(e.max_g_violation(), 0.0);
    }

    #[test]
    fn plane_offset_residual() {
        // board-like plane through the origin, tilted 40 degrees
        let th = 40f64.to_radians();
        let normal = [0.0, -th.sin(), th.cos()];
        let p = [0.1, 0.3, 0.0];
        let base = [p[0], p[1], p[1] * th.tan()];
        let off: Vec<f64> = base.iter().zip(&normal).map(|(b, n)| b + 0.02 * n).collect();
        let rows = vec![off.clone(), off.clone(), off];
        let nlp = NlpSpec::single_phase(
            3,
            3,
            0.1,
            vec![
                ConstraintInstance::start_at(&base),
                ConstraintInstance::on_plane(TimeSlice::At(1), &normal, 0.0),
            ],
        )
        .unwrap();
        let e = constraints_eval(&nlp, &traj(&rows)).unwrap();
        assert!((e.h[3] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn in_box_rows() {
        let rows = vec![vec![0.7, 0.0], vec![0.0, -0.6], vec![0.0, 0.0]];
        let nlp = NlpSpec::single_phase(
            3,
            2,
            0.1,
            vec![
                ConstraintInstance::start_at(&[0.7, 0.0]),
                ConstraintInstance::in_box(TimeSlice::Range(0, 3), &[-0.5, -0.5], &[0.5, 0.5]),
            ],
        )
        .unwrap();
        let e = constraints_eval(&nlp, &traj(&rows)).unwrap();
        assert_eq!(e.g.len(), 12);
        assert!((e.max_g_violation() - 0.2).abs() < 1e-12);
        // lo - x for t = 1, y
        assert!((e.g[4 + 1] - 0.1).abs() < 1e-12);
    }
}
