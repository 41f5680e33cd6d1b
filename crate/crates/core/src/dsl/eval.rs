use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::DslError;
use crate::scene::SceneState;

/// Parameter bindings: name to flattened values (length 1 for scalars).
pub type ParamEnv = BTreeMap<String, Vec<f64>>;

pub fn evaluate(e: &Expr, env: &ParamEnv, scene: &SceneState) -> Result<f64, DslError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Pi => std::f64::consts::PI,
        Expr::Param { name, index } => {
            let vals = env
                .get(name)
                .ok_or_else(|| DslError::UnboundParameter(name.clone()))?;
            *vals
                .get(index.unwrap_or(0))
                .ok_or_else(|| DslError::UnboundParameter(name.clone()))?
        }
        Expr::Frame { frame, attr, index } => {
            let f = scene
                .frame(frame)
                .ok_or_else(|| DslError::UnknownFrame(frame.clone()))?;
            let v = match index {
                Some(i) => f.indexed_attribute(attr, *i),
                None => f.attribute(attr),
            };
            v.ok_or_else(|| DslError::UnknownAttribute {
                frame: frame.clone(),
                attr: match index {
                    Some(i) => format!("{attr}[{i}]"),
                    None => attr.clone(),
                },
            })?
        }
        Expr::Neg(inner) => -evaluate(inner, env, scene)?,
        Expr::Binary { op, lhs, rhs } => {
            let a = evaluate(lhs, env, scene)?;
            let b = evaluate(rhs, env, scene)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(DslError::DivisionByZero);
                    }
                    a / b
                }
            }
        }
        Expr::Call { func, args } => {
            let vals = args
                .iter()
                .map(|a| evaluate(a, env, scene))
                .collect::<Result<Vec<_>, _>>()?;
            match func {
                Func::Sin => vals[0].sin(),
                Func::Cos => vals[0].cos(),
                Func::Sqrt => vals[0].sqrt(),
                Func::Abs => vals[0].abs(),
                Func::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
                Func::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArgValue {
    Num(f64),
    Text(String),
}

/// A concrete action with every argument evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub args: Vec<ArgValue>,
}

impl Action {
    pub fn numbers(&self) -> Vec<f64> {
        self.args
            .iter()
            .filter_map(|a| match a {
                ArgValue::Num(v) => Some(*v),
                ArgValue::Text(_) => None,
            })
            .collect()
    }

    /// The four coordinates of a `draw_line` / `push_motion`.
    pub fn segment(&self) -> Option<[f64; 4]> {
        match self.kind {
            ActionKind::DrawLine | ActionKind::PushMotion => {
                let n = self.numbers();
                (n.len() == 4).then(|| [n[0], n[1], n[2], n[3]])
            }
            _ => None,
        }
    }

    pub fn draw_line(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            kind: ActionKind::DrawLine,
            args: [x0, y0, x1, y1].into_iter().map(ArgValue::Num).collect(),
        }
    }

    pub fn push_motion(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            kind: ActionKind::PushMotion,
            args: [x0, y0, x1, y1].into_iter().map(ArgValue::Num).collect(),
        }
    }
}

pub type ActionSequence = Vec<Action>;

/// Binds a flattened parameter vector to the template's declared names.
pub fn bind(t: &PlanTemplate, alpha_c: &[f64]) -> Result<ParamEnv, DslError> {
    if alpha_c.len() != t.dim() {
        return Err(DslError::ArityMismatch {
            expected: t.dim(),
            got: alpha_c.len(),
        });
    }
    let mut env = ParamEnv::new();
    let mut offset = 0;
    for p in &t.params {
        let n = p.initial.len();
        env.insert(p.name.clone(), alpha_c[offset..offset + n].to_vec());
        offset += n;
    }
    Ok(env)
}

pub fn instantiate(
    t: &PlanTemplate,
    alpha_c: &[f64],
    scene: &SceneState,
) -> Result<ActionSequence, DslError> {
    let env = bind(t, alpha_c)?;
    t.actions
        .iter()
        .map(|call| {
            let args = call
                .args
                .iter()
                .map(|a| match a {
                    ActionArg::Expr(e) => evaluate(e, &env, scene).map(ArgValue::Num),
                    ActionArg::Text(s) => Ok(ArgValue::Text(s.clone())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Action {
                kind: call.kind,
                args,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::scene::Frame;

    fn expr(text: &str, params: &str) -> Expr {
        let t = parse(&format!("params {{ {params} }} plan {{ pick(\"x\"); place_sr({text}, 0, 0, 0, 0); }}"))
            .unwrap();
        match &t.actions[1].args[0] {
            ActionArg::Expr(e) => e.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn arithmetic() {
        let scene = SceneState::empty();
        let v = evaluate(&expr("0.2 * 2", ""), &ParamEnv::new(), &scene).unwrap();
        assert_eq!(v, 0.4);
    }

    #[test]
    fn frame_size_lookup() {
        let scene = SceneState::new(vec![
            Frame::new("block_red", 0.0, 0.0, 0.71).with_size(&[0.04, 0.04, 0.12, 0.0])
        ])
        .unwrap();
        let e = expr("cos(0) * frame(\"block_red\").size[2] * 0.5 + 0.1", "");
        let v = evaluate(&e, &ParamEnv::new(), &scene).unwrap();
        assert!((v - 0.16).abs() < 1e-15);

        let e = expr("frame(\"block_red\").size[7]", "");
        assert!(matches!(
            evaluate(&e, &ParamEnv::new(), &scene),
            Err(DslError::UnknownAttribute { .. })
        ));
        let e = expr("frame(\"nope\").x_pos", "");
        assert_eq!(
            evaluate(&e, &ParamEnv::new(), &scene),
            Err(DslError::UnknownFrame("nope".into()))
        );
    }

    #[test]
    fn division_by_zero() {
        let e = expr("1 / (s - s)", "s = 0.3;");
        let env = ParamEnv::from([("s".to_string(), vec![0.3])]);
        assert_eq!(
            evaluate(&e, &env, &SceneState::empty()),
            Err(DslError::DivisionByZero)
        );
    }

    #[test]
    fn min_max_abs_sqrt() {
        let env = ParamEnv::new();
        let s = SceneState::empty();
        assert_eq!(evaluate(&expr("min(3, -1, 2)", ""), &env, &s).unwrap(), -1.0);
        assert_eq!(evaluate(&expr("max(3, -1)", ""), &env, &s).unwrap(), 3.0);
        assert_eq!(evaluate(&expr("abs(-2) + sqrt(16)", ""), &env, &s).unwrap(), 6.0);
    }

    #[test]
    fn arity_mismatch() {
        let t = parse("params { p = [1, 2]; q = 3; } plan { draw_line(p[0], p[1], q, 0); }").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(
            instantiate(&t, &[1.0], &SceneState::empty()),
            Err(DslError::ArityMismatch {
                expected: 3,
                got: 1
            })
        );
        let acts = instantiate(&t, &[0.1, 0.2, 0.3], &SceneState::empty()).unwrap();
        assert_eq!(acts[0].segment(), Some([0.1, 0.2, 0.3, 0.0]));
    }

    #[test]
    fn fixed_actions_ignore_empty_alpha() {
        let t = parse("plan { draw_line(0.1, 0.1, 0.3, 0.1); draw_line(0.3, 0.1, 0.3, 0.3); }").unwrap();
        let a = instantiate(&t, &[], &SceneState::empty()).unwrap();
        let b = instantiate(&t, &[], &SceneState::empty()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1], Action::draw_line(0.3, 0.1, 0.3, 0.3));
    }
}
