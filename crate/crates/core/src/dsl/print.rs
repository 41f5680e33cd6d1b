use std::fmt::Write;

use super::ast::*;

/// Canonical text for a template; `parse(print(t))` reproduces `t`'s program.
pub fn print(t: &PlanTemplate) -> String {
    let mut out = String::new();
    if !t.params.is_empty() {
        out.push_str("params {\n");
        for p in &t.params {
            let value = match &p.initial {
                ParamValue::Scalar(v) => number(*v),
                ParamValue::Vector(vs) => format!(
                    "[{}]",
                    vs.iter().map(|v| number(*v)).collect::<Vec<_>>().join(", ")
                ),
            };
            let _ = writeln!(out, "  {} = {};", p.name, value);
        }
        out.push_str("}\n");
    }
    out.push_str("plan {\n");
    for a in &t.actions {
        let args: Vec<String> = a
            .args
            .iter()
            .map(|arg| match arg {
                ActionArg::Expr(e) => print_expr(e),
                ActionArg::Text(s) => format!("\"{s}\""),
            })
            .collect();
        let _ = writeln!(out, "  {}({});", a.kind, args.join(", "));
    }
    out.push_str("}\n");
    out
}

/// Shortest representation that parses back to the same `f64`.
fn number(v: f64) -> String {
    format!("{v:?}")
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Neg(_) => 3,
        Expr::Num(v) if v.is_sign_negative() => 3,
        _ => 4,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Num(v) => number(*v),
        Expr::Pi => "pi".to_string(),
        Expr::Param { name, index: None } => name.clone(),
        Expr::Param {
            name,
            index: Some(i),
        } => format!("{name}[{i}]"),
        Expr::Frame { frame, attr, index } => match index {
            Some(i) => format!("frame(\"{frame}\").{attr}[{i}]"),
            None => format!("frame(\"{frame}\").{attr}"),
        },
        Expr::Neg(inner) => {
            if precedence(inner) < 3 {
                format!("-({})", print_expr(inner))
            } else {
                format!("-{}", print_expr(inner))
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let l = if precedence(lhs) < p {
                format!("({})", print_expr(lhs))
            } else {
                print_expr(lhs)
            };
            // left-associative: an equal-precedence right operand keeps its parentheses
            let r = if precedence(rhs) <= p {
                format!("({})", print_expr(rhs))
            } else {
                print_expr(rhs)
            };
            format!("{l} {} {r}", op.symbol())
        }
        Expr::Call { func, args } => format!(
            "{}({})",
            func.name(),
            args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
        ),
    }
}
