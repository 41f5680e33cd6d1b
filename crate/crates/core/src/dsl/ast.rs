use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    DrawLine,
    PushMotion,
    Pick,
    PlaceSr,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::DrawLine,
        ActionKind::PushMotion,
        ActionKind::Pick,
        ActionKind::PlaceSr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::DrawLine => "draw_line",
            ActionKind::PushMotion => "push_motion",
            ActionKind::Pick => "pick",
            ActionKind::PlaceSr => "place_sr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            ActionKind::DrawLine | ActionKind::PushMotion => 4,
            ActionKind::Pick => 1,
            ActionKind::PlaceSr => 5,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Min,
    Max,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Sqrt, Func::Min, Func::Max, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// `min`/`max` are variadic with at least two arguments.
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            _ => n == 1,
        }
    }
}

/// Scalar expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Reference to a declared parameter; vector parameters carry an element index.
    Param { name: String, index: Option<usize> },
    /// Read-only scene accessor `frame("name").attr` or `frame("name").attr[i]`.
    Frame {
        frame: String,
        attr: String,
        index: Option<usize>,
    },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call { func: Func, args: Vec<Expr> },
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn param(name: &str) -> Self {
        Expr::Param {
            name: name.to_string(),
            index: None,
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Walks the tree depth-first, visiting every node.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) => e.visit(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionArg {
    Expr(Expr),
    /// String literal, only meaningful for `pick("frame")`.
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCall {
    pub kind: ActionKind,
    pub args: Vec<ActionArg>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ParamValue {
    pub fn len(&self) -> usize {
        match self {
            ParamValue::Scalar(_) => 1,
            ParamValue::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &[f64] {
        match self {
            ParamValue::Scalar(v) => std::slice::from_ref(v),
            ParamValue::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    pub initial: ParamValue,
}

/// A parsed plan program: declared parameters with initial guesses and the
/// action list whose arguments are expressions over those parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTemplate {
    pub params: Vec<ParamDecl>,
    pub actions: Vec<ActionCall>,
    pub source_text: String,
}

impl PlanTemplate {
    /// Structural equality ignoring the source text.
    pub fn same_program(&self, other: &PlanTemplate) -> bool {
        self.params == other.params && self.actions == other.actions
    }

    /// Number of scalars in the flattened parameter vector.
    pub fn dim(&self) -> usize {
        self.params.iter().map(|p| p.initial.len()).sum()
    }

    /// Initial guesses flattened in declaration order.
    pub fn initial_guess(&self) -> Vec<f64> {
        self.params
            .iter()
            .flat_map(|p| p.initial.values().iter().copied())
            .collect()
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Names of scene frames the template reads.
    pub fn referenced_frames(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for call in &self.actions {
            for arg in &call.args {
                match arg {
                    ActionArg::Expr(e) => e.visit(&mut |n| {
                        if let Expr::Frame { frame, .. } = n {
                            if !out.contains(frame) {
                                out.push(frame.clone());
                            }
                        }
                    }),
                    ActionArg::Text(t) if call.kind == ActionKind::Pick => {
                        if !out.contains(t) {
                            out.push(t.clone());
                        }
                    }
                    ActionArg::Text(_) => {}
                }
            }
        }
        out
    }
}
