//! The plan-template language proposers emit.
//!
//! A template declares continuous parameters with initial guesses and lists
//! actions whose arguments are scalar expressions over those parameters and
//! read-only scene accessors. The grammar is documented in
//! `docs/plan-dsl.md`, which is also embedded in proposer prompts.

mod ast;
mod eval;
mod lexer;
mod parser;
mod print;

use thiserror::Error;

pub use ast::{
    ActionArg, ActionCall, ActionKind, BinOp, Expr, Func, ParamDecl, ParamValue, PlanTemplate,
};
pub use eval::{bind, evaluate, instantiate, Action, ActionSequence, ArgValue, ParamEnv};
pub use lexer::{tokenize, Tok, Token};
pub use parser::parse;
pub use print::{print, print_expr};

pub const GRAMMAR_DOC: &str = include_str!("../../docs/plan-dsl.md");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared identifier `{0}`")]
    UndeclaredIdentifier(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("frame `{frame}` has no attribute `{attr}`")]
    UnknownAttribute { frame: String, attr: String },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("expected {expected} parameter values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

impl DslError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        DslError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
