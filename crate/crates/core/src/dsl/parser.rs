use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::DslError;

const MAX_DEPTH: usize = 128;

/// Parses a `.mplan` template.
///
/// ```text
/// template     := param_block? action_block
/// param_block  := "params" "{" (ident "=" number_or_vector ";")* "}"
/// action_block := "plan" "{" (ident "(" arg ("," arg)* ")" ";")* "}"
/// ```
pub fn parse(text: &str) -> Result<PlanTemplate, DslError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        params: Vec::new(),
        depth: 0,
    };
    let (params, actions) = p.template()?;
    Ok(PlanTemplate {
        params,
        actions,
        source_text: text.to_string(),
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    params: Vec<ParamDecl>,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> DslError {
        let t = self.peek();
        DslError::syntax(t.line, t.column, msg)
    }

    fn expect(&mut self, want: Tok, ctx: &str) -> Result<Token, DslError> {
        if self.peek().tok == want {
            Ok(self.bump())
        } else {
            let found = self.peek().tok.describe();
            Err(self.error_here(format!("expected {} {ctx}, found {found}", want.describe())))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => {
                let found = other.describe();
                Err(self.error_here(format!("expected `{kw}`, found {found}")))
            }
        }
    }

    fn template(&mut self) -> Result<(Vec<ParamDecl>, Vec<ActionCall>), DslError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "params") {
            self.param_block()?;
        }
        self.keyword("plan")?;
        self.expect(Tok::LBrace, "to open the plan block")?;
        let mut actions = Vec::new();
        while self.peek().tok != Tok::RBrace {
            actions.push(self.action()?);
        }
        self.bump();
        if self.peek().tok != Tok::Eof {
            let found = self.peek().tok.describe();
            return Err(self.error_here(format!("unexpected {found} after plan block")));
        }
        Ok((std::mem::take(&mut self.params), actions))
    }

    fn param_block(&mut self) -> Result<(), DslError> {
        self.keyword("params")?;
        self.expect(Tok::LBrace, "to open the params block")?;
        while self.peek().tok != Tok::RBrace {
            let name_tok = self.bump();
            let name = match name_tok.tok {
                Tok::Ident(s) => s,
                other => {
                    return Err(DslError::syntax(
                        name_tok.line,
                        name_tok.column,
                        format!("expected parameter name, found {}", other.describe()),
                    ))
                }
            };
            if is_reserved(&name) {
                return Err(DslError::syntax(
                    name_tok.line,
                    name_tok.column,
                    format!("`{name}` is reserved and cannot name a parameter"),
                ));
            }
            if self.params.iter().any(|p| p.name == name) {
                return Err(DslError::syntax(
                    name_tok.line,
                    name_tok.column,
                    format!("parameter `{name}` declared twice"),
                ));
            }
            self.expect(Tok::Eq, "after parameter name")?;
            let initial = if self.peek().tok == Tok::LBracket {
                self.bump();
                let mut vals = vec![self.signed_number()?];
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    vals.push(self.signed_number()?);
                }
                self.expect(Tok::RBracket, "to close the vector")?;
                ParamValue::Vector(vals)
            } else {
                ParamValue::Scalar(self.signed_number()?)
            };
            self.expect(Tok::Semi, "after parameter value")?;
            self.params.push(ParamDecl { name, initial });
        }
        self.bump();
        Ok(())
    }

    fn signed_number(&mut self) -> Result<f64, DslError> {
        let neg = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Number(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            ref other => {
                let found = other.describe();
                Err(self.error_here(format!("expected number, found {found}")))
            }
        }
    }

    fn action(&mut self) -> Result<ActionCall, DslError> {
        let t = self.bump();
        let name = match t.tok {
            Tok::Ident(s) => s,
            other => {
                return Err(DslError::syntax(
                    t.line,
                    t.column,
                    format!("expected action name, found {}", other.describe()),
                ))
            }
        };
        let kind = ActionKind::from_name(&name).ok_or(DslError::UnknownAction(name))?;
        self.expect(Tok::LParen, "after action name")?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            args.push(self.action_arg()?);
            while self.peek().tok == Tok::Comma {
                self.bump();
                args.push(self.action_arg()?);
            }
        }
        let close = self.expect(Tok::RParen, "to close the argument list")?;
        if args.len() != kind.arity() {
            return Err(DslError::syntax(
                close.line,
                close.column,
                format!(
                    "{} takes {} arguments, got {}",
                    kind,
                    kind.arity(),
                    args.len()
                ),
            ));
        }
        let text_ok = kind == ActionKind::Pick;
        if let Some(bad) = args.iter().position(|a| matches!(a, ActionArg::Text(_)) != text_ok) {
            return Err(DslError::syntax(
                t.line,
                t.column,
                format!(
                    "argument {} of {} must be {}",
                    bad + 1,
                    kind,
                    if text_ok { "a frame name string" } else { "an expression" }
                ),
            ));
        }
        self.expect(Tok::Semi, "after action")?;
        Ok(ActionCall { kind, args })
    }

    fn action_arg(&mut self) -> Result<ActionArg, DslError> {
        if let Tok::Str(s) = &self.peek().tok {
            let s = s.clone();
            self.bump();
            return Ok(ActionArg::Text(s));
        }
        Ok(ActionArg::Expr(self.expr()?))
    }

    fn enter(&mut self) -> Result<(), DslError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.error_here("expression nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let t = self.bump();
        match t.tok.clone() {
            Tok::Number(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "to close the parenthesis")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, &t),
            other => Err(DslError::syntax(
                t.line,
                t.column,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }

    fn identifier(&mut self, name: String, at: &Token) -> Result<Expr, DslError> {
        if name == "frame" && *self.peek_at(0) == Tok::LParen {
            return self.frame_accessor();
        }
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(func) = Func::from_name(&name) {
            self.expect(Tok::LParen, &format!("after `{name}`"))?;
            let mut args = vec![self.expr()?];
            while self.peek().tok == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
            let close = self.expect(Tok::RParen, "to close the call")?;
            if !func.accepts(args.len()) {
                return Err(DslError::syntax(
                    close.line,
                    close.column,
                    format!("`{name}` cannot take {} arguments", args.len()),
                ));
            }
            return Ok(Expr::Call { func, args });
        }
        let Some(decl) = self.params.iter().find(|p| p.name == name) else {
            return Err(DslError::UndeclaredIdentifier(name));
        };
        let len = decl.initial.len();
        let is_vector = matches!(decl.initial, ParamValue::Vector(_));
        if self.peek().tok == Tok::LBracket {
            if !is_vector {
                return Err(self.error_here(format!("scalar parameter `{name}` cannot be indexed")));
            }
            let index = self.index()?;
            if index >= len {
                return Err(DslError::syntax(
                    at.line,
                    at.column,
                    format!("index {index} out of range for `{name}` of length {len}"),
                ));
            }
            Ok(Expr::Param {
                name,
                index: Some(index),
            })
        } else if is_vector {
            Err(DslError::syntax(
                at.line,
                at.column,
                format!("vector parameter `{name}` must be indexed"),
            ))
        } else {
            Ok(Expr::Param { name, index: None })
        }
    }

    fn index(&mut self) -> Result<usize, DslError> {
        self.expect(Tok::LBracket, "to start an index")?;
        let t = self.bump();
        let idx = match t.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => v as usize,
            other => {
                return Err(DslError::syntax(
                    t.line,
                    t.column,
                    format!("expected non-negative integer index, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::RBracket, "to close the index")?;
        Ok(idx)
    }

    fn frame_accessor(&mut self) -> Result<Expr, DslError> {
        self.expect(Tok::LParen, "after `frame`")?;
        let t = self.bump();
        let frame = match t.tok {
            Tok::Str(s) => s,
            other => {
                return Err(DslError::syntax(
                    t.line,
                    t.column,
                    format!("expected frame name string, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::RParen, "after frame name")?;
        self.expect(Tok::Dot, "before frame attribute")?;
        let t = self.bump();
        let attr = match t.tok {
            Tok::Ident(s) => s,
            other => {
                return Err(DslError::syntax(
                    t.line,
                    t.column,
                    format!("expected attribute name, found {}", other.describe()),
                ))
            }
        };
        let indexed = matches!(attr.as_str(), "size" | "color");
        let scalar = matches!(
            attr.as_str(),
            "x_pos" | "y_pos" | "z_pos" | "x_rot" | "y_rot" | "z_rot"
        );
        if !indexed && !scalar {
            return Err(DslError::syntax(
                t.line,
                t.column,
                format!("unknown frame attribute `{attr}`"),
            ));
        }
        let index = if indexed {
            if self.peek().tok != Tok::LBracket {
                return Err(self.error_here(format!("`{attr}` must be indexed")));
            }
            Some(self.index()?)
        } else {
            None
        };
        Ok(Expr::Frame { frame, attr, index })
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "params" | "plan" | "frame" | "pi") || Func::from_name(name).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax_pos(text: &str) -> (usize, usize) {
        match parse(text) {
            Err(DslError::Syntax { line, column, .. }) => (line, column),
            other => panic!("expected syntax error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn minimal_template() {
        let t = parse("params { s = 0.2; } plan { draw_line(0.1, 0.1, 0.1 + s, 0.1); }").unwrap();
        assert_eq!(t.params.len(), 1);
        assert_eq!(t.actions.len(), 1);
        assert_eq!(t.actions[0].kind, ActionKind::DrawLine);
        assert_eq!(t.initial_guess(), vec![0.2]);
    }

    #[test]
    fn unknown_action() {
        assert_eq!(
            parse("plan { fly(1,2); }").unwrap_err(),
            DslError::UnknownAction("fly".into())
        );
    }

    #[test]
    fn undeclared_identifier() {
        assert_eq!(
            parse("plan { draw_line(a, 0, 0, 0); }").unwrap_err(),
            DslError::UndeclaredIdentifier("a".into())
        );
    }

    #[test]
    fn precedence_is_standard() {
        let t = parse("plan { draw_line(1 + 2 * 3, -1 - 2, 1 / 2 / 4, 0); }").unwrap();
        let ActionArg::Expr(e) = &t.actions[0].args[0] else { unreachable!() };
        assert_eq!(
            *e,
            Expr::binary(
                BinOp::Add,
                Expr::Num(1.0),
                Expr::binary(BinOp::Mul, Expr::Num(2.0), Expr::Num(3.0))
            )
        );
        let ActionArg::Expr(e) = &t.actions[0].args[2] else { unreachable!() };
        assert_eq!(
            *e,
            Expr::binary(
                BinOp::Div,
                Expr::binary(BinOp::Div, Expr::Num(1.0), Expr::Num(2.0)),
                Expr::Num(4.0)
            )
        );
    }

    #[test]
    fn frame_accessors_and_pick() {
        let t = parse(
            "plan { pick(\"block_red\"); place_sr(frame(\"t\").x_pos, frame(\"t\").size[1], 0, 0, pi); }",
        )
        .unwrap();
        assert_eq!(t.referenced_frames(), vec!["block_red".to_string(), "t".to_string()]);
    }

    #[test]
    fn positioned_errors() {
        assert_eq!(syntax_pos("plan { draw_line(1, 2, 3); }"), (1, 25));
        assert_eq!(syntax_pos("params { a = ; } plan { }"), (1, 14));
        assert_eq!(syntax_pos("plan {\n  draw_line(1, 2, 3, 4)\n}"), (3, 1));
        assert_eq!(syntax_pos("plan { draw_line(frame(\"a\").mass, 0, 0, 0); }"), (1, 29));
        assert_eq!(syntax_pos("params { v = [1, 2]; } plan { draw_line(v, 0, 0, 0); }"), (1, 41));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("plan {{ draw_line({}1{}, 0, 0, 0); }}", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse(&text), Err(DslError::Syntax { .. })));
        let text = format!("plan {{ draw_line({}1, 0, 0, 0); }}", "-".repeat(5000));
        assert!(matches!(parse(&text), Err(DslError::Syntax { .. })));
    }
}
