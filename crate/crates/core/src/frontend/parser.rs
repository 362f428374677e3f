//! Recursive-descent parser for Hybrid Rebeca.
//!
//! Operator precedence, lowest to highest: `||`, `&&`, comparisons,
//! `+ -`, `* /`, unary `! -`.

use super::ast::*;
use super::token::{Token, TokenKind};
use crate::diag::{Diagnostic, Span};
use crate::expr::{BinaryOp, Expr, Rational, UnaryOp};

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    last_span: Span,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            last_span: Span::new(1, 1),
        }
    }

    fn peek(&self) -> &TokenKind {
        self.tokens.get(self.pos).map(|t| &t.kind).unwrap_or(&TokenKind::Eof)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(self.last_span)
    }

    fn bump(&mut self) -> TokenKind {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.last_span = t.span;
                self.pos += 1;
                t.kind.clone()
            }
            None => TokenKind::Eof,
        }
    }

    fn err_expected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            self.span(),
            format!("expected {}, found {}", expected, self.peek().describe()),
        )
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if *self.peek() == kind {
            self.bump();
            Ok(())
        } else {
            Err(self.err_expected(&kind.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        let span = self.span();
        match self.peek() {
            TokenKind::Ident(_) => {
                if let TokenKind::Ident(text) = self.bump() {
                    Ok(Name::new(text, span))
                } else {
                    unreachable!()
                }
            }
            _ => Err(self.err_expected(what)),
        }
    }

    fn number(&mut self, what: &str) -> PResult<Rational> {
        match self.peek() {
            TokenKind::Num(_) => {
                if let TokenKind::Num(n) = self.bump() {
                    Ok(n)
                } else {
                    unreachable!()
                }
            }
            _ => Err(self.err_expected(what)),
        }
    }

    /// Numeric literal with an optional leading minus.
    fn signed_number(&mut self, what: &str) -> PResult<Rational> {
        if *self.peek() == TokenKind::Minus {
            self.bump();
            Ok(-self.number(what)?)
        } else {
            self.number(what)
        }
    }

    // ---- model structure -------------------------------------------------

    pub fn parse_model(&mut self) -> PResult<ModelAST> {
        let mut consts = Vec::new();
        let mut software_classes = Vec::new();
        let mut physical_classes = Vec::new();
        loop {
            match self.peek() {
                TokenKind::KwSoftwareClass => software_classes.push(self.parse_sclass()?),
                TokenKind::KwPhysicalClass => physical_classes.push(self.parse_pclass()?),
                TokenKind::Ident(s) if s == "const" => consts.push(self.parse_const()?),
                _ => break,
            }
        }
        if software_classes.is_empty() && physical_classes.is_empty() {
            return Err(self.err_expected("at least one 'softwareclass' or 'physicalclass'"));
        }
        self.expect(TokenKind::KwMain)?;
        self.expect(TokenKind::LBrace)?;
        let mut instances = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            instances.push(self.parse_instance()?);
        }
        let can_spec = if *self.peek() == TokenKind::KwCan {
            self.parse_can_spec()?
        } else {
            CanSpec::default()
        };
        self.expect(TokenKind::RBrace)?;
        if *self.peek() != TokenKind::Eof {
            return Err(self.err_expected("end of input"));
        }
        Ok(ModelAST {
            consts,
            software_classes,
            physical_classes,
            instances,
            can_spec,
        })
    }

    fn parse_const(&mut self) -> PResult<ConstDecl> {
        self.bump(); // `const`
        let name = self.ident("constant name")?;
        self.expect(TokenKind::Eq)?;
        let value = self.signed_number("numeric literal")?;
        self.expect(TokenKind::Semi)?;
        Ok(ConstDecl { name, value })
    }

    fn parse_sclass(&mut self) -> PResult<SClass> {
        self.expect(TokenKind::KwSoftwareClass)?;
        let name = self.ident("class name")?;
        self.expect(TokenKind::LBrace)?;
        let known_rebecs = self.parse_knownrebecs()?;
        let state_vars = self.parse_statevars()?;
        let mut msgsrvs = Vec::new();
        while *self.peek() == TokenKind::KwMsgSrv {
            msgsrvs.push(self.parse_msgsrv()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(SClass {
            name,
            known_rebecs,
            state_vars,
            msgsrvs,
        })
    }

    fn parse_pclass(&mut self) -> PResult<PClass> {
        self.expect(TokenKind::KwPhysicalClass)?;
        let name = self.ident("class name")?;
        self.expect(TokenKind::LBrace)?;
        let known_rebecs = self.parse_knownrebecs()?;
        let state_vars = self.parse_statevars()?;
        let mut msgsrvs = Vec::new();
        while *self.peek() == TokenKind::KwMsgSrv {
            msgsrvs.push(self.parse_msgsrv()?);
        }
        let mut modes = Vec::new();
        while *self.peek() == TokenKind::KwMode {
            modes.push(self.parse_mode()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(PClass {
            name,
            known_rebecs,
            state_vars,
            msgsrvs,
            modes,
        })
    }

    fn parse_knownrebecs(&mut self) -> PResult<Vec<KnownRebec>> {
        self.expect(TokenKind::KwKnownRebecs)?;
        self.expect(TokenKind::LBrace)?;
        let mut out = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            let class = self.ident("class name")?;
            loop {
                let formal = self.ident("known rebec name")?;
                out.push(KnownRebec {
                    class: class.clone(),
                    formal,
                });
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::Semi)?;
        }
        self.expect(TokenKind::RBrace)?;
        Ok(out)
    }

    fn prim_type(&mut self) -> PResult<PrimType> {
        let span = self.span();
        let name = self.ident("type ('int', 'real' or 'float')")?;
        match name.as_str() {
            "int" => Ok(PrimType::Int),
            "real" => Ok(PrimType::Real),
            "float" => Ok(PrimType::Float),
            other => Err(Diagnostic::error(
                span,
                format!("unknown type '{}' (expected 'int', 'real' or 'float')", other),
            )),
        }
    }

    fn parse_statevars(&mut self) -> PResult<Vec<VarDecl>> {
        self.expect(TokenKind::KwStateVars)?;
        self.expect(TokenKind::LBrace)?;
        let mut out = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            let ty = self.prim_type()?;
            loop {
                let name = self.ident("variable name")?;
                out.push(VarDecl { ty, name });
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::Semi)?;
        }
        self.expect(TokenKind::RBrace)?;
        Ok(out)
    }

    fn parse_msgsrv(&mut self) -> PResult<MsgSrv> {
        self.expect(TokenKind::KwMsgSrv)?;
        let name = self.ident("message server name")?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != TokenKind::RParen {
            loop {
                let ty = self.prim_type()?;
                let name = self.ident("parameter name")?;
                params.push(VarDecl { ty, name });
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let body = self.parse_block()?;
        Ok(MsgSrv { name, params, body })
    }

    fn parse_mode(&mut self) -> PResult<Mode> {
        self.expect(TokenKind::KwMode)?;
        let name = self.ident("mode name")?;
        self.expect(TokenKind::LBrace)?;
        self.expect(TokenKind::KwInv)?;
        self.expect(TokenKind::LParen)?;
        let invariant = self.parse_expr()?;
        self.expect(TokenKind::RParen)?;
        let mut flows = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            let var = self.ident("flow variable")?;
            self.expect(TokenKind::Prime)?;
            self.expect(TokenKind::Eq)?;
            let rhs = self.parse_expr()?;
            self.expect(TokenKind::Semi)?;
            flows.push((var, rhs));
        }
        if flows.is_empty() {
            return Err(self.err_expected("at least one flow equation (v' = e;)"));
        }
        self.expect(TokenKind::KwGuard)?;
        self.expect(TokenKind::LParen)?;
        let guard = self.parse_expr()?;
        self.expect(TokenKind::RParen)?;
        let actions = self.parse_mst()?;
        self.expect(TokenKind::RBrace)?;
        Ok(Mode {
            name,
            invariant,
            flows,
            guard,
            actions,
        })
    }

    // ---- statements ------------------------------------------------------

    fn parse_block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(TokenKind::LBrace)?;
        let mut out = Vec::new();
        while *self.peek() != TokenKind::RBrace {
            out.push(self.parse_stmt()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(out)
    }

    /// Block or single statement (`MSt` in the grammar).
    fn parse_mst(&mut self) -> PResult<Vec<Stmt>> {
        if *self.peek() == TokenKind::LBrace {
            self.parse_block()
        } else {
            Ok(vec![self.parse_stmt()?])
        }
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            TokenKind::KwIf => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.parse_expr()?;
                self.expect(TokenKind::RParen)?;
                let then_block = self.parse_mst()?;
                let else_block = if *self.peek() == TokenKind::KwElse {
                    self.bump();
                    self.parse_mst()?
                } else {
                    Vec::new()
                };
                StmtKind::If(cond, then_block, else_block)
            }
            TokenKind::KwDelay => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let amount = self.number("delay amount")?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Delay(amount)
            }
            TokenKind::KwSetMode => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let mode = self.ident("mode name")?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::SetModeLocal(mode)
            }
            TokenKind::KwSelf => {
                self.bump();
                let target = Name::new("self", span);
                self.parse_call_tail(target)?
            }
            TokenKind::Ident(_) => {
                let name = self.ident("identifier")?;
                match self.peek() {
                    TokenKind::Eq => {
                        self.bump();
                        let rhs = self.parse_expr()?;
                        self.expect(TokenKind::Semi)?;
                        StmtKind::Assign(name, rhs)
                    }
                    TokenKind::Dot => self.parse_call_tail(name)?,
                    _ => return Err(self.err_expected("'=' or '.'")),
                }
            }
            _ => return Err(self.err_expected("statement")),
        };
        Ok(Stmt { kind, span })
    }

    /// After a send target: `.m(args);` or `.setMode(m);`
    fn parse_call_tail(&mut self, target: Name) -> PResult<StmtKind> {
        self.expect(TokenKind::Dot)?;
        let msgsrv = self.ident("message server name")?;
        self.expect(TokenKind::LParen)?;
        if msgsrv.as_str() == "setMode" {
            let mode = self.ident("mode name")?;
            self.expect(TokenKind::RParen)?;
            self.expect(TokenKind::Semi)?;
            return Ok(StmtKind::SendSetMode { target, mode });
        }
        let mut args = Vec::new();
        if *self.peek() != TokenKind::RParen {
            loop {
                args.push(self.parse_expr()?);
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Semi)?;
        Ok(StmtKind::Send {
            target,
            msgsrv,
            args,
        })
    }

    // ---- main block ------------------------------------------------------

    fn parse_instance(&mut self) -> PResult<InstanceDecl> {
        let span = self.span();
        let class = self.ident("class name")?;
        let name = self.ident("instance name")?;
        self.expect(TokenKind::LParen)?;
        let mut bindings = Vec::new();
        if *self.peek() != TokenKind::RParen {
            loop {
                self.expect(TokenKind::At)?;
                let conn = match self.peek() {
                    TokenKind::KwCan => {
                        self.bump();
                        Connection::Can
                    }
                    TokenKind::Ident(s) if s == "Wire" => {
                        self.bump();
                        Connection::Wire
                    }
                    _ => return Err(self.err_expected("'CAN' or 'Wire'")),
                };
                let bound = self.ident("instance name")?;
                bindings.push((conn, bound));
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Colon)?;
        self.expect(TokenKind::LParen)?;
        let mut init_args = Vec::new();
        if *self.peek() != TokenKind::RParen {
            loop {
                init_args.push(self.signed_number("numeric literal")?);
                if *self.peek() == TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Semi)?;
        Ok(InstanceDecl {
            class,
            name,
            bindings,
            init_args,
            span,
        })
    }

    fn parse_can_spec(&mut self) -> PResult<CanSpec> {
        self.expect(TokenKind::KwCan)?;
        self.expect(TokenKind::LBrace)?;
        self.expect(TokenKind::KwPriorities)?;
        self.expect(TokenKind::LBrace)?;
        let mut priorities = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            priorities.push(self.parse_can_entry()?);
        }
        self.expect(TokenKind::RBrace)?;
        self.expect(TokenKind::KwDelays)?;
        self.expect(TokenKind::LBrace)?;
        let mut delays = Vec::new();
        while matches!(self.peek(), TokenKind::Ident(_)) {
            delays.push(self.parse_can_entry()?);
        }
        self.expect(TokenKind::RBrace)?;
        self.expect(TokenKind::RBrace)?;
        Ok(CanSpec {
            priorities,
            delays,
            explicit: true,
        })
    }

    /// `sender receiver.msgsrv [->] value;`
    fn parse_can_entry(&mut self) -> PResult<CanEntry> {
        let span = self.span();
        let sender = self.ident("sender instance")?;
        let receiver = self.ident("receiver instance")?;
        self.expect(TokenKind::Dot)?;
        let msgsrv = self.ident("message server name")?;
        if *self.peek() == TokenKind::Arrow {
            self.bump();
        }
        let value = self.signed_number("numeric value")?;
        self.expect(TokenKind::Semi)?;
        Ok(CanEntry {
            sender,
            receiver,
            msgsrv,
            value,
            span,
        })
    }

    // ---- expressions -----------------------------------------------------

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_or()
    }

    /// Parse an expression and require the whole input to be consumed.
    pub fn parse_expr_complete(&mut self) -> PResult<Expr> {
        let e = self.parse_expr()?;
        if *self.peek() != TokenKind::Eof {
            return Err(self.err_expected("end of expression"));
        }
        Ok(e)
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        while *self.peek() == TokenKind::OrOr {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_cmp()?;
        while *self.peek() == TokenKind::AndAnd {
            self.bump();
            let rhs = self.parse_cmp()?;
            lhs = Expr::binary(BinaryOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_cmp(&mut self) -> PResult<Expr> {
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            TokenKind::Lt => BinaryOp::Lt,
            TokenKind::Le => BinaryOp::Le,
            TokenKind::Gt => BinaryOp::Gt,
            TokenKind::Ge => BinaryOp::Ge,
            TokenKind::EqEq => BinaryOp::Eq,
            TokenKind::Neq => BinaryOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.parse_add()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn parse_add(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_mul()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_mul(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            TokenKind::Minus => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Neg, self.parse_unary()?))
            }
            TokenKind::Bang => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Not, self.parse_unary()?))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            TokenKind::Num(_) => {
                if let TokenKind::Num(n) = self.bump() {
                    Ok(Expr::Num(n))
                } else {
                    unreachable!()
                }
            }
            TokenKind::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            TokenKind::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            TokenKind::Ident(_) => {
                let name = self.ident("identifier")?;
                Ok(Expr::Var(name.text))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            _ => Err(self.err_expected("expression")),
        }
    }
}
