//! Token stream produced by the lexer.

use crate::diag::Span;
use crate::expr::Rational;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    // Keywords of the surface grammar.
    KwSoftwareClass,
    KwPhysicalClass,
    KwKnownRebecs,
    KwStateVars,
    KwMsgSrv,
    KwMode,
    KwInv,
    KwGuard,
    KwDelay,
    KwSetMode,
    KwMain,
    KwCan,
    KwPriorities,
    KwDelays,
    KwSelf,
    KwIf,
    KwElse,

    Ident(String),
    Num(Rational),

    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    At,
    Prime,
    Arrow,

    Eq, // `=`
    EqEq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    AndAnd,
    OrOr,

    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::KwSoftwareClass => "'softwareclass'".into(),
            TokenKind::KwPhysicalClass => "'physicalclass'".into(),
            TokenKind::KwKnownRebecs => "'knownrebecs'".into(),
            TokenKind::KwStateVars => "'statevars'".into(),
            TokenKind::KwMsgSrv => "'msgsrv'".into(),
            TokenKind::KwMode => "'mode'".into(),
            TokenKind::KwInv => "'inv'".into(),
            TokenKind::KwGuard => "'guard'".into(),
            TokenKind::KwDelay => "'delay'".into(),
            TokenKind::KwSetMode => "'setmode'".into(),
            TokenKind::KwMain => "'main'".into(),
            TokenKind::KwCan => "'CAN'".into(),
            TokenKind::KwPriorities => "'priorities'".into(),
            TokenKind::KwDelays => "'delays'".into(),
            TokenKind::KwSelf => "'self'".into(),
            TokenKind::KwIf => "'if'".into(),
            TokenKind::KwElse => "'else'".into(),
            TokenKind::Ident(s) => format!("identifier '{}'", s),
            TokenKind::Num(_) => "number".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Semi => "';'".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::At => "'@'".into(),
            TokenKind::Prime => "'''".into(),
            TokenKind::Arrow => "'->'".into(),
            TokenKind::Eq => "'='".into(),
            TokenKind::EqEq => "'=='".into(),
            TokenKind::Neq => "'!='".into(),
            TokenKind::Lt => "'<'".into(),
            TokenKind::Le => "'<='".into(),
            TokenKind::Gt => "'>'".into(),
            TokenKind::Ge => "'>='".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Bang => "'!'".into(),
            TokenKind::AndAnd => "'&&'".into(),
            TokenKind::OrOr => "'||'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}
