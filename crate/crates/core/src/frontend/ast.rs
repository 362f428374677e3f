//! Parsed model AST.
//!
//! Equality on AST nodes is structural and ignores source spans, so the
//! pretty-printer round-trip `parse(pretty_print(parse(m)))` can be compared
//! node for node.

use crate::diag::Span;
use crate::expr::{Expr, Rational};
use std::hash::{Hash, Hasher};

/// Identifier with the span it was written at. Compares by text only.
#[derive(Debug, Clone)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Name {
            text: text.into(),
            span,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}
impl Eq for Name {}
impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimType {
    Int,
    Real,
    Float,
}

impl PrimType {
    pub fn keyword(self) -> &'static str {
        match self {
            PrimType::Int => "int",
            PrimType::Real => "real",
            PrimType::Float => "float",
        }
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, PrimType::Real | PrimType::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub ty: PrimType,
    pub name: Name,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: Name,
    pub value: Rational,
}

/// Declared communication partner: `(class name, formal name)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownRebec {
    pub class: Name,
    pub formal: Name,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsgSrv {
    pub name: Name,
    pub params: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub name: Name,
    pub invariant: Expr,
    pub flows: Vec<(Name, Expr)>,
    pub guard: Expr,
    pub actions: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SClass {
    pub name: Name,
    pub known_rebecs: Vec<KnownRebec>,
    pub state_vars: Vec<VarDecl>,
    pub msgsrvs: Vec<MsgSrv>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PClass {
    pub name: Name,
    pub known_rebecs: Vec<KnownRebec>,
    pub state_vars: Vec<VarDecl>,
    pub msgsrvs: Vec<MsgSrv>,
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// `v = e;`
    Assign(Name, Expr),
    /// `if (e) { .. } [else { .. }]` — a missing else is an empty block.
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    /// `delay(t);`
    Delay(Rational),
    /// `setmode(m);` in the enclosing physical rebec.
    SetModeLocal(Name),
    /// `r.m(e, ..);` or `self.m(..);`
    Send {
        target: Name,
        msgsrv: Name,
        args: Vec<Expr>,
    },
    /// `r.setMode(m);`
    SendSetMode { target: Name, mode: Name },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connection {
    Wire,
    Can,
}

impl Connection {
    pub fn tag(self) -> &'static str {
        match self {
            Connection::Wire => "@Wire",
            Connection::Can => "@CAN",
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceDecl {
    pub class: Name,
    pub name: Name,
    pub bindings: Vec<(Connection, Name)>,
    pub init_args: Vec<Rational>,
    pub span: Span,
}

impl PartialEq for InstanceDecl {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class
            && self.name == other.name
            && self.bindings == other.bindings
            && self.init_args == other.init_args
    }
}

/// One `sender receiver.msgsrv value;` entry in a CAN block.
#[derive(Debug, Clone)]
pub struct CanEntry {
    pub sender: Name,
    pub receiver: Name,
    pub msgsrv: Name,
    pub value: Rational,
    pub span: Span,
}

impl PartialEq for CanEntry {
    fn eq(&self, other: &Self) -> bool {
        self.sender == other.sender
            && self.receiver == other.receiver
            && self.msgsrv == other.msgsrv
            && self.value == other.value
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CanSpec {
    pub priorities: Vec<CanEntry>,
    pub delays: Vec<CanEntry>,
    /// Whether an explicit `CAN { .. }` block appeared in the source.
    pub explicit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelAST {
    pub consts: Vec<ConstDecl>,
    pub software_classes: Vec<SClass>,
    pub physical_classes: Vec<PClass>,
    pub instances: Vec<InstanceDecl>,
    pub can_spec: CanSpec,
}
