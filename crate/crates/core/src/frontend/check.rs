//! Static checks and lowering to a `CheckedModel`.
//!
//! The checker verifies the type placement rules (int only in software
//! classes, real only in physical classes), resolves every name, classifies
//! sends as wire or CAN from the instance graph, substitutes named constants,
//! and flattens statement blocks into an arena indexed by `BlockId`.

use super::ast::*;
use crate::diag::{has_errors, Diagnostic, Span};
use crate::expr::{BinaryOp, Expr, Rational, UnaryOp};
use num::{One, Signed};
use std::collections::{BTreeMap, BTreeSet};

pub type ClassId = usize;
pub type RebecId = usize;
pub type BlockId = usize;

/// Connection-classified message key: (sender, receiver, message server).
pub type CanKey = (RebecId, RebecId, String);

#[derive(Debug, Clone, PartialEq)]
pub struct CanLink {
    pub priority: u64,
    pub delay: Rational,
}

#[derive(Debug, Clone)]
pub struct CheckedModel {
    pub classes: Vec<ClassInfo>,
    pub instances: Vec<Instance>,
    pub blocks: Vec<Vec<CStmt>>,
    pub can: BTreeMap<CanKey, CanLink>,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    pub is_physical: bool,
    pub known: Vec<KnownInfo>,
    pub vars: Vec<(String, PrimType)>,
    pub msgsrvs: Vec<MsgSrvInfo>,
    pub modes: Vec<ModeInfo>,
    /// Implicit one-statement blocks executed when a `setMode` message is
    /// taken; keyed by mode name, including the reserved `none`.
    pub setmode_blocks: BTreeMap<String, BlockId>,
}

#[derive(Debug, Clone)]
pub struct KnownInfo {
    pub class: ClassId,
    pub formal: String,
}

#[derive(Debug, Clone)]
pub struct MsgSrvInfo {
    pub name: String,
    pub params: Vec<(String, PrimType)>,
    pub body: BlockId,
}

#[derive(Debug, Clone)]
pub struct ModeInfo {
    pub name: String,
    pub invariant: Expr,
    pub flows: Vec<(String, Expr)>,
    pub guard: Expr,
    pub actions: BlockId,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub class: ClassId,
    /// Bound instance per known-rebec slot, in declaration order.
    pub bindings: Vec<RebecId>,
    /// Per-direction connection for each slot.
    pub conns: Vec<Connection>,
    pub init_args: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SendTarget {
    SelfRebec,
    /// Index into the class's known-rebec list.
    Known(usize),
}

/// Checked statement. Variable references are unqualified class-level names;
/// the translator renames them per instance.
#[derive(Debug, Clone, PartialEq)]
pub enum CStmt {
    AssignInt {
        var: String,
        expr: Expr,
        span: Span,
    },
    AssignCont {
        var: String,
        expr: Expr,
        span: Span,
    },
    If {
        cond: Expr,
        /// True when the condition references no continuous variable and is
        /// therefore decided during translation.
        discrete: bool,
        then_block: BlockId,
        else_block: BlockId,
        span: Span,
    },
    Delay {
        amount: Rational,
        span: Span,
    },
    SetMode {
        /// `None` is the reserved idle mode.
        mode: Option<String>,
        span: Span,
    },
    Send {
        target: SendTarget,
        msgsrv: String,
        /// Argument expression plus the declared parameter type.
        args: Vec<(Expr, PrimType)>,
        span: Span,
    },
    SendSetMode {
        target: SendTarget,
        mode: Option<String>,
        span: Span,
    },
}

impl CStmt {
    pub fn span(&self) -> Span {
        match self {
            CStmt::AssignInt { span, .. }
            | CStmt::AssignCont { span, .. }
            | CStmt::If { span, .. }
            | CStmt::Delay { span, .. }
            | CStmt::SetMode { span, .. }
            | CStmt::Send { span, .. }
            | CStmt::SendSetMode { span, .. } => *span,
        }
    }
}

impl CheckedModel {
    pub fn class_of(&self, r: RebecId) -> &ClassInfo {
        &self.classes[self.instances[r].class]
    }

    pub fn find_instance(&self, name: &str) -> Option<RebecId> {
        self.instances.iter().position(|i| i.name == name)
    }

    pub fn msgsrv<'a>(&'a self, class: ClassId, name: &str) -> Option<&'a MsgSrvInfo> {
        self.classes[class].msgsrvs.iter().find(|m| m.name == name)
    }

    pub fn mode_index(&self, class: ClassId, name: &str) -> Option<usize> {
        self.classes[class].modes.iter().position(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Cont,
    Bool,
}

struct Checker<'a> {
    ast: &'a ModelAST,
    consts: BTreeMap<String, Rational>,
    class_ids: BTreeMap<String, ClassId>,
    classes: Vec<ClassInfo>,
    /// Declared mode names per class, available before bodies are lowered.
    declared_modes: Vec<BTreeSet<String>>,
    blocks: Vec<Vec<CStmt>>,
    diags: Vec<Diagnostic>,
}

/// Check a parsed model. Returns the lowered model (warnings inside) or the
/// full list of diagnostics when any error was found.
pub fn check(ast: &ModelAST) -> Result<CheckedModel, Vec<Diagnostic>> {
    let mut ck = Checker {
        ast,
        consts: BTreeMap::new(),
        class_ids: BTreeMap::new(),
        classes: Vec::new(),
        declared_modes: Vec::new(),
        blocks: Vec::new(),
        diags: Vec::new(),
    };
    ck.collect_consts();
    ck.collect_class_table();
    ck.check_signatures();
    ck.check_bodies();
    let instances = ck.check_instances();
    let can = ck.check_can(&instances);
    ck.check_variable_names(&instances);

    if has_errors(&ck.diags) {
        return Err(ck.diags);
    }
    let warnings = ck.diags;
    Ok(CheckedModel {
        classes: ck.classes,
        instances,
        blocks: ck.blocks,
        can,
        warnings,
    })
}

impl<'a> Checker<'a> {
    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    fn warn(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(span, msg));
    }

    fn collect_consts(&mut self) {
        for c in &self.ast.consts {
            if self
                .consts
                .insert(c.name.text.clone(), c.value.clone())
                .is_some()
            {
                self.error(c.name.span, format!("duplicate constant '{}'", c.name.text));
            }
        }
    }

    fn class_decls(&self) -> Vec<(bool, &'a Name, &'a [KnownRebec], &'a [VarDecl], &'a [MsgSrv], &'a [Mode])> {
        let mut out = Vec::new();
        for sc in &self.ast.software_classes {
            out.push((false, &sc.name, &sc.known_rebecs[..], &sc.state_vars[..], &sc.msgsrvs[..], &[][..]));
        }
        for pc in &self.ast.physical_classes {
            out.push((true, &pc.name, &pc.known_rebecs[..], &pc.state_vars[..], &pc.msgsrvs[..], &pc.modes[..]));
        }
        out
    }

    fn collect_class_table(&mut self) {
        for (id, (is_physical, name, ..)) in self.class_decls().into_iter().enumerate() {
            if self.class_ids.insert(name.text.clone(), id).is_some() {
                self.error(name.span, format!("duplicate class '{}'", name.text));
            }
            self.classes.push(ClassInfo {
                name: name.text.clone(),
                is_physical,
                known: Vec::new(),
                vars: Vec::new(),
                msgsrvs: Vec::new(),
                modes: Vec::new(),
                setmode_blocks: BTreeMap::new(),
            });
        }
    }

    /// First pass: known rebecs, state variables, message-server signatures
    /// and declared mode names for every class. Bodies are lowered later so
    /// sends can reference classes declared in any order.
    fn check_signatures(&mut self) {
        for (id, (is_physical, name, known, vars, msgsrvs, modes)) in
            self.class_decls().into_iter().enumerate()
        {
            // Known rebecs.
            let mut known_info = Vec::new();
            let mut formals = BTreeSet::new();
            let mut errs: Vec<(Span, String)> = Vec::new();
            for k in known {
                let class = match self.class_ids.get(k.class.as_str()) {
                    Some(&c) => c,
                    None => {
                        errs.push((
                            k.class.span,
                            format!("unknown class '{}' in knownrebecs", k.class.text),
                        ));
                        0
                    }
                };
                if !formals.insert(k.formal.text.clone()) {
                    errs.push((
                        k.formal.span,
                        format!("duplicate known rebec '{}'", k.formal.text),
                    ));
                }
                known_info.push(KnownInfo {
                    class,
                    formal: k.formal.text.clone(),
                });
            }

            // State variables and placement rules.
            let mut var_info = Vec::new();
            let mut var_names = BTreeSet::new();
            for v in vars {
                match (v.ty, is_physical) {
                    (PrimType::Int, true) => errs.push((
                        v.name.span,
                        format!("int variable '{}' not allowed in physical class", v.name.text),
                    )),
                    (PrimType::Real, false) => errs.push((
                        v.name.span,
                        format!("real variable '{}' not allowed in software class", v.name.text),
                    )),
                    _ => {}
                }
                if !var_names.insert(v.name.text.clone()) {
                    errs.push((v.name.span, format!("duplicate variable '{}'", v.name.text)));
                }
                if self.consts.contains_key(v.name.as_str()) {
                    errs.push((
                        v.name.span,
                        format!("variable '{}' shadows a constant", v.name.text),
                    ));
                }
                var_info.push((v.name.text.clone(), v.ty));
            }

            // Message-server signatures.
            let mut srvs = Vec::new();
            let mut srv_names = BTreeSet::new();
            for srv in msgsrvs {
                if !srv_names.insert(srv.name.text.clone()) {
                    errs.push((
                        srv.name.span,
                        format!("duplicate message server '{}'", srv.name.text),
                    ));
                }
                if srv.name.as_str() == "setMode" {
                    errs.push((srv.name.span, "'setMode' is a reserved message server name".into()));
                }
                let mut params = Vec::new();
                for p in &srv.params {
                    match p.ty {
                        PrimType::Real => errs.push((
                            p.name.span,
                            format!("parameter '{}' cannot have type real", p.name.text),
                        )),
                        PrimType::Int if is_physical => errs.push((
                            p.name.span,
                            format!("int parameter '{}' not allowed in physical class", p.name.text),
                        )),
                        _ => {}
                    }
                    if var_names.contains(p.name.as_str()) {
                        errs.push((
                            p.name.span,
                            format!("parameter '{}' shadows a state variable", p.name.text),
                        ));
                    }
                    if params.iter().any(|(n, _): &(String, PrimType)| n == p.name.as_str()) {
                        errs.push((p.name.span, format!("duplicate parameter '{}'", p.name.text)));
                    }
                    params.push((p.name.text.clone(), p.ty));
                }
                srvs.push(MsgSrvInfo {
                    name: srv.name.text.clone(),
                    params,
                    body: usize::MAX, // lowered in the body pass
                });
            }
            if !srv_names.contains("initial") {
                errs.push((
                    name.span,
                    format!("class '{}' has no message server named 'initial'", name.text),
                ));
            }

            // Declared mode names.
            let mut mode_names = BTreeSet::new();
            for m in modes {
                if m.name.as_str() == "none" {
                    errs.push((m.name.span, "mode name 'none' is reserved".into()));
                }
                if !mode_names.insert(m.name.text.clone()) {
                    errs.push((m.name.span, format!("duplicate mode '{}'", m.name.text)));
                }
            }

            for (span, msg) in errs {
                self.error(span, msg);
            }
            self.classes[id].known = known_info;
            self.classes[id].vars = var_info;
            self.classes[id].msgsrvs = srvs;
            self.declared_modes.push(mode_names);
        }
    }

    /// Second pass: lower statement blocks and mode expressions.
    fn check_bodies(&mut self) {
        for (id, (is_physical, _, _, _, msgsrvs, modes)) in
            self.class_decls().into_iter().enumerate()
        {
            for (srv_idx, srv) in msgsrvs.iter().enumerate() {
                let params = self.classes[id].msgsrvs[srv_idx].params.clone();
                let body = self.lower_block(&srv.body, id, &params, is_physical);
                self.classes[id].msgsrvs[srv_idx].body = body;
            }

            for m in modes {
                let invariant = self.lower_bool_expr(&m.invariant, id, &[], m.name.span);
                let guard = self.lower_bool_expr(&m.guard, id, &[], m.name.span);
                let mut flows = Vec::new();
                let mut flow_vars = BTreeSet::new();
                for (var, rhs) in &m.flows {
                    let ty = self.classes[id]
                        .vars
                        .iter()
                        .find(|(n, _)| n == var.as_str())
                        .map(|(_, t)| *t);
                    match ty {
                        Some(PrimType::Real) => {}
                        Some(_) => self.error(
                            var.span,
                            format!("flow target '{}' is not a real variable", var.text),
                        ),
                        None => self.error(
                            var.span,
                            format!("flow target '{}' is not a state variable", var.text),
                        ),
                    }
                    if !flow_vars.insert(var.text.clone()) {
                        self.error(
                            var.span,
                            format!("variable '{}' has more than one flow in this mode", var.text),
                        );
                    }
                    let rhs = self.lower_num_expr(rhs, id, &[], var.span);
                    flows.push((var.text.clone(), rhs));
                }
                let actions = self.lower_block(&m.actions, id, &[], is_physical);
                self.classes[id].modes.push(ModeInfo {
                    name: m.name.text.clone(),
                    invariant,
                    flows,
                    guard,
                    actions,
                });
            }

            // Implicit blocks for setMode messages (physical classes only).
            if is_physical {
                let mut targets: Vec<Option<String>> = vec![None];
                for m in &self.classes[id].modes {
                    targets.push(Some(m.name.clone()));
                }
                for t in targets {
                    let key = t.clone().unwrap_or_else(|| "none".to_string());
                    let block = self.push_block(vec![CStmt::SetMode {
                        mode: t,
                        span: Span::new(0, 0),
                    }]);
                    self.classes[id].setmode_blocks.insert(key, block);
                }
            }
        }
    }

    fn push_block(&mut self, stmts: Vec<CStmt>) -> BlockId {
        self.blocks.push(stmts);
        self.blocks.len() - 1
    }

    fn lower_block(
        &mut self,
        stmts: &[Stmt],
        class: ClassId,
        params: &[(String, PrimType)],
        is_physical: bool,
    ) -> BlockId {
        let lowered: Vec<CStmt> = stmts
            .iter()
            .filter_map(|s| self.lower_stmt(s, class, params, is_physical))
            .collect();
        self.push_block(lowered)
    }

    fn lower_stmt(
        &mut self,
        stmt: &Stmt,
        class: ClassId,
        params: &[(String, PrimType)],
        is_physical: bool,
    ) -> Option<CStmt> {
        let span = stmt.span;
        match &stmt.kind {
            StmtKind::Assign(name, rhs) => {
                let target_ty = self.lookup_var(class, params, name.as_str());
                let rhs = self.subst_consts(rhs);
                let rhs_ty = self.type_of(&rhs, class, params, span);
                match target_ty {
                    None => {
                        self.error(
                            name.span,
                            format!("assignment to unknown variable '{}'", name.text),
                        );
                        None
                    }
                    Some(PrimType::Int) => {
                        match rhs_ty {
                            Some(Ty::Int) | None => {}
                            Some(Ty::Cont) => self.error(
                                span,
                                format!(
                                    "cannot assign a real/float expression to int variable '{}'",
                                    name.text
                                ),
                            ),
                            Some(Ty::Bool) => {
                                self.error(span, "cannot assign a boolean expression to a variable")
                            }
                        }
                        Some(CStmt::AssignInt {
                            var: name.text.clone(),
                            expr: rhs,
                            span,
                        })
                    }
                    Some(_) => {
                        if rhs_ty == Some(Ty::Bool) {
                            self.error(span, "cannot assign a boolean expression to a variable");
                        }
                        Some(CStmt::AssignCont {
                            var: name.text.clone(),
                            expr: rhs,
                            span,
                        })
                    }
                }
            }
            StmtKind::If(cond, then_stmts, else_stmts) => {
                let cond = self.subst_consts(cond);
                match self.type_of(&cond, class, params, span) {
                    Some(Ty::Bool) | None => {}
                    Some(_) => self.error(span, "if condition must be a boolean expression"),
                }
                let discrete = !self.references_continuous(&cond, class, params);
                let then_block = self.lower_block(then_stmts, class, params, is_physical);
                let else_block = self.lower_block(else_stmts, class, params, is_physical);
                Some(CStmt::If {
                    cond,
                    discrete,
                    then_block,
                    else_block,
                    span,
                })
            }
            StmtKind::Delay(amount) => {
                if is_physical {
                    self.error(span, "delay statements are not allowed in physical classes");
                }
                if !amount.is_positive() {
                    self.error(span, "delay amount must be positive");
                }
                Some(CStmt::Delay {
                    amount: amount.clone(),
                    span,
                })
            }
            StmtKind::SetModeLocal(mode) => {
                if !is_physical {
                    self.error(span, "setmode is only allowed in physical classes");
                }
                let mode = self.resolve_mode(class, mode);
                Some(CStmt::SetMode { mode, span })
            }
            StmtKind::Send {
                target,
                msgsrv,
                args,
            } => {
                let (send_target, target_class) = self.resolve_target(class, target)?;
                let srv = self.classes[target_class]
                    .msgsrvs
                    .iter()
                    .find(|m| m.name == msgsrv.as_str());
                let srv = match srv {
                    Some(s) => s.clone(),
                    None => {
                        self.error(
                            msgsrv.span,
                            format!(
                                "class '{}' has no message server '{}'",
                                self.classes[target_class].name, msgsrv.text
                            ),
                        );
                        return None;
                    }
                };
                if srv.params.len() != args.len() {
                    self.error(
                        span,
                        format!(
                            "'{}' expects {} argument(s), got {}",
                            msgsrv.text,
                            srv.params.len(),
                            args.len()
                        ),
                    );
                    return None;
                }
                let mut checked_args = Vec::new();
                for (arg, (pname, pty)) in args.iter().zip(&srv.params) {
                    let arg = self.subst_consts(arg);
                    let ty = self.type_of(&arg, class, params, span);
                    if *pty == PrimType::Int && ty == Some(Ty::Cont) {
                        self.error(
                            span,
                            format!(
                                "argument for int parameter '{}' must be a discrete expression",
                                pname
                            ),
                        );
                    }
                    if ty == Some(Ty::Bool) {
                        self.error(span, "message arguments must be numeric");
                    }
                    checked_args.push((arg, *pty));
                }
                Some(CStmt::Send {
                    target: send_target,
                    msgsrv: msgsrv.text.clone(),
                    args: checked_args,
                    span,
                })
            }
            StmtKind::SendSetMode { target, mode } => {
                let (send_target, target_class) = self.resolve_target(class, target)?;
                if !self.classes[target_class].is_physical {
                    self.error(
                        span,
                        format!(
                            "setMode target '{}' is not a physical class",
                            self.classes[target_class].name
                        ),
                    );
                    return None;
                }
                let mode = self.resolve_mode(target_class, mode);
                Some(CStmt::SendSetMode {
                    target: send_target,
                    mode,
                    span,
                })
            }
        }
    }

    fn resolve_mode(&mut self, class: ClassId, mode: &Name) -> Option<String> {
        if mode.as_str() == "none" {
            return None;
        }
        if !self.declared_modes[class].contains(mode.as_str()) {
            self.error(
                mode.span,
                format!(
                    "unknown mode '{}' in class '{}'",
                    mode.text, self.classes[class].name
                ),
            );
        }
        Some(mode.text.clone())
    }

    fn resolve_target(&mut self, class: ClassId, target: &Name) -> Option<(SendTarget, ClassId)> {
        if target.as_str() == "self" {
            return Some((SendTarget::SelfRebec, class));
        }
        match self.classes[class]
            .known
            .iter()
            .position(|k| k.formal == target.as_str())
        {
            Some(idx) => {
                let target_class = self.classes[class].known[idx].class;
                Some((SendTarget::Known(idx), target_class))
            }
            None => {
                self.error(
                    target.span,
                    format!("send target '{}' is not a known rebec or self", target.text),
                );
                None
            }
        }
    }

    fn lookup_var(
        &self,
        class: ClassId,
        params: &[(String, PrimType)],
        name: &str,
    ) -> Option<PrimType> {
        params
            .iter()
            .chain(self.classes[class].vars.iter())
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }

    fn subst_consts(&self, e: &Expr) -> Expr {
        if self.consts.is_empty() {
            return e.clone();
        }
        let map: BTreeMap<String, Expr> = self
            .consts
            .iter()
            .map(|(k, v)| (k.clone(), Expr::Num(v.clone())))
            .collect();
        e.subst(&map)
    }

    fn references_continuous(
        &self,
        e: &Expr,
        class: ClassId,
        params: &[(String, PrimType)],
    ) -> bool {
        e.vars().iter().any(|v| {
            matches!(
                self.lookup_var(class, params, v),
                Some(PrimType::Real) | Some(PrimType::Float)
            )
        })
    }

    fn type_of(
        &mut self,
        e: &Expr,
        class: ClassId,
        params: &[(String, PrimType)],
        span: Span,
    ) -> Option<Ty> {
        match e {
            Expr::Num(n) => Some(if n.denom().is_one() { Ty::Int } else { Ty::Cont }),
            Expr::Bool(_) => Some(Ty::Bool),
            Expr::Var(v) => match self.lookup_var(class, params, v) {
                Some(PrimType::Int) => Some(Ty::Int),
                Some(_) => Some(Ty::Cont),
                None => {
                    self.error(span, format!("unknown identifier '{}'", v));
                    None
                }
            },
            Expr::Unary(UnaryOp::Neg, inner) => match self.type_of(inner, class, params, span)? {
                Ty::Bool => {
                    self.error(span, "'-' applied to a boolean expression");
                    None
                }
                t => Some(t),
            },
            Expr::Unary(UnaryOp::Not, inner) => match self.type_of(inner, class, params, span)? {
                Ty::Bool => Some(Ty::Bool),
                _ => {
                    self.error(span, "'!' applied to a numeric expression");
                    None
                }
            },
            Expr::Binary(op, l, r) => {
                let lt = self.type_of(l, class, params, span);
                let rt = self.type_of(r, class, params, span);
                let (lt, rt) = (lt?, rt?);
                match op {
                    BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
                        if lt == Ty::Bool || rt == Ty::Bool {
                            self.error(span, "arithmetic on boolean expressions");
                            None
                        } else if lt == Ty::Int && rt == Ty::Int {
                            Some(Ty::Int)
                        } else {
                            Some(Ty::Cont)
                        }
                    }
                    BinaryOp::Lt
                    | BinaryOp::Le
                    | BinaryOp::Gt
                    | BinaryOp::Ge
                    | BinaryOp::Eq
                    | BinaryOp::Ne => {
                        if lt == Ty::Bool || rt == Ty::Bool {
                            self.error(span, "comparison of boolean expressions");
                            None
                        } else {
                            Some(Ty::Bool)
                        }
                    }
                    BinaryOp::And | BinaryOp::Or => {
                        if lt != Ty::Bool || rt != Ty::Bool {
                            self.error(span, "'&&'/'||' require boolean operands");
                            None
                        } else {
                            Some(Ty::Bool)
                        }
                    }
                }
            }
        }
    }

    fn lower_bool_expr(&mut self, e: &Expr, class: ClassId, params: &[(String, PrimType)], span: Span) -> Expr {
        let e = self.subst_consts(e);
        match self.type_of(&e, class, params, span) {
            Some(Ty::Bool) | None => {}
            Some(_) => self.error(span, "expected a boolean expression"),
        }
        e
    }

    fn lower_num_expr(&mut self, e: &Expr, class: ClassId, params: &[(String, PrimType)], span: Span) -> Expr {
        let e = self.subst_consts(e);
        match self.type_of(&e, class, params, span) {
            Some(Ty::Bool) => self.error(span, "expected a numeric expression"),
            _ => {}
        }
        e
    }

    fn check_instances(&mut self) -> Vec<Instance> {
        let mut name_to_id = BTreeMap::new();
        for (i, inst) in self.ast.instances.iter().enumerate() {
            if name_to_id.insert(inst.name.text.clone(), i).is_some() {
                self.error(
                    inst.name.span,
                    format!("duplicate instance '{}'", inst.name.text),
                );
            }
        }
        let mut out = Vec::new();
        for inst in &self.ast.instances {
            let class = match self.class_ids.get(inst.class.as_str()) {
                Some(&c) => c,
                None => {
                    self.error(
                        inst.class.span,
                        format!("unknown class '{}'", inst.class.text),
                    );
                    continue;
                }
            };
            let known = self.classes[class].known.clone();
            if inst.bindings.len() != known.len() {
                self.error(
                    inst.span,
                    format!(
                        "instance '{}' binds {} known rebec(s), class '{}' declares {}",
                        inst.name.text,
                        inst.bindings.len(),
                        self.classes[class].name,
                        known.len()
                    ),
                );
            }
            let mut bindings = Vec::new();
            let mut conns = Vec::new();
            for (slot, (conn, bound)) in inst.bindings.iter().enumerate() {
                let id = match name_to_id.get(bound.as_str()) {
                    Some(&id) => id,
                    None => {
                        self.error(
                            bound.span,
                            format!("unknown instance '{}' in bindings", bound.text),
                        );
                        continue;
                    }
                };
                if let Some(k) = known.get(slot) {
                    let bound_class = self
                        .class_ids
                        .get(self.ast.instances[id].class.as_str())
                        .copied();
                    if bound_class.is_some() && bound_class != Some(k.class) {
                        self.error(
                            bound.span,
                            format!(
                                "'{}' is bound to known rebec '{}' of class '{}', but is an instance of '{}'",
                                bound.text,
                                k.formal,
                                self.classes[k.class].name,
                                self.ast.instances[id].class.text,
                            ),
                        );
                    }
                }
                bindings.push(id);
                conns.push(*conn);
            }

            // Initial arguments against the `initial` message server.
            let initial_params = self.classes[class]
                .msgsrvs
                .iter()
                .find(|m| m.name == "initial")
                .map(|m| m.params.clone());
            if let Some(params) = initial_params {
                if params.len() != inst.init_args.len() {
                    self.error(
                        inst.span,
                        format!(
                            "instance '{}' passes {} initial argument(s), 'initial' expects {}",
                            inst.name.text,
                            inst.init_args.len(),
                            params.len()
                        ),
                    );
                } else {
                    for (arg, (pname, pty)) in inst.init_args.iter().zip(&params) {
                        if *pty == PrimType::Int && !arg.denom().is_one() {
                            self.error(
                                inst.span,
                                format!(
                                    "initial argument for int parameter '{}' must be an integer literal",
                                    pname
                                ),
                            );
                        }
                    }
                }
            }

            out.push(Instance {
                name: inst.name.text.clone(),
                class,
                bindings,
                conns,
                init_args: inst.init_args.clone(),
            });
        }
        out
    }

    fn check_can(&mut self, instances: &[Instance]) -> BTreeMap<CanKey, CanLink> {
        let mut priorities: BTreeMap<CanKey, u64> = BTreeMap::new();
        let mut delays: BTreeMap<CanKey, Rational> = BTreeMap::new();
        let mut seen_priorities: BTreeMap<u64, CanKey> = BTreeMap::new();

        let resolve = |me: &mut Self, e: &CanEntry, instances: &[Instance]| -> Option<CanKey> {
            let sender = instances.iter().position(|i| i.name == e.sender.text);
            let receiver = instances.iter().position(|i| i.name == e.receiver.text);
            match (sender, receiver) {
                (Some(s), Some(r)) => {
                    let rc = instances[r].class;
                    let known_msg = e.msgsrv.as_str() == "setMode"
                        || me.classes[rc].msgsrvs.iter().any(|m| m.name == e.msgsrv.text);
                    if !known_msg {
                        me.error(
                            e.span,
                            format!(
                                "class '{}' has no message server '{}'",
                                me.classes[rc].name, e.msgsrv.text
                            ),
                        );
                        return None;
                    }
                    Some((s, r, e.msgsrv.text.clone()))
                }
                _ => {
                    me.error(e.span, "CAN entry references an unknown instance");
                    None
                }
            }
        };

        for e in &self.ast.can_spec.priorities {
            let key = match resolve(self, e, instances) {
                Some(k) => k,
                None => continue,
            };
            if !e.value.denom().is_one() || !e.value.is_positive() {
                self.error(e.span, "CAN priority must be a positive integer");
                continue;
            }
            let pri = e.value.numer().to_string().parse::<u64>().unwrap_or(u64::MAX);
            if let Some(prev) = seen_priorities.insert(pri, key.clone()) {
                let _ = prev;
                self.error(e.span, format!("duplicate CAN priority {}", pri));
            }
            if priorities.insert(key.clone(), pri).is_some() {
                self.error(e.span, "duplicate CAN priority entry for this message");
            }
        }
        for e in &self.ast.can_spec.delays {
            let key = match resolve(self, e, instances) {
                Some(k) => k,
                None => continue,
            };
            if !e.value.is_positive() {
                self.error(e.span, "CAN delay must be positive");
            }
            if delays.insert(key.clone(), e.value.clone()).is_some() {
                self.error(e.span, "duplicate CAN delay entry for this message");
            }
        }

        // Every message that can travel over a @CAN edge needs both entries.
        let mut required: BTreeSet<CanKey> = BTreeSet::new();
        for (sender_id, inst) in instances.iter().enumerate() {
            let class = inst.class;
            let sends = self.collect_sends(class);
            for (slot, msg) in sends {
                let (Some(&receiver), Some(&conn)) = (inst.bindings.get(slot), inst.conns.get(slot))
                else {
                    continue;
                };
                if conn == Connection::Can {
                    required.insert((sender_id, receiver, msg));
                }
            }
        }
        for key in &required {
            let (s, r, m) = key;
            let desc = format!(
                "CAN message {} -> {}.{}",
                instances[*s].name, instances[*r].name, m
            );
            if !priorities.contains_key(key) {
                self.error(Span::new(1, 1), format!("{} has no priority entry", desc));
            }
            if !delays.contains_key(key) {
                self.error(Span::new(1, 1), format!("{} has no delay entry", desc));
            }
        }
        for (key, _) in priorities.iter() {
            if !required.contains(key) {
                self.warn(
                    Span::new(1, 1),
                    format!(
                        "priority entry for {} -> {}.{} which is never sent over CAN",
                        instances[key.0].name, instances[key.1].name, key.2
                    ),
                );
            }
        }

        priorities
            .into_iter()
            .filter_map(|(key, priority)| {
                delays.get(&key).map(|delay| {
                    (
                        key,
                        CanLink {
                            priority,
                            delay: delay.clone(),
                        },
                    )
                })
            })
            .collect()
    }

    /// All (known-slot, msgsrv-name) pairs a class can send to others.
    fn collect_sends(&self, class: ClassId) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        let mut block_ids: Vec<BlockId> = self.classes[class]
            .msgsrvs
            .iter()
            .map(|m| m.body)
            .chain(self.classes[class].modes.iter().map(|m| m.actions))
            .collect();
        let mut seen = BTreeSet::new();
        while let Some(b) = block_ids.pop() {
            if !seen.insert(b) {
                continue;
            }
            for stmt in &self.blocks[b] {
                match stmt {
                    CStmt::If {
                        then_block,
                        else_block,
                        ..
                    } => {
                        block_ids.push(*then_block);
                        block_ids.push(*else_block);
                    }
                    CStmt::Send {
                        target: SendTarget::Known(slot),
                        msgsrv,
                        ..
                    } => out.push((*slot, msgsrv.clone())),
                    CStmt::SendSetMode {
                        target: SendTarget::Known(slot),
                        ..
                    } => out.push((*slot, "setMode".to_string())),
                    _ => {}
                }
            }
        }
        out
    }

    /// Qualified continuous-variable names must be unique and must not
    /// collide with the reserved pool/urgency names.
    fn check_variable_names(&mut self, instances: &[Instance]) {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        let mut add = |me: &mut Self, qualified: String, what: String| {
            if qualified == "urg"
                || is_reserved_pool_name(&qualified)
            {
                me.error(
                    Span::new(1, 1),
                    format!("{} maps to reserved variable name '{}'", what, qualified),
                );
            }
            if let Some(prev) = seen.insert(qualified.clone(), what.clone()) {
                me.error(
                    Span::new(1, 1),
                    format!(
                        "{} and {} map to the same variable name '{}'",
                        prev, what, qualified
                    ),
                );
            }
        };
        for inst in instances {
            let class = &self.classes[inst.class];
            let class_vars = class.vars.clone();
            let msgsrvs = class.msgsrvs.clone();
            for (var, ty) in &class_vars {
                if ty.is_continuous() {
                    add(
                        self,
                        format!("{}_{}", inst.name, var),
                        format!("variable '{}' of instance '{}'", var, inst.name),
                    );
                }
            }
            for srv in &msgsrvs {
                for (p, ty) in &srv.params {
                    if ty.is_continuous() {
                        add(
                            self,
                            format!("{}_{}_{}", inst.name, srv.name, p),
                            format!(
                                "parameter '{}' of '{}.{}'",
                                p, inst.name, srv.name
                            ),
                        );
                    }
                }
            }
        }
    }
}

fn is_reserved_pool_name(name: &str) -> bool {
    for prefix in ["t", "arg"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                return true;
            }
        }
    }
    false
}
