//! Successor rules: message, statement, network and nonurgent transitions
//! over configurations, plus the per-location flows and invariant.

use super::config::*;
use super::ExplorationLimits;
use crate::diag::Diagnostic;
use crate::expr::{BinaryOp, Expr, Rational, Value};
use crate::frontend::ast::{Connection, PrimType};
use crate::frontend::check::{CStmt, CheckedModel, RebecId, SendTarget};
use num::Zero;
use std::collections::BTreeMap;

/// Transition classes, ordered by urgency. Message and statement
/// transitions share the highest class; network transitions may only fire
/// when no rebec can progress, and nonurgent transitions only when nothing
/// instantaneous is possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrgencyClass {
    MessageStatement,
    Network,
    Nonurgent,
    Terminal,
}

impl UrgencyClass {
    pub fn is_urgent(self) -> bool {
        matches!(self, UrgencyClass::MessageStatement | UrgencyClass::Network)
    }
}

/// One candidate transition out of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub guard: Expr,
    pub assignments: Vec<(String, Expr)>,
    pub target: StepTarget,
    /// Design-fault cause, recorded as transition metadata.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepTarget {
    Config(Configuration),
    Fault,
}

impl Step {
    fn to_config(cfg: Configuration) -> Step {
        Step {
            guard: Expr::Bool(true),
            assignments: Vec::new(),
            target: StepTarget::Config(cfg),
            note: None,
        }
    }

    fn fault(cause: impl Into<String>) -> Step {
        Step {
            guard: Expr::Bool(true),
            assignments: Vec::new(),
            target: StepTarget::Fault,
            note: Some(cause.into()),
        }
    }
}

/// Translation context: the checked model, the exploration limits and the
/// variable naming scheme of the derived automaton.
pub struct Translator<'m> {
    pub model: &'m CheckedModel,
    pub limits: ExplorationLimits,
    /// All continuous variables of the automaton, sorted.
    pub variables: Vec<String>,
}

impl<'m> Translator<'m> {
    pub fn new(model: &'m CheckedModel, limits: ExplorationLimits) -> Self {
        let mut variables = Vec::new();
        for inst in &model.instances {
            let class = &model.classes[inst.class];
            for (var, ty) in &class.vars {
                if ty.is_continuous() {
                    variables.push(format!("{}_{}", inst.name, var));
                }
            }
            for srv in &class.msgsrvs {
                for (p, ty) in &srv.params {
                    if ty.is_continuous() {
                        variables.push(format!("{}_{}_{}", inst.name, srv.name, p));
                    }
                }
            }
        }
        for i in 0..limits.timer_pool {
            variables.push(timer_var(i));
        }
        for i in 0..limits.arg_pool {
            variables.push(arg_var(i));
        }
        variables.sort();
        Translator {
            model,
            limits,
            variables,
        }
    }

    pub fn qualified(&self, rebec: RebecId, var: &str) -> String {
        format!("{}_{}", self.model.instances[rebec].name, var)
    }

    pub fn param_var(&self, rebec: RebecId, srv: &str, param: &str) -> String {
        format!("{}_{}_{}", self.model.instances[rebec].name, srv, param)
    }

    /// Initial configuration: every queue holds exactly its `initial`
    /// message, all int variables are zero, all active modes are `none`,
    /// the network is empty and ready, no events are pending.
    pub fn initial_configuration(&self) -> Configuration {
        let mut rebecs = Vec::new();
        for (id, inst) in self.model.instances.iter().enumerate() {
            let class = &self.model.classes[inst.class];
            let args = match self.model.msgsrv(inst.class, "initial") {
                Some(srv) => srv
                    .params
                    .iter()
                    .zip(&inst.init_args)
                    .map(|(_, lit)| ArgVal::Lit(lit.clone()))
                    .collect(),
                None => Vec::new(),
            };
            let initial = Message {
                sender: id,
                receiver: id,
                payload: MsgPayload::Srv("initial".into()),
                args,
            };
            let kind = if class.is_physical {
                RebecKind::Physical { mode: None }
            } else {
                let vals = class
                    .vars
                    .iter()
                    .filter(|(_, ty)| *ty == PrimType::Int)
                    .map(|(name, _)| (name.clone(), Rational::zero()))
                    .collect();
                RebecKind::Software {
                    vals,
                    bound: Vec::new(),
                    suspended: false,
                }
            };
            rebecs.push(RebecState {
                queue: std::collections::VecDeque::from([initial]),
                pc: Vec::new(),
                active_srv: None,
                kind,
            });
        }
        Configuration {
            rebecs,
            network: NetworkState {
                buffer: BTreeMap::new(),
                ready: true,
            },
            pending: Vec::new(),
            pools: PoolState::new(self.limits.timer_pool, self.limits.arg_pool),
        }
    }

    /// Highest-priority enabled transition class of a configuration.
    pub fn urgency_class(&self, cfg: &Configuration) -> UrgencyClass {
        let message_or_statement = cfg
            .rebecs
            .iter()
            .any(|r| !r.suspended() && (!r.pc.is_empty() || !r.queue.is_empty()));
        if message_or_statement {
            return UrgencyClass::MessageStatement;
        }
        if !cfg.network.buffer.is_empty() && cfg.network.ready {
            return UrgencyClass::Network;
        }
        let active_mode = cfg.rebecs.iter().any(|r| r.active_mode().is_some());
        if active_mode || !cfg.pending.is_empty() {
            return UrgencyClass::Nonurgent;
        }
        UrgencyClass::Terminal
    }

    /// All successors of a configuration, honoring the transition ordering:
    /// exactly one class contributes.
    pub fn successors(&self, cfg: &Configuration) -> Result<Vec<Step>, Diagnostic> {
        match self.urgency_class(cfg) {
            UrgencyClass::MessageStatement => {
                let mut steps = Vec::new();
                for (id, r) in cfg.rebecs.iter().enumerate() {
                    if r.suspended() {
                        continue;
                    }
                    if !r.pc.is_empty() {
                        steps.extend(self.successors_statement(cfg, id)?);
                    } else if !r.queue.is_empty() {
                        steps.push(self.successor_message(cfg, id));
                    }
                }
                Ok(steps)
            }
            UrgencyClass::Network => Ok(vec![self.successor_network(cfg)]),
            UrgencyClass::Nonurgent => Ok(self.successors_nonurgent(cfg)),
            UrgencyClass::Terminal => Ok(Vec::new()),
        }
    }

    /// Take the head message of a rebec's queue.
    pub fn successor_message(&self, cfg: &Configuration, rebec: RebecId) -> Step {
        let mut next = cfg.clone();
        let msg = next.rebecs[rebec].queue.pop_front().expect("non-empty queue");
        let class_id = self.model.instances[rebec].class;
        let mut assignments = Vec::new();
        match &msg.payload {
            MsgPayload::SetMode(mode) => {
                let block = self.model.classes[class_id].setmode_blocks[mode.as_str()];
                next.rebecs[rebec].pc = vec![Frame { block, idx: 0 }];
                next.rebecs[rebec].active_srv = None;
            }
            MsgPayload::Srv(name) => {
                let srv = self
                    .model
                    .msgsrv(class_id, name)
                    .expect("checked message server");
                for ((pname, pty), arg) in srv.params.iter().zip(&msg.args) {
                    match (pty, arg) {
                        (PrimType::Int, ArgVal::Lit(v)) => {
                            if let RebecKind::Software { vals, bound, .. } =
                                &mut next.rebecs[rebec].kind
                            {
                                vals.insert(pname.clone(), v.clone());
                                bound.push(pname.clone());
                            }
                        }
                        (_, ArgVal::Lit(v)) => {
                            assignments.push((
                                self.param_var(rebec, name, pname),
                                Expr::Num(v.clone()),
                            ));
                        }
                        (_, ArgVal::Pool(slot)) => {
                            assignments
                                .push((self.param_var(rebec, name, pname), Expr::var(arg_var(*slot))));
                            next.pools.free_arg(*slot);
                        }
                    }
                }
                let body = srv.body;
                next.rebecs[rebec].pc = vec![Frame { block: body, idx: 0 }];
                next.rebecs[rebec].active_srv = Some(name.clone());
            }
        }
        self.normalize_pc(&mut next, rebec);
        Step {
            guard: Expr::Bool(true),
            assignments,
            target: StepTarget::Config(next),
            note: None,
        }
    }

    /// Execute the statement the rebec's program counter points at. A
    /// conditional over continuous state yields two guarded successors.
    pub fn successors_statement(
        &self,
        cfg: &Configuration,
        rebec: RebecId,
    ) -> Result<Vec<Step>, Diagnostic> {
        let frame = *cfg.rebecs[rebec].pc.last().expect("non-empty pc");
        let stmt = &self.model.blocks[frame.block][frame.idx];
        let span = stmt.span();
        match stmt {
            CStmt::AssignInt { var, expr, .. } => {
                let env = self.int_env(cfg, rebec);
                let value = match expr.eval_rational(&env) {
                    Ok(Value::Num(v)) => v,
                    Ok(Value::Bool(_)) => {
                        return Err(Diagnostic::error(span, "boolean value in int assignment"))
                    }
                    Err(e) => return Err(Diagnostic::error(span, e.to_string())),
                };
                let mut next = cfg.clone();
                if let RebecKind::Software { vals, .. } = &mut next.rebecs[rebec].kind {
                    vals.insert(var.clone(), value);
                }
                self.advance_pc(&mut next, rebec);
                Ok(vec![Step::to_config(next)])
            }
            CStmt::AssignCont { var, expr, .. } => {
                let target = self.continuous_target(cfg, rebec, var);
                let rhs = self.rename_expr(cfg, rebec, expr)?;
                let mut next = cfg.clone();
                self.advance_pc(&mut next, rebec);
                Ok(vec![Step {
                    guard: Expr::Bool(true),
                    assignments: vec![(target, rhs)],
                    target: StepTarget::Config(next),
                    note: None,
                }])
            }
            CStmt::If {
                cond,
                discrete,
                then_block,
                else_block,
                ..
            } => {
                if *discrete {
                    let env = self.int_env(cfg, rebec);
                    let taken = match cond.eval_rational(&env) {
                        Ok(Value::Bool(b)) => b,
                        Ok(Value::Num(_)) => {
                            return Err(Diagnostic::error(span, "numeric value as if condition"))
                        }
                        Err(e) => return Err(Diagnostic::error(span, e.to_string())),
                    };
                    let block = if taken { *then_block } else { *else_block };
                    let mut next = cfg.clone();
                    self.advance_into(&mut next, rebec, block);
                    Ok(vec![Step::to_config(next)])
                } else {
                    let guard = self.rename_expr(cfg, rebec, cond)?;
                    let mut then_cfg = cfg.clone();
                    self.advance_into(&mut then_cfg, rebec, *then_block);
                    let mut else_cfg = cfg.clone();
                    self.advance_into(&mut else_cfg, rebec, *else_block);
                    Ok(vec![
                        Step {
                            guard: guard.clone(),
                            assignments: Vec::new(),
                            target: StepTarget::Config(then_cfg),
                            note: None,
                        },
                        Step {
                            guard: guard.complement(),
                            assignments: Vec::new(),
                            target: StepTarget::Config(else_cfg),
                            note: None,
                        },
                    ])
                }
            }
            CStmt::Delay { amount, .. } => {
                let mut next = cfg.clone();
                let timer = match next.pools.alloc_timer() {
                    Some(t) => t,
                    None => return Ok(vec![Step::fault("timer pool exhausted")]),
                };
                if let RebecKind::Software { suspended, .. } = &mut next.rebecs[rebec].kind {
                    *suspended = true;
                }
                next.push_pending(PendingEvent {
                    delay: amount.clone(),
                    event: Event::Resume(rebec),
                    timer,
                });
                self.advance_pc(&mut next, rebec);
                Ok(vec![Step {
                    guard: Expr::Bool(true),
                    assignments: vec![(timer_var(timer), Expr::num_int(0))],
                    target: StepTarget::Config(next),
                    note: None,
                }])
            }
            CStmt::SetMode { mode, .. } => {
                let class_id = self.model.instances[rebec].class;
                let mode_idx = mode
                    .as_ref()
                    .map(|m| self.model.mode_index(class_id, m).expect("checked mode"));
                let mut next = cfg.clone();
                if let RebecKind::Physical { mode } = &mut next.rebecs[rebec].kind {
                    *mode = mode_idx;
                }
                self.advance_pc(&mut next, rebec);
                Ok(vec![Step::to_config(next)])
            }
            CStmt::Send {
                target,
                msgsrv,
                args,
                ..
            } => self.exec_send(cfg, rebec, target, MsgPayload::Srv(msgsrv.clone()), args, span),
            CStmt::SendSetMode { target, mode, .. } => {
                let mode_name = mode.clone().unwrap_or_else(|| "none".to_string());
                self.exec_send(cfg, rebec, target, MsgPayload::SetMode(mode_name), &[], span)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn exec_send(
        &self,
        cfg: &Configuration,
        rebec: RebecId,
        target: &SendTarget,
        payload: MsgPayload,
        args: &[(Expr, PrimType)],
        span: crate::diag::Span,
    ) -> Result<Vec<Step>, Diagnostic> {
        let (receiver, conn) = match target {
            SendTarget::SelfRebec => (rebec, Connection::Wire),
            SendTarget::Known(slot) => {
                let inst = &self.model.instances[rebec];
                (inst.bindings[*slot], inst.conns[*slot])
            }
        };
        let mut next = cfg.clone();
        let mut assignments = Vec::new();
        let mut arg_vals = Vec::new();
        for (expr, ty) in args {
            match ty {
                PrimType::Int => {
                    let env = self.int_env(cfg, rebec);
                    match expr.eval_rational(&env) {
                        Ok(Value::Num(v)) => arg_vals.push(ArgVal::Lit(v)),
                        Ok(Value::Bool(_)) => {
                            return Err(Diagnostic::error(span, "boolean message argument"))
                        }
                        Err(e) => return Err(Diagnostic::error(span, e.to_string())),
                    }
                }
                _ => {
                    let renamed = self.rename_expr(cfg, rebec, expr)?.normalize();
                    if let Expr::Num(v) = &renamed {
                        // Constant continuous arguments travel by value; the
                        // pool is only needed when the value is undetermined.
                        arg_vals.push(ArgVal::Lit(v.clone()));
                    } else {
                        let slot = match next.pools.alloc_arg() {
                            Some(s) => s,
                            None => return Ok(vec![Step::fault("argument pool exhausted")]),
                        };
                        assignments.push((arg_var(slot), renamed));
                        arg_vals.push(ArgVal::Pool(slot));
                    }
                }
            }
        }
        let msg = Message {
            sender: rebec,
            receiver,
            payload,
            args: arg_vals,
        };
        match conn {
            Connection::Wire => {
                let bound = self.limits.queue_bound(&self.model.instances[receiver].name);
                if next.rebecs[receiver].queue.len() >= bound {
                    return Ok(vec![Step::fault(format!(
                        "queue overflow at {}",
                        self.model.instances[receiver].name
                    ))]);
                }
                next.rebecs[receiver].queue.push_back(msg);
            }
            Connection::Can => {
                let key = (rebec, receiver, msg.payload.name().to_string());
                let link = self.model.can.get(&key).expect("checked CAN entry");
                if next.network.buffer.contains_key(&link.priority) {
                    return Ok(vec![Step::fault(format!(
                        "duplicate CAN priority {}",
                        link.priority
                    ))]);
                }
                next.network.buffer.insert(link.priority, msg);
            }
        }
        self.advance_pc(&mut next, rebec);
        Ok(vec![Step {
            guard: Expr::Bool(true),
            assignments,
            target: StepTarget::Config(next),
            note: None,
        }])
    }

    /// Choose the buffered message with the highest priority (lowest
    /// number), allocate a timer and schedule its transfer.
    pub fn successor_network(&self, cfg: &Configuration) -> Step {
        let mut next = cfg.clone();
        let (&priority, _) = next.network.buffer.iter().next().expect("non-empty buffer");
        let msg = next.network.buffer.remove(&priority).expect("present");
        let timer = match next.pools.alloc_timer() {
            Some(t) => t,
            None => return Step::fault("timer pool exhausted"),
        };
        let key = (msg.sender, msg.receiver, msg.payload.name().to_string());
        let link = self.model.can.get(&key).expect("checked CAN entry");
        next.push_pending(PendingEvent {
            delay: link.delay.clone(),
            event: Event::Transfer(msg),
            timer,
        });
        next.network.ready = false;
        Step {
            guard: Expr::Bool(true),
            assignments: vec![(timer_var(timer), Expr::num_int(0))],
            target: StepTarget::Config(next),
            note: None,
        }
    }

    /// End-of-mode and event-trigger successors.
    pub fn successors_nonurgent(&self, cfg: &Configuration) -> Vec<Step> {
        let mut steps = Vec::new();
        for (id, r) in cfg.rebecs.iter().enumerate() {
            let Some(mode_idx) = r.active_mode() else {
                continue;
            };
            let class_id = self.model.instances[id].class;
            let mode = &self.model.classes[class_id].modes[mode_idx];
            let guard = self
                .rename_expr(cfg, id, &mode.guard)
                .expect("mode guards reference state variables only");
            let mut next = cfg.clone();
            if let RebecKind::Physical { mode } = &mut next.rebecs[id].kind {
                *mode = None;
            }
            next.rebecs[id].pc = vec![Frame {
                block: mode.actions,
                idx: 0,
            }];
            next.rebecs[id].active_srv = None;
            self.normalize_pc(&mut next, id);
            steps.push(Step {
                guard,
                assignments: Vec::new(),
                target: StepTarget::Config(next),
                note: None,
            });
        }
        for (i, ev) in cfg.pending.iter().enumerate() {
            let guard = Expr::eq(
                Expr::var(timer_var(ev.timer)),
                Expr::Num(ev.delay.clone()),
            );
            let mut next = cfg.clone();
            let ev = next.pending.remove(i);
            next.pools.free_timer(ev.timer);
            match ev.event {
                Event::Resume(rebec) => {
                    if let RebecKind::Software { suspended, .. } = &mut next.rebecs[rebec].kind {
                        *suspended = false;
                    }
                    steps.push(Step {
                        guard,
                        assignments: Vec::new(),
                        target: StepTarget::Config(next),
                        note: None,
                    });
                }
                Event::Transfer(msg) => {
                    let receiver = msg.receiver;
                    let bound = self.limits.queue_bound(&self.model.instances[receiver].name);
                    if next.rebecs[receiver].queue.len() >= bound {
                        steps.push(Step {
                            guard,
                            assignments: Vec::new(),
                            target: StepTarget::Fault,
                            note: Some(format!(
                                "queue overflow at {}",
                                self.model.instances[receiver].name
                            )),
                        });
                        continue;
                    }
                    next.rebecs[receiver].queue.push_back(msg);
                    next.network.ready = true;
                    steps.push(Step {
                        guard,
                        assignments: Vec::new(),
                        target: StepTarget::Config(next),
                        note: None,
                    });
                }
            }
        }
        steps
    }

    /// Flows, invariant and urgency flag of the location a configuration
    /// stands for. Urgent locations defer to the emission-time `urg`
    /// encoding and carry no flows here.
    pub fn flows_and_invariant(&self, cfg: &Configuration) -> (BTreeMap<String, Expr>, Expr, bool) {
        if self.urgency_class(cfg).is_urgent() {
            return (BTreeMap::new(), Expr::Bool(true), true);
        }
        let mut flows: BTreeMap<String, Expr> = self
            .variables
            .iter()
            .map(|v| (v.clone(), Expr::num_int(0)))
            .collect();
        let mut invariants = Vec::new();
        for (id, r) in cfg.rebecs.iter().enumerate() {
            let Some(mode_idx) = r.active_mode() else {
                continue;
            };
            let class_id = self.model.instances[id].class;
            let mode = &self.model.classes[class_id].modes[mode_idx];
            for (var, rhs) in &mode.flows {
                let renamed = self
                    .rename_expr(cfg, id, rhs)
                    .expect("mode flows reference state variables only");
                flows.insert(self.qualified(id, var), renamed);
            }
            invariants.push(
                self.rename_expr(cfg, id, &mode.invariant)
                    .expect("mode invariants reference state variables only"),
            );
        }
        for ev in &cfg.pending {
            flows.insert(timer_var(ev.timer), Expr::num_int(1));
            invariants.push(Expr::binary(
                BinaryOp::Le,
                Expr::var(timer_var(ev.timer)),
                Expr::Num(ev.delay.clone()),
            ));
        }
        (flows, Expr::conjoin(invariants).normalize(), false)
    }

    // ---- helpers ----------------------------------------------------------

    /// Discrete environment of a software rebec: int state variables plus
    /// bound int parameters.
    fn int_env(&self, cfg: &Configuration, rebec: RebecId) -> BTreeMap<String, Rational> {
        match &cfg.rebecs[rebec].kind {
            RebecKind::Software { vals, .. } => vals.clone(),
            RebecKind::Physical { .. } => BTreeMap::new(),
        }
    }

    /// Rewrite a class-level expression into automaton variables: int
    /// variables become their current values, continuous state variables
    /// and parameters become their qualified names.
    pub fn rename_expr(
        &self,
        cfg: &Configuration,
        rebec: RebecId,
        expr: &Expr,
    ) -> Result<Expr, Diagnostic> {
        let mut map: BTreeMap<String, Expr> = BTreeMap::new();
        let class = self.model.class_of(rebec);
        for (var, ty) in &class.vars {
            if ty.is_continuous() {
                map.insert(var.clone(), Expr::var(self.qualified(rebec, var)));
            }
        }
        if let RebecKind::Software { vals, .. } = &cfg.rebecs[rebec].kind {
            for (var, value) in vals {
                map.insert(var.clone(), Expr::Num(value.clone()));
            }
        }
        if let Some(srv_name) = &cfg.rebecs[rebec].active_srv {
            if let Some(srv) = self.model.msgsrv(self.model.instances[rebec].class, srv_name) {
                for (p, ty) in &srv.params {
                    if ty.is_continuous() {
                        map.insert(p.clone(), Expr::var(self.param_var(rebec, srv_name, p)));
                    }
                }
            }
        }
        let renamed = expr.subst(&map);
        for v in renamed.vars() {
            if !self.variables.contains(&v) {
                return Err(Diagnostic::error(
                    None,
                    format!("internal: unresolved variable '{}' in expression", v),
                ));
            }
        }
        Ok(renamed)
    }

    /// Qualified assignment target for a continuous variable or float
    /// parameter.
    fn continuous_target(&self, cfg: &Configuration, rebec: RebecId, var: &str) -> String {
        let class = self.model.class_of(rebec);
        if class.vars.iter().any(|(n, _)| n == var) {
            return self.qualified(rebec, var);
        }
        if let Some(srv) = &cfg.rebecs[rebec].active_srv {
            return self.param_var(rebec, srv, var);
        }
        self.qualified(rebec, var)
    }

    /// Advance past the current statement: bump the top frame and pop
    /// exhausted frames; unbind parameters when the pc empties.
    fn advance_pc(&self, cfg: &mut Configuration, rebec: RebecId) {
        if let Some(top) = cfg.rebecs[rebec].pc.last_mut() {
            top.idx += 1;
        }
        self.normalize_pc(cfg, rebec);
    }

    /// Advance past the current statement and enter a nested block.
    fn advance_into(&self, cfg: &mut Configuration, rebec: RebecId, block: usize) {
        if let Some(top) = cfg.rebecs[rebec].pc.last_mut() {
            top.idx += 1;
        }
        cfg.rebecs[rebec].pc.push(Frame { block, idx: 0 });
        self.normalize_pc(cfg, rebec);
    }

    fn normalize_pc(&self, cfg: &mut Configuration, rebec: RebecId) {
        let r = &mut cfg.rebecs[rebec];
        while let Some(top) = r.pc.last() {
            if top.idx >= self.model.blocks[top.block].len() {
                r.pc.pop();
            } else {
                break;
            }
        }
        if r.pc.is_empty() {
            r.active_srv = None;
            if let RebecKind::Software { vals, bound, .. } = &mut r.kind {
                for p in bound.drain(..) {
                    vals.remove(&p);
                }
            }
        }
    }
}

pub fn timer_var(slot: usize) -> String {
    format!("t{}", slot)
}

pub fn arg_var(slot: usize) -> String {
    format!("arg{}", slot)
}
