//! Semantic configurations: the discrete state a location of the derived
//! automaton stands for.
//!
//! A configuration has four entities: the states of software rebecs, the
//! states of physical rebecs, the network state and the pending-event list.
//! Continuous variables never appear here; they live in the hybrid
//! automaton.

use crate::expr::{format_rational, Rational};
use crate::frontend::check::{BlockId, RebecId};
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write;

/// Message argument: a literal carried by value, or a reference to an
/// auxiliary pool variable holding a continuous argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgVal {
    Lit(Rational),
    Pool(usize),
}

/// What the receiver executes when the message is taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MsgPayload {
    Srv(String),
    /// Reserved mode-change message; the mode name uses `none` for the idle
    /// mode.
    SetMode(String),
}

impl MsgPayload {
    pub fn name(&self) -> &str {
        match self {
            MsgPayload::Srv(n) => n,
            MsgPayload::SetMode(_) => "setMode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub sender: RebecId,
    pub receiver: RebecId,
    pub payload: MsgPayload,
    pub args: Vec<ArgVal>,
}

/// Program counter frame: a statement block and the index of the next
/// statement to execute inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frame {
    pub block: BlockId,
    pub idx: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RebecKind {
    Software {
        /// Valuation of int state variables plus currently bound int
        /// parameters.
        vals: BTreeMap<String, Rational>,
        /// Names of the bound parameters, removed when the pc empties.
        bound: Vec<String>,
        suspended: bool,
    },
    Physical {
        /// Index into the class's mode list; `None` is the reserved idle
        /// mode.
        mode: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RebecState {
    pub queue: VecDeque<Message>,
    pub pc: Vec<Frame>,
    /// Message server whose parameters are in scope while `pc` is
    /// non-empty.
    pub active_srv: Option<String>,
    pub kind: RebecKind,
}

impl RebecState {
    pub fn suspended(&self) -> bool {
        matches!(
            self.kind,
            RebecKind::Software { suspended: true, .. }
        )
    }

    pub fn active_mode(&self) -> Option<usize> {
        match self.kind {
            RebecKind::Physical { mode } => mode,
            RebecKind::Software { .. } => None,
        }
    }
}

/// The CAN bus: a priority-keyed buffer plus a ready/busy flag. Buffered
/// priorities are unique by construction; inserting a duplicate is a design
/// fault handled by the successor rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkState {
    pub buffer: BTreeMap<u64, Message>,
    pub ready: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Resume(RebecId),
    Transfer(Message),
}

/// A delayed action with its allocated timer: the event triggers when the
/// timer reaches the delay.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PendingEvent {
    pub delay: Rational,
    pub event: Event,
    pub timer: usize,
}

/// Fixed-size variable pools for timers and message arguments. Slots are
/// allocated lowest index first so canonical encodings stay stable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoolState {
    pub timers: Vec<bool>,
    pub args: Vec<bool>,
}

impl PoolState {
    pub fn new(timer_pool: usize, arg_pool: usize) -> Self {
        PoolState {
            timers: vec![false; timer_pool],
            args: vec![false; arg_pool],
        }
    }

    fn alloc(slots: &mut [bool]) -> Option<usize> {
        let idx = slots.iter().position(|used| !used)?;
        slots[idx] = true;
        Some(idx)
    }

    pub fn alloc_timer(&mut self) -> Option<usize> {
        Self::alloc(&mut self.timers)
    }

    pub fn alloc_arg(&mut self) -> Option<usize> {
        Self::alloc(&mut self.args)
    }

    pub fn free_timer(&mut self, idx: usize) {
        self.timers[idx] = false;
    }

    pub fn free_arg(&mut self, idx: usize) {
        self.args[idx] = false;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub rebecs: Vec<RebecState>,
    pub network: NetworkState,
    /// Pending events, kept sorted by timer slot for a canonical order.
    pub pending: Vec<PendingEvent>,
    pub pools: PoolState,
}

impl Configuration {
    /// Insert a pending event keeping the list sorted by timer slot.
    pub fn push_pending(&mut self, ev: PendingEvent) {
        let pos = self
            .pending
            .iter()
            .position(|p| p.timer > ev.timer)
            .unwrap_or(self.pending.len());
        self.pending.insert(pos, ev);
    }

    /// Deterministic textual serialization of all four entities: rebec
    /// states in id order, the buffer sorted by priority, pending events
    /// sorted by timer slot.
    pub fn canonical_encoding(&self) -> String {
        let mut out = String::new();
        for (id, r) in self.rebecs.iter().enumerate() {
            let _ = write!(out, "r{}[", id);
            match &r.kind {
                RebecKind::Software {
                    vals,
                    bound,
                    suspended,
                } => {
                    let _ = write!(out, "v{{");
                    for (k, v) in vals {
                        let _ = write!(out, "{}={};", k, format_rational(v));
                    }
                    let _ = write!(out, "}}b{:?}s{}", bound, u8::from(*suspended));
                }
                RebecKind::Physical { mode } => {
                    let _ = write!(out, "m{:?}", mode);
                }
            }
            let _ = write!(out, "|q");
            for m in &r.queue {
                encode_message(&mut out, m);
            }
            let _ = write!(out, "|c{:?}|x{:?}]", r.pc, r.active_srv);
        }
        let _ = write!(out, "N[r{}|", u8::from(self.network.ready));
        for (pri, m) in &self.network.buffer {
            let _ = write!(out, "{}:", pri);
            encode_message(&mut out, m);
        }
        let _ = write!(out, "]E[");
        for p in &self.pending {
            let _ = write!(out, "({},", format_rational(&p.delay));
            match &p.event {
                Event::Resume(r) => {
                    let _ = write!(out, "R{}", r);
                }
                Event::Transfer(m) => {
                    let _ = write!(out, "T");
                    encode_message(&mut out, m);
                }
            }
            let _ = write!(out, ",t{})", p.timer);
        }
        let _ = write!(out, "]P[{:?}{:?}]", self.pools.timers, self.pools.args);
        out
    }
}

fn encode_message(out: &mut String, m: &Message) {
    let _ = write!(out, "<{}->{}:", m.sender, m.receiver);
    match &m.payload {
        MsgPayload::Srv(n) => {
            let _ = write!(out, "{}", n);
        }
        MsgPayload::SetMode(mode) => {
            let _ = write!(out, "setMode({})", mode);
        }
    }
    let _ = write!(out, "(");
    for a in &m.args {
        match a {
            ArgVal::Lit(v) => {
                let _ = write!(out, "{},", format_rational(v));
            }
            ArgVal::Pool(slot) => {
                let _ = write!(out, "arg{},", slot);
            }
        }
    }
    let _ = write!(out, ")>");
}
