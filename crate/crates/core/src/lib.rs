//! Compiler and analysis toolkit for the Hybrid Rebeca actor language.
//!
//! Hybrid Rebeca models cyber-physical systems as a set of software and
//! physical actors (rebecs) that exchange asynchronous messages either
//! directly by wire or over a priority-arbitrated CAN bus. This crate
//! provides the full pipeline:
//!
//! * [`frontend`] — lexer, recursive-descent parser, static checker and
//!   pretty-printer for `.hrebeca` sources.
//! * [`ha`] — the hybrid-automaton model (locations, flows, invariants,
//!   transitions, urgency flags) with validation and statistics.
//! * [`translator`] — derivation of a monolithic hybrid automaton from a
//!   checked model by exhaustive exploration of reachable configurations.
//! * [`reducer`] — aggregation of urgent locations into composed
//!   transitions between the remaining time-passing locations.
//! * [`backend`] — SpaceEx model/config emission and a canonical JSON
//!   interchange format.
//! * [`simulator`] — fixed-step RK4 execution of a derived automaton for
//!   desk-scale safety checking and aggregation-equivalence reports.

pub mod backend;
pub mod diag;
pub mod expr;
pub mod frontend;
pub mod ha;
pub mod reducer;
pub mod simulator;
pub mod translator;

pub use diag::{Diagnostic, Severity, Span};
pub use expr::{BinaryOp, Expr, Rational, UnaryOp};
pub use ha::{HaStats, HybridAutomaton, Location, Transition};
