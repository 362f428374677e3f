//! Hybrid-automaton model: locations with flows and invariants, guarded
//! transitions with assignment lists, an initial location/condition,
//! and an explicit urgency flag per location.
//!
//! Urgency is a plain boolean here; the `urg`-variable encoding (flow
//! `urg' = 1`, invariant `urg <= 0`, `urg := 0` on incoming transitions) is
//! applied only when emitting SpaceEx output.

use crate::diag::Diagnostic;
use crate::expr::Expr;
use std::collections::{BTreeMap, BTreeSet};

pub type LocId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: LocId,
    pub name: String,
    pub urgent: bool,
    /// Flow right-hand side per variable. Non-urgent locations carry an
    /// explicit flow (possibly zero) for every automaton variable; urgent
    /// locations leave this empty and receive the urgency encoding at
    /// emission time.
    pub flows: BTreeMap<String, Expr>,
    pub invariant: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: usize,
    pub source: LocId,
    pub target: LocId,
    pub guard: Expr,
    /// Parallel assignment block: right-hand sides read the pre-state.
    pub assignments: Vec<(String, Expr)>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridAutomaton {
    pub variables: Vec<String>,
    /// Synchronization labels; empty for the monolithic automata this
    /// toolkit derives.
    pub labels: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub init_location: LocId,
    /// Initial condition attached to the initial location.
    pub init_condition: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaStats {
    pub locations: usize,
    pub transitions: usize,
    pub urgent: usize,
}

impl std::fmt::Display for HaStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "locations={} transitions={} urgent={}",
            self.locations, self.transitions, self.urgent
        )
    }
}

/// Assemble an automaton, rejecting duplicate location ids and dangling
/// transition endpoints.
pub fn build(
    locations: Vec<Location>,
    transitions: Vec<Transition>,
    variables: Vec<String>,
    init_location: LocId,
    init_condition: Expr,
) -> Result<HybridAutomaton, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut ids = BTreeSet::new();
    for loc in &locations {
        if !ids.insert(loc.id) {
            diags.push(Diagnostic::error(
                None,
                format!("duplicate location id {}", loc.id),
            ));
        }
    }
    for t in &transitions {
        for end in [t.source, t.target] {
            if !ids.contains(&end) {
                diags.push(Diagnostic::error(
                    None,
                    format!("transition {} references undeclared location id {}", t.id, end),
                ));
            }
        }
    }
    if !ids.contains(&init_location) {
        diags.push(Diagnostic::error(
            None,
            format!("initial location id {} is not declared", init_location),
        ));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(HybridAutomaton {
        variables,
        labels: Vec::new(),
        locations,
        transitions,
        init_location,
        init_condition,
    })
}

/// Well-formedness diagnostics; empty iff the automaton satisfies every
/// model invariant. Never aborts.
pub fn validate(ha: &HybridAutomaton) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let vars: BTreeSet<String> = ha.variables.iter().cloned().collect();
    let ids: BTreeSet<LocId> = ha.locations.iter().map(|l| l.id).collect();
    if ids.len() != ha.locations.len() {
        diags.push(Diagnostic::error(None, "duplicate location ids"));
    }

    let check_expr = |diags: &mut Vec<Diagnostic>, e: &Expr, ctx: &str| {
        for v in e.vars() {
            if !vars.contains(&v) {
                diags.push(Diagnostic::error(
                    None,
                    format!("unknown variable: {} (in {})", v, ctx),
                ));
            }
        }
    };

    for loc in &ha.locations {
        check_expr(
            &mut diags,
            &loc.invariant,
            &format!("invariant of location '{}'", loc.name),
        );
        for (v, rhs) in &loc.flows {
            if !vars.contains(v) {
                diags.push(Diagnostic::error(
                    None,
                    format!("unknown variable: {} (flow target in '{}')", v, loc.name),
                ));
            }
            check_expr(&mut diags, rhs, &format!("flow of '{}' in '{}'", v, loc.name));
        }
        if !loc.urgent {
            for v in &ha.variables {
                if !loc.flows.contains_key(v) {
                    diags.push(Diagnostic::error(
                        None,
                        format!("missing flow: {} (location '{}')", v, loc.name),
                    ));
                }
            }
        }
    }
    for t in &ha.transitions {
        if !ids.contains(&t.source) || !ids.contains(&t.target) {
            diags.push(Diagnostic::error(
                None,
                format!("transition {} has a dangling endpoint", t.id),
            ));
        }
        check_expr(&mut diags, &t.guard, &format!("guard of transition {}", t.id));
        for (v, rhs) in &t.assignments {
            if !vars.contains(v) {
                diags.push(Diagnostic::error(
                    None,
                    format!("unknown variable: {} (assignment target)", v),
                ));
            }
            check_expr(&mut diags, rhs, &format!("assignment in transition {}", t.id));
        }
    }
    if !ids.contains(&ha.init_location) {
        diags.push(Diagnostic::error(None, "initial location is not declared"));
    }
    check_expr(&mut diags, &ha.init_condition, "initial condition");
    diags
}

pub fn stats(ha: &HybridAutomaton) -> HaStats {
    HaStats {
        locations: ha.locations.len(),
        transitions: ha.transitions.len(),
        urgent: ha.locations.iter().filter(|l| l.urgent).count(),
    }
}

impl HybridAutomaton {
    pub fn location(&self, id: LocId) -> &Location {
        self.locations.iter().find(|l| l.id == id).expect("location id")
    }

    pub fn location_named(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    /// Outgoing transitions of a location, in transition-id order.
    pub fn outgoing(&self, id: LocId) -> Vec<&Transition> {
        let mut out: Vec<&Transition> = self.transitions.iter().filter(|t| t.source == id).collect();
        out.sort_by_key(|t| t.id);
        out
    }

    /// Normalize every expression in place (constant folding, `&&` chain
    /// flattening). Idempotent.
    pub fn normalize(&mut self) {
        for loc in &mut self.locations {
            loc.invariant = loc.invariant.normalize();
            for rhs in loc.flows.values_mut() {
                *rhs = rhs.normalize();
            }
        }
        for t in &mut self.transitions {
            t.guard = t.guard.normalize();
            for (_, rhs) in &mut t.assignments {
                *rhs = rhs.normalize();
            }
        }
        self.init_condition = self.init_condition.normalize();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinaryOp, Rational};
    use num::FromPrimitive;

    fn num(v: f64) -> Expr {
        Expr::Num(Rational::from_f64(v).unwrap())
    }

    /// The two-location heater automaton: `on` heats toward 40 with flow
    /// t' = 4 - 0.1*t under invariant t <= 22, `off` cools with
    /// t' = -0.1*t under invariant t >= 18.
    pub(crate) fn heater() -> HybridAutomaton {
        let t = || Expr::var("t");
        let on_flow = Expr::binary(
            BinaryOp::Sub,
            num(4.0),
            Expr::binary(BinaryOp::Mul, num(0.1), t()),
        );
        let off_flow = Expr::binary(
            BinaryOp::Mul,
            Expr::unary(crate::expr::UnaryOp::Neg, num(0.1)),
            t(),
        );
        let locations = vec![
            Location {
                id: 0,
                name: "on".into(),
                urgent: false,
                flows: BTreeMap::from([("t".to_string(), on_flow)]),
                invariant: Expr::binary(BinaryOp::Le, t(), num(22.0)),
            },
            Location {
                id: 1,
                name: "off".into(),
                urgent: false,
                flows: BTreeMap::from([("t".to_string(), off_flow)]),
                invariant: Expr::binary(BinaryOp::Ge, t(), num(18.0)),
            },
        ];
        let transitions = vec![
            Transition {
                id: 0,
                source: 0,
                target: 1,
                guard: Expr::eq(t(), num(22.0)),
                assignments: vec![],
                label: None,
            },
            Transition {
                id: 1,
                source: 1,
                target: 0,
                guard: Expr::eq(t(), num(18.0)),
                assignments: vec![],
                label: None,
            },
        ];
        build(
            locations,
            transitions,
            vec!["t".into()],
            1,
            Expr::eq(t(), num(20.0)),
        )
        .unwrap()
    }

    #[test]
    fn heater_builds_and_validates() {
        let ha = heater();
        assert!(validate(&ha).is_empty());
        assert_eq!(
            stats(&ha),
            HaStats {
                locations: 2,
                transitions: 2,
                urgent: 0
            }
        );
    }

    #[test]
    fn minimal_single_location() {
        let ha = build(
            vec![Location {
                id: 0,
                name: "only".into(),
                urgent: false,
                flows: BTreeMap::from([("x".to_string(), Expr::num_int(0))]),
                invariant: Expr::Bool(true),
            }],
            vec![],
            vec!["x".into()],
            0,
            Expr::eq(Expr::var("x"), Expr::num_int(0)),
        )
        .unwrap();
        assert!(validate(&ha).is_empty());
        assert_eq!(stats(&ha).locations, 1);
        assert_eq!(stats(&ha).transitions, 0);
    }

    #[test]
    fn dangling_transition_rejected() {
        let err = build(
            vec![Location {
                id: 0,
                name: "a".into(),
                urgent: false,
                flows: BTreeMap::new(),
                invariant: Expr::Bool(true),
            }],
            vec![Transition {
                id: 0,
                source: 0,
                target: 7,
                guard: Expr::Bool(true),
                assignments: vec![],
                label: None,
            }],
            vec![],
            0,
            Expr::Bool(true),
        )
        .unwrap_err();
        assert!(err[0].message.contains("undeclared location id 7"));
    }

    #[test]
    fn duplicate_location_id_rejected() {
        let mk = |id| Location {
            id,
            name: format!("l{}", id),
            urgent: false,
            flows: BTreeMap::new(),
            invariant: Expr::Bool(true),
        };
        let err = build(vec![mk(0), mk(0)], vec![], vec![], 0, Expr::Bool(true)).unwrap_err();
        assert!(err[0].message.contains("duplicate location id"));
    }

    #[test]
    fn validate_reports_missing_flow_and_unknown_var() {
        let mut ha = heater();
        ha.locations[0].flows.clear();
        ha.transitions[0].guard = Expr::eq(Expr::var("u"), Expr::num_int(0));
        let diags = validate(&ha);
        assert!(diags.iter().any(|d| d.message.contains("missing flow: t")));
        assert!(diags.iter().any(|d| d.message.contains("unknown variable: u")));
    }
}
