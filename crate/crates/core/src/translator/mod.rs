//! Derivation of the monolithic hybrid automaton from a checked model by
//! breadth-first closure over reachable configurations.
//!
//! Each distinct configuration becomes one location; every successor step
//! becomes one transition. Design faults (queue overflow, pool exhaustion,
//! duplicate CAN priorities in the buffer) lead to a single absorbing
//! non-urgent location named `Fault`.

mod config;
mod succ;

pub use config::{
    ArgVal, Configuration, Event, Frame, Message, MsgPayload, NetworkState, PendingEvent,
    PoolState, RebecKind, RebecState,
};
pub use succ::{arg_var, timer_var, Step, StepTarget, Translator, UrgencyClass};

use crate::diag::Diagnostic;
use crate::expr::Expr;
use crate::frontend::check::CheckedModel;
use crate::ha::{HybridAutomaton, Location, Transition};
use std::collections::{BTreeMap, HashMap, VecDeque};

/// Bounds that make exploration finite in practice: per-rebec queue sizes,
/// the two pool sizes and a safety cutoff on the configuration count.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationLimits {
    pub default_queue: usize,
    pub queue_overrides: BTreeMap<String, usize>,
    pub timer_pool: usize,
    pub arg_pool: usize,
    pub max_configs: usize,
}

impl Default for ExplorationLimits {
    fn default() -> Self {
        ExplorationLimits {
            default_queue: 1,
            queue_overrides: BTreeMap::new(),
            timer_pool: 1,
            arg_pool: 4,
            max_configs: 200_000,
        }
    }
}

impl ExplorationLimits {
    pub fn queue_bound(&self, instance: &str) -> usize {
        self.queue_overrides
            .get(instance)
            .copied()
            .unwrap_or(self.default_queue)
    }
}

/// Exploration result: the derived automaton plus the configuration behind
/// every location (`None` for the Fault location).
pub struct Exploration {
    pub ha: HybridAutomaton,
    pub configs: Vec<Option<Configuration>>,
}

/// Derive the hybrid automaton of a model.
pub fn explore(model: &CheckedModel, limits: &ExplorationLimits) -> Result<HybridAutomaton, Diagnostic> {
    explore_full(model, limits).map(|e| e.ha)
}

/// Derive the automaton and keep the per-location configurations for
/// inspection.
pub fn explore_full(
    model: &CheckedModel,
    limits: &ExplorationLimits,
) -> Result<Exploration, Diagnostic> {
    let tr = Translator::new(model, limits.clone());
    let initial = tr.initial_configuration();

    let mut ids: HashMap<Configuration, usize> = HashMap::new();
    let mut configs: Vec<Option<Configuration>> = Vec::new();
    let mut frontier: VecDeque<usize> = VecDeque::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut fault_loc: Option<usize> = None;

    ids.insert(initial.clone(), 0);
    configs.push(Some(initial));
    frontier.push_back(0);

    while let Some(source) = frontier.pop_front() {
        let cfg = configs[source].clone().expect("frontier holds configurations");
        let steps = tr.successors(&cfg)?;
        for step in steps {
            let target = match step.target {
                StepTarget::Fault => *fault_loc.get_or_insert_with(|| {
                    configs.push(None);
                    configs.len() - 1
                }),
                StepTarget::Config(next) => match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = configs.len();
                        if id >= limits.max_configs {
                            return Err(Diagnostic::error(
                                None,
                                format!(
                                    "exploration exceeded the configuration cutoff ({})",
                                    limits.max_configs
                                ),
                            ));
                        }
                        ids.insert(next.clone(), id);
                        configs.push(Some(next));
                        frontier.push_back(id);
                        id
                    }
                },
            };
            transitions.push(Transition {
                id: transitions.len(),
                source,
                target,
                guard: step.guard.normalize(),
                assignments: step
                    .assignments
                    .into_iter()
                    .map(|(v, e)| (v, e.normalize()))
                    .collect(),
                label: step.note,
            });
        }
    }

    let mut locations = Vec::new();
    for (id, cfg) in configs.iter().enumerate() {
        match cfg {
            Some(cfg) => {
                let (flows, invariant, urgent) = tr.flows_and_invariant(cfg);
                let flows = flows
                    .into_iter()
                    .map(|(v, e)| (v, e.normalize()))
                    .collect();
                locations.push(Location {
                    id,
                    name: format!("l{}", id),
                    urgent,
                    flows,
                    invariant: invariant.normalize(),
                });
            }
            None => {
                let flows = tr
                    .variables
                    .iter()
                    .map(|v| (v.clone(), Expr::num_int(0)))
                    .collect();
                locations.push(Location {
                    id,
                    name: "Fault".to_string(),
                    urgent: false,
                    flows,
                    invariant: Expr::Bool(true),
                });
            }
        }
    }

    if let Some(cycle) = find_urgent_cycle(&locations, &transitions) {
        let path = cycle
            .iter()
            .map(|&id| locations[id].name.clone())
            .collect::<Vec<_>>()
            .join(" -> ");
        return Err(Diagnostic::error(
            None,
            format!("instantaneous cycle of urgent configurations: {}", path),
        ));
    }

    let init_condition = Expr::conjoin(
        tr.variables
            .iter()
            .map(|v| Expr::eq(Expr::var(v.clone()), Expr::num_int(0))),
    );
    let ha = HybridAutomaton {
        variables: tr.variables.clone(),
        labels: Vec::new(),
        locations,
        transitions,
        init_location: 0,
        init_condition,
    };
    Ok(Exploration { ha, configs })
}

/// Find a cycle in the urgent subgraph, returned as a location-id path
/// `a -> ... -> a`. The derived automaton must not contain one: time could
/// never advance past it.
fn find_urgent_cycle(locations: &[Location], transitions: &[Transition]) -> Option<Vec<usize>> {
    let urgent: Vec<bool> = locations.iter().map(|l| l.urgent).collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in transitions {
        if urgent.get(t.source).copied().unwrap_or(false)
            && urgent.get(t.target).copied().unwrap_or(false)
        {
            adj.entry(t.source).or_default().push(t.target);
        }
    }
    // Iterative DFS with an explicit color map; a gray edge means a cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; locations.len()];
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let starts: Vec<usize> = adj.keys().copied().collect();
    for start in starts {
        if color[start] != Color::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = Color::Gray;
        while let Some(&mut (node, ref mut next_child)) = stack.last_mut() {
            let children = adj.get(&node).map(|v| v.as_slice()).unwrap_or(&[]);
            if *next_child >= children.len() {
                color[node] = Color::Black;
                stack.pop();
                continue;
            }
            let child = children[*next_child];
            *next_child += 1;
            match color[child] {
                Color::White => {
                    color[child] = Color::Gray;
                    parent.insert(child, node);
                    stack.push((child, 0));
                }
                Color::Gray => {
                    // Reconstruct child -> ... -> node -> child.
                    let mut path = vec![child];
                    let mut cur = node;
                    while cur != child {
                        path.push(cur);
                        cur = match parent.get(&cur) {
                            Some(&p) => p,
                            None => break,
                        };
                    }
                    path.push(child);
                    path.reverse();
                    return Some(path);
                }
                Color::Black => {}
            }
        }
    }
    None
}
