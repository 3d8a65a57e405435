//! Grounded greedy best-first forward search.
//!
//! Used both to produce library cases under the complete model and to plan
//! for single goal atoms under an incomplete model. The model is taken
//! literally: whatever atoms it lacks are simply not checked or applied.

mod heuristic;
mod task;

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::model::{ModelError, Plan, PlanningProblem, State};

pub use self::heuristic::{goal_count, h_add};
pub use self::task::{AtomId, BitState, Task, TaskAction};

pub const DEFAULT_MAX_EXPANSIONS: usize = 100_000;
pub const DEFAULT_MAX_GROUND_ACTIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    #[default]
    RelaxedAdd,
    GoalCount,
}

/// Tie-breaking among open nodes with equal heuristic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lower path cost first, then generation order; successors are generated
    /// in ground-action order.
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub heuristic: Heuristic,
    pub max_expansions: usize,
    pub tie_break: TieBreak,
    pub max_ground_actions: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            heuristic: Heuristic::RelaxedAdd,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            tie_break: TieBreak::Lexicographic,
            max_ground_actions: DEFAULT_MAX_GROUND_ACTIONS,
        }
    }
}

impl SearchConfig {
    pub fn with_max_expansions(mut self, max_expansions: usize) -> Self {
        self.max_expansions = max_expansions.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Plan),
    /// Every reachable state was explored.
    Unsolvable,
    BudgetExhausted,
}

impl SolveOutcome {
    pub fn plan(self) -> Option<Plan> {
        match self {
            SolveOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("grounding exceeds {limit} actions")]
    GroundingLimit { limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn solve(problem: &PlanningProblem, config: &SearchConfig) -> Result<SolveOutcome, PlannerError> {
    let task = Task::new(problem, config.max_ground_actions)?;
    Ok(search(&task, &task.init, &task.goal, config))
}

/// Relaxed-add estimate for reaching `goal` from `state` under the problem's
/// model; `None` means unreachable.
pub fn relaxed_add_heuristic(
    state: &State,
    goal: &State,
    problem: &PlanningProblem,
) -> Result<Option<u64>, PlannerError> {
    let task = Task::new(&problem.with_goal(goal.clone()), DEFAULT_MAX_GROUND_ACTIONS)?;
    let goal_ids: Vec<AtomId> = goal.iter().filter_map(|g| task.atom_id(g)).collect();
    // Atoms outside the task can be in `state` but never matter to it.
    let known: State = state.iter().filter(|a| task.atom_id(a).is_some()).cloned().collect();
    let bits = task.encode(&known).expect("filtered to known atoms");
    Ok(h_add(&task, &bits, &goal_ids))
}

/// Up to `steps` uniformly random applicable actions from the initial
/// state, stopping early at a dead end.
pub fn random_walk<R: rand::Rng>(
    problem: &PlanningProblem,
    steps: usize,
    rng: &mut R,
) -> Result<(Plan, State), PlannerError> {
    let task = Task::new(problem, DEFAULT_MAX_GROUND_ACTIONS)?;
    let mut state = task.init.clone();
    let mut actions = Vec::with_capacity(steps);
    for _ in 0..steps {
        let options = task.applicable_actions(&state);
        if options.is_empty() {
            break;
        }
        let a = options[rng.gen_range(0..options.len())];
        state = task.successor(&state, a);
        actions.push(task.actions[a].action.clone());
    }
    Ok((Plan::new(actions), task.decode(&state)))
}

struct Node {
    state: BitState,
    parent: u32,
    action: u32,
}

const ROOT: u32 = u32::MAX;

fn evaluate(task: &Task, state: &BitState, goal: &[AtomId], heuristic: Heuristic) -> Option<u64> {
    match heuristic {
        Heuristic::RelaxedAdd => h_add(task, state, goal),
        Heuristic::GoalCount => Some(goal_count(state, goal)),
    }
}

fn extract(task: &Task, nodes: &[Node], mut at: u32) -> Plan {
    let mut actions = Vec::new();
    while nodes[at as usize].parent != ROOT {
        let n = &nodes[at as usize];
        actions.push(task.actions[n.action as usize].action.clone());
        at = n.parent;
    }
    actions.reverse();
    Plan::new(actions)
}

/// Greedy best-first search from `start` to any state containing `goal`.
pub fn search(task: &Task, start: &BitState, goal: &[AtomId], config: &SearchConfig) -> SolveOutcome {
    if start.has_all(goal) {
        return SolveOutcome::Solved(Plan::default());
    }
    let Some(h0) = evaluate(task, start, goal, config.heuristic) else {
        return SolveOutcome::Unsolvable;
    };
    let mut nodes = vec![Node {
        state: start.clone(),
        parent: ROOT,
        action: 0,
    }];
    let mut seen: HashMap<BitState, u32> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut open = BinaryHeap::new();
    let mut seq: u64 = 0;
    open.push(Reverse((h0, 0u32, seq, 0u32)));
    let mut expansions = 0usize;
    while let Some(Reverse((_, g, _, id))) = open.pop() {
        if expansions >= config.max_expansions {
            return SolveOutcome::BudgetExhausted;
        }
        expansions += 1;
        let state = nodes[id as usize].state.clone();
        for a in 0..task.actions.len() {
            if !task.applicable(&state, a) {
                continue;
            }
            let next = task.successor(&state, a);
            let child = nodes.len() as u32;
            match seen.entry(next) {
                Entry::Occupied(_) => continue,
                Entry::Vacant(v) => {
                    nodes.push(Node {
                        state: v.key().clone(),
                        parent: id,
                        action: a as u32,
                    });
                    v.insert(child);
                }
            }
            let next = &nodes[child as usize].state;
            if next.has_all(goal) {
                return SolveOutcome::Solved(extract(task, &nodes, child));
            }
            if let Some(h) = evaluate(task, next, goal, config.heuristic) {
                seq += 1;
                open.push(Reverse((h, g + 1, seq, child)));
            }
        }
    }
    SolveOutcome::Unsolvable
}
