//! Causal pairs from per-goal skeletal plans.
//!
//! Each goal atom is planned for on its own under the (incomplete) model and
//! every causal link of the resulting plan becomes a pair. Goals the planner
//! cannot reach contribute nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::exec::{ground, GroundedAction};
use crate::model::{DomainModel, GroundAction, GroundAtom, ModelError, Plan, PlanningProblem, State};
use crate::planner::{search, SearchConfig, SolveOutcome, Task};

/// `provider` adds an atom that `consumer` needs, with no deleter between.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CausalPair {
    pub provider: GroundAction,
    pub consumer: GroundAction,
}

impl CausalPair {
    pub fn new(provider: GroundAction, consumer: GroundAction) -> Self {
        CausalPair { provider, consumer }
    }
}

impl fmt::Display for CausalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.provider, self.consumer)
    }
}

impl fmt::Debug for CausalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub type CausalPairSet = BTreeSet<CausalPair>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CausalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step {step} ({action}) is not applicable")]
    NotExecutable { step: usize, action: GroundAction },
}

/// All causal links of an executable plan.
///
/// `<a_i, a_j>` is included iff `i < j`, some atom `q` is added by `a_i` and
/// required by `a_j`, and no action strictly between them deletes `q`.
pub fn extract_causal_pairs(plan: &Plan, model: &DomainModel, s0: &State) -> Result<CausalPairSet, CausalError> {
    let grounded: Vec<GroundedAction> = plan.iter().map(|a| ground(a, model)).collect::<Result<_, _>>()?;
    let mut state = s0.clone();
    // Atom -> steps whose add of it has not been deleted since.
    let mut live: BTreeMap<&GroundAtom, Vec<usize>> = BTreeMap::new();
    let mut pairs = CausalPairSet::new();
    for (j, g) in grounded.iter().enumerate() {
        if !g.is_applicable(&state) {
            return Err(CausalError::NotExecutable {
                step: j,
                action: g.action.clone(),
            });
        }
        for q in &g.pre {
            for &i in live.get(q).into_iter().flatten() {
                if grounded[i].action != g.action {
                    pairs.insert(CausalPair::new(grounded[i].action.clone(), g.action.clone()));
                }
            }
        }
        for d in &g.del {
            if !g.add.contains(d) {
                live.remove(d);
            }
        }
        for a in &g.add {
            live.entry(a).or_default().push(j);
        }
        state = g.successor(&state);
    }
    Ok(pairs)
}

/// What the planner produced for one goal atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalOutcome {
    Planned(Plan),
    Unsolvable,
    BudgetExhausted,
    /// The problem could not be grounded within limits.
    GroundingFailed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalPlan {
    pub goal: GroundAtom,
    pub outcome: GoalOutcome,
}

impl GoalPlan {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            GoalOutcome::Planned(p) => Some(p),
            _ => None,
        }
    }
}

/// Skeletal plans for every goal atom, in goal order.
pub fn skeletal_plans(problem: &PlanningProblem, config: &SearchConfig) -> Vec<GoalPlan> {
    let task = match Task::new(problem, config.max_ground_actions) {
        Ok(t) => t,
        Err(_) => {
            return problem
                .goal
                .iter()
                .map(|g| GoalPlan {
                    goal: g.clone(),
                    outcome: GoalOutcome::GroundingFailed,
                })
                .collect()
        }
    };
    problem
        .goal
        .iter()
        .map(|g| {
            let id = task.atom_id(g).expect("goal atoms are interned");
            let outcome = match search(&task, &task.init, &[id], config) {
                SolveOutcome::Solved(p) => GoalOutcome::Planned(p),
                SolveOutcome::Unsolvable => GoalOutcome::Unsolvable,
                SolveOutcome::BudgetExhausted => GoalOutcome::BudgetExhausted,
            };
            GoalPlan {
                goal: g.clone(),
                outcome,
            }
        })
        .collect()
}

/// Union of the causal pairs of every per-goal plan.
pub fn pairs_from_skeleton(problem: &PlanningProblem, skeleton: &[GoalPlan]) -> CausalPairSet {
    let mut pairs = CausalPairSet::new();
    for gp in skeleton {
        if let Some(plan) = gp.plan() {
            // Plans come from the same model, so extraction cannot fail.
            if let Ok(ps) = extract_causal_pairs(plan, &problem.domain, &problem.init) {
                pairs.extend(ps);
            }
        }
    }
    pairs
}

pub fn generate_causal_pairs(problem: &PlanningProblem, config: &SearchConfig) -> CausalPairSet {
    pairs_from_skeleton(problem, &skeletal_plans(problem, config))
}
