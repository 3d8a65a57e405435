//! Grounding and STRIPS execution semantics.

use std::collections::BTreeMap;

use crate::model::{ActionSchema, DomainModel, GroundAction, GroundAtom, ModelError, Plan, PlanningProblem, State};
use crate::symbol::Symbol;

/// A ground action together with its ground precondition and effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    pub action: GroundAction,
    pub pre: Vec<GroundAtom>,
    pub add: Vec<GroundAtom>,
    pub del: Vec<GroundAtom>,
}

impl GroundedAction {
    fn from_args(schema: &ActionSchema, args: Vec<Symbol>) -> Self {
        GroundedAction {
            pre: schema.pre.iter().map(|a| a.ground(&args)).collect(),
            add: schema.add.iter().map(|a| a.ground(&args)).collect(),
            del: schema.del.iter().map(|a| a.ground(&args)).collect(),
            action: GroundAction {
                name: schema.name.clone(),
                args,
            },
        }
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        self.pre.iter().all(|p| state.contains(p))
    }

    pub fn missing_preconditions(&self, state: &State) -> Vec<GroundAtom> {
        self.pre.iter().filter(|p| !state.contains(p)).cloned().collect()
    }

    /// `(state - del) + add`, without checking the precondition.
    pub fn successor(&self, state: &State) -> State {
        let mut next = state.clone();
        for d in &self.del {
            next.remove(d);
        }
        for a in &self.add {
            next.insert(a.clone());
        }
        next
    }
}

/// Grounds `schema` under a parameter-name binding, checking that every
/// parameter is bound to a declared object of a compatible type.
pub fn instantiate(
    schema: &ActionSchema,
    binding: &BTreeMap<Symbol, Symbol>,
    problem: &PlanningProblem,
) -> Result<GroundedAction, ModelError> {
    let mut args = Vec::with_capacity(schema.params.len());
    for p in &schema.params {
        let obj = binding
            .get(&p.name)
            .ok_or_else(|| ModelError::UnboundParameter(p.name.clone()))?;
        let ty = problem
            .object_type(obj)
            .ok_or_else(|| ModelError::UndeclaredObject(obj.clone()))?;
        if !problem.domain.types.is_subtype(ty, &p.ty) {
            return Err(ModelError::TypeMismatch {
                object: obj.clone(),
                expected: p.ty.clone(),
                found: ty.clone(),
            });
        }
        args.push(obj.clone());
    }
    Ok(GroundedAction::from_args(schema, args))
}

/// Grounds a ground action positionally against its schema in `model`.
/// Argument types are not checked.
pub fn ground(action: &GroundAction, model: &DomainModel) -> Result<GroundedAction, ModelError> {
    let schema = model.schema(&action.name)?;
    if schema.params.len() != action.args.len() {
        return Err(ModelError::ArityMismatch {
            name: action.name.clone(),
            expected: schema.params.len(),
            found: action.args.len(),
        });
    }
    Ok(GroundedAction::from_args(schema, action.args.clone()))
}

pub fn applicable(state: &State, action: &GroundAction, model: &DomainModel) -> Result<bool, ModelError> {
    Ok(ground(action, model)?.is_applicable(state))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{action} is not applicable; missing {missing:?}")]
    Inapplicable {
        action: GroundAction,
        missing: Vec<GroundAtom>,
    },
}

/// The transition function: checks the precondition, then applies delete
/// before add effects.
pub fn apply(state: &State, action: &GroundAction, model: &DomainModel) -> Result<State, ApplyError> {
    let g = ground(action, model)?;
    if !g.is_applicable(state) {
        return Err(ApplyError::Inapplicable {
            action: action.clone(),
            missing: g.missing_preconditions(state),
        });
    }
    Ok(g.successor(state))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    UnknownAction(ModelError),
    Inapplicable { missing: Vec<GroundAtom> },
    GoalUnmet { missing: Vec<GroundAtom> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Execution {
    Success(State),
    /// `step` is the failing action index, or `plan.len()` for the goal check.
    Failure {
        step: usize,
        reason: FailureReason,
    },
}

impl Execution {
    pub fn is_success(&self) -> bool {
        matches!(self, Execution::Success(_))
    }
}

/// Runs `plan` from the problem's initial state under the problem's model
/// and checks the goal.
pub fn execute_plan(problem: &PlanningProblem, plan: &Plan) -> Execution {
    execute_from(&problem.domain, &problem.init, &problem.goal, plan)
}

pub fn execute_from(model: &DomainModel, init: &State, goal: &State, plan: &Plan) -> Execution {
    let mut state = init.clone();
    for (step, action) in plan.iter().enumerate() {
        let g = match ground(action, model) {
            Ok(g) => g,
            Err(e) => {
                return Execution::Failure {
                    step,
                    reason: FailureReason::UnknownAction(e),
                }
            }
        };
        if !g.is_applicable(&state) {
            return Execution::Failure {
                step,
                reason: FailureReason::Inapplicable {
                    missing: g.missing_preconditions(&state),
                },
            };
        }
        state = g.successor(&state);
    }
    if state.satisfies(goal) {
        Execution::Success(state)
    } else {
        let missing = goal.iter().filter(|a| !state.contains(a)).cloned().collect();
        Execution::Failure {
            step: plan.len(),
            reason: FailureReason::GoalUnmet { missing },
        }
    }
}

/// Final state if every action is applicable in sequence; the goal is not
/// consulted.
pub fn simulate(model: &DomainModel, init: &State, plan: &Plan) -> Option<State> {
    let mut state = init.clone();
    for action in plan.iter() {
        let g = ground(action, model).ok()?;
        if !g.is_applicable(&state) {
            return None;
        }
        state = g.successor(&state);
    }
    Some(state)
}
