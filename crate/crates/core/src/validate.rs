//! Scoring generated plans against the complete model.

use thiserror::Error;

use crate::exec::execute_from;
use crate::model::{DomainModel, Plan, PlanningProblem};

/// A solver's answer for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub problem_id: String,
    pub plan: Option<Plan>,
    pub cpu_millis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemResult {
    pub id: String,
    pub solved: bool,
    /// Length of the submitted plan, 0 if none.
    pub length: usize,
    pub cpu_millis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_total: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    /// Over correctly solved problems only; 0 when there are none.
    pub mean_plan_length: f64,
    pub per_problem: Vec<ProblemResult>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no problems to evaluate")]
    Empty,
    #[error("{problems} problems but {attempts} attempts")]
    LengthMismatch { problems: usize, attempts: usize },
    #[error("attempt {index} is for {found}, expected {expected}")]
    Misaligned {
        index: usize,
        expected: String,
        found: String,
    },
}

/// A problem counts as solved iff its plan executes from init to goal under
/// `complete`.
pub fn evaluate(
    problems: &[PlanningProblem],
    attempts: &[Attempt],
    complete: &DomainModel,
) -> Result<EvalReport, EvalError> {
    if problems.is_empty() {
        return Err(EvalError::Empty);
    }
    if problems.len() != attempts.len() {
        return Err(EvalError::LengthMismatch {
            problems: problems.len(),
            attempts: attempts.len(),
        });
    }
    let mut per_problem = Vec::with_capacity(problems.len());
    for (index, (p, a)) in problems.iter().zip(attempts).enumerate() {
        if p.name != a.problem_id.as_str() {
            return Err(EvalError::Misaligned {
                index,
                expected: p.name.to_string(),
                found: a.problem_id.clone(),
            });
        }
        let solved = a
            .plan
            .as_ref()
            .is_some_and(|plan| execute_from(complete, &p.init, &p.goal, plan).is_success());
        per_problem.push(ProblemResult {
            id: a.problem_id.clone(),
            solved,
            length: a.plan.as_ref().map_or(0, Plan::len),
            cpu_millis: a.cpu_millis,
        });
    }
    let correct: Vec<&ProblemResult> = per_problem.iter().filter(|r| r.solved).collect();
    let n_correct = correct.len();
    let mean_plan_length = if n_correct == 0 {
        0.0
    } else {
        correct.iter().map(|r| r.length as f64).sum::<f64>() / n_correct as f64
    };
    Ok(EvalReport {
        n_total: problems.len(),
        n_correct,
        accuracy: n_correct as f64 / problems.len() as f64,
        mean_plan_length,
        per_problem,
    })
}
