//! Plan synthesis from an incomplete STRIPS model plus a library of plans
//! that are known to work.
//!
//! The pipeline plans for each goal atom separately under the incomplete
//! model to get causal pairs, maps every library case onto the new problem,
//! cuts the mapped plans into fragments, mines the frequent maximal
//! fragments and stitches them together along the causal pairs.

pub mod assembly;
pub mod degrade;
pub mod exec;
pub mod mapping;
pub mod mining;
pub mod model;
pub mod oracle;
pub mod pddl;
pub mod pipeline;
pub mod planner;
pub mod skeletal;
pub mod symbol;
pub mod validate;

pub use exec::{applicable, apply, execute_plan, instantiate, Execution, FailureReason, GroundedAction};
pub use model::{
    ActionSchema, Atom, DomainModel, GroundAction, GroundAtom, ListKind, ModelError, Parameter, Plan, PlanningProblem,
    State, Term, TypeHierarchy,
};
pub use pddl::{CaseFile, ExperimentRow, PddlError};
pub use pipeline::{solve_from_fragments, solve_with_cases, PipelineConfig, PlanSource, Skeleton, SolveReport, Stage};
pub use symbol::Symbol;
