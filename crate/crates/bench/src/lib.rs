//! Benchmark support for the fragment planner: vendored domains, random
//! instance and case-library generation, and experiment sweeps.

pub mod experiment;
pub mod generate;
pub mod library;

pub use experiment::{run_experiment, summarize, ExperimentSpec, RunRecord, SettingSummary, SpecError};
pub use generate::{random_problem, random_problems, DomainKind, GenConfig, GenError};
pub use library::{case_id, generate_cases, Library};
