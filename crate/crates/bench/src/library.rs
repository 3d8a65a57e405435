//! Case libraries built by solving random problems with the complete model.

use std::sync::Arc;

use fragplan_core::exec::execute_plan;
use fragplan_core::pddl::CaseFile;
use fragplan_core::planner::{solve, SearchConfig, SolveOutcome};
use fragplan_core::DomainModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::generate::{random_problem, GenConfig, GenError};

/// Generated cases plus the number of source problems that were skipped
/// because the planner failed on them.
#[derive(Debug, Clone)]
pub struct Library {
    pub cases: Vec<CaseFile>,
    pub skipped: usize,
}

/// Case ids are `case-0001`, `case-0002`, ... so that sorting by file name
/// keeps generation order and a prefix of the library is a smaller library.
pub fn case_id(i: usize) -> String {
    format!("case-{i:04}")
}

/// Up to `count` self-validated cases; at most `2 * count` source problems
/// are tried.
pub fn generate_cases(
    model: &Arc<DomainModel>,
    gen: &GenConfig,
    search: &SearchConfig,
    count: usize,
    seed: u64,
) -> Result<Library, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    let mut skipped = 0;
    while cases.len() < count && cases.len() + skipped < 2 * count {
        let id = case_id(cases.len() + 1);
        let problem = random_problem(model, gen, &id, &mut rng)?;
        match solve(&problem, search)? {
            SolveOutcome::Solved(plan) if !plan.is_empty() && execute_plan(&problem, &plan).is_success() => {
                cases.push(CaseFile {
                    id,
                    init: problem.init,
                    goal: problem.goal,
                    plan,
                })
            }
            _ => skipped += 1,
        }
    }
    Ok(Library { cases, skipped })
}
