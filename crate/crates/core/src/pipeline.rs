//! End-to-end solving from an incomplete model and a case library.

use std::fmt;

use crate::assembly::{concat_frag, trim, AssemblyConfig, AssemblyStats};
use crate::exec::execute_from;
use crate::mapping::{build_fragments, Fragment, MappingConfig};
use crate::mining::{mine_frequent, SequenceDB};
use crate::model::{GroundAction, Plan, PlanningProblem};
use crate::pddl::CaseFile;
use crate::planner::{solve, SearchConfig, SolveOutcome};
use crate::skeletal::{pairs_from_skeleton, skeletal_plans, CausalPairSet, GoalOutcome, GoalPlan};

pub const DEFAULT_DELTA: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub delta: usize,
    pub search: SearchConfig,
    pub mapping: MappingConfig,
    pub assembly: AssemblyConfig,
    /// Try the per-goal plans and then a whole-goal search when assembly
    /// fails.
    pub fallback: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            delta: DEFAULT_DELTA,
            search: SearchConfig::default(),
            mapping: MappingConfig::default(),
            assembly: AssemblyConfig::default(),
            fallback: true,
        }
    }
}

/// Where a failed run gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Some goal atom could not be planned for under the model.
    Skeletal,
    /// No fragment reached the support threshold.
    Mining,
    /// Fragments existed but no assembly (or fallback) worked.
    Assembly,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Skeletal => "skeletal",
            Stage::Mining => "mining",
            Stage::Assembly => "assembly",
        })
    }
}

/// Which step produced the returned plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlanSource {
    Fragments,
    GoalPlans,
    Search,
}

impl fmt::Display for PlanSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanSource::Fragments => "fragments",
            PlanSource::GoalPlans => "goal-plans",
            PlanSource::Search => "search",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub result: Result<(Plan, PlanSource), Stage>,
    pub skeleton: Vec<GoalPlan>,
    pub pairs: CausalPairSet,
    pub fragments: Vec<Fragment>,
    pub patterns: Vec<Vec<GroundAction>>,
    pub assembly: AssemblyStats,
}

impl SolveReport {
    pub fn plan(&self) -> Option<&Plan> {
        self.result.as_ref().ok().map(|(p, _)| p)
    }
}

fn reaches_goal(problem: &PlanningProblem, plan: &Plan) -> bool {
    execute_from(&problem.domain, &problem.init, &problem.goal, plan).is_success()
}

/// Per-goal plans concatenated in goal order, trimmed.
fn goal_plan_concat(problem: &PlanningProblem, skeleton: &[GoalPlan]) -> Option<Plan> {
    let joined: Vec<GroundAction> = skeleton
        .iter()
        .map(GoalPlan::plan)
        .collect::<Option<Vec<_>>>()?
        .into_iter()
        .flat_map(|p| p.actions.iter().cloned())
        .collect();
    let plan = Plan::new(trim(&joined, &problem.domain, &problem.init, &problem.goal));
    reaches_goal(problem, &plan).then_some(plan)
}

/// Per-goal plans and their causal pairs for a problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub goals: Vec<GoalPlan>,
    pub pairs: CausalPairSet,
}

impl Skeleton {
    pub fn new(problem: &PlanningProblem, search: &SearchConfig) -> Self {
        let goals = skeletal_plans(problem, search);
        let pairs = pairs_from_skeleton(problem, &goals);
        Skeleton { goals, pairs }
    }

    /// Some goal atom is provably unreachable, so the whole goal is.
    pub fn dead(&self) -> bool {
        self.goals
            .iter()
            .any(|g| matches!(g.outcome, GoalOutcome::Unsolvable | GoalOutcome::GroundingFailed))
    }
}

/// Solves `problem`, whose domain is the (possibly incomplete) model, using
/// the case library. Any returned plan executes and reaches the goal under
/// that model.
pub fn solve_with_cases(problem: &PlanningProblem, cases: &[CaseFile], config: &PipelineConfig) -> SolveReport {
    let skeleton = Skeleton::new(problem, &config.search);
    let fragments = if skeleton.dead() {
        Vec::new()
    } else {
        build_fragments(cases, problem, &config.mapping)
    };
    solve_from_fragments(problem, skeleton, fragments, config)
}

/// The steps after mapping: mine, assemble, fall back.
pub fn solve_from_fragments(
    problem: &PlanningProblem,
    skeleton: Skeleton,
    fragments: Vec<Fragment>,
    config: &PipelineConfig,
) -> SolveReport {
    let dead = skeleton.dead();
    let mut report = SolveReport {
        result: Err(Stage::Skeletal),
        skeleton: skeleton.goals,
        pairs: skeleton.pairs,
        fragments,
        patterns: Vec::new(),
        assembly: AssemblyStats::default(),
    };
    if dead {
        return report;
    }

    let db = SequenceDB::new(report.fragments.iter().map(|f| f.actions.clone()));
    report.patterns = mine_frequent(&db, config.delta).patterns;
    let (plan, stats) = concat_frag(problem, &report.pairs, &report.patterns, &config.assembly);
    report.assembly = stats;
    if let Some(plan) = plan {
        report.result = Ok((plan, PlanSource::Fragments));
        return report;
    }

    if config.fallback {
        if let Some(plan) = goal_plan_concat(problem, &report.skeleton) {
            report.result = Ok((plan, PlanSource::GoalPlans));
            return report;
        }
        if let Ok(SolveOutcome::Solved(plan)) = solve(problem, &config.search) {
            if reaches_goal(problem, &plan) {
                report.result = Ok((plan, PlanSource::Search));
                return report;
            }
        }
    }

    let all_planned = report.skeleton.iter().all(|g| g.plan().is_some());
    report.result = Err(if !all_planned {
        Stage::Skeletal
    } else if report.patterns.is_empty() {
        Stage::Mining
    } else {
        Stage::Assembly
    });
    report
}
