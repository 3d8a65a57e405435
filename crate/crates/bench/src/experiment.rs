//! Parameter sweeps over case count, completeness, support threshold and
//! degradation seed.

use std::cmp::Ordering;
use std::sync::Arc;
use std::time::Instant;

use fragplan_core::degrade::{degrade, DegradeSpec};
use fragplan_core::exec::execute_plan;
use fragplan_core::mapping::{best_mapping, extract_fragments, Fragment};
use fragplan_core::pddl::CaseFile;
use fragplan_core::validate::{evaluate, Attempt, EvalError};
use fragplan_core::{
    solve_from_fragments, DomainModel, ExperimentRow, PipelineConfig, Plan, PlanSource, PlanningProblem, Skeleton,
    Stage,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("{0} list is empty")]
    EmptyList(&'static str),
    #[error("no problems")]
    NoProblems,
    #[error("case count {requested} exceeds the library size {available}")]
    NotEnoughCases { requested: usize, available: usize },
    #[error("completeness {0} is outside [0, 1]")]
    BadCompleteness(f64),
    #[error("delta must be at least 1")]
    ZeroDelta,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub complete: Arc<DomainModel>,
    pub problems: Vec<PlanningProblem>,
    /// Settings with `n` cases use the first `n` of these.
    pub library: Vec<CaseFile>,
    pub case_counts: Vec<usize>,
    pub completeness: Vec<f64>,
    pub deltas: Vec<usize>,
    /// Degradation seeds.
    pub seeds: Vec<u64>,
    pub pipeline: PipelineConfig,
    /// Record wall-clock milliseconds; when false `cpu_millis` is 0 so that
    /// reruns are byte-identical.
    pub timing: bool,
}

pub const DEFAULT_CASE_COUNTS: [usize; 5] = [40, 80, 120, 160, 200];
pub const DEFAULT_COMPLETENESS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const DEFAULT_DELTAS: [usize; 3] = [5, 15, 25];

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.problems.is_empty() {
            return Err(SpecError::NoProblems);
        }
        for (name, empty) in [
            ("case count", self.case_counts.is_empty()),
            ("completeness", self.completeness.is_empty()),
            ("delta", self.deltas.is_empty()),
            ("seed", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(SpecError::EmptyList(name));
            }
        }
        if let Some(&n) = self.case_counts.iter().find(|&&n| n > self.library.len()) {
            return Err(SpecError::NotEnoughCases {
                requested: n,
                available: self.library.len(),
            });
        }
        if let Some(&c) = self.completeness.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(SpecError::BadCompleteness(c));
        }
        if self.deltas.contains(&0) {
            return Err(SpecError::ZeroDelta);
        }
        Ok(())
    }
}

/// One solve: the CSV row plus what is needed to re-check it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub row: ExperimentRow,
    pub plan: Option<Plan>,
    pub source: Option<PlanSource>,
    pub failure: Option<Stage>,
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

fn order(a: &RunRecord, b: &RunRecord) -> Ordering {
    let (x, y) = (&a.row, &b.row);
    x.domain
        .cmp(&y.domain)
        .then(x.num_cases.cmp(&y.num_cases))
        .then(x.completeness.total_cmp(&y.completeness))
        .then(x.delta.cmp(&y.delta))
        .then(a.seed.cmp(&b.seed))
        .then(x.problem_id.cmp(&y.problem_id))
}

struct Unit<'a> {
    seed: u64,
    completeness: f64,
    model: Arc<DomainModel>,
    problem: &'a PlanningProblem,
}

fn run_unit(spec: &ExperimentSpec, unit: &Unit) -> Vec<RunRecord> {
    let p = unit.problem.with_domain(unit.model.clone());
    let max_cases = spec.case_counts.iter().copied().max().unwrap_or(0);

    let t = Instant::now();
    let skeleton = Skeleton::new(&p, &spec.pipeline.search);
    let skeleton_ms = millis(t);

    // Fragments per case, with the time each mapping took.
    let per_case: Vec<(Vec<Fragment>, f64)> = if skeleton.dead() {
        Vec::new()
    } else {
        spec.library[..max_cases]
            .iter()
            .map(|c| {
                let t = Instant::now();
                let m = best_mapping(c, &p, &spec.pipeline.mapping);
                let f = extract_fragments(c, &m.mapping, &p);
                (f, millis(t))
            })
            .collect()
    };

    let problem_id = if spec.seeds.len() > 1 {
        format!("{}@s{}", unit.problem.name, unit.seed)
    } else {
        unit.problem.name.to_string()
    };
    let mut out = Vec::new();
    for &n in &spec.case_counts {
        let upto = &per_case[..n.min(per_case.len())];
        let fragments: Vec<Fragment> = upto.iter().flat_map(|(f, _)| f.iter().cloned()).collect();
        let mapping_ms: f64 = upto.iter().map(|(_, ms)| ms).sum();
        for &delta in &spec.deltas {
            let cfg = PipelineConfig { delta, ..spec.pipeline };
            let t = Instant::now();
            let report = solve_from_fragments(&p, skeleton.clone(), fragments.clone(), &cfg);
            let cpu = skeleton_ms + mapping_ms + millis(t);
            let (plan, source, failure) = match report.result {
                Ok((plan, source)) => (Some(plan), Some(source), None),
                Err(stage) => (None, None, Some(stage)),
            };
            let solved = plan
                .as_ref()
                .is_some_and(|plan| execute_plan(unit.problem, plan).is_success());
            out.push(RunRecord {
                seed: unit.seed,
                row: ExperimentRow {
                    domain: spec.complete.name.to_string(),
                    num_cases: n,
                    completeness: unit.completeness,
                    delta,
                    problem_id: problem_id.clone(),
                    solved,
                    plan_length: plan.as_ref().map_or(0, Plan::len),
                    cpu_millis: if spec.timing { cpu } else { 0.0 },
                },
                plan,
                source,
                failure,
            });
        }
    }
    out
}

/// Every (setting, problem) solve, sorted by setting then problem id.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, SpecError> {
    spec.validate()?;
    let mut units = Vec::new();
    for &seed in &spec.seeds {
        for &c in &spec.completeness {
            let model = Arc::new(degrade(&spec.complete, &DegradeSpec::new(c, seed)));
            for problem in &spec.problems {
                units.push(Unit {
                    seed,
                    completeness: c,
                    model: model.clone(),
                    problem,
                });
            }
        }
    }
    let mut records: Vec<RunRecord> = units.par_iter().flat_map_iter(|u| run_unit(spec, u)).collect();
    records.sort_by(order);
    Ok(records)
}

/// Accuracy of one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingSummary {
    pub seed: u64,
    pub num_cases: usize,
    pub completeness: f64,
    pub delta: usize,
    pub n_total: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub mean_plan_length: f64,
}

/// Re-validates every record's plan under the complete model and
/// aggregates per setting.
pub fn summarize(spec: &ExperimentSpec, records: &[RunRecord]) -> Result<Vec<SettingSummary>, EvalError> {
    let mut out = Vec::new();
    for group in records.chunk_by(|a, b| {
        (a.seed, a.row.num_cases, a.row.delta) == (b.seed, b.row.num_cases, b.row.delta)
            && a.row.completeness == b.row.completeness
    }) {
        let problems: Vec<PlanningProblem> = group
            .iter()
            .map(|r| {
                let name = r.row.problem_id.split('@').next().unwrap_or_default();
                spec.problems
                    .iter()
                    .find(|p| p.name == name)
                    .expect("record for a known problem")
                    .clone()
            })
            .collect();
        let attempts: Vec<Attempt> = group
            .iter()
            .zip(&problems)
            .map(|(r, p)| Attempt {
                problem_id: p.name.to_string(),
                plan: r.plan.clone(),
                cpu_millis: r.row.cpu_millis,
            })
            .collect();
        let report = evaluate(&problems, &attempts, &spec.complete)?;
        let first = &group[0];
        out.push(SettingSummary {
            seed: first.seed,
            num_cases: first.row.num_cases,
            completeness: first.row.completeness,
            delta: first.row.delta,
            n_total: report.n_total,
            n_correct: report.n_correct,
            accuracy: report.accuracy,
            mean_plan_length: report.mean_plan_length,
        });
    }
    Ok(out)
}

pub fn rows(records: &[RunRecord]) -> Vec<ExperimentRow> {
    records.iter().map(|r| r.row.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_problems, DomainKind, GenConfig};
    use crate::library::generate_cases;
    use fragplan_core::pddl::parse_domain;
    use fragplan_core::planner::SearchConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_spec() -> ExperimentSpec {
        let kind = DomainKind::Blocks;
        let model = Arc::new(parse_domain(kind.domain_text()).unwrap());
        let gen = GenConfig::new(kind);
        let library = generate_cases(&model, &gen, &SearchConfig::default(), 6, 3)
            .unwrap()
            .cases;
        let problems = random_problems(&model, &gen, "p", 4, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        ExperimentSpec {
            complete: model,
            problems,
            library,
            case_counts: vec![2, 6],
            completeness: vec![0.6, 1.0],
            deltas: vec![1, 2],
            seeds: vec![1, 2],
            pipeline: PipelineConfig::default(),
            timing: false,
        }
    }

    #[test]
    fn row_count_and_order() {
        let spec = small_spec();
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 2 * 2 * 2 * 2 * 4);
        for w in records.windows(2) {
            assert_ne!(order(&w[0], &w[1]), Ordering::Greater);
        }
        assert!(records.iter().all(|r| r.row.cpu_millis == 0.0));
        assert!(records[0].row.problem_id.contains("@s"));
    }

    #[test]
    fn full_completeness_solves_everything() {
        let spec = small_spec();
        let records = run_experiment(&spec).unwrap();
        for s in summarize(&spec, &records).unwrap() {
            if s.completeness == 1.0 {
                assert_eq!(s.accuracy, 1.0, "{s:?}");
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = small_spec();
        spec.case_counts = vec![7];
        assert!(matches!(run_experiment(&spec), Err(SpecError::NotEnoughCases { .. })));
        let mut spec = small_spec();
        spec.deltas.clear();
        assert_eq!(run_experiment(&spec).unwrap_err(), SpecError::EmptyList("delta"));
        let mut spec = small_spec();
        spec.completeness = vec![1.5];
        assert_eq!(run_experiment(&spec).unwrap_err(), SpecError::BadCompleteness(1.5));
    }
}
