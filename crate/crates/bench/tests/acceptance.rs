//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fragplan_bench::{
    generate_cases, random_problems, run_experiment, summarize, DomainKind, ExperimentSpec, GenConfig, RunRecord,
    SettingSummary,
};
use fragplan_core::degrade::{degrade, DegradeSpec};
use fragplan_core::exec::execute_plan;
use fragplan_core::mapping::{best_mapping, extract_fragments, mapping_score, FeatureMatch, MappingConfig};
use fragplan_core::mining::{mine_frequent, SequenceDB};
use fragplan_core::oracle::{best_score_exhaustive, bfs_plan, causal_pairs_by_triples, mine_by_windows};
use fragplan_core::pddl::{parse_domain, parse_problem, read_case, CaseFile};
use fragplan_core::planner::{random_walk, SearchConfig, SolveOutcome};
use fragplan_core::skeletal::extract_causal_pairs;
use fragplan_core::{
    DomainModel, GroundAction, GroundAtom, PipelineConfig, PlanSource, PlanningProblem, State, Symbol,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAG1: &str = "(pickup b) (stack b a) (pickup c) (stack c b) (pickup d) (stack d c)";
const FRAG2: &str = "(unstack b c) (putdown b) (unstack c a) (putdown c) (pickup b) (stack b a) (pickup c) (stack c b)";
const SOLUTION: &str = "(unstack c a) (putdown c) (pickup b) (stack b a) (pickup c) (stack c b) (pickup d) (stack d c)";

type Verdict = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/blocks")
}

fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn model(path: &Path) -> Arc<DomainModel> {
    Arc::new(parse_domain(&read(path)).unwrap())
}

fn tower(domain: &str) -> PlanningProblem {
    parse_problem(&read(&fixture("tower.pddl")), model(&fixture(domain))).unwrap()
}

fn cases() -> Vec<CaseFile> {
    ["p1", "p2"]
        .iter()
        .map(|id| read_case(id, &read(&fixture(&format!("cases/{id}.case")))).unwrap())
        .collect()
}

fn fragplan(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fragplan"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn joined(actions: &[GroundAction]) -> String {
    actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Verdict {
    if elapsed <= limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"))
    }
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_skeletal_pairs() -> Verdict {
    let t = Instant::now();
    let (code, out, err) = fragplan(&[
        "skeletal",
        "--incomplete-domain",
        path_str(&fixture("domain-incomplete.pddl")),
        "--problem",
        path_str(&fixture("tower.pddl")),
    ]);
    let elapsed = t.elapsed();
    let got: BTreeSet<&str> = out.lines().collect();
    let want: BTreeSet<&str> = [
        "(pickup b) -> (stack b a)",
        "(unstack c a) -> (stack c b)",
        "(pickup d) -> (stack d c)",
    ]
    .into();
    if code != 0 || got != want || out.lines().count() != 3 {
        return Err(format!("exit {code}, pairs {got:?}, stderr {err:?}"));
    }
    within(elapsed, Duration::from_secs(1), "3 pairs, exact".into())
}

fn c2_mappings() -> Verdict {
    let t = Instant::now();
    let p = tower("domain-incomplete.pddl");
    let [p1, p2]: [CaseFile; 2] = cases().try_into().unwrap();
    let m1 = best_mapping(&p1, &p, &MappingConfig::default());
    let m2 = best_mapping(&p2, &p, &MappingConfig::default());
    let f1: Vec<String> = extract_fragments(&p1, &m1.mapping, &p)
        .iter()
        .map(|f| f.to_string())
        .collect();
    let f2: Vec<String> = extract_fragments(&p2, &m2.mapping, &p)
        .iter()
        .map(|f| f.to_string())
        .collect();
    let ok = m1.mapping.to_string() == "{b1->c, b2->a, b3->b, b4->d}"
        && m1.score == 10
        && mapping_score(&p1, &m1.mapping, &p) == 10
        && m2.mapping.to_string() == "{b1->b, b2->a, b3->c}"
        && f1 == [FRAG1]
        && f2 == [FRAG2];
    let detail = format!(
        "m1={} score={} m2={} fragments={f1:?} {f2:?}",
        m1.mapping, m1.score, m2.mapping
    );
    ensure(ok, detail).and_then(|d| within(t.elapsed(), Duration::from_secs(1), d))
}

fn parse_seq(s: &str) -> Vec<GroundAction> {
    s.trim_matches(|c| c == '(' || c == ')')
        .split(") (")
        .map(|a| {
            let mut it = a.split_whitespace();
            GroundAction::new(it.next().unwrap(), it)
        })
        .collect()
}

fn c3_mining() -> Verdict {
    let db = SequenceDB::new([parse_seq(FRAG1), parse_seq(FRAG2)]);
    let at2: Vec<String> = mine_frequent(&db, 2).patterns.iter().map(|p| joined(p)).collect();
    let at1: BTreeSet<String> = mine_frequent(&db, 1).patterns.iter().map(|p| joined(p)).collect();
    let eliminated = [
        "(pickup b)",
        "(stack b a)",
        "(pickup c)",
        "(stack c b)",
        "(pickup b) (stack b a)",
        "(stack b a) (pickup c)",
        "(pickup c) (stack c b)",
        "(pickup b) (stack b a) (pickup c)",
        "(stack b a) (pickup c) (stack c b)",
    ];
    let leaked: Vec<&str> = eliminated
        .iter()
        .copied()
        .filter(|e| at1.contains(*e) || at2.iter().any(|p| p == e))
        .collect();
    let ok = at2 == ["(pickup b) (stack b a) (pickup c) (stack c b)"]
        && at1 == BTreeSet::from([FRAG1.to_string(), FRAG2.to_string()])
        && leaked.is_empty();
    ensure(
        ok,
        format!(
            "delta=2 {at2:?}; delta=1 {} patterns; eliminated leaked {leaked:?}",
            at1.len()
        ),
    )
}

fn c4_solution() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let plans = dir.path().join("plans");
    let problems = dir.path().join("problems");
    std::fs::create_dir_all(&plans).unwrap();
    std::fs::create_dir_all(&problems).unwrap();
    std::fs::copy(fixture("tower.pddl"), problems.join("tower.pddl")).unwrap();
    let plan_file = plans.join("tower.plan");
    let (code, _, solve_err) = fragplan(&[
        "solve",
        "--incomplete-domain",
        path_str(&fixture("domain-incomplete.pddl")),
        "--problem",
        path_str(&fixture("tower.pddl")),
        "--cases",
        path_str(&fixture("cases")),
        "--delta",
        "1",
        "--out",
        path_str(&plan_file),
    ]);
    let solve_err = solve_err.trim();
    if code != 0 || !solve_err.contains("via fragments") {
        return Err(format!("solve exit {code}: {solve_err}"));
    }
    let plan = read(&plan_file).lines().collect::<Vec<_>>().join(" ");
    if plan != SOLUTION {
        return Err(format!("plan {plan:?}"));
    }
    let (code, out, err) = fragplan(&[
        "evaluate",
        "--domain",
        path_str(&fixture("domain.pddl")),
        "--problems",
        path_str(&problems),
        "--plans",
        path_str(&plans),
    ]);
    ensure(
        code == 0 && out.contains("tower solved=true length=8") && out.contains("accuracy=1 "),
        format!("{solve_err}; validator: {}", out.lines().last().unwrap_or(&err)),
    )
}

fn random_db(rng: &mut ChaCha8Rng) -> SequenceDB<u8> {
    let alphabet = rng.gen_range(1..=8u8);
    let n = rng.gen_range(0..=12);
    SequenceDB::new((0..n).map(|_| {
        let len = rng.gen_range(0..=12);
        (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
    }))
}

fn c5_miner_oracle() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut patterns = 0;
    for _ in 0..1000 {
        let db = random_db(&mut rng);
        for delta in 1..=3 {
            let fast: BTreeSet<Vec<u8>> = mine_frequent(&db, delta).patterns.into_iter().collect();
            patterns += fast.len();
            if fast != mine_by_windows(&db, delta) {
                mismatches += 1;
            }
        }
    }
    ensure(
        mismatches == 0,
        format!("3000 runs, {patterns} patterns, {mismatches} mismatches"),
    )
    .and_then(|d| within(t.elapsed(), Duration::from_secs(30), d))
}

/// Random stacks of `n` blocks named `{prefix}0..`, hand empty.
fn random_towers(n: usize, prefix: &str, rng: &mut ChaCha8Rng) -> State {
    let mut blocks: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    blocks.shuffle(rng);
    let mut s = State::new();
    s.insert(GroundAtom::new("handempty", Vec::<&str>::new()));
    for (i, b) in blocks.iter().enumerate() {
        match i.checked_sub(1).map(|j| blocks[j].as_str()) {
            Some(y) if rng.gen_bool(0.5) => s.insert(GroundAtom::new("on", [b.as_str(), y])),
            Some(y) => {
                s.insert(GroundAtom::new("clear", [y]));
                s.insert(GroundAtom::new("ontable", [b.as_str()]))
            }
            None => s.insert(GroundAtom::new("ontable", [b.as_str()])),
        };
    }
    s.insert(GroundAtom::new("clear", [blocks.last().unwrap().as_str()]));
    s
}

fn blocks_problem(model: &Arc<DomainModel>, n: usize, prefix: &str, init: State, goal: State) -> PlanningProblem {
    let objects = (0..n)
        .map(|i| (Symbol::from(format!("{prefix}{i}")), Symbol::from("object")))
        .collect();
    PlanningProblem::new("random", model.clone(), objects, init, goal).unwrap()
}

fn c6_mapping_oracle() -> Verdict {
    let t = Instant::now();
    let blocks = model(&fixture("domain.pddl"));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = Vec::new();
    for round in 0..200 {
        let n = rng.gen_range(1..=4);
        let init = random_towers(n, "x", &mut rng);
        let walk = blocks_problem(&blocks, n, "x", init.clone(), State::new());
        let (plan, end) = random_walk(&walk, rng.gen_range(1..=6), &mut rng).unwrap();
        let goal = end
            .iter()
            .filter(|a| a.predicate == "on" || rng.gen_bool(0.2))
            .cloned()
            .collect();
        let case = CaseFile {
            id: format!("c{round}"),
            init,
            goal,
            plan,
        };
        let m = rng.gen_range(1..=4);
        let init = random_towers(m, "o", &mut rng);
        let walk = blocks_problem(&blocks, m, "o", init.clone(), State::new());
        let (_, end) = random_walk(&walk, 5, &mut rng).unwrap();
        let goal = end.iter().filter(|a| a.predicate == "on").cloned().collect();
        let problem = blocks_problem(&blocks, m, "o", init, goal);
        let got = best_mapping(&case, &problem, &MappingConfig::default()).score;
        let want = best_score_exhaustive(&case, &problem, FeatureMatch::Static);
        if got != want {
            mismatches.push((round, got, want));
        }
    }
    ensure(mismatches.is_empty(), format!("200 pairs, mismatches {mismatches:?}"))
        .and_then(|d| within(t.elapsed(), Duration::from_secs(60), d))
}

fn c7_causal_oracle() -> Verdict {
    let blocks = model(&fixture("domain.pddl"));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut pairs = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let init = random_towers(n, "b", &mut rng);
        let p = blocks_problem(&blocks, n, "b", init.clone(), State::new());
        let (plan, _) = random_walk(&p, rng.gen_range(0..=8), &mut rng).unwrap();
        assert!(plan.len() <= 8);
        let fast = extract_causal_pairs(&plan, &blocks, &init).unwrap();
        pairs += fast.len();
        if Some(fast) != causal_pairs_by_triples(&plan, &blocks, &init) {
            mismatches += 1;
        }
    }
    ensure(
        mismatches == 0,
        format!("200 plans, {pairs} pairs, {mismatches} mismatches"),
    )
}

fn blocks_setup(problems: usize, cases: usize) -> (Arc<DomainModel>, Vec<PlanningProblem>, Vec<CaseFile>) {
    let kind = DomainKind::Blocks;
    let complete = Arc::new(parse_domain(kind.domain_text()).unwrap());
    let gen = GenConfig::new(kind);
    let library = generate_cases(&complete, &gen, &SearchConfig::default(), cases, 1)
        .unwrap()
        .cases;
    let problems = random_problems(&complete, &gen, "p", problems, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    (complete, problems, library)
}

fn spec(
    complete: Arc<DomainModel>,
    problems: Vec<PlanningProblem>,
    library: Vec<CaseFile>,
    case_counts: Vec<usize>,
    completeness: Vec<f64>,
    seeds: Vec<u64>,
) -> ExperimentSpec {
    ExperimentSpec {
        complete,
        problems,
        library,
        case_counts,
        completeness,
        deltas: vec![15],
        seeds,
        pipeline: PipelineConfig::default(),
        timing: false,
    }
}

fn accuracy(summary: &[SettingSummary], seed: u64, cases: usize, completeness: f64) -> f64 {
    summary
        .iter()
        .find(|s| s.seed == seed && s.num_cases == cases && s.completeness == completeness)
        .map(|s| s.accuracy)
        .unwrap()
}

fn c8_complete_model(runs: &mut Vec<(ExperimentSpec, Vec<RunRecord>)>) -> Verdict {
    let t = Instant::now();
    let (complete, problems, library) = blocks_setup(20, 40);
    let max_blocks = problems.iter().map(|p| p.objects.len()).max().unwrap();
    let unsolvable = problems
        .iter()
        .filter(|p| !matches!(bfs_plan(p, 1_000_000), Ok(SolveOutcome::Solved(_))))
        .count();
    if max_blocks > 6 || unsolvable > 0 || library.len() != 40 {
        return Err(format!(
            "suite: {max_blocks} blocks max, {unsolvable} unsolvable, {} cases",
            library.len()
        ));
    }
    let spec = spec(complete, problems, library, vec![40], vec![1.0], vec![1]);
    let records = run_experiment(&spec).unwrap();
    let summary = summarize(&spec, &records).unwrap();
    let acc = summary[0].accuracy;
    let by_source = source_counts(&records);
    runs.push((spec, records));
    ensure(
        acc == 1.0,
        format!("accuracy {acc:.3} over 20 BFS-solvable problems; sources {by_source}"),
    )
    .and_then(|d| within(t.elapsed(), Duration::from_secs(120), d))
}

fn source_counts(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for src in [PlanSource::Fragments, PlanSource::GoalPlans, PlanSource::Search] {
        let n = records.iter().filter(|r| r.source == Some(src)).count();
        write!(out, "{src}={n} ").unwrap();
    }
    write!(out, "unsolved={}", records.iter().filter(|r| r.plan.is_none()).count()).unwrap();
    out
}

fn c9_trends(runs: &mut Vec<(ExperimentSpec, Vec<RunRecord>)>) -> Verdict {
    let (complete, problems, library) = blocks_setup(50, 200);
    let seeds = vec![1, 2, 3];
    let spec = spec(
        complete,
        problems,
        library,
        vec![40, 200],
        vec![0.2, 0.6, 1.0],
        seeds.clone(),
    );
    let records = run_experiment(&spec).unwrap();
    let summary = summarize(&spec, &records).unwrap();
    let mut more_cases = 0;
    let mut more_model = 0;
    let mut detail = String::new();
    for &s in &seeds {
        let (a40, a200) = (accuracy(&summary, s, 40, 0.6), accuracy(&summary, s, 200, 0.6));
        let (lo, hi) = (accuracy(&summary, s, 200, 0.2), accuracy(&summary, s, 200, 1.0));
        more_cases += usize::from(a200 >= a40 - 0.05);
        more_model += usize::from(hi >= lo);
        write!(
            detail,
            "seed {s}: c=0.6 {a40:.2}->{a200:.2}, 200 cases c=0.2 {lo:.2} c=1.0 {hi:.2}; "
        )
        .unwrap();
    }
    runs.push((spec, records));
    write!(detail, "cases trend {more_cases}/3, completeness trend {more_model}/3").unwrap();
    ensure(more_cases >= 2 && more_model >= 2, detail)
}

fn c10_soundness(runs: &[(ExperimentSpec, Vec<RunRecord>)]) -> Verdict {
    let mut checked = 0;
    let mut fragments = 0;
    let mut violations = Vec::new();
    for (spec, records) in runs {
        for r in records {
            let name = r.row.problem_id.split('@').next().unwrap();
            let problem = spec.problems.iter().find(|p| p.name == name).unwrap();
            if r.row.solved {
                checked += 1;
                let plan = r.plan.as_ref().unwrap();
                if !execute_plan(problem, plan).is_success() {
                    violations.push(format!("{} unsound under the complete model", r.row.problem_id));
                }
            }
            if let (Some(plan), Some(PlanSource::Fragments)) = (&r.plan, r.source) {
                fragments += 1;
                let partial = Arc::new(degrade(&spec.complete, &DegradeSpec::new(r.row.completeness, r.seed)));
                if !execute_plan(&problem.with_domain(partial), plan).is_success() {
                    violations.push(format!(
                        "{} fragment plan fails under the incomplete model",
                        r.row.problem_id
                    ));
                }
            }
        }
        // The validator's verdict must agree with the rows.
        let summary = summarize(spec, records).unwrap();
        let solved_rows = records.iter().filter(|r| r.row.solved).count();
        let validated: usize = summary.iter().map(|s| s.n_correct).sum();
        if solved_rows != validated {
            violations.push(format!("{solved_rows} rows solved, validator accepts {validated}"));
        }
    }
    ensure(
        violations.is_empty(),
        format!("{checked} solved rows, {fragments} fragment plans, violations {violations:?}"),
    )
}

fn c11_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cases = dir.path().join("cases");
    let problems = dir.path().join("problems");
    let domain = path_str(&fixture("domain.pddl")).to_string();
    let gen_cases = [
        "gen-cases",
        "--domain",
        &domain,
        "--count",
        "30",
        "--seed",
        "4",
        "--out",
        path_str(&cases),
    ];
    let gen_problems = [
        "gen-problems",
        "--domain",
        &domain,
        "--count",
        "10",
        "--seed",
        "5",
        "--out",
        path_str(&problems),
    ];
    for args in [&gen_cases[..], &gen_problems[..]] {
        let (code, _, err) = fragplan(args);
        if code != 0 {
            return Err(format!("{} exit {code}: {err}", args[0]));
        }
    }
    let csv = |name: &str| {
        let out = dir.path().join(name);
        let (code, _, err) = fragplan(&[
            "experiment",
            "--domain",
            &domain,
            "--problems",
            path_str(&problems),
            "--cases",
            path_str(&cases),
            "--case-counts",
            "10,30",
            "--completeness",
            "0.4,0.8,1.0",
            "--delta",
            "2,5",
            "--seed",
            "1,2",
            "--timing",
            "off",
            "--out",
            path_str(&out),
        ]);
        assert_eq!(code, 0, "{err}");
        std::fs::read(out).unwrap()
    };
    let (a, b) = (csv("a.csv"), csv("b.csv"));
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    ensure(
        a == b && rows > 1,
        format!("{rows} lines, {} bytes, identical={}", a.len(), a == b),
    )
}

fn main() {
    let mut runs = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (status, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {status} {name} ({:.1?}): {detail}", t.elapsed());
    };
    report(1, "golden causal pairs", &mut c1_skeletal_pairs);
    report(2, "golden mappings and fragments", &mut c2_mappings);
    report(3, "golden mining", &mut c3_mining);
    report(4, "golden assembled plan", &mut c4_solution);
    report(5, "miner oracle", &mut c5_miner_oracle);
    report(6, "mapping oracle", &mut c6_mapping_oracle);
    report(7, "causal-link oracle", &mut c7_causal_oracle);
    report(8, "complete model solves all", &mut || c8_complete_model(&mut runs));
    report(9, "accuracy trends", &mut || c9_trends(&mut runs));
    report(10, "soundness", &mut || c10_soundness(&runs));
    report(11, "determinism", &mut c11_determinism);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
