use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fragplan_bench::experiment::{rows, DEFAULT_CASE_COUNTS, DEFAULT_COMPLETENESS, DEFAULT_DELTAS};
use fragplan_bench::{
    generate_cases, random_problems, run_experiment, summarize, DomainKind, ExperimentSpec, GenConfig,
};
use fragplan_core::degrade::{degrade, DegradeSpec};
use fragplan_core::mapping::{best_mapping, extract_fragments, MappingConfig};
use fragplan_core::mining::{mine_frequent, support, SequenceDB};
use fragplan_core::pddl::{
    parse_domain, parse_problem, read_library, read_plan, write_domain, write_library, write_plan, write_problem,
    write_rows, CaseFile,
};
use fragplan_core::planner::{solve, SearchConfig, SolveOutcome, DEFAULT_MAX_EXPANSIONS};
use fragplan_core::skeletal::{pairs_from_skeleton, skeletal_plans, GoalOutcome};
use fragplan_core::validate::{evaluate, Attempt};
use fragplan_core::{mapping::build_fragments, solve_with_cases, DomainModel, PipelineConfig, PlanningProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_UNSOLVED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fragplan",
    version,
    about = "Plan from an incomplete STRIPS model and a library of plan examples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve random problems with the complete model and store them as cases.
    GenCases(GenArgs),
    /// Write random test problems as PDDL files.
    GenProblems(GenArgs),
    /// Remove a seeded random share of schema atoms.
    Degrade(DegradeArgs),
    /// Print the causal pairs of the per-goal plans.
    Skeletal(SkeletalArgs),
    /// Print the best mapping and fragments of every case.
    Map(LibraryArgs),
    /// Print the frequent maximal fragments with their supports.
    Mine(LibraryArgs),
    /// Solve a problem from an incomplete model and a case library.
    Solve(SolveArgs),
    /// Solve a problem with the forward planner alone.
    SolveClassical(ClassicalArgs),
    /// Score plan files against the complete model.
    Evaluate(EvaluateArgs),
    /// Run a parameter sweep and write one CSV row per setting and problem.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SearchArgs {
    /// Node expansions per search before giving up.
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS)]
    max_expansions: usize,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig::default().with_max_expansions(self.max_expansions)
    }
}

#[derive(Args)]
struct GenArgs {
    /// Complete domain; its name selects the generator.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    min_size: usize,
    #[arg(long, default_value_t = 6)]
    max_size: usize,
    /// Random-walk length used to pick goals.
    #[arg(long, default_value_t = 20)]
    walk: usize,
    #[command(flatten)]
    search: SearchArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DegradeArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    completeness: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SkeletalArgs {
    #[arg(long)]
    incomplete_domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct LibraryArgs {
    #[arg(long)]
    incomplete_domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    #[arg(long, default_value_t = fragplan_core::pipeline::DEFAULT_DELTA)]
    delta: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    incomplete_domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    #[arg(long, default_value_t = fragplan_core::pipeline::DEFAULT_DELTA)]
    delta: usize,
    /// Fail instead of falling back to the per-goal plans or plain search.
    #[arg(long)]
    no_fallback: bool,
    #[command(flatten)]
    search: SearchArgs,
    /// Plan file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassicalArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Complete domain.
    #[arg(long)]
    domain: PathBuf,
    /// Directory of problem files.
    #[arg(long)]
    problems: PathBuf,
    /// Directory of `<problem-file-stem>.plan` files; missing means unsolved.
    #[arg(long)]
    plans: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Complete domain.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problems: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CASE_COUNTS)]
    case_counts: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_COMPLETENESS)]
    completeness: Vec<f64>,
    #[arg(long = "delta", value_delimiter = ',', default_values_t = DEFAULT_DELTAS)]
    deltas: Vec<usize>,
    #[arg(long = "seed", value_delimiter = ',', default_values_t = [1u64])]
    seeds: Vec<u64>,
    #[command(flatten)]
    search: SearchArgs,
    /// Record solve wall-clock time; `off` writes 0 for reproducible output.
    #[arg(long, value_enum, default_value = "on")]
    timing: Switch,
    /// CSV file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_domain(path: &Path) -> Result<Arc<DomainModel>> {
    let model = parse_domain(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Arc::new(model))
}

fn load_problem(path: &Path, domain: Arc<DomainModel>) -> Result<PlanningProblem> {
    parse_problem(&read(path)?, domain).with_context(|| format!("parsing {}", path.display()))
}

/// `*.pddl` files of a directory, sorted, with their stems.
fn load_problems(dir: &Path, domain: &Arc<DomainModel>) -> Result<Vec<(String, PlanningProblem)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pddl"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((stem, load_problem(p, domain.clone())?))
        })
        .collect()
}

fn load_cases(dir: &Path) -> Result<Vec<CaseFile>> {
    read_library(dir).with_context(|| format!("reading case library {}", dir.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen_config(model: &DomainModel, args: &GenArgs) -> Result<GenConfig> {
    let Some(kind) = DomainKind::of_model(model) else {
        bail!("no instance generator for domain {:?}", model.name.to_string());
    };
    if args.min_size == 0 || args.min_size > args.max_size {
        bail!("need 1 <= --min-size <= --max-size");
    }
    Ok(GenConfig {
        kind,
        min_size: args.min_size,
        max_size: args.max_size,
        walk_length: args.walk,
    })
}

fn gen_cases(args: &GenArgs) -> Result<ExitCode> {
    let model = load_domain(&args.domain)?;
    let gen = gen_config(&model, args)?;
    let lib = generate_cases(&model, &gen, &args.search.config(), args.count, args.seed)?;
    write_library(&args.out, &lib.cases)?;
    if lib.skipped > 0 {
        eprintln!("skipped {} problems the planner could not solve", lib.skipped);
    }
    if lib.cases.len() < args.count {
        eprintln!("only {} of {} cases generated", lib.cases.len(), args.count);
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_problems(args: &GenArgs) -> Result<ExitCode> {
    let model = load_domain(&args.domain)?;
    let gen = gen_config(&model, args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let problems = random_problems(&model, &gen, "p", args.count, &mut rng)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for p in &problems {
        let path = args.out.join(format!("{}.pddl", p.name));
        fs::write(&path, write_problem(p)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_degrade(args: &DegradeArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.completeness) {
        bail!("--completeness must be in [0, 1]");
    }
    let model = load_domain(&args.domain)?;
    let weak = degrade(&model, &DegradeSpec::new(args.completeness, args.seed));
    eprintln!("kept {} of {} atoms", weak.atom_count(), model.atom_count());
    emit(args.out.as_deref(), &write_domain(&weak))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_skeletal(args: &SkeletalArgs) -> Result<ExitCode> {
    let model = load_domain(&args.incomplete_domain)?;
    let problem = load_problem(&args.problem, model)?;
    let goals = skeletal_plans(&problem, &args.search.config());
    for g in &goals {
        match &g.outcome {
            GoalOutcome::Planned(_) => {}
            other => eprintln!("no plan for {}: {other:?}", g.goal),
        }
    }
    for pair in pairs_from_skeleton(&problem, &goals) {
        println!("{pair}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_map(args: &LibraryArgs) -> Result<ExitCode> {
    let model = load_domain(&args.incomplete_domain)?;
    let problem = load_problem(&args.problem, model)?;
    for case in load_cases(&args.cases)? {
        let m = best_mapping(&case, &problem, &MappingConfig::default());
        println!("{} score={} {}", case.id, m.score, m.mapping);
        for f in extract_fragments(&case, &m.mapping, &problem) {
            println!("  {f}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_mine(args: &LibraryArgs) -> Result<ExitCode> {
    let model = load_domain(&args.incomplete_domain)?;
    let problem = load_problem(&args.problem, model)?;
    let cases = load_cases(&args.cases)?;
    let fragments = build_fragments(&cases, &problem, &MappingConfig::default());
    let db = SequenceDB::new(fragments.into_iter().map(|f| f.actions));
    for p in mine_frequent(&db, args.delta.max(1)).patterns {
        let text: Vec<String> = p.iter().map(ToString::to_string).collect();
        println!("{} {}", support(&db, &p), text.join(" "));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let model = load_domain(&args.incomplete_domain)?;
    let problem = load_problem(&args.problem, model)?;
    let cases = load_cases(&args.cases)?;
    let config = PipelineConfig {
        delta: args.delta.max(1),
        search: args.search.config(),
        fallback: !args.no_fallback,
        ..PipelineConfig::default()
    };
    let report = solve_with_cases(&problem, &cases, &config);
    match &report.result {
        Ok((plan, source)) => {
            eprintln!("solved via {source}: {} actions", plan.len());
            emit(args.out.as_deref(), &write_plan(plan))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(stage) => {
            eprintln!(
                "failure stage={stage} pairs={} fragments={} patterns={} assembly_nodes={}",
                report.pairs.len(),
                report.fragments.len(),
                report.patterns.len(),
                report.assembly.nodes
            );
            Ok(ExitCode::from(EXIT_UNSOLVED))
        }
    }
}

fn cmd_solve_classical(args: &ClassicalArgs) -> Result<ExitCode> {
    let model = load_domain(&args.domain)?;
    let problem = load_problem(&args.problem, model)?;
    match solve(&problem, &args.search.config())? {
        SolveOutcome::Solved(plan) => {
            emit(args.out.as_deref(), &write_plan(&plan))?;
            Ok(ExitCode::SUCCESS)
        }
        other => {
            eprintln!("failure: {other:?}");
            Ok(ExitCode::from(EXIT_UNSOLVED))
        }
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<ExitCode> {
    let model = load_domain(&args.domain)?;
    let loaded = load_problems(&args.problems, &model)?;
    let mut attempts = Vec::new();
    for (stem, p) in &loaded {
        let path = args.plans.join(format!("{stem}.plan"));
        let plan = if path.exists() {
            Some(read_plan(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?)
        } else {
            None
        };
        attempts.push(Attempt {
            problem_id: p.name.to_string(),
            plan,
            cpu_millis: 0.0,
        });
    }
    let problems: Vec<PlanningProblem> = loaded.into_iter().map(|(_, p)| p).collect();
    let report = evaluate(&problems, &attempts, &model)?;
    for r in &report.per_problem {
        println!("{} solved={} length={}", r.id, r.solved, r.length);
    }
    println!(
        "accuracy={} correct={} total={} mean_length={:.2}",
        report.accuracy, report.n_correct, report.n_total, report.mean_plan_length
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let model = load_domain(&args.domain)?;
    let problems = load_problems(&args.problems, &model)?
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    let spec = ExperimentSpec {
        complete: model,
        problems,
        library: load_cases(&args.cases)?,
        case_counts: args.case_counts.clone(),
        completeness: args.completeness.clone(),
        deltas: args.deltas.clone(),
        seeds: args.seeds.clone(),
        pipeline: PipelineConfig {
            search: args.search.config(),
            ..PipelineConfig::default()
        },
        timing: matches!(args.timing, Switch::On),
    };
    let records = run_experiment(&spec)?;
    let mut csv = Vec::new();
    write_rows(&mut csv, &rows(&records))?;
    emit(args.out.as_deref(), std::str::from_utf8(&csv)?)?;
    for s in summarize(&spec, &records)? {
        eprintln!(
            "seed={} cases={} completeness={} delta={} accuracy={:.3} mean_length={:.2}",
            s.seed, s.num_cases, s.completeness, s.delta, s.accuracy, s.mean_plan_length
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::GenCases(a) => gen_cases(a),
        Command::GenProblems(a) => gen_problems(a),
        Command::Degrade(a) => cmd_degrade(a),
        Command::Skeletal(a) => cmd_skeletal(a),
        Command::Map(a) => cmd_map(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Solve(a) => cmd_solve(a),
        Command::SolveClassical(a) => cmd_solve_classical(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
