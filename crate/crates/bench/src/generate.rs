//! Random problem instances: a random valid initial state followed by a
//! random walk whose end state supplies the goal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use fragplan_core::planner::random_walk;
use fragplan_core::{DomainModel, GroundAtom, PlanningProblem, State, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainKind {
    Blocks,
    Driverlog,
    Depots,
}

impl DomainKind {
    pub const ALL: [DomainKind; 3] = [DomainKind::Blocks, DomainKind::Driverlog, DomainKind::Depots];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Blocks => "blocks",
            DomainKind::Driverlog => "driverlog",
            DomainKind::Depots => "depots",
        }
    }

    /// Vendored complete domain text.
    pub fn domain_text(self) -> &'static str {
        match self {
            DomainKind::Blocks => include_str!("../domains/blocks.pddl"),
            DomainKind::Driverlog => include_str!("../domains/driverlog.pddl"),
            DomainKind::Depots => include_str!("../domains/depots.pddl"),
        }
    }

    /// Recognizes a domain by its declared name.
    pub fn of_model(model: &DomainModel) -> Option<Self> {
        model.name.as_ref().parse().ok()
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "blocks" | "blocksworld" | "blocks-world" => Ok(DomainKind::Blocks),
            "driverlog" => Ok(DomainKind::Driverlog),
            "depots" | "depot" => Ok(DomainKind::Depots),
            _ => Err(GenError::UnknownDomain(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("no generator for domain {0:?} (known: blocks, driverlog, depots)")]
    UnknownDomain(String),
    #[error("no non-trivial goal after {attempts} random walks")]
    NoGoal { attempts: usize },
    #[error(transparent)]
    Model(#[from] fragplan_core::ModelError),
    #[error(transparent)]
    Planner(#[from] fragplan_core::planner::PlannerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub kind: DomainKind,
    /// Blocks, packages or crates, drawn uniformly from this range.
    pub min_size: usize,
    pub max_size: usize,
    pub walk_length: usize,
}

impl GenConfig {
    pub fn new(kind: DomainKind) -> Self {
        GenConfig {
            kind,
            min_size: 3,
            max_size: 6,
            walk_length: 20,
        }
    }
}

const MAX_ATTEMPTS: usize = 200;

struct Builder {
    objects: BTreeMap<Symbol, Symbol>,
    init: State,
}

impl Builder {
    fn new() -> Self {
        Builder {
            objects: BTreeMap::new(),
            init: State::new(),
        }
    }

    fn objects(&mut self, prefix: &str, n: usize, ty: &str) -> Vec<String> {
        let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
        for o in &names {
            self.objects.insert(o.as_str().into(), ty.into());
        }
        names
    }

    fn fact(&mut self, predicate: &str, args: &[&str]) {
        self.init.insert(GroundAtom::new(predicate, args.iter().copied()));
    }
}

fn blocks_init<R: Rng>(b: &mut Builder, n: usize, rng: &mut R) {
    let mut blocks = b.objects("b", n, "object");
    blocks.shuffle(rng);
    b.fact("handempty", &[]);
    for (i, x) in blocks.iter().enumerate() {
        match i.checked_sub(1).map(|j| blocks[j].as_str()) {
            Some(y) if rng.gen_bool(0.5) => b.fact("on", &[x, y]),
            Some(y) => {
                b.fact("clear", &[y]);
                b.fact("ontable", &[x]);
            }
            None => b.fact("ontable", &[x]),
        }
    }
    if let Some(top) = blocks.last() {
        b.fact("clear", &[top]);
    }
}

fn driverlog_init<R: Rng>(b: &mut Builder, n: usize, rng: &mut R) {
    let locs = b.objects("s", n.max(2), "location");
    // Random spanning tree plus one extra road; drivers walk the same graph.
    let mut edges = Vec::new();
    for i in 1..locs.len() {
        edges.push((i, rng.gen_range(0..i)));
    }
    if locs.len() > 2 {
        let (x, y) = (rng.gen_range(0..locs.len()), rng.gen_range(0..locs.len()));
        if x != y {
            edges.push((x, y));
        }
    }
    for (x, y) in edges {
        for (u, v) in [(x, y), (y, x)] {
            b.fact("link", &[&locs[u], &locs[v]]);
            b.fact("path", &[&locs[u], &locs[v]]);
        }
    }
    let pick = |rng: &mut R| locs[rng.gen_range(0..locs.len())].clone();
    for t in b.objects("truck", 2, "truck") {
        let l = pick(rng);
        b.fact("at", &[&t, &l]);
        b.fact("empty", &[&t]);
    }
    for d in b.objects("driver", 2, "driver") {
        let l = pick(rng);
        b.fact("at", &[&d, &l]);
    }
    for p in b.objects("package", n, "obj") {
        let l = pick(rng);
        b.fact("at", &[&p, &l]);
    }
}

fn depots_init<R: Rng>(b: &mut Builder, n: usize, rng: &mut R) {
    let mut places = b.objects("depot", 1, "depot");
    places.extend(b.objects("distributor", 2, "distributor"));
    let hoists = b.objects("hoist", places.len(), "hoist");
    let pallets = b.objects("pallet", places.len(), "pallet");
    let mut tops = Vec::new();
    for ((p, h), s) in places.iter().zip(&hoists).zip(&pallets) {
        b.fact("at", &[h, p]);
        b.fact("available", &[h]);
        b.fact("at", &[s, p]);
        tops.push(s.clone());
    }
    for c in b.objects("crate", n, "crate") {
        let i = rng.gen_range(0..places.len());
        b.fact("at", &[&c, &places[i]]);
        b.fact("on", &[&c, &tops[i]]);
        tops[i] = c;
    }
    for top in &tops {
        b.fact("clear", &[top]);
    }
    for t in b.objects("truck", 2, "truck") {
        let p = places[rng.gen_range(0..places.len())].clone();
        b.fact("at", &[&t, &p]);
    }
}

/// Goal drawn from the end of a walk, or `None` if it is trivial.
fn goal_from_walk(kind: DomainKind, init: &State, end: &State) -> Option<State> {
    let goal: State = match kind {
        DomainKind::Blocks => {
            let goal: State = end.iter().filter(|a| a.predicate == "on").cloned().collect();
            if goal.iter().all(|a| init.contains(a)) {
                return None;
            }
            goal
        }
        DomainKind::Driverlog | DomainKind::Depots => {
            let key = if kind == DomainKind::Driverlog { "at" } else { "on" };
            end.iter()
                .filter(|a| a.predicate == key && !init.contains(a))
                .cloned()
                .collect()
        }
    };
    (!goal.is_empty()).then_some(goal)
}

/// One random problem named `name` over `model`.
pub fn random_problem<R: Rng>(
    model: &Arc<DomainModel>,
    config: &GenConfig,
    name: &str,
    rng: &mut R,
) -> Result<PlanningProblem, GenError> {
    for _ in 0..MAX_ATTEMPTS {
        let size = rng.gen_range(config.min_size..=config.max_size.max(config.min_size));
        let mut b = Builder::new();
        match config.kind {
            DomainKind::Blocks => blocks_init(&mut b, size, rng),
            DomainKind::Driverlog => driverlog_init(&mut b, size, rng),
            DomainKind::Depots => depots_init(&mut b, size, rng),
        }
        let start = PlanningProblem::new(name, model.clone(), b.objects, b.init, State::new())?;
        let (_, end) = random_walk(&start, config.walk_length, rng)?;
        if let Some(goal) = goal_from_walk(config.kind, &start.init, &end) {
            return Ok(start.with_goal(goal));
        }
    }
    Err(GenError::NoGoal { attempts: MAX_ATTEMPTS })
}

/// `count` problems named `{prefix}001`, `{prefix}002`, ...
pub fn random_problems<R: Rng>(
    model: &Arc<DomainModel>,
    config: &GenConfig,
    prefix: &str,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PlanningProblem>, GenError> {
    (1..=count)
        .map(|i| random_problem(model, config, &format!("{prefix}{i:03}"), rng))
        .collect()
}
