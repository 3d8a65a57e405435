//! Object mappings from library cases onto a new problem, and the plan
//! fragments they induce.
//!
//! A mapping renames case objects to problem objects injectively. Its score
//! is the number of case init atoms that land in the problem's init plus the
//! number of case goal atoms that land in the problem's goal. The best
//! mapping is found by branch and bound over candidate problem objects for
//! each case object, in sorted order, with "leave unmapped" tried last.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::model::{GroundAction, GroundAtom, PlanningProblem, State};
use crate::pddl::CaseFile;
use crate::symbol::Symbol;

/// Injective renaming of case objects to problem objects.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectMapping {
    pairs: BTreeMap<Symbol, Symbol>,
}

impl ObjectMapping {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a mapping, or `None` if two case objects share a target.
    pub fn from_pairs<I, A, B>(pairs: I) -> Option<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<Symbol>,
        B: Into<Symbol>,
    {
        let mut m = ObjectMapping::new();
        for (a, b) in pairs {
            if !m.insert(a.into(), b.into()) {
                return None;
            }
        }
        Some(m)
    }

    /// Adds `from -> to`; false (and no change) if it would break injectivity
    /// or remap `from`.
    pub fn insert(&mut self, from: Symbol, to: Symbol) -> bool {
        if self.pairs.contains_key(&from) || self.pairs.values().any(|v| *v == to) {
            return false;
        }
        self.pairs.insert(from, to);
        true
    }

    pub fn get(&self, case_object: &Symbol) -> Option<&Symbol> {
        self.pairs.get(case_object)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Symbol)> + '_ {
        self.pairs.iter()
    }

    fn resolve(&self, o: &Symbol, constants: &BTreeMap<Symbol, Symbol>) -> Option<Symbol> {
        if constants.contains_key(o) {
            return Some(o.clone());
        }
        self.pairs.get(o).cloned()
    }

    /// The renamed atom, or `None` if it mentions an unmapped case object.
    pub fn apply_atom(&self, atom: &GroundAtom, problem: &PlanningProblem) -> Option<GroundAtom> {
        atom.try_rename(|o| self.resolve(o, &problem.domain.constants))
    }

    pub fn apply_action(&self, action: &GroundAction, problem: &PlanningProblem) -> Option<GroundAction> {
        action.try_rename(|o| self.resolve(o, &problem.domain.constants))
    }
}

impl fmt::Display for ObjectMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ObjectMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// How object features restrict which case objects may map to which problem
/// objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMatch {
    /// Equal sets of static unary features (unary predicates that no schema
    /// adds or deletes, i.e. type-like predicates).
    #[default]
    Static,
    /// Equal sets of all unary features.
    Exact,
    /// Types only.
    Off,
}

pub const DEFAULT_MAPPING_NODES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MappingConfig {
    pub features: FeatureMatch,
    /// Search nodes before the incumbent (greedy at worst) is returned.
    pub max_nodes: usize,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            features: FeatureMatch::Static,
            max_nodes: DEFAULT_MAPPING_NODES,
        }
    }
}

/// Unary predicates true of `object` in `init` or `goal`.
pub fn object_features(init: &State, goal: &State, object: &Symbol) -> BTreeSet<Symbol> {
    init.iter()
        .chain(goal.iter())
        .filter(|a| a.args.len() == 1 && a.args[0] == *object)
        .map(|a| a.predicate.clone())
        .collect()
}

/// `|init|m ∩ s0| + |goal|m ∩ g|`.
pub fn mapping_score(case: &CaseFile, m: &ObjectMapping, problem: &PlanningProblem) -> usize {
    let count = |atoms: &State, target: &State| {
        atoms
            .iter()
            .filter_map(|a| m.apply_atom(a, problem))
            .filter(|a| target.contains(a))
            .count()
    };
    count(&case.init, &problem.init) + count(&case.goal, &problem.goal)
}

/// Declared types a case object must have, from every predicate argument and
/// action parameter position it occupies.
fn type_constraints(case: &CaseFile, problem: &PlanningProblem) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
    let domain = &problem.domain;
    let mut out: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for atom in case.init.iter().chain(case.goal.iter()) {
        if let Some(types) = domain.predicates.get(&atom.predicate) {
            for (o, t) in atom.args.iter().zip(types) {
                out.entry(o.clone()).or_default().insert(t.clone());
            }
        }
    }
    for action in case.plan.iter() {
        if let Ok(schema) = domain.schema(&action.name) {
            for (o, p) in action.args.iter().zip(&schema.params) {
                out.entry(o.clone()).or_default().insert(p.ty.clone());
            }
        }
    }
    out
}

/// Problem objects each case object may map to, in sorted order.
pub fn candidates(case: &CaseFile, problem: &PlanningProblem, features: FeatureMatch) -> BTreeMap<Symbol, Vec<Symbol>> {
    let constants = &problem.domain.constants;
    let types = type_constraints(case, problem);
    let statics = problem.domain.static_predicates();
    let feature_key = |init: &State, goal: &State, o: &Symbol| -> BTreeSet<Symbol> {
        let f = object_features(init, goal, o);
        match features {
            FeatureMatch::Static => f.intersection(&statics).cloned().collect(),
            FeatureMatch::Exact => f,
            FeatureMatch::Off => BTreeSet::new(),
        }
    };
    let problem_keys: BTreeMap<&Symbol, BTreeSet<Symbol>> = problem
        .objects
        .keys()
        .map(|o| (o, feature_key(&problem.init, &problem.goal, o)))
        .collect();
    let empty = BTreeSet::new();
    case.objects()
        .into_iter()
        .filter(|o| !constants.contains_key(o))
        .map(|co| {
            let need = types.get(&co).unwrap_or(&empty);
            let key = feature_key(&case.init, &case.goal, &co);
            let cands = problem
                .objects
                .iter()
                .filter(|(_, pt)| need.iter().all(|t| problem.domain.types.is_subtype(pt, t)))
                .filter(|(po, _)| problem_keys[po] == key)
                .map(|(po, _)| po.clone())
                .collect();
            (co, cands)
        })
        .collect()
}

/// Result of [`best_mapping`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingResult {
    pub mapping: ObjectMapping,
    pub score: usize,
    /// False when the node budget ran out before the search finished.
    pub exact: bool,
}

const UNMAPPED: u32 = u32::MAX;

/// One case atom in index form. Arguments are either a case-object variable
/// or a fixed problem-object id (constants).
struct CaseAtom {
    pred: u32,
    args: Vec<Arg>,
    goal: bool,
    /// Depth after which every variable in the atom is assigned.
    decided_at: usize,
}

#[derive(Clone, Copy)]
enum Arg {
    Var(usize),
    Fixed(u32),
}

struct Search {
    atoms: Vec<CaseAtom>,
    /// Target atoms keyed by (goal?, predicate), each as problem-object ids.
    targets: HashMap<(bool, u32), Vec<Vec<u32>>>,
    target_sets: [std::collections::HashSet<(u32, Vec<u32>)>; 2],
    cands: Vec<Vec<u32>>,
    /// Atoms decided exactly at each depth.
    by_depth: Vec<Vec<usize>>,
    assign: Vec<u32>,
    used: Vec<bool>,
    best: Option<(usize, Vec<u32>)>,
    /// `best` came from [`Search::greedy`] rather than the search.
    seeded: bool,
    nodes: usize,
    max_nodes: usize,
}

impl Search {
    fn atom_matches(&self, atom: &CaseAtom) -> bool {
        let mut ids = Vec::with_capacity(atom.args.len());
        for a in &atom.args {
            let id = match *a {
                Arg::Var(v) => self.assign[v],
                Arg::Fixed(id) => id,
            };
            if id == UNMAPPED {
                return false;
            }
            ids.push(id);
        }
        self.target_sets[atom.goal as usize].contains(&(atom.pred, ids))
    }

    /// Could `atom` still match some target given the partial assignment of
    /// the first `depth` variables?
    fn atom_possible(&self, atom: &CaseAtom, depth: usize) -> bool {
        let Some(targets) = self.targets.get(&(atom.goal, atom.pred)) else {
            return false;
        };
        targets.iter().any(|t| {
            atom.args.iter().zip(t).all(|(a, &tid)| match *a {
                Arg::Fixed(id) => id == tid,
                Arg::Var(v) if v < depth => self.assign[v] == tid,
                Arg::Var(v) => !self.used[tid as usize] && self.cands[v].contains(&tid),
            })
        })
    }

    /// Whether the atoms still open at `depth` can lift `score` to `target`.
    /// Stops counting as soon as they can.
    fn can_reach(&self, depth: usize, score: usize, target: usize) -> bool {
        let need = target.saturating_sub(score);
        need == 0
            || self
                .atoms
                .iter()
                .filter(|a| a.decided_at > depth)
                .filter(|a| self.atom_possible(a, depth))
                .nth(need - 1)
                .is_some()
    }

    fn gained(&self, depth: usize) -> usize {
        self.by_depth[depth + 1]
            .iter()
            .filter(|&&i| self.atom_matches(&self.atoms[i]))
            .count()
    }

    fn options(&self, depth: usize) -> Vec<u32> {
        self.cands[depth]
            .iter()
            .copied()
            .filter(|&c| !self.used[c as usize])
            .chain(std::iter::once(UNMAPPED))
            .collect()
    }

    fn set(&mut self, depth: usize, c: u32) {
        if c != UNMAPPED {
            self.used[c as usize] = true;
        }
        self.assign[depth] = c;
    }

    fn unset(&mut self, depth: usize) {
        let c = std::mem::replace(&mut self.assign[depth], UNMAPPED);
        if c != UNMAPPED {
            self.used[c as usize] = false;
        }
    }

    /// Greedy assignment, one variable at a time, taking the first option with
    /// the largest immediate gain. Leaves `assign` and `used` cleared.
    fn greedy(&mut self) -> (usize, Vec<u32>) {
        let mut score = 0;
        for depth in 0..self.assign.len() {
            let mut pick: Option<(usize, u32)> = None;
            for c in self.options(depth) {
                self.set(depth, c);
                let g = self.gained(depth);
                self.unset(depth);
                if pick.is_none_or(|(best, _)| g > best) {
                    pick = Some((g, c));
                }
            }
            let pick = pick.expect("unmapped is always an option");
            self.set(depth, pick.1);
            score += pick.0;
        }
        let assign = self.assign.clone();
        for depth in 0..assign.len() {
            self.unset(depth);
        }
        (score, assign)
    }

    /// Depth-first in candidate order, so the first leaf of a given score is
    /// the lexicographically smallest one.
    fn run(&mut self, depth: usize, score: usize) {
        self.nodes += 1;
        if depth == self.assign.len() {
            let better = match &self.best {
                None => true,
                Some((b, _)) => score > *b || (self.seeded && score == *b),
            };
            if better {
                self.best = Some((score, self.assign.clone()));
                self.seeded = false;
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            // A seeded incumbent only stands in until the search reaches its
            // score, so branches that merely tie it stay open.
            let target = if self.seeded { *b } else { b + 1 };
            if self.nodes > self.max_nodes || !self.can_reach(depth, score, target) {
                return;
            }
        }
        for c in self.options(depth) {
            self.set(depth, c);
            let gained = self.gained(depth);
            self.run(depth + 1, score + gained);
            self.unset(depth);
        }
    }
}

/// The injective, type- and feature-compatible mapping with the highest
/// score; ties go to the first mapping in sorted candidate order.
pub fn best_mapping(case: &CaseFile, problem: &PlanningProblem, config: &MappingConfig) -> MappingResult {
    let cand_map = candidates(case, problem, config.features);
    let vars: Vec<Symbol> = cand_map.keys().cloned().collect();
    let var_index: HashMap<&Symbol, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let all_objects: Vec<Symbol> = problem.all_objects().into_keys().collect();
    let obj_index: HashMap<&Symbol, u32> = all_objects.iter().enumerate().map(|(i, o)| (o, i as u32)).collect();
    let mut preds: HashMap<Symbol, u32> = HashMap::new();
    let mut pred_id = |p: &Symbol| {
        let n = preds.len() as u32;
        *preds.entry(p.clone()).or_insert(n)
    };

    let mut targets: HashMap<(bool, u32), Vec<Vec<u32>>> = HashMap::new();
    let mut target_sets: [std::collections::HashSet<(u32, Vec<u32>)>; 2] = Default::default();
    for (goal, state) in [(false, &problem.init), (true, &problem.goal)] {
        for atom in state {
            let pid = pred_id(&atom.predicate);
            let ids: Vec<u32> = atom.args.iter().map(|a| obj_index[a]).collect();
            targets.entry((goal, pid)).or_default().push(ids.clone());
            target_sets[goal as usize].insert((pid, ids));
        }
    }

    let mut fixed_score = 0;
    let mut atoms = Vec::new();
    for (goal, state) in [(false, &case.init), (true, &case.goal)] {
        'atoms: for atom in state {
            let pid = pred_id(&atom.predicate);
            let mut args = Vec::with_capacity(atom.args.len());
            let mut decided_at = 0;
            for a in &atom.args {
                if let Some(&v) = var_index.get(a) {
                    decided_at = decided_at.max(v + 1);
                    args.push(Arg::Var(v));
                } else if problem.domain.constants.contains_key(a) {
                    args.push(Arg::Fixed(obj_index[a]));
                } else {
                    continue 'atoms;
                }
            }
            if decided_at == 0 {
                let ids: Vec<u32> = args
                    .iter()
                    .map(|a| match a {
                        Arg::Fixed(id) => *id,
                        Arg::Var(_) => unreachable!(),
                    })
                    .collect();
                if target_sets[goal as usize].contains(&(pid, ids)) {
                    fixed_score += 1;
                }
                continue;
            }
            atoms.push(CaseAtom {
                pred: pid,
                args,
                goal,
                decided_at,
            });
        }
    }
    let mut by_depth = vec![Vec::new(); vars.len() + 1];
    for (i, a) in atoms.iter().enumerate() {
        by_depth[a.decided_at].push(i);
    }
    let cands: Vec<Vec<u32>> = vars
        .iter()
        .map(|v| cand_map[v].iter().map(|o| obj_index[o]).collect())
        .collect();

    let mut search = Search {
        atoms,
        targets,
        target_sets,
        cands,
        by_depth,
        assign: vec![UNMAPPED; vars.len()],
        used: vec![false; all_objects.len()],
        best: None,
        seeded: true,
        nodes: 0,
        max_nodes: config.max_nodes,
    };
    search.best = Some(search.greedy());
    search.run(0, 0);
    let exact = search.nodes <= search.max_nodes;
    let (score, assign) = search.best.expect("seeded before the search");
    let mut mapping = ObjectMapping::new();
    for (v, id) in vars.iter().zip(assign) {
        if id != UNMAPPED {
            mapping.insert(v.clone(), all_objects[id as usize].clone());
        }
    }
    MappingResult {
        mapping,
        score: score + fixed_score,
        exact,
    }
}

/// A contiguous run of a mapped case plan over problem objects only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fragment {
    pub actions: Vec<GroundAction>,
    pub source_case: String,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.actions.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Maximal runs of the mapped case plan whose actions mention only mapped
/// objects (or domain constants). Any other action splits the runs.
pub fn extract_fragments(case: &CaseFile, m: &ObjectMapping, problem: &PlanningProblem) -> Vec<Fragment> {
    let mut out = Vec::new();
    let mut run: Vec<GroundAction> = Vec::new();
    for action in case.plan.iter() {
        match m.apply_action(action, problem) {
            Some(a) => run.push(a),
            None => {
                if !run.is_empty() {
                    out.push(Fragment {
                        actions: std::mem::take(&mut run),
                        source_case: case.id.clone(),
                    });
                }
            }
        }
    }
    if !run.is_empty() {
        out.push(Fragment {
            actions: run,
            source_case: case.id.clone(),
        });
    }
    out
}

/// Best mapping and fragments for every case of a library.
pub fn build_fragments(cases: &[CaseFile], problem: &PlanningProblem, config: &MappingConfig) -> Vec<Fragment> {
    cases
        .iter()
        .flat_map(|c| {
            let m = best_mapping(c, problem, config);
            extract_fragments(c, &m.mapping, problem)
        })
        .collect()
}
