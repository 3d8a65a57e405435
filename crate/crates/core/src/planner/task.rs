//! Grounded, integer-indexed view of a planning problem.

use std::collections::{BTreeSet, HashMap};

use crate::model::{GroundAction, GroundAtom, PlanningProblem, State, Term};
use crate::symbol::Symbol;

use super::PlannerError;

pub type AtomId = u32;

/// Fixed-width bitset over the task's atoms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitState(Box<[u64]>);

impl BitState {
    fn empty(n_atoms: usize) -> Self {
        BitState(vec![0; n_atoms.div_ceil(64)].into_boxed_slice())
    }

    #[inline]
    pub fn has(&self, a: AtomId) -> bool {
        self.0[(a / 64) as usize] & (1 << (a % 64)) != 0
    }

    #[inline]
    fn set(&mut self, a: AtomId) {
        self.0[(a / 64) as usize] |= 1 << (a % 64);
    }

    #[inline]
    fn clear(&mut self, a: AtomId) {
        self.0[(a / 64) as usize] &= !(1 << (a % 64));
    }

    pub fn has_all(&self, atoms: &[AtomId]) -> bool {
        atoms.iter().all(|&a| self.has(a))
    }
}

#[derive(Debug, Clone)]
pub struct TaskAction {
    pub action: GroundAction,
    pub pre: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
}

/// All type-correct ground actions of a problem that are not ruled out by a
/// never-added precondition that is false initially. Actions are sorted by
/// ground-action order, which is the search's tie-breaking order.
#[derive(Debug, Clone)]
pub struct Task {
    pub atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
    pub actions: Vec<TaskAction>,
    /// For each atom, the actions that have it as a precondition.
    pub(crate) consumers: Vec<Vec<u32>>,
    /// Actions with an empty precondition.
    pub(crate) free_actions: Vec<u32>,
    pub init: BitState,
    pub goal: Vec<AtomId>,
}

impl Task {
    pub fn new(problem: &PlanningProblem, max_actions: usize) -> Result<Self, PlannerError> {
        let model = &problem.domain;
        let objects = problem.all_objects();
        let added: BTreeSet<&Symbol> = model
            .schemas()
            .iter()
            .flat_map(|s| s.add.iter().map(|a| &a.predicate))
            .collect();

        let mut ground = Vec::new();
        for schema in model.schemas() {
            let candidates: Vec<Vec<Symbol>> = schema
                .params
                .iter()
                .map(|p| {
                    objects
                        .iter()
                        .filter(|(_, t)| model.types.is_subtype(t, &p.ty))
                        .map(|(o, _)| o.clone())
                        .collect()
                })
                .collect();
            // Preconditions that can never become true unless already in init,
            // keyed by the last parameter they mention.
            let mut checks: Vec<Vec<usize>> = vec![Vec::new(); schema.params.len() + 1];
            for (i, atom) in schema.pre.iter().enumerate() {
                if added.contains(&atom.predicate) {
                    continue;
                }
                let last = atom
                    .args
                    .iter()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v + 1),
                        Term::Const(_) => None,
                    })
                    .max()
                    .unwrap_or(0);
                checks[last].push(i);
            }
            let mut args = Vec::with_capacity(schema.params.len());
            let mut out_of_budget = false;
            enumerate(
                &candidates,
                &mut args,
                &mut |args: &[Symbol]| {
                    checks[args.len()]
                        .iter()
                        .all(|&i| problem.init.contains(&schema.pre[i].ground(args)))
                },
                &mut |args: Vec<Symbol>| {
                    if ground.len() >= max_actions {
                        out_of_budget = true;
                        return false;
                    }
                    ground.push((schema, args));
                    true
                },
            );
            if out_of_budget {
                return Err(PlannerError::GroundingLimit { limit: max_actions });
            }
        }

        let mut task = Task {
            atoms: Vec::new(),
            index: HashMap::new(),
            actions: Vec::with_capacity(ground.len()),
            consumers: Vec::new(),
            free_actions: Vec::new(),
            init: BitState::empty(0),
            goal: Vec::new(),
        };
        for (schema, args) in ground {
            let ids = |list: &[crate::model::Atom], task: &mut Task| -> Vec<AtomId> {
                let mut v: Vec<AtomId> = list.iter().map(|a| task.intern(a.ground(&args))).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let pre = ids(&schema.pre, &mut task);
            let add = ids(&schema.add, &mut task);
            let mut del = ids(&schema.del, &mut task);
            // Instantiation can make an add and a delete coincide; add wins.
            del.retain(|d| !add.contains(d));
            task.actions.push(TaskAction {
                action: GroundAction {
                    name: schema.name.clone(),
                    args: args.clone(),
                },
                pre,
                add,
                del,
            });
        }
        for a in problem.init.iter().chain(problem.goal.iter()) {
            task.intern(a.clone());
        }
        task.goal = problem.goal.iter().map(|a| task.index[a]).collect();
        task.actions.sort_by(|a, b| a.action.cmp(&b.action));
        task.init = task.encode(&problem.init).expect("init atoms are interned");
        task.consumers = vec![Vec::new(); task.atoms.len()];
        for (i, a) in task.actions.iter().enumerate() {
            if a.pre.is_empty() {
                task.free_actions.push(i as u32);
            }
            for &p in &a.pre {
                task.consumers[p as usize].push(i as u32);
            }
        }
        Ok(task)
    }

    fn intern(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    /// Bitset for `state`, or `None` if it mentions an atom unknown to the task.
    pub fn encode(&self, state: &State) -> Option<BitState> {
        let mut bits = BitState::empty(self.atoms.len());
        for a in state {
            bits.set(self.atom_id(a)?);
        }
        Some(bits)
    }

    pub fn decode(&self, bits: &BitState) -> State {
        (0..self.atoms.len() as AtomId)
            .filter(|&a| bits.has(a))
            .map(|a| self.atoms[a as usize].clone())
            .collect()
    }

    #[inline]
    pub fn applicable(&self, state: &BitState, action: usize) -> bool {
        state.has_all(&self.actions[action].pre)
    }

    pub fn successor(&self, state: &BitState, action: usize) -> BitState {
        let a = &self.actions[action];
        let mut next = state.clone();
        for &d in &a.del {
            next.clear(d);
        }
        for &d in &a.add {
            next.set(d);
        }
        next
    }

    /// Indices of actions applicable in `state`, in ground-action order.
    pub fn applicable_actions(&self, state: &BitState) -> Vec<usize> {
        (0..self.actions.len()).filter(|&i| self.applicable(state, i)).collect()
    }
}

/// Depth-first cartesian product with a prefix filter. `emit` returning false
/// stops the enumeration.
fn enumerate(
    candidates: &[Vec<Symbol>],
    prefix: &mut Vec<Symbol>,
    keep: &mut dyn FnMut(&[Symbol]) -> bool,
    emit: &mut dyn FnMut(Vec<Symbol>) -> bool,
) -> bool {
    if !keep(prefix) {
        return true;
    }
    if prefix.len() == candidates.len() {
        return emit(prefix.clone());
    }
    for c in &candidates[prefix.len()] {
        prefix.push(c.clone());
        let go_on = enumerate(candidates, prefix, keep, emit);
        prefix.pop();
        if !go_on {
            return false;
        }
    }
    true
}
