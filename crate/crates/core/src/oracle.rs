//! Slow, obviously-correct reference implementations used to check the fast
//! ones.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::exec::ground;
use crate::mapping::{candidates, mapping_score, FeatureMatch, ObjectMapping};
use crate::mining::{contains_run, support, SequenceDB};
use crate::model::{DomainModel, Plan, PlanningProblem, State};
use crate::pddl::CaseFile;
use crate::planner::{PlannerError, SolveOutcome, Task};
use crate::skeletal::{CausalPair, CausalPairSet};
use crate::symbol::Symbol;

/// Maximal frequent patterns by enumerating every window of every entry.
pub fn mine_by_windows<T: Ord + Clone>(db: &SequenceDB<T>, delta: usize) -> BTreeSet<Vec<T>> {
    let mut windows: BTreeSet<Vec<T>> = BTreeSet::new();
    for (_, s) in db.entries() {
        for i in 0..s.len() {
            for j in i + 1..=s.len() {
                windows.insert(s[i..j].to_vec());
            }
        }
    }
    let frequent: Vec<Vec<T>> = windows.into_iter().filter(|w| support(db, w) >= delta.max(1)).collect();
    frequent
        .iter()
        .filter(|p| !frequent.iter().any(|q| q.len() > p.len() && contains_run(q, p)))
        .cloned()
        .collect()
}

/// Highest mapping score over every injective assignment of each case object
/// to one of its candidates or to nothing.
pub fn best_score_exhaustive(case: &CaseFile, problem: &PlanningProblem, features: FeatureMatch) -> usize {
    let cands: Vec<(Symbol, Vec<Symbol>)> = candidates(case, problem, features).into_iter().collect();
    fn go(
        i: usize,
        cands: &[(Symbol, Vec<Symbol>)],
        m: &mut ObjectMapping,
        case: &CaseFile,
        problem: &PlanningProblem,
    ) -> usize {
        if i == cands.len() {
            return mapping_score(case, m, problem);
        }
        let mut best = go(i + 1, cands, m, case, problem);
        for c in &cands[i].1 {
            let mut next = m.clone();
            if next.insert(cands[i].0.clone(), c.clone()) {
                best = best.max(go(i + 1, cands, &mut next, case, problem));
            }
        }
        best
    }
    go(0, &cands, &mut ObjectMapping::new(), case, problem)
}

/// Causal pairs by checking every `(i, j, q)` triple directly. Returns `None`
/// if the plan does not execute.
pub fn causal_pairs_by_triples(plan: &Plan, model: &DomainModel, s0: &State) -> Option<CausalPairSet> {
    let g: Vec<_> = plan.iter().map(|a| ground(a, model).ok()).collect::<Option<_>>()?;
    let mut state = s0.clone();
    for a in &g {
        if !a.is_applicable(&state) {
            return None;
        }
        state = a.successor(&state);
    }
    let mut out = CausalPairSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            if g[i].action == g[j].action {
                continue;
            }
            let linked = g[i]
                .add
                .iter()
                .filter(|q| g[j].pre.contains(q))
                .any(|q| (i + 1..j).all(|k| !(g[k].del.contains(q) && !g[k].add.contains(q))));
            if linked {
                out.insert(CausalPair::new(g[i].action.clone(), g[j].action.clone()));
            }
        }
    }
    Some(out)
}

/// Shortest plan by breadth-first search over the grounded task, giving up
/// after `max_states` states.
pub fn bfs_plan(problem: &PlanningProblem, max_states: usize) -> Result<SolveOutcome, PlannerError> {
    let task = Task::new(problem, usize::MAX)?;
    if task.init.has_all(&task.goal) {
        return Ok(SolveOutcome::Solved(Plan::default()));
    }
    let mut parents: Vec<(usize, usize)> = vec![(usize::MAX, 0)];
    let mut states = vec![task.init.clone()];
    let mut seen = HashSet::new();
    seen.insert(task.init.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(at) = queue.pop_front() {
        for a in task.applicable_actions(&states[at]) {
            let next = task.successor(&states[at], a);
            if !seen.insert(next.clone()) {
                continue;
            }
            states.push(next);
            parents.push((at, a));
            let id = states.len() - 1;
            if states[id].has_all(&task.goal) {
                let mut actions = Vec::new();
                let mut cur = id;
                while parents[cur].0 != usize::MAX {
                    actions.push(task.actions[parents[cur].1].action.clone());
                    cur = parents[cur].0;
                }
                actions.reverse();
                return Ok(SolveOutcome::Solved(Plan::new(actions)));
            }
            if states.len() > max_states {
                return Ok(SolveOutcome::BudgetExhausted);
            }
            queue.push_back(id);
        }
    }
    Ok(SolveOutcome::Unsolvable)
}
