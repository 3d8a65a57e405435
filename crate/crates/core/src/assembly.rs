//! Stitching frequent fragments into a plan along the causal pairs.

use std::collections::BTreeSet;

use crate::exec::{execute_from, ground};
use crate::model::{DomainModel, GroundAction, Plan, PlanningProblem, State};
use crate::skeletal::{CausalPair, CausalPairSet};

pub const DEFAULT_MAX_NODES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyConfig {
    /// Recursive calls before the search gives up.
    pub max_nodes: usize,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Longest `k >= 1` such that the last `k` actions of `a` are the first `k`
/// of `b`; 0 if none.
fn end_overlap(a: &[GroundAction], b: &[GroundAction]) -> usize {
    (1..=a.len().min(b.len()))
        .rev()
        .find(|&k| a[a.len() - k..] == b[..k])
        .unwrap_or(0)
}

pub fn share(partial: &[GroundAction], f: &[GroundAction]) -> bool {
    partial.is_empty() || end_overlap(partial, f) > 0 || end_overlap(f, partial) > 0
}

/// Merges `f` into `partial` on their longest end overlap, preferring to
/// append at the end on ties. `None` if they do not share.
pub fn append(partial: &[GroundAction], f: &[GroundAction]) -> Option<Vec<GroundAction>> {
    if partial.is_empty() {
        return Some(f.to_vec());
    }
    let back = end_overlap(partial, f);
    let front = end_overlap(f, partial);
    if back == 0 && front == 0 {
        return None;
    }
    let merged = if back >= front {
        partial.iter().chain(&f[back..]).cloned().collect()
    } else {
        f[..f.len() - front].iter().chain(partial).cloned().collect()
    };
    Some(merged)
}

fn satisfied(partial: &[GroundAction], pair: &CausalPair) -> bool {
    let first_provider = partial.iter().position(|a| *a == pair.provider);
    let last_consumer = partial.iter().rposition(|a| *a == pair.consumer);
    matches!((first_provider, last_consumer), (Some(i), Some(j)) if i < j)
}

/// Pairs not yet satisfied by `partial`, i.e. without some occurrence of the
/// provider before some occurrence of the consumer.
pub fn removelinks(partial: &[GroundAction], pairs: &CausalPairSet) -> CausalPairSet {
    pairs.iter().filter(|p| !satisfied(partial, p)).cloned().collect()
}

fn deletes_goal(model: &DomainModel, action: &GroundAction, goal: &State) -> bool {
    match ground(action, model) {
        Ok(g) => g.del.iter().any(|d| goal.contains(d) && !g.add.contains(d)),
        Err(_) => false,
    }
}

/// Drops actions that cannot be applied (re-simulating from `init` after
/// each removal) and then trailing actions that delete a goal atom.
pub fn trim(plan: &[GroundAction], model: &DomainModel, init: &State, goal: &State) -> Vec<GroundAction> {
    let mut plan = plan.to_vec();
    'restart: loop {
        let mut state = init.clone();
        for i in 0..plan.len() {
            match ground(&plan[i], model) {
                Ok(g) if g.is_applicable(&state) => state = g.successor(&state),
                _ => {
                    plan.remove(i);
                    continue 'restart;
                }
            }
        }
        break;
    }
    while plan.last().is_some_and(|a| deletes_goal(model, a, goal)) {
        plan.pop();
    }
    plan
}

/// Statistics of one [`concat_frag`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub nodes: usize,
    pub leaves: usize,
    pub budget_exhausted: bool,
}

struct Assembler<'a> {
    problem: &'a PlanningProblem,
    frags: Vec<&'a [GroundAction]>,
    /// Per fragment, its distinct actions.
    members: Vec<BTreeSet<&'a GroundAction>>,
    available: Vec<bool>,
    max_nodes: usize,
    stats: AssemblyStats,
}

impl Assembler<'_> {
    fn leaf(&mut self, partial: &[GroundAction]) -> Option<Plan> {
        self.stats.leaves += 1;
        let p = &self.problem;
        let plan = Plan::new(trim(partial, &p.domain, &p.init, &p.goal));
        execute_from(&p.domain, &p.init, &p.goal, &plan)
            .is_success()
            .then_some(plan)
    }

    // `f` indexes four parallel per-fragment vectors.
    #[allow(clippy::needless_range_loop)]
    fn run(&mut self, partial: &[GroundAction], pairs: &CausalPairSet) -> Option<Plan> {
        if self.stats.nodes >= self.max_nodes {
            self.stats.budget_exhausted = true;
            return None;
        }
        self.stats.nodes += 1;
        if pairs.is_empty() {
            return self.leaf(partial);
        }
        // A fragment's subtree does not depend on the pair that selected it.
        let mut tried = vec![false; self.frags.len()];
        for pair in pairs {
            for f in 0..tried.len() {
                if tried[f] || !self.available[f] {
                    continue;
                }
                let m = &self.members[f];
                if !(m.contains(&pair.provider) || m.contains(&pair.consumer)) {
                    continue;
                }
                let Some(next) = append(partial, self.frags[f]) else {
                    continue;
                };
                tried[f] = true;
                let rest = removelinks(&next, pairs);
                self.available[f] = false;
                let found = self.run(&next, &rest);
                self.available[f] = true;
                if found.is_some() {
                    return found;
                }
                if self.stats.budget_exhausted {
                    return None;
                }
            }
        }
        None
    }
}

/// Depth-first search for a plan built from `frags` that satisfies every
/// causal pair and, once trimmed, executes and reaches the goal under the
/// problem's model. Fragments are tried longest first, then lexicographically.
pub fn concat_frag(
    problem: &PlanningProblem,
    pairs: &CausalPairSet,
    frags: &[Vec<GroundAction>],
    config: &AssemblyConfig,
) -> (Option<Plan>, AssemblyStats) {
    let mut order: Vec<&[GroundAction]> = frags.iter().map(Vec::as_slice).collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    order.dedup();
    let mut asm = Assembler {
        problem,
        members: order.iter().map(|f| f.iter().collect()).collect(),
        available: vec![true; order.len()],
        frags: order,
        max_nodes: config.max_nodes.max(1),
        stats: AssemblyStats::default(),
    };
    let plan = asm.run(&[], pairs);
    (plan, asm.stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};
    use std::sync::Arc;

    fn act(s: &str) -> GroundAction {
        let mut it = s.split_whitespace();
        GroundAction::new(it.next().unwrap(), it)
    }

    fn seq(s: &str) -> Vec<GroundAction> {
        s.split(',').map(act).collect()
    }

    fn partial_tower() -> PlanningProblem {
        let d = Arc::new(parse_domain(include_str!("../fixtures/blocks/domain-incomplete.pddl")).unwrap());
        parse_problem(include_str!("../fixtures/blocks/tower.pddl"), d).unwrap()
    }

    fn frag1() -> Vec<GroundAction> {
        seq("pickup b,stack b a,pickup c,stack c b,pickup d,stack d c")
    }

    fn frag2() -> Vec<GroundAction> {
        seq("unstack b c,putdown b,unstack c a,putdown c,pickup b,stack b a,pickup c,stack c b")
    }

    fn pairs() -> CausalPairSet {
        [
            CausalPair::new(act("pickup b"), act("stack b a")),
            CausalPair::new(act("unstack c a"), act("stack c b")),
            CausalPair::new(act("pickup d"), act("stack d c")),
        ]
        .into()
    }

    const MERGED: &str =
        "unstack b c,putdown b,unstack c a,putdown c,pickup b,stack b a,pickup c,stack c b,pickup d,stack d c";
    const SOLUTION: &str = "unstack c a,putdown c,pickup b,stack b a,pickup c,stack c b,pickup d,stack d c";

    #[test]
    fn overlap_merge() {
        assert!(share(&frag2(), &frag1()));
        assert!(share(&[], &frag1()));
        assert!(!share(&seq("pickup a"), &seq("pickup b")));
        assert_eq!(append(&frag2(), &frag1()).unwrap(), seq(MERGED));
        // Prepending yields the same plan.
        assert_eq!(append(&frag1(), &frag2()).unwrap(), seq(MERGED));
        assert_eq!(append(&[], &frag1()).unwrap(), frag1());
        assert_eq!(append(&seq("pickup a"), &seq("pickup b")), None);
    }

    #[test]
    fn contained_suffix_is_idempotent() {
        let p = frag2();
        assert_eq!(append(&p, &p[5..]).unwrap(), p);
        assert_eq!(append(&p, &p[..3]).unwrap(), p);
    }

    #[test]
    fn ties_prefer_the_end() {
        // "a b" overlaps "b a" by one at both ends.
        let merged = append(&seq("pickup a,pickup b"), &seq("pickup b,pickup a")).unwrap();
        assert_eq!(merged, seq("pickup a,pickup b,pickup a"));
    }

    #[test]
    fn removelinks_semantics() {
        assert!(removelinks(&seq(MERGED), &pairs()).is_empty());
        assert_eq!(removelinks(&[], &pairs()), pairs());
        let backwards = seq("stack b a,pickup b");
        assert_eq!(removelinks(&backwards, &pairs()).len(), 3);
    }

    #[test]
    fn trim_running_example() {
        let p = partial_tower();
        assert_eq!(trim(&seq(MERGED), &p.domain, &p.init, &p.goal), seq(SOLUTION));
        assert_eq!(trim(&seq(SOLUTION), &p.domain, &p.init, &p.goal), seq(SOLUTION));
    }

    #[test]
    fn trim_drops_goal_deleting_tail() {
        let p = partial_tower();
        let mut plan = seq(SOLUTION);
        plan.push(act("unstack d c"));
        assert_eq!(trim(&plan, &p.domain, &p.init, &p.goal), seq(SOLUTION));
    }

    #[test]
    fn running_example_assembles() {
        let p = partial_tower();
        let (plan, stats) = concat_frag(&p, &pairs(), &[frag1(), frag2()], &AssemblyConfig::default());
        assert_eq!(plan.unwrap().actions, seq(SOLUTION));
        assert!(!stats.budget_exhausted);
    }

    #[test]
    fn goal_in_init_with_no_pairs() {
        let p = partial_tower();
        let p = p.with_goal(p.init.clone());
        let (plan, _) = concat_frag(&p, &CausalPairSet::new(), &[], &AssemblyConfig::default());
        assert_eq!(plan, Some(Plan::default()));
    }

    #[test]
    fn missing_fragment_fails() {
        // Without p2's fragment (on c a) is never undone.
        let p = partial_tower();
        let (plan, _) = concat_frag(&p, &pairs(), &[frag1()], &AssemblyConfig::default());
        assert_eq!(plan, None);
    }

    #[test]
    fn budget_is_respected() {
        let p = partial_tower();
        let cfg = AssemblyConfig { max_nodes: 1 };
        let (plan, stats) = concat_frag(&p, &pairs(), &[frag1(), frag2()], &cfg);
        assert_eq!(plan, None);
        assert!(stats.budget_exhausted);
    }
}
