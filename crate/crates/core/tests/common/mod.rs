#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use fragplan_core::pddl::{parse_domain, parse_problem};
use fragplan_core::{DomainModel, GroundAction, GroundAtom, PlanningProblem, State, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;

pub const BLOCKS: &str = include_str!("../../fixtures/blocks/domain.pddl");
pub const BLOCKS_INCOMPLETE: &str = include_str!("../../fixtures/blocks/domain-incomplete.pddl");
pub const TOWER: &str = include_str!("../../fixtures/blocks/tower.pddl");
pub const P1: &str = include_str!("../../fixtures/blocks/cases/p1.case");
pub const P2: &str = include_str!("../../fixtures/blocks/cases/p2.case");

pub fn domain(text: &str) -> Arc<DomainModel> {
    Arc::new(parse_domain(text).unwrap())
}

pub fn tower(domain_text: &str) -> PlanningProblem {
    parse_problem(TOWER, domain(domain_text)).unwrap()
}

pub fn act(s: &str) -> GroundAction {
    let mut it = s.split_whitespace();
    GroundAction::new(it.next().unwrap(), it)
}

pub fn seq(s: &str) -> Vec<GroundAction> {
    s.split(',').map(act).collect()
}

/// Random stacks of `n` blocks named `{prefix}0..`, hand empty.
pub fn random_towers<R: Rng>(n: usize, prefix: &str, rng: &mut R) -> State {
    let mut blocks: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    blocks.shuffle(rng);
    let mut s = State::new();
    s.insert(GroundAtom::new("handempty", Vec::<&str>::new()));
    for (i, b) in blocks.iter().enumerate() {
        let below = i.checked_sub(1).map(|j| blocks[j].as_str());
        match below {
            Some(y) if rng.gen_bool(0.5) => s.insert(GroundAtom::new("on", [b.as_str(), y])),
            Some(y) => {
                // `y` tops the tower just finished.
                s.insert(GroundAtom::new("clear", [y]));
                s.insert(GroundAtom::new("ontable", [b.as_str()]))
            }
            None => s.insert(GroundAtom::new("ontable", [b.as_str()])),
        };
    }
    if let Some(top) = blocks.last() {
        s.insert(GroundAtom::new("clear", [top.as_str()]));
    }
    s
}

pub fn blocks_problem(model: Arc<DomainModel>, n: usize, prefix: &str, init: State, goal: State) -> PlanningProblem {
    let objects: BTreeMap<Symbol, Symbol> = (0..n)
        .map(|i| (Symbol::from(format!("{prefix}{i}")), Symbol::from("object")))
        .collect();
    PlanningProblem::new("random", model, objects, init, goal).unwrap()
}
