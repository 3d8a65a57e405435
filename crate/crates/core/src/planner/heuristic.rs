use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::task::{AtomId, BitState, Task};

/// Additive delete-relaxation estimate with unit action costs.
///
/// Returns `None` when some goal atom is unreachable even when deletes are
/// ignored, which proves the goal unreachable from `state`.
pub fn h_add(task: &Task, state: &BitState, goal: &[AtomId]) -> Option<u64> {
    const INF: u64 = u64::MAX;
    if state.has_all(goal) {
        return Some(0);
    }
    let n = task.atoms.len();
    let mut cost = vec![INF; n];
    let mut done = vec![false; n];
    let mut missing: Vec<u32> = task.actions.iter().map(|a| a.pre.len() as u32).collect();
    let mut pre_sum = vec![0u64; task.actions.len()];
    let mut heap = BinaryHeap::new();
    for a in 0..n as AtomId {
        if state.has(a) {
            cost[a as usize] = 0;
            heap.push(Reverse((0u64, a)));
        }
    }
    let relax = |action: usize, total: u64, cost: &mut Vec<u64>, heap: &mut BinaryHeap<Reverse<(u64, AtomId)>>| {
        let c = total + 1;
        for &q in &task.actions[action].add {
            if c < cost[q as usize] {
                cost[q as usize] = c;
                heap.push(Reverse((c, q)));
            }
        }
    };
    for &a in &task.free_actions {
        relax(a as usize, 0, &mut cost, &mut heap);
    }
    let mut remaining_goals = goal.iter().filter(|&&g| !state.has(g)).count();
    while let Some(Reverse((c, atom))) = heap.pop() {
        if done[atom as usize] || c > cost[atom as usize] {
            continue;
        }
        done[atom as usize] = true;
        if goal.contains(&atom) && c > 0 {
            remaining_goals -= 1;
            if remaining_goals == 0 {
                break;
            }
        }
        for &act in &task.consumers[atom as usize] {
            let act = act as usize;
            missing[act] -= 1;
            pre_sum[act] = pre_sum[act].saturating_add(c);
            if missing[act] == 0 {
                relax(act, pre_sum[act], &mut cost, &mut heap);
            }
        }
    }
    let mut h = 0u64;
    for &g in goal {
        let c = cost[g as usize];
        if c == INF {
            return None;
        }
        h = h.saturating_add(c);
    }
    Some(h)
}

pub fn goal_count(state: &BitState, goal: &[AtomId]) -> u64 {
    goal.iter().filter(|&&g| !state.has(g)).count() as u64
}
