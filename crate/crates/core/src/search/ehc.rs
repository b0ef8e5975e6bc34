use std::collections::VecDeque;

use num_traits::Zero;

use crate::lnf::{LnfTask, RelevanceSet};
use crate::model::{ActionId, GroundTask, State};
use crate::rational::Rational;

use super::heuristic::{Evaluation, Heuristic};
use super::visited::VisitedTable;
use super::{SearchError, SearchStats};

/// Where enforced hill-climbing got stuck.
#[derive(Clone, Debug)]
pub struct EhcFailure {
    pub error: SearchError,
    pub state: State,
    pub eval: Evaluation,
    /// Steps leading from the start to `state`.
    pub prefix: Vec<ActionId>,
}

struct Node {
    state: State,
    parent: usize,
    action: Option<ActionId>,
    eval: Evaluation,
}

pub(crate) fn applicable(t: &LnfTask, s: &State) -> Vec<ActionId> {
    t.actions.iter().filter(|a| t.applicable(s, a)).map(|a| a.id).collect()
}

fn successors(h: &Heuristic, s: &State, eval: &Evaluation, prune: bool) -> Vec<ActionId> {
    if prune {
        h.helpful(s, eval)
    } else {
        applicable(h.task(), s)
    }
}

/// Repeated breadth-first searches for a strictly better state, starting from
/// `start` after `prefix` has been executed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn ehc_from(
    h: &Heuristic,
    rv: &RelevanceSet,
    start: State,
    start_eval: Evaluation,
    mut prefix: Vec<ActionId>,
    prune: bool,
    stats: &mut SearchStats,
    max_expansions: usize,
) -> Result<Vec<ActionId>, Box<EhcFailure>> {
    let t = h.task();
    let zero = Rational::zero();
    let mut current = start;
    let mut current_eval = start_eval;
    let mut expansions = 0usize;
    loop {
        if t.goal_holds(&current) {
            return Ok(prefix);
        }
        if current_eval.is_dead_end() {
            return Err(Box::new(EhcFailure { error: SearchError::DeadEnd, state: current, eval: current_eval, prefix }));
        }
        let mut visited = VisitedTable::new(rv);
        visited.insert(current.clone(), zero.clone());
        let mut arena =
            vec![Node { state: current.clone(), parent: 0, action: None, eval: current_eval.clone() }];
        let mut queue = VecDeque::from([0usize]);
        let mut better = None;
        'bfs: while let Some(i) = queue.pop_front() {
            if expansions >= max_expansions {
                return Err(Box::new(EhcFailure {
                    error: SearchError::ExpansionCap,
                    state: current,
                    eval: current_eval,
                    prefix,
                }));
            }
            expansions += 1;
            stats.expansions += 1;
            for a in successors(h, &arena[i].state, &arena[i].eval, prune) {
                let Ok(next) = t.apply(&arena[i].state, a) else { continue };
                if visited.dominates(&next, &zero) {
                    continue;
                }
                visited.insert(next.clone(), zero.clone());
                let eval = h.evaluate(&next);
                stats.evaluations += 1;
                let improves = eval.h < current_eval.h;
                let dead = eval.is_dead_end();
                arena.push(Node { state: next, parent: i, action: Some(a), eval });
                let idx = arena.len() - 1;
                if improves {
                    better = Some(idx);
                    break 'bfs;
                }
                if !dead {
                    queue.push_back(idx);
                }
            }
        }
        let Some(mut idx) = better else {
            return Err(Box::new(EhcFailure { error: SearchError::Exhausted, state: current, eval: current_eval, prefix }));
        };
        let mut segment = Vec::new();
        while let Some(a) = arena[idx].action {
            segment.push(a);
            idx = arena[idx].parent;
        }
        segment.reverse();
        prefix.extend(segment);
        let found = arena.swap_remove(better.unwrap());
        current = found.state;
        current_eval = found.eval;
    }
}
