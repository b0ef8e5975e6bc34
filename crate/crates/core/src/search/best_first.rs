use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::lnf::RelevanceSet;
use crate::model::{ActionId, GroundTask, State};
use crate::rational::{ExtRational, Rational};

use super::ehc::applicable;
use super::heuristic::Heuristic;
use super::visited::VisitedTable;
use super::{SearchError, SearchStats};

pub(crate) struct BestFirst<'h, 'a> {
    pub heuristic: &'h Heuristic<'a>,
    pub rv: &'h RelevanceSet,
    pub w_g: Rational,
    pub w_h: Rational,
    /// Per-action costs for `g`; `None` counts every step as zero.
    pub costs: Option<&'h [Rational]>,
    pub max_expansions: usize,
    /// Test the goal when a node is generated rather than when it is expanded.
    pub early_goal: bool,
}

struct Node {
    state: State,
    parent: Option<usize>,
    action: Option<ActionId>,
    g: Rational,
}

fn path(nodes: &[Node], mut i: usize) -> Vec<ActionId> {
    let mut out = Vec::new();
    while let (Some(a), Some(p)) = (nodes[i].action, nodes[i].parent) {
        out.push(a);
        i = p;
    }
    out.reverse();
    out
}

impl BestFirst<'_, '_> {
    fn finite(h: &ExtRational) -> Option<Rational> {
        h.finite().cloned()
    }

    pub fn run(&self, start: &State, stats: &mut SearchStats) -> Result<Vec<ActionId>, SearchError> {
        let t = self.heuristic.task();
        if t.goal_holds(start) {
            return Ok(Vec::new());
        }
        let root_eval = self.heuristic.evaluate(start);
        stats.evaluations += 1;
        let Some(h0) = Self::finite(&root_eval.h) else {
            return Err(SearchError::DeadEnd);
        };
        let zero = Rational::zero();
        let mut visited = VisitedTable::new(self.rv);
        visited.insert(start.clone(), zero.clone());
        let mut nodes = vec![Node { state: start.clone(), parent: None, action: None, g: zero.clone() }];
        let mut open = BinaryHeap::new();
        let mut seq = 0u64;
        open.push(Reverse((&self.w_h * &h0, h0, seq, 0usize)));
        let mut expansions = 0usize;
        while let Some(Reverse((_, _, _, i))) = open.pop() {
            if !self.early_goal && t.goal_holds(&nodes[i].state) {
                return Ok(path(&nodes, i));
            }
            if expansions >= self.max_expansions {
                return Err(SearchError::ExpansionCap);
            }
            expansions += 1;
            stats.expansions += 1;
            let s = nodes[i].state.clone();
            for a in applicable(t, &s) {
                let Ok(next) = t.apply(&s, a) else { continue };
                let g = match self.costs {
                    Some(c) => &nodes[i].g + &c[a.0],
                    None => zero.clone(),
                };
                if visited.dominates(&next, &g) {
                    continue;
                }
                visited.insert(next.clone(), g.clone());
                if self.early_goal && t.goal_holds(&next) {
                    nodes.push(Node { state: next, parent: Some(i), action: Some(a), g });
                    return Ok(path(&nodes, nodes.len() - 1));
                }
                let e = self.heuristic.evaluate(&next);
                stats.evaluations += 1;
                let Some(h) = Self::finite(&e.h) else { continue };
                let f = &self.w_g * &g + &self.w_h * &h;
                nodes.push(Node { state: next, parent: Some(i), action: Some(a), g });
                seq += 1;
                open.push(Reverse((f, h, seq, nodes.len() - 1)));
            }
        }
        Err(SearchError::Exhausted)
    }
}
