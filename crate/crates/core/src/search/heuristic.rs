use num_traits::Zero;

use crate::lnf::LnfTask;
use crate::model::{ActionId, State};
use crate::rational::{int, ExtRational, Rational};
use crate::rpg::{helpful_actions, GraphBuilder, RelaxedPlan};

/// Result of one heuristic evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub h: ExtRational,
    pub plan: Option<RelaxedPlan>,
}

impl Evaluation {
    pub fn is_dead_end(&self) -> bool {
        self.h.is_pos_inf()
    }
}

/// Relaxed-plan heuristic. Without costs `h` is the number of selected
/// actions; with costs it is their summed cost plus `h_mix` times the count.
#[derive(Clone, Debug)]
pub struct Heuristic<'a> {
    builder: GraphBuilder<'a>,
    costs: Option<Vec<Rational>>,
    h_mix: Rational,
}

impl<'a> Heuristic<'a> {
    pub fn new(t: &'a LnfTask) -> Self {
        Heuristic { builder: GraphBuilder::new(t), costs: None, h_mix: Rational::zero() }
    }

    pub fn with_max_layers(mut self, cap: usize) -> Self {
        self.builder = self.builder.with_max_layers(cap);
        self
    }

    pub fn with_costs(mut self, costs: Vec<Rational>, h_mix: Rational) -> Self {
        self.costs = Some(costs);
        self.h_mix = h_mix;
        self
    }

    pub fn task(&self) -> &'a LnfTask {
        self.builder.task
    }

    pub fn builder(&self) -> &GraphBuilder<'a> {
        &self.builder
    }

    pub fn evaluate(&self, s: &State) -> Evaluation {
        let g = self.builder.build(s);
        let plan = match &self.costs {
            None => self.builder.extract(&g),
            Some(costs) => self.builder.extract_with_costs(&g, costs),
        };
        let Some(plan) = plan else {
            return Evaluation { h: ExtRational::PosInf, plan: None };
        };
        let h = match &self.costs {
            None => int(plan.len() as i64),
            Some(costs) => {
                let sum: Rational = plan.selected.iter().flatten().map(|a| costs[a.0].clone()).sum();
                sum + &self.h_mix * int(plan.len() as i64)
            }
        };
        Evaluation { h: h.into(), plan: Some(plan) }
    }

    /// Helpful actions of `s` given its evaluation; empty for dead ends.
    pub fn helpful(&self, s: &State, e: &Evaluation) -> Vec<ActionId> {
        e.plan.as_ref().map_or_else(Vec::new, |p| helpful_actions(self.task(), s, p))
    }
}

/// Relaxed plan length from `s`, `+∞` if the relaxation is unsolvable.
pub fn heuristic(t: &LnfTask, s: &State) -> ExtRational {
    Heuristic::new(t).evaluate(s).h
}
