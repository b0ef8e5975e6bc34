//! Relaxed planning graphs over tasks in linear normal form, and relaxed
//! plan extraction.
//!
//! The graph keeps, per layer, the reached propositions and an upper bound
//! `max_t` on every variable. Increasing effects add up within a layer and
//! assignments raise a variable to the best available value. Construction
//! stops once the goal holds or nothing relevant can change any more; the
//! `mneed` thresholds decide when further growth of a variable is useless.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_traits::{Signed, Zero};

use crate::lnf::{check_acyclic, compute_relevance, AssignDepGraph, LnfAction, LnfConstraint, LnfExpr, LnfTask, RelevanceSet};
use crate::model::{ActionId, AssignOp, PropId, State, VarId};
use crate::rational::{ExtRational, Rational};

pub const DEFAULT_MAX_LAYERS: usize = 10_000;

/// The value `v_i` must reach so that `exp ≥ target` holds, with every other
/// variable fixed at its value in `vals`.
///
/// # Panics
///
/// If `i` does not occur in `exp`.
pub fn supv(vals: &[Rational], exp: &LnfExpr, i: VarId, target: &Rational) -> Rational {
    let ci = exp.coefficient(i).unwrap_or_else(|| panic!("{i} does not occur in the expression"));
    let mut rest = exp.constant.clone();
    for (v, c) in &exp.terms {
        if *v != i {
            rest += c * &vals[v.0];
        }
    }
    (target - rest) / ci
}

/// Per-variable threshold beyond which raising a variable cannot help.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MneedVector(pub Vec<ExtRational>);

impl MneedVector {
    pub fn get(&self, v: VarId) -> &ExtRational {
        &self.0[v.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn raise(slot: &mut ExtRational, value: ExtRational) {
    if value > *slot {
        *slot = value;
    }
}

/// Computes `mneed(s)`. Variables whose requirement depends on an
/// assignment cycle get `+∞`.
pub fn compute_mneed(t: &LnfTask, s: &State, rv: &RelevanceSet) -> MneedVector {
    compute_mneed_with(t, s, rv, &check_acyclic(t))
}

pub(crate) fn compute_mneed_with(t: &LnfTask, s: &State, rv: &RelevanceSet, deps: &AssignDepGraph) -> MneedVector {
    let n = t.num_vars();
    let zero = Rational::zero();
    let mut m = vec![ExtRational::NegInf; n];
    for k in t.all_constraints() {
        for v in k.expr.vars() {
            raise(&mut m[v.0], supv(&s.vals, &k.expr, v, &zero).into());
        }
    }
    for (_, e) in t.all_effects() {
        if e.op == AssignOp::Increase && rv.contains(e.var) {
            for v in e.rhs.vars() {
                raise(&mut m[v.0], supv(&s.vals, &e.rhs, v, &zero).into());
            }
        }
    }
    for v in deps.cyclic_vars.ones() {
        if rv.contains(VarId(v)) {
            m[v] = ExtRational::PosInf;
        }
    }
    // assignment requirements flow backwards along the dependency edges
    for &j in deps.topo_order.iter().rev() {
        if !rv.contains(j) {
            continue;
        }
        for (_, e) in t.all_effects() {
            if e.op != AssignOp::Assign || e.var != j {
                continue;
            }
            for i in e.rhs.vars() {
                let need = match &m[j.0] {
                    ExtRational::Finite(target) => supv(&s.vals, &e.rhs, i, target).into(),
                    ExtRational::PosInf => ExtRational::PosInf,
                    ExtRational::NegInf => continue,
                };
                raise(&mut m[i.0], need);
            }
        }
    }
    // effects feeding a cyclic variable
    for (_, e) in t.all_effects() {
        if e.op == AssignOp::Assign && deps.cyclic_vars.contains(e.var.0) && rv.contains(e.var) {
            for i in e.rhs.vars() {
                m[i.0] = ExtRational::PosInf;
            }
        }
    }
    MneedVector(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub props: FixedBitSet,
    /// Upper bounds on the variables. Always finite: the graph never jumps
    /// to infinity.
    pub max: Vec<Rational>,
    /// Actions applicable at this layer, ascending. Empty for the last layer.
    pub actions: Vec<ActionId>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GraphVerdict {
    Reached,
    Failed,
    /// The layer cap was hit before either outcome.
    CapHit,
}

#[derive(Clone, Debug)]
pub struct Rpg {
    pub layers: Vec<Layer>,
    pub prop_level: Vec<Option<usize>>,
    pub action_level: Vec<Option<usize>>,
    /// Indexed like the task's numeric goal list.
    pub goal_constraint_level: Vec<Option<usize>>,
    pub finallayer: Option<usize>,
    pub verdict: GraphVerdict,
    pub mneed: MneedVector,
}

impl Rpg {
    pub fn reached(&self) -> bool {
        self.verdict == GraphVerdict::Reached
    }

    /// First layer whose `max` vector satisfies `k`.
    pub fn constraint_level(&self, k: &LnfConstraint) -> Option<usize> {
        self.layers.iter().position(|l| k.holds(&l.max))
    }

    /// Human readable per-layer summary: new propositions, `max_t` and `|A_t|`.
    pub fn dump(&self, t: &LnfTask) -> String {
        let mut out = String::new();
        let mut prev: Option<&FixedBitSet> = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let new: Vec<&str> = layer
                .props
                .ones()
                .filter(|p| prev.is_none_or(|q| !q.contains(*p)))
                .map(|p| t.props[p].name.as_str())
                .collect();
            let max: Vec<String> = layer.max.iter().enumerate().map(|(v, x)| format!("{}={x}", t.vars[v].name)).collect();
            let _ = writeln!(out, "layer {i}: |A|={} new=[{}] max=[{}]", layer.actions.len(), new.join(" "), max.join(" "));
            prev = Some(&layer.props);
        }
        let _ = writeln!(
            out,
            "verdict={:?} finallayer={}",
            self.verdict,
            self.finallayer.map_or("-".to_string(), |f| f.to_string())
        );
        out
    }
}

/// Task-level data reused across graph constructions.
#[derive(Clone, Debug)]
pub struct GraphBuilder<'a> {
    pub task: &'a LnfTask,
    pub relevance: RelevanceSet,
    pub deps: AssignDepGraph,
    pub max_layers: usize,
}

impl<'a> GraphBuilder<'a> {
    pub fn new(task: &'a LnfTask) -> Self {
        GraphBuilder {
            task,
            relevance: compute_relevance(task),
            deps: check_acyclic(task),
            max_layers: DEFAULT_MAX_LAYERS,
        }
    }

    pub fn with_max_layers(mut self, cap: usize) -> Self {
        self.max_layers = cap;
        self
    }

    pub fn mneed(&self, s: &State) -> MneedVector {
        compute_mneed_with(self.task, s, &self.relevance, &self.deps)
    }

    pub fn build(&self, s: &State) -> Rpg {
        let t = self.task;
        let mneed = self.mneed(s);
        let mut prop_level = vec![None; t.props.len()];
        let mut action_level = vec![None; t.actions.len()];
        let mut goal_constraint_level = vec![None; t.goal_nums.len()];
        let mut props = s.props.clone();
        props.grow(t.props.len());
        for p in props.ones() {
            prop_level[p] = Some(0);
        }
        let mut max = s.vals.clone();
        let mut layers: Vec<Layer> = Vec::new();
        let mut in_graph = FixedBitSet::with_capacity(t.actions.len());
        let mut level = 0usize;
        loop {
            for (i, k) in t.goal_nums.iter().enumerate() {
                if goal_constraint_level[i].is_none() && k.holds(&max) {
                    goal_constraint_level[i] = Some(level);
                }
            }
            let goal = t.goal_props.iter().all(|p| props.contains(p.0)) && goal_constraint_level.iter().all(Option::is_some);
            if goal || level >= self.max_layers {
                layers.push(Layer { props, max, actions: Vec::new() });
                let verdict = if goal { GraphVerdict::Reached } else { GraphVerdict::CapHit };
                return Rpg {
                    layers,
                    prop_level,
                    action_level,
                    goal_constraint_level,
                    finallayer: goal.then_some(level),
                    verdict,
                    mneed,
                };
            }
            for a in &t.actions {
                if !in_graph.contains(a.id.0)
                    && a.pre_props.iter().all(|p| props.contains(p.0))
                    && a.pre_nums.iter().all(|k| k.holds(&max))
                {
                    in_graph.insert(a.id.0);
                    action_level[a.id.0] = Some(level);
                }
            }
            let actions: Vec<ActionId> = in_graph.ones().map(ActionId).collect();
            let mut next_props = props.clone();
            let mut next_max = max.clone();
            for &id in &actions {
                let a = t.action(id);
                for p in &a.adds {
                    if !next_props.contains(p.0) {
                        next_props.insert(p.0);
                        prop_level[p.0] = Some(level + 1);
                    }
                }
                for e in a.effects.iter().filter(|e| e.op == AssignOp::Increase) {
                    let amount = e.rhs.eval(&max);
                    if amount.is_positive() {
                        next_max[e.var.0] += amount;
                    }
                }
            }
            for &id in &actions {
                for e in t.action(id).effects.iter().filter(|e| e.op == AssignOp::Assign) {
                    let value = e.rhs.eval(&max);
                    if value > next_max[e.var.0] {
                        next_max[e.var.0] = value;
                    }
                }
            }
            let stuck = next_props == props
                && (0..t.num_vars()).all(|i| {
                    next_max[i] == max[i] || ExtRational::Finite(max[i].clone()) > mneed.0[i]
                });
            layers.push(Layer { props, max, actions });
            if stuck {
                let last = layers.last().unwrap();
                layers.push(Layer { props: last.props.clone(), max: last.max.clone(), actions: Vec::new() });
                return Rpg {
                    layers,
                    prop_level,
                    action_level,
                    goal_constraint_level,
                    finallayer: None,
                    verdict: GraphVerdict::Failed,
                    mneed,
                };
            }
            props = next_props;
            max = next_max;
            level += 1;
        }
    }

    pub fn extract(&self, g: &Rpg) -> Option<RelaxedPlan> {
        extract_plan(self.task, g)
    }

    pub fn extract_with_costs(&self, g: &Rpg, costs: &[Rational]) -> Option<RelaxedPlan> {
        extract_plan_with_costs(self.task, g, Some(costs))
    }
}

pub fn build_graph(t: &LnfTask, s: &State) -> Rpg {
    GraphBuilder::new(t).build(s)
}

// ---------------------------------------------------------------------------
// extraction

/// Lower bound `v ≥ value` (`v > value` when strict).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub value: Rational,
    pub strict: bool,
}

impl Bound {
    pub fn ge(value: Rational) -> Self {
        Bound { value, strict: false }
    }

    pub fn satisfied_by(&self, x: &Rational) -> bool {
        if self.strict {
            x > &self.value
        } else {
            x >= &self.value
        }
    }

    pub fn satisfied_by_ext(&self, x: &ExtRational) -> bool {
        match x {
            ExtRational::Finite(x) => self.satisfied_by(x),
            ExtRational::PosInf => true,
            ExtRational::NegInf => false,
        }
    }

    /// The stronger of two bounds.
    pub fn merge(&mut self, other: Bound) {
        if other.value > self.value || (other.value == self.value && other.strict) {
            *self = other;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayerGoals {
    pub props: BTreeSet<PropId>,
    pub nums: BTreeMap<VarId, Bound>,
}

impl LayerGoals {
    fn add_bound(&mut self, v: VarId, b: Bound) {
        match self.nums.get_mut(&v) {
            Some(old) => old.merge(b),
            None => {
                self.nums.insert(v, b);
            }
        }
    }
}

/// Goals per layer, `G_0 .. G_finallayer`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoalAgenda {
    pub layers: Vec<LayerGoals>,
}

impl GoalAgenda {
    pub fn layer(&self, t: usize) -> Option<&LayerGoals> {
        self.layers.get(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxedPlan {
    /// `selected[t]` holds the actions applied at layer `t`.
    pub selected: Vec<BTreeSet<ActionId>>,
    pub goals: GoalAgenda,
}

impl RelaxedPlan {
    /// The heuristic value: number of selected action occurrences.
    pub fn len(&self) -> usize {
        self.selected.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cost(&self, t: &LnfTask) -> Rational {
        self.selected.iter().flatten().map(|a| t.action(*a).cost.clone()).sum()
    }

    /// Layer-by-layer action sequence, ascending ids within a layer.
    pub fn sequence(&self) -> Vec<ActionId> {
        self.selected.iter().flatten().copied().collect()
    }
}

struct Extraction<'a> {
    t: &'a LnfTask,
    g: &'a Rpg,
    costs: Option<&'a [Rational]>,
    goals: Vec<LayerGoals>,
    selected: Vec<BTreeSet<ActionId>>,
}

impl Extraction<'_> {
    /// Cheapest action first when costs are known, otherwise declaration order.
    fn cheapest<'b>(&self, mut it: impl Iterator<Item = &'b LnfAction>) -> Option<&'b LnfAction> {
        match self.costs {
            None => it.next(),
            Some(c) => it.min_by(|a, b| c[a.id.0].cmp(&c[b.id.0]).then(a.id.cmp(&b.id))),
        }
    }

    fn push_constraint(&mut self, k: &LnfConstraint) {
        let level = self.g.constraint_level(k).expect("constraint below the final layer");
        if level == 0 {
            return;
        }
        for v in k.expr.vars() {
            let value = self.g.layers[level].max[v.0].clone();
            self.goals[level].add_bound(v, Bound::ge(value));
        }
    }

    fn select(&mut self, layer: usize, a: &LnfAction) {
        if !self.selected[layer].insert(a.id) {
            return;
        }
        for p in &a.pre_props {
            let level = self.g.prop_level[p.0].expect("precondition of a graph action");
            if level > 0 {
                self.goals[level].props.insert(*p);
            }
        }
        for k in &a.pre_nums {
            self.push_constraint(k);
        }
    }

    fn push_rhs_bounds(&mut self, layer: usize, rhs: &LnfExpr) {
        if layer == 0 {
            return;
        }
        for u in rhs.vars() {
            let value = self.g.layers[layer].max[u.0].clone();
            self.goals[layer].add_bound(u, Bound::ge(value));
        }
    }

    fn in_graph_by(&self, a: &LnfAction, layer: usize) -> bool {
        self.g.action_level[a.id.0].is_some_and(|l| l <= layer)
    }

    fn achieve_prop(&mut self, t: usize, p: PropId) {
        let below = t - 1;
        let (task, g) = (self.t, self.g);
        let achievers = || task.actions.iter().filter(move |a| g.action_level[a.id.0] == Some(below) && a.adds.contains(&p));
        let reused = achievers().find(|a| self.selected[below].contains(&a.id));
        let a = reused
            .or_else(|| self.cheapest(achievers()))
            .expect("proposition level implies an achiever one layer below");
        self.select(below, a);
    }

    fn achieve_bound(&mut self, t: usize, v: VarId, bound: Bound) {
        let below = t - 1;
        let max_below = &self.g.layers[below].max;
        if bound.satisfied_by(&max_below[v.0]) {
            if below > 0 {
                self.goals[below].add_bound(v, bound);
            }
            return;
        }
        let assign = self.cheapest(self.t.actions.iter().filter(|a| {
            self.in_graph_by(a, below)
                && a.effect_on(v).is_some_and(|e| e.op == AssignOp::Assign && bound.satisfied_by(&e.rhs.eval(max_below)))
        }));
        if let Some(a) = assign {
            let rhs = a.effect_on(v).unwrap().rhs.clone();
            self.select(below, a);
            self.push_rhs_bounds(below, &rhs);
            return;
        }
        let mut candidates: Vec<(Rational, &LnfAction)> = self
            .t
            .actions
            .iter()
            .filter(|a| self.in_graph_by(a, below))
            .filter_map(|a| {
                let e = a.effect_on(v).filter(|e| e.op == AssignOp::Increase)?;
                let amount = e.rhs.eval(max_below);
                amount.is_positive().then_some((amount, a))
            })
            .collect();
        candidates.sort_by(|(x, a), (y, b)| y.cmp(x).then(a.id.cmp(&b.id)));
        let mut remaining = bound;
        let mut pending = candidates.into_iter();
        while !remaining.satisfied_by(&self.g.layers[below].max[v.0]) {
            let Some((amount, a)) = pending.next() else {
                debug_assert!(false, "increase achievers exhausted for {v} at layer {t}");
                break;
            };
            remaining.value -= amount;
            let rhs = a.effect_on(v).unwrap().rhs.clone();
            self.select(below, a);
            self.push_rhs_bounds(below, &rhs);
        }
        if below > 0 {
            self.goals[below].add_bound(v, remaining);
        }
    }
}

/// Extracts a relaxed plan from a graph that reached the goal.
pub fn extract_plan(t: &LnfTask, g: &Rpg) -> Option<RelaxedPlan> {
    extract_plan_with_costs(t, g, None)
}

/// Like [`extract_plan`], but among equally early achievers of a goal the
/// cheapest one under `costs` is chosen.
pub fn extract_plan_with_costs(t: &LnfTask, g: &Rpg, costs: Option<&[Rational]>) -> Option<RelaxedPlan> {
    let fin = g.finallayer?;
    let mut ex = Extraction {
        t,
        g,
        costs,
        goals: vec![LayerGoals::default(); fin + 1],
        selected: vec![BTreeSet::new(); fin],
    };
    for p in &t.goal_props {
        let level = g.prop_level[p.0].expect("goal proposition reached");
        if level > 0 {
            ex.goals[level].props.insert(*p);
        }
    }
    for k in &t.goal_nums {
        ex.push_constraint(k);
    }
    for layer in (1..=fin).rev() {
        let props: Vec<PropId> = ex.goals[layer].props.iter().copied().collect();
        for p in props {
            ex.achieve_prop(layer, p);
        }
        let bounds: Vec<(VarId, Bound)> = ex.goals[layer].nums.iter().map(|(v, b)| (*v, b.clone())).collect();
        for (v, b) in bounds {
            ex.achieve_bound(layer, v, b);
        }
    }
    Some(RelaxedPlan { selected: ex.selected, goals: GoalAgenda { layers: ex.goals } })
}

/// Applicable actions in `s` that contribute to a layer-1 goal of the relaxed
/// plan. Bounds already met in `s` are not counted as goals.
pub fn helpful_actions(t: &LnfTask, s: &State, plan: &RelaxedPlan) -> Vec<ActionId> {
    let Some(g1) = plan.goals.layer(1) else {
        return Vec::new();
    };
    let open: Vec<(VarId, &Bound)> = g1.nums.iter().filter(|(v, b)| !b.satisfied_by(&s.vals[v.0])).map(|(v, b)| (*v, b)).collect();
    t.actions
        .iter()
        .filter(|a| t.applicable(s, a))
        .filter(|a| {
            a.adds.iter().any(|p| g1.props.contains(p))
                || a.effects.iter().any(|e| {
                    open.iter().any(|(v, b)| {
                        *v == e.var
                            && match e.op {
                                AssignOp::Assign => b.satisfied_by(&e.rhs.eval(&s.vals)),
                                AssignOp::Increase => e.rhs.eval(&s.vals).is_positive(),
                                AssignOp::Decrease => false,
                            }
                    })
                })
        })
        .map(|a| a.id)
        .collect()
}
