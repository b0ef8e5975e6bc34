//! Brute-force oracles. They re-implement the semantics from scratch over the
//! public task data instead of calling the library's transition code.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use lnfplan::lnf::{LnfConstraint, LnfExpr, LnfTask};
use lnfplan::model::{AssignOp, BinOp, Comparator, Constraint, Expr, NumericTask, State, VarId};
use lnfplan::rational::Rational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Naive {
    pub props: Vec<bool>,
    pub vals: Vec<Rational>,
}

impl Naive {
    pub fn from_state(s: &State, num_props: usize) -> Self {
        Naive { props: (0..num_props).map(|p| s.props.contains(p)).collect(), vals: s.vals.clone() }
    }

    pub fn same_as(&self, s: &State) -> bool {
        self.props.iter().enumerate().all(|(p, &b)| s.props.contains(p) == b) && self.vals == s.vals
    }
}

fn eval(e: &Expr, vals: &[Rational]) -> Option<Rational> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Var(v) => vals[v.0].clone(),
        Expr::Bin(op, l, r) => {
            let (a, b) = (eval(l, vals)?, eval(r, vals)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b.is_zero() => return None,
                BinOp::Div => a / b,
            }
        }
    })
}

fn compare(a: &Rational, comp: Comparator, b: &Rational) -> bool {
    match comp {
        Comparator::Lt => a < b,
        Comparator::Le => a <= b,
        Comparator::Eq => a == b,
        Comparator::Ge => a >= b,
        Comparator::Gt => a > b,
    }
}

fn holds(c: &Constraint, vals: &[Rational]) -> bool {
    match (eval(&c.lhs, vals), eval(&c.rhs, vals)) {
        (Some(a), Some(b)) => compare(&a, c.comp, &b),
        _ => false,
    }
}

/// Real successor in the ground task.
pub fn real_step(t: &NumericTask, s: &Naive, a: usize) -> Option<Naive> {
    let act = &t.actions[a];
    if !act.pre.props.iter().all(|p| s.props[p.0]) || !act.pre.constraints.iter().all(|c| holds(c, &s.vals)) {
        return None;
    }
    let mut next = s.clone();
    for p in &act.eff.dels {
        next.props[p.0] = false;
    }
    for p in &act.eff.adds {
        next.props[p.0] = true;
    }
    for e in &act.eff.numeffs {
        let r = eval(&e.rhs, &s.vals)?;
        let old = &s.vals[e.var.0];
        next.vals[e.var.0] = match e.op {
            AssignOp::Assign => r,
            AssignOp::Increase => old + r,
            AssignOp::Decrease => old - r,
        };
    }
    Some(next)
}

pub fn real_goal(t: &NumericTask, s: &Naive) -> bool {
    t.goal.props.iter().all(|p| s.props[p.0]) && t.goal.constraints.iter().all(|c| holds(c, &s.vals))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exhaustive {
    Solvable(Vec<usize>),
    Unsolvable,
    /// The state cap was hit first.
    Unknown,
}

/// Breadth-first search over all reachable real states.
pub fn exhaustive_real(t: &NumericTask, max_states: usize) -> Exhaustive {
    let start = Naive::from_state(&t.init, t.props.len());
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
    let mut states = vec![start.clone()];
    let mut seen: HashSet<Naive> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if real_goal(t, &states[i]) {
            let mut plan = Vec::new();
            let mut k = i;
            while parent[k].0 != usize::MAX {
                plan.push(parent[k].1);
                k = parent[k].0;
            }
            plan.reverse();
            return Exhaustive::Solvable(plan);
        }
        for a in 0..t.actions.len() {
            if let Some(n) = real_step(t, &states[i], a) {
                if seen.insert(n.clone()) {
                    if states.len() >= max_states {
                        return Exhaustive::Unknown;
                    }
                    parent.push((i, a));
                    states.push(n);
                    queue.push_back(states.len() - 1);
                }
            }
        }
    }
    Exhaustive::Unsolvable
}

// ---------------------------------------------------------------------------
// relaxed semantics of normal-form tasks

pub fn lin_eval(e: &LnfExpr, vals: &[Rational]) -> Rational {
    let mut acc = e.constant.clone();
    for (v, c) in &e.terms {
        acc += c * &vals[v.0];
    }
    acc
}

pub fn lnf_holds(k: &LnfConstraint, vals: &[Rational]) -> bool {
    compare(&lin_eval(&k.expr, vals), k.comp, &Rational::zero())
}

pub fn lnf_goal(t: &LnfTask, s: &Naive) -> bool {
    t.goal_props.iter().all(|p| s.props[p.0]) && t.goal_nums.iter().all(|k| lnf_holds(k, &s.vals))
}

/// Delete-relaxed successor: adds only, numeric updates kept only when they
/// raise the value.
pub fn relaxed_step(t: &LnfTask, s: &Naive, a: usize) -> Option<Naive> {
    let act = &t.actions[a];
    if !act.pre_props.iter().all(|p| s.props[p.0]) || !act.pre_nums.iter().all(|k| lnf_holds(k, &s.vals)) {
        return None;
    }
    let mut next = s.clone();
    for p in &act.adds {
        next.props[p.0] = true;
    }
    for e in &act.effects {
        let r = lin_eval(&e.rhs, &s.vals);
        let old = &s.vals[e.var.0];
        let new = match e.op {
            AssignOp::Assign => r,
            AssignOp::Increase => old + r,
            AssignOp::Decrease => old - r,
        };
        if &new > old {
            next.vals[e.var.0] = new;
        }
    }
    Some(next)
}

/// Breadth-first search over relaxed states up to `max_depth` steps. Answers
/// `Some(true)` when a goal state is found, `Some(false)` when the reachable
/// relaxed state space is exhausted, `None` otherwise.
pub fn bounded_relaxed(t: &LnfTask, s: &State, max_depth: usize, max_states: usize) -> Option<bool> {
    let start = Naive::from_state(s, t.props.len());
    let mut seen: HashSet<Naive> = HashSet::from([start.clone()]);
    let mut layer = vec![start];
    let mut closed = true;
    for depth in 0..=max_depth {
        if layer.iter().any(|n| lnf_goal(t, n)) {
            return Some(true);
        }
        if layer.is_empty() {
            break;
        }
        if depth == max_depth {
            closed = false;
            break;
        }
        let mut next = Vec::new();
        for n in &layer {
            for a in 0..t.actions.len() {
                if let Some(m) = relaxed_step(t, n, a) {
                    if seen.insert(m.clone()) {
                        if seen.len() > max_states {
                            return None;
                        }
                        next.push(m);
                    }
                }
            }
        }
        layer = next;
    }
    if closed { Some(false) } else { None }
}

/// Values of the normal form's variables in the original state `s`: each
/// inverted variable holds the negated value of its partner.
pub fn lift_state(t: &LnfTask, s: &State) -> State {
    let mut out = s.clone();
    out.vals.truncate(t.original_vars);
    for v in &t.vars[t.original_vars..] {
        let base = v.inverse_of.expect("extra variables are inverses");
        out.vals.push(-s.vals[base.0].clone());
    }
    out
}

/// Least metric value over all plans, by uniform-cost search on the metric
/// variable (projected out of the state key); `None` past `cap` nodes.
pub fn cheapest_metric(t: &NumericTask, metric_var: VarId, cap: usize) -> Option<Rational> {
    let start = Naive::from_state(&t.init, t.props.len());
    let key = |n: &Naive| {
        let mut k = n.clone();
        k.vals[metric_var.0] = Rational::zero();
        k
    };
    let mut best: HashMap<Naive, Rational> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(key(&start), start.vals[metric_var.0].clone());
    heap.push(Reverse((start.vals[metric_var.0].clone(), 0usize)));
    let mut nodes = vec![start];
    while let Some(Reverse((g, i))) = heap.pop() {
        let n = nodes[i].clone();
        if best.get(&key(&n)).is_some_and(|b| b < &g) {
            continue;
        }
        if real_goal(t, &n) {
            return Some(g);
        }
        for a in 0..t.actions.len() {
            if let Some(m) = real_step(t, &n, a) {
                let mg = m.vals[metric_var.0].clone();
                let k = key(&m);
                if best.get(&k).is_none_or(|b| &mg < b) {
                    best.insert(k, mg.clone());
                    nodes.push(m);
                    heap.push(Reverse((mg, nodes.len() - 1)));
                    if nodes.len() > cap {
                        return None;
                    }
                }
            }
        }
    }
    None
}
