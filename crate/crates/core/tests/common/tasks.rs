//! Random small numeric tasks.

use lnfplan::model::{
    Action, ActionId, AssignOp, BinOp, Comparator, Condition, Constraint, Effect, Expr, NumEffect, NumVar,
    NumericTask, PropId, Proposition, State, VarId,
};
use lnfplan::rational::int;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Linear constraints and effects with coefficients and constants in
    /// `[-5, 5]`; `:=` right-hand sides only read lower-numbered variables.
    General,
    /// `General`, with every numeric effect guarded so that all values stay
    /// integers in `[-5, 5]`. The reachable state space is finite.
    Bounded,
    /// Constraints `v ≥ c` / `v > c`, effects `v += c` / `v -= c` with `c > 0`.
    Restricted,
}

pub const MAX_PROPS: usize = 8;
pub const MAX_VARS: usize = 4;
pub const MAX_ACTIONS: usize = 10;

struct Gen {
    rng: ChaCha8Rng,
    props: usize,
    vars: usize,
}

fn coef(rng: &mut ChaCha8Rng) -> i64 {
    let c = rng.gen_range(1..=5);
    if rng.gen_bool(0.5) { c } else { -c }
}

fn lin(terms: &[(VarId, i64)], constant: i64) -> Expr {
    let mut e: Option<Expr> = None;
    for &(v, c) in terms {
        let t = if c == 1 { Expr::Var(v) } else { Expr::bin(BinOp::Mul, Expr::Const(int(c)), Expr::Var(v)) };
        e = Some(match e {
            None => t,
            Some(e) => Expr::bin(BinOp::Add, e, t),
        });
    }
    match e {
        None => Expr::Const(int(constant)),
        Some(e) if constant == 0 => e,
        Some(e) => Expr::bin(BinOp::Add, e, Expr::Const(int(constant))),
    }
}

impl Gen {
    fn var(&mut self) -> VarId {
        VarId(self.rng.gen_range(0..self.vars))
    }

    fn prop_subset(&mut self, max: usize) -> Vec<PropId> {
        let n = self.rng.gen_range(0..=max);
        let mut all: Vec<PropId> = (0..self.props).map(PropId).collect();
        all.shuffle(&mut self.rng);
        all.truncate(n);
        all.sort();
        all
    }

    /// One or two terms over variables in `0..limit`.
    fn terms(&mut self, limit: usize) -> Vec<(VarId, i64)> {
        let n = self.rng.gen_range(1..=2.min(limit));
        let mut vs: Vec<usize> = (0..limit).collect();
        vs.shuffle(&mut self.rng);
        vs[..n].iter().map(|&v| (VarId(v), coef(&mut self.rng))).collect()
    }

    fn comparator(&mut self) -> Comparator {
        *[Comparator::Lt, Comparator::Le, Comparator::Ge, Comparator::Ge, Comparator::Gt, Comparator::Gt, Comparator::Eq]
            .choose(&mut self.rng)
            .unwrap()
    }

    fn constraint(&mut self, shape: Shape) -> Constraint {
        let k = int(self.rng.gen_range(-5..=5));
        match shape {
            Shape::Restricted => {
                let comp = if self.rng.gen_bool(0.5) { Comparator::Ge } else { Comparator::Gt };
                Constraint::new(Expr::Var(self.var()), comp, Expr::Const(k))
            }
            _ => {
                let terms = self.terms(self.vars);
                let comp = self.comparator();
                Constraint::new(lin(&terms, 0), comp, Expr::Const(k))
            }
        }
    }

    fn constraints(&mut self, shape: Shape, max: usize) -> Vec<Constraint> {
        let n = self.rng.gen_range(0..=max);
        (0..n).map(|_| self.constraint(shape)).collect()
    }

    /// Numeric effects on distinct variables, plus the guards that keep
    /// `Bounded` tasks inside `[-5, 5]`.
    fn effects(&mut self, shape: Shape) -> (Vec<NumEffect>, Vec<Constraint>) {
        let n = self.rng.gen_range(0..=2.min(self.vars));
        let mut targets: Vec<usize> = (0..self.vars).collect();
        targets.shuffle(&mut self.rng);
        let mut effs = Vec::new();
        let mut guards = Vec::new();
        for &v in &targets[..n] {
            let var = VarId(v);
            if shape == Shape::Restricted {
                let op = if self.rng.gen_bool(0.6) { AssignOp::Increase } else { AssignOp::Decrease };
                effs.push(NumEffect { var, op, rhs: Expr::Const(int(self.rng.gen_range(1..=5))) });
                continue;
            }
            let roll = self.rng.gen_range(0..10);
            let (op, rhs) = if roll < 4 {
                (AssignOp::Increase, Expr::Const(int(self.rng.gen_range(-5..=5))))
            } else if roll < 6 {
                (AssignOp::Increase, lin(&self.terms(self.vars), self.rng.gen_range(-5..=5)))
            } else if roll < 8 {
                (AssignOp::Decrease, lin(&self.terms(self.vars), self.rng.gen_range(-5..=5)))
            } else if v == 0 || self.rng.gen_bool(0.3) {
                (AssignOp::Assign, Expr::Const(int(self.rng.gen_range(-5..=5))))
            } else {
                (AssignOp::Assign, lin(&self.terms(v), self.rng.gen_range(-5..=5)))
            };
            if shape == Shape::Bounded {
                let next = match op {
                    AssignOp::Assign => rhs.clone(),
                    AssignOp::Increase => Expr::bin(BinOp::Add, Expr::Var(var), rhs.clone()),
                    AssignOp::Decrease => Expr::bin(BinOp::Sub, Expr::Var(var), rhs.clone()),
                };
                guards.push(Constraint::new(next.clone(), Comparator::Le, Expr::Const(int(5))));
                guards.push(Constraint::new(next, Comparator::Ge, Expr::Const(int(-5))));
            }
            effs.push(NumEffect { var, op, rhs });
        }
        (effs, guards)
    }
}

pub fn random_task(seed: u64, shape: Shape) -> NumericTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000 ^ (shape as u64) << 40);
    let props = rng.gen_range(1..=MAX_PROPS);
    let vars = rng.gen_range(1..=MAX_VARS);
    let n_actions = rng.gen_range(1..=MAX_ACTIONS);
    let mut g = Gen { rng, props, vars };

    let mut actions = Vec::new();
    for i in 0..n_actions {
        let pre_props = g.prop_subset(2);
        let mut constraints = g.constraints(shape, 2);
        let adds = g.prop_subset(2);
        let dels: Vec<PropId> = g.prop_subset(2).into_iter().filter(|p| !adds.contains(p)).collect();
        let (numeffs, guards) = g.effects(shape);
        constraints.extend(guards);
        actions.push(Action {
            id: ActionId(i),
            name: format!("(a{i})"),
            pre: Condition { props: pre_props, constraints },
            eff: Effect { adds, dels, numeffs },
            cost: int(1),
        });
    }
    let mut init = State::new(
        props,
        (0..vars).map(|_| int(g.rng.gen_range(-5..=5))).collect(),
    );
    for p in g.prop_subset(props) {
        init.set(p);
    }
    let goal = Condition { props: g.prop_subset(2), constraints: g.constraints(shape, 2) };
    NumericTask {
        vars: (0..vars).map(|i| NumVar { id: VarId(i), name: format!("v{i}"), inverse_of: None }).collect(),
        props: (0..props).map(|i| Proposition { id: PropId(i), name: format!("(p{i})") }).collect(),
        actions,
        init,
        goal,
        metric: None,
    }
}

/// States reached by a short random real walk from the initial state,
/// starting with the initial state itself.
pub fn walk_states(t: &NumericTask, seed: u64, len: usize) -> Vec<State> {
    use lnfplan::model::GroundTask;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(17));
    let mut s = t.init.clone();
    let mut out = vec![s.clone()];
    for _ in 0..len {
        let succ: Vec<State> = (0..t.actions.len()).filter_map(|a| t.apply(&s, ActionId(a)).ok()).collect();
        let Some(next) = succ.choose(&mut rng) else { break };
        s = next.clone();
        out.push(s.clone());
    }
    out
}
