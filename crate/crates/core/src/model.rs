//! Ground numeric tasks and their execution semantics.
//!
//! A state is a set of true propositions plus one exact rational value per
//! numeric variable. Expressions may be undefined (division by zero); an
//! undefined value never aborts anything: constraints over it are false and
//! effects computing it make the action inapplicable.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposition {
    pub id: PropId,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumVar {
    pub id: VarId,
    pub name: String,
    /// Set on both members of an inverted pair `(v, -v)`.
    pub inverse_of: Option<VarId>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Var(VarId),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    /// Collects the variables mentioned anywhere in the expression.
    pub fn vars(&self, out: &mut Vec<VarId>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Expr::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    pub fn mentions(&self, var: VarId) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Bin(_, l, r) => l.mentions(var) || r.mentions(var),
        }
    }
}

/// Value of `e` under `vals`, or `None` if a division by zero occurs.
pub fn eval_expr(e: &Expr, vals: &[Rational]) -> Option<Rational> {
    match e {
        Expr::Const(c) => Some(c.clone()),
        Expr::Var(v) => Some(vals[v.0].clone()),
        Expr::Bin(op, l, r) => {
            let a = eval_expr(l, vals)?;
            let b = eval_expr(r, vals)?;
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => {
                    if b.is_zero() {
                        None
                    } else {
                        Some(a / b)
                    }
                }
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn compare(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Comparator::Lt => a < b,
            Comparator::Le => a <= b,
            Comparator::Eq => a == b,
            Comparator::Ge => a >= b,
            Comparator::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: Expr,
    pub comp: Comparator,
    pub rhs: Expr,
}

impl Constraint {
    pub fn new(lhs: Expr, comp: Comparator, rhs: Expr) -> Self {
        Constraint { lhs, comp, rhs }
    }

    /// A constraint that never holds (`0 > 0`).
    pub fn falsum() -> Self {
        Constraint::new(
            Expr::Const(Rational::zero()),
            Comparator::Gt,
            Expr::Const(Rational::zero()),
        )
    }

    pub fn holds_in(&self, vals: &[Rational]) -> bool {
        match (eval_expr(&self.lhs, vals), eval_expr(&self.rhs, vals)) {
            (Some(a), Some(b)) => self.comp.compare(&a, &b),
            _ => false,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Assign,
    Increase,
    Decrease,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => ":=",
            AssignOp::Increase => "+=",
            AssignOp::Decrease => "-=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NumEffect {
    pub var: VarId,
    pub op: AssignOp,
    pub rhs: Expr,
}

impl NumEffect {
    /// The new value of the target variable, if defined.
    pub fn outcome(&self, vals: &[Rational]) -> Option<Rational> {
        let rhs = eval_expr(&self.rhs, vals)?;
        let current = &vals[self.var.0];
        Some(match self.op {
            AssignOp::Assign => rhs,
            AssignOp::Increase => current + rhs,
            AssignOp::Decrease => current - rhs,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Condition {
    pub props: Vec<PropId>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Effect {
    pub adds: Vec<PropId>,
    pub dels: Vec<PropId>,
    pub numeffs: Vec<NumEffect>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub id: ActionId,
    pub name: String,
    pub pre: Condition,
    pub eff: Effect,
    pub cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub props: FixedBitSet,
    pub vals: Vec<Rational>,
}

impl State {
    pub fn new(num_props: usize, vals: Vec<Rational>) -> Self {
        State {
            props: FixedBitSet::with_capacity(num_props),
            vals,
        }
    }

    pub fn has(&self, p: PropId) -> bool {
        self.props.contains(p.0)
    }

    pub fn set(&mut self, p: PropId) {
        self.props.insert(p.0);
    }

    pub fn satisfies(&self, cond: &Condition) -> bool {
        cond.props.iter().all(|p| self.has(*p))
            && cond.constraints.iter().all(|c| c.holds_in(&self.vals))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MetricDirection {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpec {
    pub direction: MetricDirection,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericTask {
    pub vars: Vec<NumVar>,
    pub props: Vec<Proposition>,
    pub actions: Vec<Action>,
    pub init: State,
    pub goal: Condition,
    pub metric: Option<MetricSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub steps: Vec<ActionId>,
}

impl Plan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ApplyError {
    #[error("precondition does not hold")]
    NotApplicable,
    #[error("effect on {0} is undefined (division by zero)")]
    UndefinedEffect(VarId),
}

pub fn holds(c: &Constraint, s: &State) -> bool {
    c.holds_in(&s.vals)
}

/// Real successor of `s` under `a`. Every right-hand side reads `s`.
pub fn apply_action(s: &State, a: &Action) -> Result<State, ApplyError> {
    if !s.satisfies(&a.pre) {
        return Err(ApplyError::NotApplicable);
    }
    let mut updates = Vec::with_capacity(a.eff.numeffs.len());
    for e in &a.eff.numeffs {
        let value = e.outcome(&s.vals).ok_or(ApplyError::UndefinedEffect(e.var))?;
        updates.push((e.var, value));
    }
    let mut next = s.clone();
    for p in &a.eff.dels {
        next.props.set(p.0, false);
    }
    for p in &a.eff.adds {
        next.props.insert(p.0);
    }
    for (v, value) in updates {
        next.vals[v.0] = value;
    }
    Ok(next)
}

pub fn is_goal(s: &State, t: &NumericTask) -> bool {
    s.satisfies(&t.goal)
}

impl NumericTask {
    pub fn action(&self, id: ActionId) -> &Action {
        &self.actions[id.0]
    }

    pub fn find_action(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .find(|a| a.name.eq_ignore_ascii_case(name))
            .map(|a| a.id)
    }

    /// Variables written by some action effect; everything else is a task constant.
    pub fn affected_vars(&self) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.vars.len());
        for a in &self.actions {
            for e in &a.eff.numeffs {
                out.insert(e.var.0);
            }
        }
        out
    }

    /// Checks id ranges and per-action effect uniqueness.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let n = self.vars.len();
        let p = self.props.len();
        if self.init.vals.len() != n {
            return Err(format!("init has {} values for {} variables", self.init.vals.len(), n));
        }
        for (i, v) in self.vars.iter().enumerate() {
            if v.id.0 != i {
                return Err(format!("variable ids not dense at {i}"));
            }
        }
        for (i, pr) in self.props.iter().enumerate() {
            if pr.id.0 != i {
                return Err(format!("proposition ids not dense at {i}"));
            }
        }
        let check_expr = |e: &Expr| {
            let mut vs = Vec::new();
            e.vars(&mut vs);
            vs.iter().all(|v| v.0 < n)
        };
        let check_cond = |c: &Condition| {
            c.props.iter().all(|q| q.0 < p)
                && c.constraints.iter().all(|k| check_expr(&k.lhs) && check_expr(&k.rhs))
        };
        if !check_cond(&self.goal) {
            return Err("goal references unknown ids".into());
        }
        for a in &self.actions {
            if !check_cond(&a.pre) {
                return Err(format!("precondition of {} references unknown ids", a.name));
            }
            let mut seen = Vec::new();
            for e in &a.eff.numeffs {
                if e.var.0 >= n || !check_expr(&e.rhs) {
                    return Err(format!("effect of {} references unknown ids", a.name));
                }
                if seen.contains(&e.var) {
                    return Err(format!("{} has two effects on {}", a.name, e.var));
                }
                seen.push(e.var);
            }
            if a.eff.adds.iter().chain(&a.eff.dels).any(|q| q.0 >= p) {
                return Err(format!("effect of {} references unknown propositions", a.name));
            }
        }
        Ok(())
    }
}

/// Uniform access to the transition system of a ground task, shared by the
/// original task and its normal form.
pub trait GroundTask {
    fn num_actions(&self) -> usize;
    fn action_name(&self, a: ActionId) -> &str;
    fn initial_state(&self) -> &State;
    fn apply(&self, s: &State, a: ActionId) -> Result<State, ApplyError>;
    /// Successor ignoring deletes and every numeric update that does not
    /// raise its variable.
    fn relaxed_apply(&self, s: &State, a: ActionId) -> Result<State, ApplyError>;
    fn goal_holds(&self, s: &State) -> bool;
    fn metric(&self) -> Option<&MetricSpec>;

    fn metric_value(&self, s: &State) -> Option<Rational> {
        self.metric().and_then(|m| eval_expr(&m.expr, &s.vals))
    }
}

impl GroundTask for NumericTask {
    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0].name
    }

    fn initial_state(&self) -> &State {
        &self.init
    }

    fn apply(&self, s: &State, a: ActionId) -> Result<State, ApplyError> {
        apply_action(s, &self.actions[a.0])
    }

    fn relaxed_apply(&self, s: &State, a: ActionId) -> Result<State, ApplyError> {
        let a = &self.actions[a.0];
        if !s.satisfies(&a.pre) {
            return Err(ApplyError::NotApplicable);
        }
        let mut updates = Vec::new();
        for e in &a.eff.numeffs {
            let value = e.outcome(&s.vals).ok_or(ApplyError::UndefinedEffect(e.var))?;
            if value > s.vals[e.var.0] {
                updates.push((e.var, value));
            }
        }
        let mut next = s.clone();
        for p in &a.eff.adds {
            next.props.insert(p.0);
        }
        for (v, value) in updates {
            next.vals[v.0] = value;
        }
        Ok(next)
    }

    fn goal_holds(&self, s: &State) -> bool {
        is_goal(s, self)
    }

    fn metric(&self) -> Option<&MetricSpec> {
        self.metric.as_ref()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({sym} {l} {r})")
            }
        }
    }
}
