//! Linear normal form.
//!
//! The pipeline is [`fold_constants`] → [`to_pre_lnf`] → [`invert_negatives`].
//! After it every constraint reads `Σ c·v + c0 ≥|> 0` and every effect is
//! `v := Σ c·v + c0` or `v += Σ c·v + c0`, with all coefficients `c > 0`.
//! Variables that are used negatively get an inverted twin `-v` whose value is
//! kept at `-1 · v` by mirrored effects.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{
    Action, ActionId, ApplyError, AssignOp, BinOp, Comparator, Condition, Constraint, Effect, Expr, MetricSpec,
    GroundTask, NumEffect, NumVar, NumericTask, Plan, PropId, Proposition, State, VarId,
};
use crate::rational::{ExtRational, Rational};

/// Weighted sum `Σ c_j · v_j + constant`. Terms are sorted by variable and
/// zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LnfExpr {
    pub terms: Vec<(VarId, Rational)>,
    pub constant: Rational,
}

impl LnfExpr {
    pub fn constant(c: Rational) -> Self {
        LnfExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        LnfExpr { terms: vec![(v, Rational::one())], constant: Rational::zero() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, Rational)>, constant: Rational) -> Self {
        let mut map: BTreeMap<VarId, Rational> = BTreeMap::new();
        for (v, c) in terms {
            *map.entry(v).or_insert_with(Rational::zero) += c;
        }
        LnfExpr {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            constant,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, v: VarId) -> Option<&Rational> {
        self.terms
            .binary_search_by_key(&v, |(u, _)| *u)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().map(|(v, _)| *v)
    }

    pub fn add(&self, other: &LnfExpr) -> LnfExpr {
        LnfExpr::from_terms(
            self.terms.iter().chain(&other.terms).cloned(),
            &self.constant + &other.constant,
        )
    }

    pub fn scale(&self, k: &Rational) -> LnfExpr {
        if k.is_zero() {
            return LnfExpr::constant(Rational::zero());
        }
        LnfExpr {
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn negate(&self) -> LnfExpr {
        self.scale(&-Rational::one())
    }

    pub fn eval(&self, vals: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * &vals[v.0];
        }
        acc
    }

    /// Evaluation over extended values, taking the limit for infinite
    /// variables. Only meaningful when every coefficient is positive.
    pub fn eval_ext(&self, vals: &[ExtRational]) -> ExtRational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            match &vals[v.0] {
                ExtRational::Finite(x) => acc += c * x,
                ExtRational::PosInf if c.is_positive() => return ExtRational::PosInf,
                ExtRational::NegInf if c.is_negative() => return ExtRational::PosInf,
                _ => return ExtRational::NegInf,
            }
        }
        ExtRational::Finite(acc)
    }

    pub fn has_negative_coefficient(&self) -> bool {
        self.terms.iter().any(|(_, c)| c.is_negative())
    }
}

/// `expr comp 0`. In normal form `comp` is `Ge` or `Gt`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LnfConstraint {
    pub expr: LnfExpr,
    pub comp: Comparator,
}

impl LnfConstraint {
    pub fn ge(expr: LnfExpr) -> Self {
        LnfConstraint { expr, comp: Comparator::Ge }
    }

    pub fn gt(expr: LnfExpr) -> Self {
        LnfConstraint { expr, comp: Comparator::Gt }
    }

    /// A constraint that never holds.
    pub fn falsum() -> Self {
        LnfConstraint::gt(LnfExpr::constant(Rational::zero()))
    }

    pub fn is_strict(&self) -> bool {
        self.comp == Comparator::Gt
    }

    pub fn holds(&self, vals: &[Rational]) -> bool {
        self.comp.compare(&self.expr.eval(vals), &Rational::zero())
    }

    pub fn holds_ext(&self, vals: &[ExtRational]) -> bool {
        satisfies_ext(&self.expr.eval_ext(vals), self.comp)
    }
}

/// `value comp 0` for an extended value. `+∞` satisfies `≥ 0` and `> 0`.
pub fn satisfies_ext(value: &ExtRational, comp: Comparator) -> bool {
    match value {
        ExtRational::Finite(x) => comp.compare(x, &Rational::zero()),
        ExtRational::PosInf => matches!(comp, Comparator::Ge | Comparator::Gt),
        ExtRational::NegInf => matches!(comp, Comparator::Le | Comparator::Lt),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LnfEffect {
    pub var: VarId,
    pub op: AssignOp,
    pub rhs: LnfExpr,
}

impl LnfEffect {
    pub fn outcome(&self, vals: &[Rational]) -> Rational {
        let rhs = self.rhs.eval(vals);
        match self.op {
            AssignOp::Assign => rhs,
            AssignOp::Increase => &vals[self.var.0] + rhs,
            AssignOp::Decrease => &vals[self.var.0] - rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LnfAction {
    pub id: ActionId,
    pub name: String,
    /// Index of the action in the ground task this one was derived from.
    pub source: ActionId,
    pub pre_props: Vec<PropId>,
    pub pre_nums: Vec<LnfConstraint>,
    pub adds: Vec<PropId>,
    pub dels: Vec<PropId>,
    pub effects: Vec<LnfEffect>,
    pub cost: Rational,
}

impl LnfAction {
    pub fn effect_on(&self, v: VarId) -> Option<&LnfEffect> {
        self.effects.iter().find(|e| e.var == v)
    }
}

/// A ground linear task whose numeric parts are weighted sums. Produced in
/// pre-normal form by [`to_pre_lnf`] and in normal form by
/// [`invert_negatives`]; [`verify_lnf`] tells the two apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LnfTask {
    pub vars: Vec<NumVar>,
    /// Variables `0..original_vars` are the ground task's variables; the rest
    /// are inverses.
    pub original_vars: usize,
    pub props: Vec<Proposition>,
    pub actions: Vec<LnfAction>,
    pub init: State,
    pub goal_props: Vec<PropId>,
    pub goal_nums: Vec<LnfConstraint>,
    /// Metric over the original variables, as written in the input.
    pub metric: Option<MetricSpec>,
}

impl LnfTask {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn action(&self, id: ActionId) -> &LnfAction {
        &self.actions[id.0]
    }

    pub fn inverse(&self, v: VarId) -> Option<VarId> {
        self.vars[v.0].inverse_of
    }

    pub fn find_action(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .find(|a| a.name.eq_ignore_ascii_case(name))
            .map(|a| a.id)
    }

    /// Inverted pairs `(v, -v)` with `v` an original variable.
    pub fn inversion_pairs(&self) -> Vec<(VarId, VarId)> {
        self.vars
            .iter()
            .take(self.original_vars)
            .filter_map(|v| v.inverse_of.map(|w| (v.id, w)))
            .collect()
    }

    pub fn all_constraints(&self) -> impl Iterator<Item = &LnfConstraint> {
        self.goal_nums
            .iter()
            .chain(self.actions.iter().flat_map(|a| a.pre_nums.iter()))
    }

    pub fn all_effects(&self) -> impl Iterator<Item = (&LnfAction, &LnfEffect)> {
        self.actions
            .iter()
            .flat_map(|a| a.effects.iter().map(move |e| (a, e)))
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0].name
    }

    pub fn expr_to_string(&self, e: &LnfExpr) -> String {
        let mut parts: Vec<String> = e
            .terms
            .iter()
            .map(|(v, c)| {
                if c.is_one() {
                    self.var_name(*v).to_string()
                } else {
                    format!("{}*{}", c, self.var_name(*v))
                }
            })
            .collect();
        if !e.constant.is_zero() || parts.is_empty() {
            parts.push(e.constant.to_string());
        }
        parts.join(" + ")
    }
}

impl GroundTask for LnfTask {
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
        let a = &self.actions[a.0];
        if !self.applicable(s, a) {
            return Err(ApplyError::NotApplicable);
        }
        let updates: Vec<_> = a.effects.iter().map(|e| (e.var, e.outcome(&s.vals))).collect();
        let mut next = s.clone();
        for p in &a.dels {
            next.props.set(p.0, false);
        }
        for p in &a.adds {
            next.props.insert(p.0);
        }
        for (v, value) in updates {
            next.vals[v.0] = value;
        }
        Ok(next)
    }

    fn relaxed_apply(&self, s: &State, a: ActionId) -> Result<State, ApplyError> {
        let a = &self.actions[a.0];
        if !self.applicable(s, a) {
            return Err(ApplyError::NotApplicable);
        }
        let updates: Vec<_> = a
            .effects
            .iter()
            .map(|e| (e.var, e.outcome(&s.vals)))
            .filter(|(v, value)| *value > s.vals[v.0])
            .collect();
        let mut next = s.clone();
        for p in &a.adds {
            next.props.insert(p.0);
        }
        for (v, value) in updates {
            next.vals[v.0] = value;
        }
        Ok(next)
    }

    fn goal_holds(&self, s: &State) -> bool {
        self.goal_props.iter().all(|p| s.has(*p)) && self.goal_nums.iter().all(|k| k.holds(&s.vals))
    }

    fn metric(&self) -> Option<&MetricSpec> {
        self.metric.as_ref()
    }
}

impl LnfTask {
    /// Maps a plan over this task's actions back to the actions of the task
    /// it was normalized from.
    pub fn source_plan(&self, p: &Plan) -> Plan {
        Plan::new(p.steps.iter().map(|a| self.actions[a.0].source).collect())
    }

    /// Task variables no action writes.
    pub fn constant_vars(&self) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.num_vars());
        out.insert_range(..);
        for (_, e) in self.all_effects() {
            out.set(e.var.0, false);
        }
        out
    }

    /// Folds the task constants into `e` and linearizes it. `Ok(None)` if the
    /// folded expression is undefined.
    pub fn linearize_folded(&self, e: &Expr) -> Result<Option<LnfExpr>, PipelineError> {
        let Folded::Expr(folded) = fold_expr(e, &self.constant_vars(), &self.init.vals) else {
            return Ok(None);
        };
        match linearize(&folded) {
            Ok(l) => Ok(Some(l)),
            Err(LinError::NotLinear(s)) => Err(PipelineError::NotLinear(s)),
            Err(LinError::Undefined) => Ok(None),
        }
    }

    pub fn applicable(&self, s: &State, a: &LnfAction) -> bool {
        a.pre_props.iter().all(|p| s.has(*p)) && a.pre_nums.iter().all(|k| k.holds(&s.vals))
    }
}

impl fmt::Display for LnfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, c) in &self.terms {
            write!(f, "{c}*{v} + ")?;
        }
        write!(f, "{}", self.constant)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error("expression is not linear: {0}")]
    NotLinear(String),
}

// ---------------------------------------------------------------------------
// constant folding

enum Folded {
    Expr(Expr),
    Undefined,
}

fn fold_expr(e: &Expr, constants: &FixedBitSet, init: &[Rational]) -> Folded {
    match e {
        Expr::Const(_) => Folded::Expr(e.clone()),
        Expr::Var(v) => {
            if constants.contains(v.0) {
                Folded::Expr(Expr::Const(init[v.0].clone()))
            } else {
                Folded::Expr(e.clone())
            }
        }
        Expr::Bin(op, l, r) => {
            let (l, r) = match (fold_expr(l, constants, init), fold_expr(r, constants, init)) {
                (Folded::Expr(l), Folded::Expr(r)) => (l, r),
                _ => return Folded::Undefined,
            };
            if *op == BinOp::Div {
                if let Expr::Const(d) = &r {
                    if d.is_zero() {
                        return Folded::Undefined;
                    }
                }
            }
            match (&l, &r) {
                (Expr::Const(a), Expr::Const(b)) => Folded::Expr(Expr::Const(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                })),
                _ => Folded::Expr(Expr::bin(*op, l, r)),
            }
        }
    }
}

enum FoldedConstraint {
    True,
    False,
    Keep(Constraint),
}

fn fold_constraint(c: &Constraint, constants: &FixedBitSet, init: &[Rational]) -> FoldedConstraint {
    match (fold_expr(&c.lhs, constants, init), fold_expr(&c.rhs, constants, init)) {
        (Folded::Expr(Expr::Const(a)), Folded::Expr(Expr::Const(b))) => {
            if c.comp.compare(&a, &b) {
                FoldedConstraint::True
            } else {
                FoldedConstraint::False
            }
        }
        (Folded::Expr(lhs), Folded::Expr(rhs)) => {
            FoldedConstraint::Keep(Constraint::new(lhs, c.comp, rhs))
        }
        _ => FoldedConstraint::False,
    }
}

/// Replaces task constants by their initial values and evaluates constant
/// subexpressions. A constraint whose task-constant divisor is zero becomes
/// false; an action with such a constraint in its precondition, or such an
/// effect, is removed.
pub fn fold_constants(t: &NumericTask) -> NumericTask {
    fold_with_sources(t).0
}

/// [`fold_constants`], also returning the original id of every kept action.
fn fold_with_sources(t: &NumericTask) -> (NumericTask, Vec<ActionId>) {
    let affected = t.affected_vars();
    let mut constants = FixedBitSet::with_capacity(t.vars.len());
    constants.insert_range(..);
    constants.difference_with(&affected);
    let init = &t.init.vals;

    let fold_condition = |cond: &Condition| -> Option<Condition> {
        let mut constraints = Vec::new();
        for c in &cond.constraints {
            match fold_constraint(c, &constants, init) {
                FoldedConstraint::True => {}
                FoldedConstraint::False => return None,
                FoldedConstraint::Keep(k) => constraints.push(k),
            }
        }
        Some(Condition { props: cond.props.clone(), constraints })
    };

    let mut actions = Vec::new();
    let mut sources = Vec::new();
    'actions: for a in &t.actions {
        let Some(pre) = fold_condition(&a.pre) else { continue };
        let mut numeffs = Vec::new();
        for e in &a.eff.numeffs {
            match fold_expr(&e.rhs, &constants, init) {
                Folded::Expr(rhs) => numeffs.push(NumEffect { var: e.var, op: e.op, rhs }),
                Folded::Undefined => continue 'actions,
            }
        }
        actions.push(Action {
            id: ActionId(actions.len()),
            name: a.name.clone(),
            pre,
            eff: Effect { adds: a.eff.adds.clone(), dels: a.eff.dels.clone(), numeffs },
            cost: a.cost.clone(),
        });
        sources.push(a.id);
    }
    let goal = fold_condition(&t.goal).unwrap_or_else(|| Condition {
        props: t.goal.props.clone(),
        constraints: vec![Constraint::falsum()],
    });

    let folded = NumericTask {
        vars: t.vars.clone(),
        props: t.props.clone(),
        actions,
        init: t.init.clone(),
        goal,
        metric: t.metric.clone(),
    };
    (folded, sources)
}

// ---------------------------------------------------------------------------
// pre-normal form

#[derive(Debug)]
pub(crate) enum LinError {
    NotLinear(String),
    Undefined,
}

/// Normalizes an expression into a weighted sum.
pub(crate) fn linearize(e: &Expr) -> Result<LnfExpr, LinError> {
    match e {
        Expr::Const(c) => Ok(LnfExpr::constant(c.clone())),
        Expr::Var(v) => Ok(LnfExpr::var(*v)),
        Expr::Bin(op, l, r) => {
            let a = linearize(l)?;
            let b = linearize(r)?;
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.add(&b.negate())),
                BinOp::Mul => {
                    if a.is_constant() {
                        Ok(b.scale(&a.constant))
                    } else if b.is_constant() {
                        Ok(a.scale(&b.constant))
                    } else {
                        Err(LinError::NotLinear(e.to_string()))
                    }
                }
                BinOp::Div => {
                    if !b.is_constant() {
                        Err(LinError::NotLinear(e.to_string()))
                    } else if b.constant.is_zero() {
                        Err(LinError::Undefined)
                    } else {
                        Ok(a.scale(&b.constant.recip()))
                    }
                }
            }
        }
    }
}

/// `Ok(None)` means the constraint can never hold.
fn normalize_constraint(c: &Constraint) -> Result<Option<Vec<LnfConstraint>>, PipelineError> {
    let diff = match (linearize(&c.lhs), linearize(&c.rhs)) {
        (Ok(l), Ok(r)) => l.add(&r.negate()),
        (Err(LinError::NotLinear(s)), _) | (_, Err(LinError::NotLinear(s))) => {
            return Err(PipelineError::NotLinear(s))
        }
        _ => return Ok(None),
    };
    let out = match c.comp {
        Comparator::Ge => vec![LnfConstraint::ge(diff)],
        Comparator::Gt => vec![LnfConstraint::gt(diff)],
        Comparator::Le => vec![LnfConstraint::ge(diff.negate())],
        Comparator::Lt => vec![LnfConstraint::gt(diff.negate())],
        Comparator::Eq => vec![LnfConstraint::ge(diff.clone()), LnfConstraint::ge(diff.negate())],
    };
    let mut kept = Vec::new();
    for k in out {
        if k.expr.is_constant() {
            if !k.holds(&[]) {
                return Ok(None);
            }
        } else {
            kept.push(k);
        }
    }
    Ok(Some(kept))
}

fn normalize_constraints(cs: &[Constraint]) -> Result<Option<Vec<LnfConstraint>>, PipelineError> {
    let mut out = Vec::new();
    for c in cs {
        match normalize_constraint(c)? {
            Some(ks) => out.extend(ks),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Rewrites a (folded) ground task into weighted-sum form: `=` splits into
/// two `≥`, `<`/`≤` flip to `>`/`≥` of the negated difference and `-=`
/// becomes `+=` of the negated right-hand side. Coefficients may be negative.
pub fn to_pre_lnf(t: &NumericTask) -> Result<LnfTask, PipelineError> {
    let mut actions = Vec::new();
    'actions: for a in &t.actions {
        let Some(pre_nums) = normalize_constraints(&a.pre.constraints)? else { continue };
        let mut effects = Vec::new();
        for e in &a.eff.numeffs {
            let rhs = match linearize(&e.rhs) {
                Ok(r) => r,
                Err(LinError::NotLinear(s)) => return Err(PipelineError::NotLinear(s)),
                Err(LinError::Undefined) => continue 'actions,
            };
            let (op, rhs) = match e.op {
                AssignOp::Assign => (AssignOp::Assign, rhs),
                AssignOp::Increase => (AssignOp::Increase, rhs),
                AssignOp::Decrease => (AssignOp::Increase, rhs.negate()),
            };
            effects.push(LnfEffect { var: e.var, op, rhs });
        }
        actions.push(LnfAction {
            id: ActionId(actions.len()),
            name: a.name.clone(),
            source: a.id,
            pre_props: a.pre.props.clone(),
            pre_nums,
            adds: a.eff.adds.clone(),
            dels: a.eff.dels.clone(),
            effects,
            cost: a.cost.clone(),
        });
    }
    let goal_nums = normalize_constraints(&t.goal.constraints)?.unwrap_or_else(|| vec![LnfConstraint::falsum()]);
    Ok(LnfTask {
        vars: t.vars.clone(),
        original_vars: t.vars.len(),
        props: t.props.clone(),
        actions,
        init: t.init.clone(),
        goal_props: t.goal.props.clone(),
        goal_nums,
        metric: t.metric.clone(),
    })
}

// ---------------------------------------------------------------------------
// inverted variables

fn first_negative(exprs: &mut dyn Iterator<Item = &LnfExpr>) -> Option<VarId> {
    exprs
        .flat_map(|e| e.terms.iter().filter(|(_, c)| c.is_negative()).map(|(v, _)| *v))
        .min()
}

/// Replaces every `c·u` with `c < 0` and `u` tracked by `(-c)·(-u)`.
fn rewrite_tracked(e: &LnfExpr, tracked: &FixedBitSet, vars: &[NumVar]) -> LnfExpr {
    if !e.terms.iter().any(|(v, c)| c.is_negative() && tracked.contains(v.0)) {
        return e.clone();
    }
    let terms = e.terms.iter().map(|(v, c)| {
        if c.is_negative() && tracked.contains(v.0) {
            (vars[v.0].inverse_of.expect("tracked variables have inverses"), -c)
        } else {
            (*v, c.clone())
        }
    });
    LnfExpr::from_terms(terms.collect::<Vec<_>>(), e.constant.clone())
}

/// Introduces inverted variables until no weighted sum has a negative
/// coefficient. Variables are processed in ascending id order, with
/// occurrences in constraints taking priority over effect right-hand sides.
pub fn invert_negatives(t: &LnfTask) -> LnfTask {
    let mut out = t.clone();
    let mut tracked = FixedBitSet::with_capacity(out.vars.len());
    loop {
        let in_constraints = first_negative(&mut out.all_constraints().map(|k| &k.expr));
        let target = in_constraints.or_else(|| first_negative(&mut out.all_effects().map(|(_, e)| &e.rhs)));
        let Some(v) = target else { break };

        if out.vars[v.0].inverse_of.is_none() {
            let inv = VarId(out.vars.len());
            let name = format!("-{}", out.vars[v.0].name);
            out.vars.push(NumVar { id: inv, name, inverse_of: Some(v) });
            out.vars[v.0].inverse_of = Some(inv);
            let init_value = -out.init.vals[v.0].clone();
            out.init.vals.push(init_value);
            for a in &mut out.actions {
                if let Some(e) = a.effect_on(v).cloned() {
                    a.effects.push(LnfEffect { var: inv, op: e.op, rhs: e.rhs.negate() });
                }
            }
            tracked.grow(out.vars.len());
            tracked.insert(v.0);
            tracked.insert(inv.0);
        } else {
            // Already inverted but a negative occurrence survived; track both.
            let inv = out.vars[v.0].inverse_of.unwrap();
            tracked.grow(out.vars.len());
            tracked.insert(v.0);
            tracked.insert(inv.0);
        }

        let vars = out.vars.clone();
        for k in &mut out.goal_nums {
            k.expr = rewrite_tracked(&k.expr, &tracked, &vars);
        }
        for a in &mut out.actions {
            for k in &mut a.pre_nums {
                k.expr = rewrite_tracked(&k.expr, &tracked, &vars);
            }
            for e in &mut a.effects {
                e.rhs = rewrite_tracked(&e.rhs, &tracked, &vars);
            }
        }
    }
    out
}

/// fold → pre-LNF → inversion.
pub fn normalize(t: &NumericTask) -> Result<LnfTask, PipelineError> {
    let (folded, sources) = fold_with_sources(t);
    let mut pre = to_pre_lnf(&folded)?;
    for a in &mut pre.actions {
        a.source = sources[a.source.0];
    }
    Ok(invert_negatives(&pre))
}

// ---------------------------------------------------------------------------
// := dependency graph

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignDepGraph {
    pub num_vars: usize,
    /// `(u, v)`: some `v := exp` effect mentions `u`.
    pub edges: Vec<(VarId, VarId)>,
    pub acyclic: bool,
    /// Topological order of all variables when acyclic; otherwise the
    /// variables that could be ordered, followed by nothing.
    pub topo_order: Vec<VarId>,
    /// Variables lying on, or downstream of, a cycle.
    pub cyclic_vars: FixedBitSet,
}

impl AssignDepGraph {
    pub fn successors(&self, u: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.edges.iter().filter(move |(a, _)| *a == u).map(|(_, b)| *b)
    }
}

pub fn check_acyclic(t: &LnfTask) -> AssignDepGraph {
    let n = t.num_vars();
    let mut edges: Vec<(VarId, VarId)> = Vec::new();
    for (_, e) in t.all_effects() {
        if e.op == AssignOp::Assign {
            for u in e.rhs.vars() {
                if !edges.contains(&(u, e.var)) {
                    edges.push((u, e.var));
                }
            }
        }
    }
    edges.sort();
    let mut indeg = vec![0usize; n];
    for (_, b) in &edges {
        indeg[b.0] += 1;
    }
    let mut queue: VecDeque<VarId> = (0..n).filter(|i| indeg[*i] == 0).map(VarId).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for (a, b) in &edges {
            if *a == u {
                indeg[b.0] -= 1;
                if indeg[b.0] == 0 {
                    queue.push_back(*b);
                }
            }
        }
    }
    let mut cyclic_vars = FixedBitSet::with_capacity(n);
    cyclic_vars.insert_range(..);
    for v in &order {
        cyclic_vars.set(v.0, false);
    }
    AssignDepGraph { num_vars: n, acyclic: order.len() == n, edges, topo_order: order, cyclic_vars }
}

// ---------------------------------------------------------------------------
// solution relevance

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevanceSet {
    pub vars: FixedBitSet,
}

impl RelevanceSet {
    pub fn contains(&self, v: VarId) -> bool {
        self.vars.contains(v.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.ones().map(VarId)
    }

    pub fn len(&self) -> usize {
        self.vars.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Least set containing every variable of a constraint and closed under
/// "occurs in the right-hand side of an effect on a member".
pub fn compute_relevance(t: &LnfTask) -> RelevanceSet {
    let mut rv = FixedBitSet::with_capacity(t.num_vars());
    for k in t.all_constraints() {
        for v in k.expr.vars() {
            rv.insert(v.0);
        }
    }
    loop {
        let mut changed = false;
        for (_, e) in t.all_effects() {
            if rv.contains(e.var.0) {
                for u in e.rhs.vars() {
                    if !rv.contains(u.0) {
                        rv.insert(u.0);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    RelevanceSet { vars: rv }
}

// ---------------------------------------------------------------------------
// structural verification

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LnfReport {
    pub violations: Vec<String>,
}

impl LnfReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_lnf(t: &LnfTask) -> LnfReport {
    let mut violations = Vec::new();
    let check_expr = |what: &str, e: &LnfExpr, violations: &mut Vec<String>| {
        for (v, c) in &e.terms {
            if !c.is_positive() {
                violations.push(format!("{what}: coefficient {c} on {}", t.var_name(*v)));
            }
        }
    };
    for (i, k) in t.goal_nums.iter().enumerate() {
        check_expr(&format!("goal constraint {i}"), &k.expr, &mut violations);
        if !matches!(k.comp, Comparator::Ge | Comparator::Gt) {
            violations.push(format!("goal constraint {i}: comparator {}", k.comp.symbol()));
        }
    }
    for a in &t.actions {
        for (i, k) in a.pre_nums.iter().enumerate() {
            check_expr(&format!("{} precondition {i}", a.name), &k.expr, &mut violations);
            if !matches!(k.comp, Comparator::Ge | Comparator::Gt) {
                violations.push(format!("{} precondition {i}: comparator {}", a.name, k.comp.symbol()));
            }
        }
        for e in &a.effects {
            let what = format!("{} effect on {}", a.name, t.var_name(e.var));
            check_expr(&what, &e.rhs, &mut violations);
            if e.op == AssignOp::Decrease {
                violations.push(format!("{what}: operator -="));
            }
        }
    }
    for (v, w) in t.inversion_pairs() {
        if t.init.vals[w.0] != -t.init.vals[v.0].clone() {
            violations.push(format!("inverse {} is not initialized to -{}", t.var_name(w), t.var_name(v)));
        }
    }
    LnfReport { violations }
}
