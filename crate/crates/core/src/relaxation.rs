//! The relaxed transition function and polynomial relaxed-solvability
//! deciders.
//!
//! Both deciders are forward fixpoints over a proposition set `M` and a value
//! vector `m`. Whenever an increasing effect becomes available, the affected
//! variable is assumed to reach `+∞`: in a task whose expressions all diverge
//! in their variables, repeating the action raises the variable without
//! bound. Assignments instead take the maximum available value.

use fixedbitset::FixedBitSet;
use num_traits::Signed;
use thiserror::Error;

use crate::lnf::{check_acyclic, satisfies_ext, verify_lnf, LnfTask};
use crate::model::{ActionId, ApplyError, AssignOp, Comparator, Expr, GroundTask, NumericTask, State};
use crate::rational::{ExtRational, Rational};

/// Relaxed successor: deletes are ignored and a numeric effect only takes
/// place when its outcome exceeds the variable's current value.
pub fn relaxed_apply<T: GroundTask + ?Sized>(t: &T, s: &State, a: ActionId) -> Result<State, ApplyError> {
    t.relaxed_apply(s, a)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Solvable,
    Unsolvable,
}

impl Verdict {
    pub fn is_solvable(self) -> bool {
        self == Verdict::Solvable
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Solvable => "solvable",
            Verdict::Unsolvable => "unsolvable",
        })
    }
}

/// Final state of a decider run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxedFixpoint {
    pub reached: FixedBitSet,
    pub values: Vec<ExtRational>,
    /// Number of executed loop bodies.
    pub iterations: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DeciderError {
    #[error("task is outside the restricted language: {0}")]
    MalformedInput(String),
    #[error("task is not in linear normal form: {0}")]
    NotNormalForm(String),
    #[error("assignment effects are cyclic")]
    CyclicAssignments,
}

// ---------------------------------------------------------------------------
// restricted language: constraints `v ≥|> c`, effects `v +=|-= c` with c > 0

struct RestrictedConstraint {
    var: usize,
    strict: bool,
    bound: Rational,
}

impl RestrictedConstraint {
    fn holds(&self, m: &[ExtRational]) -> bool {
        match &m[self.var] {
            ExtRational::PosInf => true,
            ExtRational::NegInf => false,
            ExtRational::Finite(x) => {
                if self.strict {
                    x > &self.bound
                } else {
                    x >= &self.bound
                }
            }
        }
    }
}

fn restricted_constraints(
    cs: &[crate::model::Constraint],
    what: &str,
) -> Result<Vec<RestrictedConstraint>, DeciderError> {
    cs.iter()
        .map(|c| match (&c.lhs, c.comp, &c.rhs) {
            (Expr::Var(v), Comparator::Ge | Comparator::Gt, Expr::Const(k)) => Ok(RestrictedConstraint {
                var: v.0,
                strict: c.comp == Comparator::Gt,
                bound: k.clone(),
            }),
            _ => Err(DeciderError::MalformedInput(format!("{what}: constraint is not `v >= c` or `v > c`"))),
        })
        .collect()
}

/// Decides relaxed solvability from `s` for a task in the restricted language.
pub fn decide_restricted(t: &NumericTask, s: &State) -> Result<RelaxedFixpoint, DeciderError> {
    let goal = restricted_constraints(&t.goal.constraints, "goal")?;
    let mut pres = Vec::with_capacity(t.actions.len());
    let mut increases: Vec<Vec<usize>> = Vec::with_capacity(t.actions.len());
    for a in &t.actions {
        pres.push(restricted_constraints(&a.pre.constraints, &a.name)?);
        let mut inc = Vec::new();
        for e in &a.eff.numeffs {
            match (&e.op, &e.rhs) {
                (AssignOp::Increase | AssignOp::Decrease, Expr::Const(c)) if c.is_positive() => {
                    if e.op == AssignOp::Increase {
                        inc.push(e.var.0);
                    }
                }
                _ => {
                    return Err(DeciderError::MalformedInput(format!(
                        "{}: effect is not `+=`/`-=` of a positive constant",
                        a.name
                    )))
                }
            }
        }
        increases.push(inc);
    }

    let mut reached = s.props.clone();
    reached.grow(t.props.len());
    let mut m: Vec<ExtRational> = s.vals.iter().cloned().map(ExtRational::Finite).collect();
    let mut iterations = 0;
    loop {
        let goal_met = t.goal.props.iter().all(|p| reached.contains(p.0)) && goal.iter().all(|k| k.holds(&m));
        if goal_met {
            return Ok(RelaxedFixpoint { reached, values: m, iterations, verdict: Verdict::Solvable });
        }
        iterations += 1;
        let available: Vec<usize> = (0..t.actions.len())
            .filter(|&i| {
                t.actions[i].pre.props.iter().all(|p| reached.contains(p.0)) && pres[i].iter().all(|k| k.holds(&m))
            })
            .collect();
        let mut next_reached = reached.clone();
        let mut next_m = m.clone();
        for &i in &available {
            for p in &t.actions[i].eff.adds {
                next_reached.insert(p.0);
            }
            for &v in &increases[i] {
                if m[v].is_finite() {
                    next_m[v] = ExtRational::PosInf;
                }
            }
        }
        if next_reached == reached && next_m == m {
            return Ok(RelaxedFixpoint { reached, values: m, iterations, verdict: Verdict::Unsolvable });
        }
        reached = next_reached;
        m = next_m;
    }
}

/// Decides relaxed solvability from `s` for a task in linear normal form
/// with acyclic assignment effects.
pub fn decide_strong(t: &LnfTask, s: &State) -> Result<RelaxedFixpoint, DeciderError> {
    let report = verify_lnf(t);
    if !report.ok() {
        return Err(DeciderError::NotNormalForm(report.violations.join("; ")));
    }
    if !check_acyclic(t).acyclic {
        return Err(DeciderError::CyclicAssignments);
    }
    Ok(decide_strong_unchecked(t, s))
}

pub(crate) fn decide_strong_unchecked(t: &LnfTask, s: &State) -> RelaxedFixpoint {
    let n = t.num_vars();
    let mut reached = s.props.clone();
    reached.grow(t.props.len());
    let mut m: Vec<ExtRational> = s.vals.iter().cloned().map(ExtRational::Finite).collect();
    let mut iterations = 0;
    loop {
        let goal_met = t.goal_props.iter().all(|p| reached.contains(p.0))
            && t.goal_nums.iter().all(|k| k.holds_ext(&m));
        if goal_met {
            return RelaxedFixpoint { reached, values: m, iterations, verdict: Verdict::Solvable };
        }
        iterations += 1;
        let available: Vec<&crate::lnf::LnfAction> = t
            .actions
            .iter()
            .filter(|a| {
                a.pre_props.iter().all(|p| reached.contains(p.0)) && a.pre_nums.iter().all(|k| k.holds_ext(&m))
            })
            .collect();
        let mut next_reached = reached.clone();
        let mut next_m = m.clone();
        for a in &available {
            for p in &a.adds {
                next_reached.insert(p.0);
            }
        }
        // increasing effects diverge
        for a in &available {
            for e in a.effects.iter().filter(|e| e.op == AssignOp::Increase) {
                if m[e.var.0].is_finite() && satisfies_ext(&e.rhs.eval_ext(&m), Comparator::Gt) {
                    next_m[e.var.0] = ExtRational::PosInf;
                }
            }
        }
        // assignments take the best available value
        for a in &available {
            for e in a.effects.iter().filter(|e| e.op == AssignOp::Assign) {
                let v = e.var.0;
                if !m[v].is_finite() {
                    continue;
                }
                let value = e.rhs.eval_ext(&m);
                if value > m[v] && value > next_m[v] {
                    next_m[v] = value;
                }
            }
        }
        debug_assert_eq!(next_m.len(), n);
        if next_reached == reached && next_m == m {
            return RelaxedFixpoint { reached, values: m, iterations, verdict: Verdict::Unsolvable };
        }
        reached = next_reached;
        m = next_m;
    }
}

// ---------------------------------------------------------------------------
// syntactic monotonicity

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityItem {
    pub location: String,
    pub monotone: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub items: Vec<MonotonicityItem>,
}

impl MonotonicityReport {
    pub fn all_monotone(&self) -> bool {
        self.items.iter().all(|i| i.monotone)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &MonotonicityItem> {
        self.items.iter().filter(|i| !i.monotone)
    }
}

/// Checks the sufficient syntactic criteria for monotonicity on a linear
/// task (in pre-normal or normal form): positive coefficients everywhere,
/// comparators `≥`/`>` against zero and only `:=`/`+=` effects. Items that
/// fail are flagged; nothing is verified semantically.
pub fn check_monotonic_structure(t: &LnfTask) -> MonotonicityReport {
    let mut items = Vec::new();
    let negative = |e: &crate::lnf::LnfExpr| -> Vec<String> {
        e.terms
            .iter()
            .filter(|(_, c)| !c.is_positive())
            .map(|(v, c)| format!("{c}*{}", t.var_name(*v)))
            .collect()
    };
    let mut constraint_item = |location: String, k: &crate::lnf::LnfConstraint| {
        let neg = negative(&k.expr);
        let reason = if !matches!(k.comp, Comparator::Ge | Comparator::Gt) {
            Some(format!("comparator {} is not monotone", k.comp.symbol()))
        } else if !neg.is_empty() {
            Some(format!("constraint decreases in {}", neg.join(", ")))
        } else {
            None
        };
        items.push(MonotonicityItem { location, monotone: reason.is_none(), reason });
    };
    for (i, k) in t.goal_nums.iter().enumerate() {
        constraint_item(format!("goal constraint {i}"), k);
    }
    for a in &t.actions {
        for (i, k) in a.pre_nums.iter().enumerate() {
            constraint_item(format!("{} precondition {i}", a.name), k);
        }
    }
    for a in &t.actions {
        for e in &a.effects {
            let location = format!("{} effect {} {}", a.name, t.var_name(e.var), e.op.symbol());
            let neg = negative(&e.rhs);
            let reason = match e.op {
                AssignOp::Decrease => Some("-= effect is not increasing".to_string()),
                AssignOp::Increase if !neg.is_empty() => Some(format!(
                    "added amount decreases in {} (strong monotonicity, condition 3)",
                    neg.join(", ")
                )),
                AssignOp::Assign if !neg.is_empty() => {
                    Some(format!("assigned value decreases in {} (condition 2)", neg.join(", ")))
                }
                _ => None,
            };
            items.push(MonotonicityItem { location, monotone: reason.is_none(), reason });
        }
    }
    MonotonicityReport { items }
}

/// Convenience: relaxed solvability of `t` from its initial state.
pub fn relaxed_solvable_from_init(t: &LnfTask) -> Result<Verdict, DeciderError> {
    Ok(decide_strong(t, &t.init)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lnf::{normalize, to_pre_lnf, fold_constants, LnfAction, LnfConstraint, LnfEffect, LnfExpr};
    use crate::model::{Action, Condition, Constraint, Effect, NumEffect, NumVar, PropId, VarId, BinOp};
    use crate::rational::{frac, int};

    fn nv(i: usize) -> NumVar {
        NumVar { id: VarId(i), name: format!("v{i}"), inverse_of: None }
    }

    fn numeric(vars: usize, init: Vec<Rational>, actions: Vec<Action>, goal: Condition) -> NumericTask {
        NumericTask {
            vars: (0..vars).map(nv).collect(),
            props: (0..2).map(|i| crate::model::Proposition { id: PropId(i), name: format!("p{i}") }).collect(),
            actions,
            init: State::new(2, init),
            goal,
            metric: None,
        }
    }

    fn act(effs: Vec<NumEffect>, adds: Vec<PropId>, dels: Vec<PropId>) -> Action {
        Action {
            id: ActionId(0),
            name: "a".into(),
            pre: Condition::default(),
            eff: Effect { adds, dels, numeffs: effs },
            cost: int(0),
        }
    }

    fn ge(v: usize, k: i64) -> Constraint {
        Constraint::new(Expr::Var(VarId(v)), Comparator::Ge, Expr::Const(int(k)))
    }

    #[test]
    fn deletes_are_ignored() {
        let t = numeric(0, vec![], vec![act(vec![], vec![PropId(1)], vec![PropId(0)])], Condition::default());
        let mut s = State::new(2, vec![]);
        s.set(PropId(0));
        let r = relaxed_apply(&t, &s, ActionId(0)).unwrap();
        assert!(r.has(PropId(0)) && r.has(PropId(1)));
    }

    #[test]
    fn decreasing_effect_is_skipped() {
        let t = to_pre_lnf(&fold_constants(&numeric(
            1,
            vec![int(0)],
            vec![act(
                vec![NumEffect { var: VarId(0), op: AssignOp::Decrease, rhs: Expr::Const(int(1)) }],
                vec![],
                vec![],
            )],
            Condition::default(),
        )))
        .unwrap();
        let r = relaxed_apply(&t, &t.init, ActionId(0)).unwrap();
        assert_eq!(r.vals, vec![int(0)]);
    }

    #[test]
    fn converging_effect() {
        // v += 1 - v/2 from v = 1
        let rhs = Expr::bin(BinOp::Sub, Expr::Const(int(1)), Expr::bin(BinOp::Div, Expr::Var(VarId(0)), Expr::Const(int(2))));
        let t = numeric(
            1,
            vec![int(1)],
            vec![act(vec![NumEffect { var: VarId(0), op: AssignOp::Increase, rhs }], vec![], vec![])],
            Condition::default(),
        );
        let mut s = t.init.clone();
        s = relaxed_apply(&t, &s, ActionId(0)).unwrap();
        assert_eq!(s.vals[0], frac(3, 2));
        for _ in 1..10 {
            s = relaxed_apply(&t, &s, ActionId(0)).unwrap();
        }
        assert_eq!(s.vals[0], int(2) - frac(1, 1024));
    }

    #[test]
    fn restricted_infinity_jump() {
        let t = numeric(
            1,
            vec![int(0)],
            vec![act(vec![NumEffect { var: VarId(0), op: AssignOp::Increase, rhs: Expr::Const(int(1)) }], vec![], vec![])],
            Condition { props: vec![], constraints: vec![ge(0, 1000)] },
        );
        let r = decide_restricted(&t, &t.init).unwrap();
        assert_eq!(r.verdict, Verdict::Solvable);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.values[0], ExtRational::PosInf);
    }

    #[test]
    fn restricted_fixpoint_fails() {
        let gt0 = Constraint::new(Expr::Var(VarId(0)), Comparator::Gt, Expr::Const(int(0)));
        let t = numeric(1, vec![int(0)], vec![], Condition { props: vec![], constraints: vec![gt0] });
        let r = decide_restricted(&t, &t.init).unwrap();
        assert_eq!(r.verdict, Verdict::Unsolvable);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn restricted_goal_already_true() {
        let t = numeric(1, vec![int(5)], vec![], Condition { props: vec![], constraints: vec![ge(0, 5)] });
        let r = decide_restricted(&t, &t.init).unwrap();
        assert_eq!((r.verdict, r.iterations), (Verdict::Solvable, 0));
    }

    #[test]
    fn restricted_rejects_other_languages() {
        let t = numeric(
            1,
            vec![int(0)],
            vec![act(vec![NumEffect { var: VarId(0), op: AssignOp::Assign, rhs: Expr::Const(int(1)) }], vec![], vec![])],
            Condition::default(),
        );
        assert!(matches!(decide_restricted(&t, &t.init), Err(DeciderError::MalformedInput(_))));
    }

    fn lnf(n: usize, init: Vec<Rational>, effects: Vec<Vec<LnfEffect>>, goal: Vec<LnfConstraint>) -> LnfTask {
        LnfTask {
            vars: (0..n).map(nv).collect(),
            original_vars: n,
            props: vec![],
            actions: effects
                .into_iter()
                .enumerate()
                .map(|(i, effects)| LnfAction {
                    id: ActionId(i),
                    name: format!("a{i}"),
                    source: ActionId(i),
                    pre_props: vec![],
                    pre_nums: vec![],
                    adds: vec![],
                    dels: vec![],
                    effects,
                    cost: int(0),
                })
                .collect(),
            init: State::new(0, init),
            goal_props: vec![],
            goal_nums: goal,
            metric: None,
        }
    }

    #[test]
    fn strong_running_example() {
        let t = numeric(
            1,
            vec![int(0)],
            vec![act(vec![NumEffect { var: VarId(0), op: AssignOp::Decrease, rhs: Expr::Const(int(1)) }], vec![], vec![])],
            Condition {
                props: vec![],
                constraints: vec![Constraint::new(Expr::Var(VarId(0)), Comparator::Lt, Expr::Const(int(0)))],
            },
        );
        let l = normalize(&t).unwrap();
        assert_eq!(decide_strong(&l, &l.init).unwrap().verdict, Verdict::Solvable);
    }

    #[test]
    fn strong_assignment_max_without_infinity() {
        // v1 := v0 + 5, goal v1 >= 5, v0 = 0 untouched
        let t = lnf(
            2,
            vec![int(0), int(0)],
            vec![vec![LnfEffect {
                var: VarId(1),
                op: AssignOp::Assign,
                rhs: LnfExpr::from_terms([(VarId(0), int(1))], int(5)),
            }]],
            vec![LnfConstraint::ge(LnfExpr::from_terms([(VarId(1), int(1))], int(-5)))],
        );
        let r = decide_strong(&t, &t.init).unwrap();
        assert_eq!(r.verdict, Verdict::Solvable);
        assert_eq!(r.values[1], ExtRational::from(int(5)));
    }

    #[test]
    fn strong_useless_assignment() {
        let t = lnf(
            1,
            vec![int(0)],
            vec![vec![LnfEffect { var: VarId(0), op: AssignOp::Assign, rhs: LnfExpr::constant(int(0)) }]],
            vec![LnfConstraint::ge(LnfExpr::from_terms([(VarId(0), int(1))], int(-1)))],
        );
        assert_eq!(decide_strong(&t, &t.init).unwrap().verdict, Verdict::Unsolvable);
    }

    #[test]
    fn strong_rejects_cycles() {
        let t = lnf(
            2,
            vec![int(0), int(0)],
            vec![vec![
                LnfEffect { var: VarId(0), op: AssignOp::Assign, rhs: LnfExpr::var(VarId(1)) },
                LnfEffect { var: VarId(1), op: AssignOp::Assign, rhs: LnfExpr::var(VarId(0)) },
            ]],
            vec![],
        );
        assert_eq!(decide_strong(&t, &t.init), Err(DeciderError::CyclicAssignments));
    }

    #[test]
    fn monotonicity_flags() {
        let t = lnf(
            1,
            vec![int(0)],
            vec![vec![LnfEffect {
                var: VarId(0),
                op: AssignOp::Increase,
                rhs: LnfExpr::from_terms([(VarId(0), int(-1))], int(10)),
            }]],
            vec![LnfConstraint::ge(LnfExpr::from_terms([(VarId(0), int(-1))], int(0)))],
        );
        let r = check_monotonic_structure(&t);
        let flagged: Vec<_> = r.flagged().map(|i| i.location.clone()).collect();
        assert_eq!(flagged.len(), 2);
        assert!(r.flagged().any(|i| i.reason.as_ref().unwrap().contains("condition 3")));

        let good = lnf(
            1,
            vec![int(0)],
            vec![vec![LnfEffect { var: VarId(0), op: AssignOp::Increase, rhs: LnfExpr::constant(int(1)) }]],
            vec![LnfConstraint::ge(LnfExpr::var(VarId(0)))],
        );
        assert!(check_monotonic_structure(&good).all_monotone());
    }
}
