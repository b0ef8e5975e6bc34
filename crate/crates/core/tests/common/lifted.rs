//! Interprets operator schemata directly on lifted states, without grounding.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use lnfplan::frontend::ast::{AtomT, ConditionT, GroundAtom, NumExprT, OperatorSchema, ParsedTask, Term};
use lnfplan::model::{AssignOp, BinOp, Comparator};
use lnfplan::rational::Rational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedState {
    pub atoms: BTreeSet<GroundAtom>,
    pub values: BTreeMap<GroundAtom, Rational>,
}

pub struct Interpreter<'a> {
    pub task: &'a ParsedTask,
    objects: Vec<(String, String)>,
}

type Binding = HashMap<String, String>;

fn ground(a: &AtomT, b: &Binding) -> GroundAtom {
    GroundAtom {
        symbol: a.symbol.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => b[v].clone(),
                Term::Const(c) => c.clone(),
            })
            .collect(),
    }
}

fn eval(e: &NumExprT, b: &Binding, s: &LiftedState) -> Option<Rational> {
    Some(match e {
        NumExprT::Num(n) => n.clone(),
        NumExprT::Fluent(f) => s.values.get(&ground(f, b))?.clone(),
        NumExprT::Bin(op, l, r) => {
            let (x, y) = (eval(l, b, s)?, eval(r, b, s)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y.is_zero() => return None,
                BinOp::Div => x / y,
            }
        }
    })
}

fn cmp(x: &Rational, c: Comparator, y: &Rational) -> bool {
    match c {
        Comparator::Lt => x < y,
        Comparator::Le => x <= y,
        Comparator::Eq => x == y,
        Comparator::Ge => x >= y,
        Comparator::Gt => x > y,
    }
}

fn satisfied(c: &ConditionT, b: &Binding, s: &LiftedState) -> bool {
    c.atoms.iter().all(|a| s.atoms.contains(&ground(a, b)))
        && c.comparisons.iter().all(|k| match (eval(&k.lhs, b, s), eval(&k.rhs, b, s)) {
            (Some(x), Some(y)) => cmp(&x, k.comp, &y),
            _ => false,
        })
}

impl<'a> Interpreter<'a> {
    pub fn new(task: &'a ParsedTask) -> Self {
        Interpreter { task, objects: task.objects() }
    }

    pub fn initial(&self) -> LiftedState {
        LiftedState {
            atoms: self.task.problem.init_atoms.iter().cloned().collect(),
            values: self.task.problem.init_values.clone(),
        }
    }

    pub fn goal(&self, s: &LiftedState) -> bool {
        satisfied(&self.task.problem.goal, &Binding::new(), s)
    }

    fn candidates(&self, types: &[String]) -> Vec<String> {
        self.objects
            .iter()
            .filter(|(_, ty)| types.iter().any(|t| self.task.is_subtype(ty, t)))
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Every full binding of the schema's parameters, in declaration order.
    fn bindings(&self, op: &OperatorSchema) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for p in &op.params {
            let cands = self.candidates(&p.types);
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<String>| {
                    cands.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c.clone());
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn binding(op: &OperatorSchema, args: &[String]) -> Binding {
        op.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect()
    }

    fn name(op: &OperatorSchema, args: &[String]) -> String {
        let mut n = format!("({}", op.name);
        for a in args {
            n.push(' ');
            n.push_str(a);
        }
        n.push(')');
        n
    }

    fn successor(op: &OperatorSchema, b: &Binding, s: &LiftedState) -> Option<LiftedState> {
        if !satisfied(&op.pre, b, s) {
            return None;
        }
        let mut next = s.clone();
        for d in &op.eff.dels {
            next.atoms.remove(&ground(d, b));
        }
        for a in &op.eff.adds {
            next.atoms.insert(ground(a, b));
        }
        for e in &op.eff.numeffs {
            let f = ground(&e.fluent, b);
            let r = eval(&e.rhs, b, s)?;
            let old = s.values.get(&f);
            let v = match e.op {
                AssignOp::Assign => r,
                AssignOp::Increase => old? + r,
                AssignOp::Decrease => old? - r,
            };
            next.values.insert(f, v);
        }
        Some(next)
    }

    /// Names of all applicable ground actions with their successors.
    pub fn successors(&self, s: &LiftedState) -> BTreeMap<String, LiftedState> {
        let mut out = BTreeMap::new();
        for op in &self.task.domain.actions {
            for args in self.bindings(op) {
                let b = Self::binding(op, &args);
                if let Some(n) = Self::successor(op, &b, s) {
                    out.insert(Self::name(op, &args), n);
                }
            }
        }
        out
    }

    /// Applies the action with the given printed name.
    pub fn apply(&self, s: &LiftedState, name: &str) -> Option<LiftedState> {
        let inner = name.trim().trim_start_matches('(').trim_end_matches(')');
        let mut words = inner.split_whitespace();
        let head = words.next()?;
        let args: Vec<String> = words.map(str::to_string).collect();
        let op = self.task.domain.actions.iter().find(|o| o.name == head)?;
        if op.params.len() != args.len() {
            return None;
        }
        for (p, a) in op.params.iter().zip(&args) {
            if !self.candidates(&p.types).contains(a) {
                return None;
            }
        }
        Self::successor(op, &Self::binding(op, &args), s)
    }

    /// Follows `plan` from the initial state; `None` at the first
    /// inapplicable step.
    pub fn run<S: AsRef<str>>(&self, plan: &[S]) -> Option<LiftedState> {
        let mut s = self.initial();
        for step in plan {
            s = self.apply(&s, step.as_ref())?;
        }
        Some(s)
    }
}
