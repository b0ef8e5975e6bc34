//! Instantiation of operator schemata into a ground task.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::model::{
    Action, ActionId, BinOp, Condition, Constraint, Effect, Expr, MetricSpec, NumEffect, NumVar, NumericTask, PropId,
    Proposition, State, VarId,
};
use crate::rational::{int, Rational};

use super::ast::{AtomT, ComparisonT, ConditionT, GroundAtom, NumExprT, OperatorSchema, ParsedTask, Term};
use super::FrontendError;

/// Fluent atoms and comparisons of a ground condition.
type GroundCondition = (Vec<GroundAtom>, Vec<(GExpr, crate::model::Comparator, GExpr)>);

/// Predicates and functions no operator changes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StaticsReport {
    pub predicates: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

pub fn statics(p: &ParsedTask) -> StaticsReport {
    let mut changed_preds = BTreeSet::new();
    let mut changed_funcs = BTreeSet::new();
    for a in &p.domain.actions {
        for atom in a.eff.adds.iter().chain(&a.eff.dels) {
            changed_preds.insert(atom.symbol.clone());
        }
        for e in &a.eff.numeffs {
            changed_funcs.insert(e.fluent.symbol.clone());
        }
    }
    StaticsReport {
        predicates: p.domain.predicates.iter().map(|s| s.name.clone()).filter(|n| !changed_preds.contains(n)).collect(),
        functions: p.domain.functions.iter().map(|s| s.name.clone()).filter(|n| !changed_funcs.contains(n)).collect(),
    }
}

fn bind(a: &AtomT, binding: &BTreeMap<&str, &str>) -> GroundAtom {
    GroundAtom {
        symbol: a.symbol.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => binding[v.as_str()].to_string(),
            })
            .collect(),
    }
}

/// Ground expression over named fluents.
#[derive(Clone, Debug, PartialEq, Eq)]
enum GExpr {
    Num(Rational),
    Fluent(GroundAtom),
    Bin(BinOp, Box<GExpr>, Box<GExpr>),
}

impl GExpr {
    fn constant(&self) -> Option<Option<Rational>> {
        match self {
            GExpr::Num(r) => Some(Some(r.clone())),
            GExpr::Fluent(_) => None,
            GExpr::Bin(op, l, r) => {
                let (a, b) = (l.constant()?, r.constant()?);
                Some(match (a, b) {
                    (Some(a), Some(b)) => crate::model::eval_expr(
                        &Expr::bin(*op, Expr::Const(a), Expr::Const(b)),
                        &[],
                    ),
                    _ => None,
                })
            }
        }
    }

    fn fluents<'e>(&'e self, out: &mut Vec<&'e GroundAtom>) {
        match self {
            GExpr::Num(_) => {}
            GExpr::Fluent(f) => out.push(f),
            GExpr::Bin(_, l, r) => {
                l.fluents(out);
                r.fluents(out);
            }
        }
    }

    fn to_expr(&self, vars: &BTreeMap<GroundAtom, VarId>) -> Expr {
        match self {
            GExpr::Num(r) => Expr::Const(r.clone()),
            GExpr::Fluent(f) => Expr::Var(vars[f]),
            GExpr::Bin(op, l, r) => Expr::bin(*op, l.to_expr(vars), r.to_expr(vars)),
        }
    }
}

struct Grounder<'p> {
    task: &'p ParsedTask,
    statics: StaticsReport,
    init_atoms: HashSet<GroundAtom>,
    objects: Vec<(String, String)>,
}

enum GCmp {
    True,
    False,
    Keep(GExpr, crate::model::Comparator, GExpr),
}

impl Grounder<'_> {
    fn expr(&self, e: &NumExprT, binding: &BTreeMap<&str, &str>) -> Result<GExpr, FrontendError> {
        Ok(match e {
            NumExprT::Num(r) => GExpr::Num(r.clone()),
            NumExprT::Fluent(a) => {
                let g = bind(a, binding);
                if self.statics.functions.contains(&g.symbol) {
                    match self.task.problem.init_values.get(&g) {
                        Some(v) => GExpr::Num(v.clone()),
                        None => return Err(FrontendError::UninitializedFluent(g.name())),
                    }
                } else {
                    GExpr::Fluent(g)
                }
            }
            NumExprT::Bin(op, l, r) => GExpr::Bin(*op, Box::new(self.expr(l, binding)?), Box::new(self.expr(r, binding)?)),
        })
    }

    fn comparison(&self, c: &ComparisonT, binding: &BTreeMap<&str, &str>) -> Result<GCmp, FrontendError> {
        let lhs = self.expr(&c.lhs, binding)?;
        let rhs = self.expr(&c.rhs, binding)?;
        Ok(match (lhs.constant(), rhs.constant()) {
            (Some(Some(a)), Some(Some(b))) => {
                if c.comp.compare(&a, &b) {
                    GCmp::True
                } else {
                    GCmp::False
                }
            }
            // an undefined constant side never holds
            (Some(None), _) | (_, Some(None)) => GCmp::False,
            _ => GCmp::Keep(lhs, c.comp, rhs),
        })
    }

    fn static_holds(&self, a: &AtomT, binding: &BTreeMap<&str, &str>) -> bool {
        self.init_atoms.contains(&bind(a, binding))
    }

    fn is_static(&self, a: &AtomT) -> bool {
        self.statics.predicates.contains(&a.symbol)
    }

    /// Fluent atoms, static predicates and comparisons of a goal-like
    /// condition. `None` if it can never hold.
    fn condition(
        &self,
        c: &ConditionT,
        binding: &BTreeMap<&str, &str>,
    ) -> Result<Option<GroundCondition>, FrontendError> {
        let mut atoms = Vec::new();
        for a in &c.atoms {
            if self.is_static(a) {
                if !self.static_holds(a, binding) {
                    return Ok(None);
                }
            } else {
                let g = bind(a, binding);
                if !atoms.contains(&g) {
                    atoms.push(g);
                }
            }
        }
        let mut cmps = Vec::new();
        for k in &c.comparisons {
            match self.comparison(k, binding)? {
                GCmp::True => {}
                GCmp::False => return Ok(None),
                GCmp::Keep(l, op, r) => cmps.push((l, op, r)),
            }
        }
        Ok(Some((atoms, cmps)))
    }

    fn bindings<'s>(&'s self, schema: &'s OperatorSchema) -> Vec<BTreeMap<&'s str, &'s str>> {
        let objects = &self.objects;
        let candidates: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| {
                objects
                    .iter()
                    .filter(|(_, t)| p.types.iter().any(|pt| self.task.is_subtype(t, pt)))
                    .map(|(n, _)| n.as_str())
                    .collect()
            })
            .collect();
        // static atoms are checked as soon as their last parameter is bound
        let mut checks: Vec<Vec<&AtomT>> = vec![Vec::new(); schema.params.len() + 1];
        for a in schema.pre.atoms.iter().filter(|a| self.is_static(a)) {
            let last = a
                .args
                .iter()
                .filter_map(|t| match t {
                    Term::Var(v) => schema.params.iter().position(|p| &p.name == v).map(|i| i + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[last].push(a);
        }
        let mut out = Vec::new();
        let mut binding = BTreeMap::new();
        if checks[0].iter().all(|a| self.static_holds(a, &binding)) {
            self.extend(schema, &candidates, &checks, 0, &mut binding, &mut out);
        }
        out
    }

    fn extend<'s>(
        &self,
        schema: &'s OperatorSchema,
        candidates: &[Vec<&'s str>],
        checks: &[Vec<&AtomT>],
        i: usize,
        binding: &mut BTreeMap<&'s str, &'s str>,
        out: &mut Vec<BTreeMap<&'s str, &'s str>>,
    ) {
        if i == schema.params.len() {
            out.push(binding.clone());
            return;
        }
        for &o in &candidates[i] {
            binding.insert(schema.params[i].name.as_str(), o);
            if checks[i + 1].iter().all(|a| self.static_holds(a, binding)) {
                self.extend(schema, candidates, checks, i + 1, binding, out);
            }
        }
        binding.remove(schema.params[i].name.as_str());
    }
}

struct GroundAction {
    name: String,
    pre_atoms: Vec<GroundAtom>,
    pre_cmps: Vec<(GExpr, crate::model::Comparator, GExpr)>,
    adds: Vec<GroundAtom>,
    dels: Vec<GroundAtom>,
    numeffs: Vec<(GroundAtom, crate::model::AssignOp, GExpr)>,
}

impl Grounder<'_> {
    fn instantiate(&self) -> Result<Vec<GroundAction>, FrontendError> {
        let mut out = Vec::new();
        for schema in &self.task.domain.actions {
            'binding: for binding in self.bindings(schema) {
                let Some((pre_atoms, pre_cmps)) = self.condition(&schema.pre, &binding)? else { continue };
                let mut numeffs: Vec<(GroundAtom, crate::model::AssignOp, GExpr)> = Vec::new();
                for e in &schema.eff.numeffs {
                    let target = bind(&e.fluent, &binding);
                    if numeffs.iter().any(|(t, _, _)| *t == target) {
                        // two updates of one fluent have no defined outcome
                        continue 'binding;
                    }
                    numeffs.push((target, e.op, self.expr(&e.rhs, &binding)?));
                }
                let mut name = format!("({}", schema.name);
                for par in &schema.params {
                    name.push(' ');
                    name.push_str(binding[par.name.as_str()]);
                }
                name.push(')');
                let ground = |atoms: &[AtomT]| -> Vec<GroundAtom> {
                    let mut v: Vec<GroundAtom> = Vec::new();
                    for a in atoms {
                        let g = bind(a, &binding);
                        if !v.contains(&g) {
                            v.push(g);
                        }
                    }
                    v
                };
                out.push(GroundAction {
                    name,
                    pre_atoms,
                    pre_cmps,
                    adds: ground(&schema.eff.adds),
                    dels: ground(&schema.eff.dels),
                    numeffs,
                });
            }
        }
        Ok(out)
    }

    fn run(&self) -> Result<NumericTask, FrontendError> {
        let candidates = self.instantiate()?;

        // propositional relaxed reachability, numeric conditions ignored
        let mut facts: BTreeSet<GroundAtom> = self.init_atoms.iter().filter(|a| !self.statics.predicates.contains(&a.symbol)).cloned().collect();
        let mut reached = vec![false; candidates.len()];
        loop {
            let mut changed = false;
            for (i, a) in candidates.iter().enumerate() {
                if !reached[i] && a.pre_atoms.iter().all(|p| facts.contains(p)) {
                    reached[i] = true;
                    changed = true;
                    facts.extend(a.adds.iter().cloned());
                }
            }
            if !changed {
                break;
            }
        }
        let actions: Vec<&GroundAction> = candidates.iter().zip(&reached).filter(|(_, r)| **r).map(|(a, _)| a).collect();

        let no_binding = BTreeMap::new();
        let goal = self.condition(&self.task.problem.goal, &no_binding)?;
        let metric = match &self.task.problem.metric {
            Some(m) => Some((m.direction, self.expr(&m.expr, &no_binding)?)),
            None => None,
        };

        let mut prop_names: BTreeSet<GroundAtom> = facts;
        if let Some((atoms, _)) = &goal {
            prop_names.extend(atoms.iter().cloned());
        }
        let prop_ids: BTreeMap<GroundAtom, PropId> =
            prop_names.iter().enumerate().map(|(i, a)| (a.clone(), PropId(i))).collect();

        let mut fluents: BTreeSet<GroundAtom> = BTreeSet::new();
        let note = |e: &GExpr, fluents: &mut BTreeSet<GroundAtom>| {
            let mut v = Vec::new();
            e.fluents(&mut v);
            fluents.extend(v.into_iter().cloned());
        };
        for a in &actions {
            for (l, _, r) in &a.pre_cmps {
                note(l, &mut fluents);
                note(r, &mut fluents);
            }
            for (t, _, rhs) in &a.numeffs {
                fluents.insert(t.clone());
                note(rhs, &mut fluents);
            }
        }
        if let Some((_, cmps)) = &goal {
            for (l, _, r) in cmps {
                note(l, &mut fluents);
                note(r, &mut fluents);
            }
        }
        if let Some((_, e)) = &metric {
            note(e, &mut fluents);
        }
        let mut vals = Vec::with_capacity(fluents.len());
        for f in &fluents {
            match self.task.problem.init_values.get(f) {
                Some(v) => vals.push(v.clone()),
                None => return Err(FrontendError::UninitializedFluent(f.name())),
            }
        }
        let var_ids: BTreeMap<GroundAtom, VarId> = fluents.iter().enumerate().map(|(i, f)| (f.clone(), VarId(i))).collect();

        let constraint = |(l, op, r): &(GExpr, crate::model::Comparator, GExpr)| {
            Constraint::new(l.to_expr(&var_ids), *op, r.to_expr(&var_ids))
        };
        let props_of = |atoms: &[GroundAtom]| -> Vec<PropId> { atoms.iter().filter_map(|a| prop_ids.get(a).copied()).collect() };

        let mut model_actions = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            model_actions.push(Action {
                id: ActionId(i),
                name: a.name.clone(),
                pre: Condition { props: props_of(&a.pre_atoms), constraints: a.pre_cmps.iter().map(constraint).collect() },
                eff: Effect {
                    adds: props_of(&a.adds),
                    dels: props_of(&a.dels),
                    numeffs: a
                        .numeffs
                        .iter()
                        .map(|(t, op, rhs)| NumEffect { var: var_ids[t], op: *op, rhs: rhs.to_expr(&var_ids) })
                        .collect(),
                },
                cost: int(1),
            });
        }
        let goal = match &goal {
            Some((atoms, cmps)) => Condition { props: props_of(atoms), constraints: cmps.iter().map(constraint).collect() },
            None => Condition { props: Vec::new(), constraints: vec![Constraint::falsum()] },
        };
        let mut init = State::new(prop_ids.len(), vals);
        for a in &self.task.problem.init_atoms {
            if let Some(p) = prop_ids.get(a) {
                init.set(*p);
            }
        }
        Ok(NumericTask {
            vars: fluents
                .iter()
                .enumerate()
                .map(|(i, f)| NumVar { id: VarId(i), name: f.name(), inverse_of: None })
                .collect(),
            props: prop_names.iter().enumerate().map(|(i, a)| Proposition { id: PropId(i), name: a.name() }).collect(),
            actions: model_actions,
            init,
            goal,
            metric: metric.map(|(direction, e)| MetricSpec { direction, expr: e.to_expr(&var_ids) }),
        })
    }
}

/// Instantiates every operator schema with type-consistent objects, removes
/// instantiations whose static preconditions are false or that are not
/// reachable in the propositional relaxation from the initial state, and
/// substitutes static fluents by their initial values.
pub fn ground_task(p: &ParsedTask) -> Result<NumericTask, FrontendError> {
    Grounder {
        task: p,
        statics: statics(p),
        init_atoms: p.problem.init_atoms.iter().cloned().collect(),
        objects: p.objects(),
    }
    .run()
}
