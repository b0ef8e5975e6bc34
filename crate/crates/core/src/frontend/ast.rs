//! Lifted representation of domain and problem files.

use std::collections::BTreeMap;

use crate::model::{AssignOp, BinOp, Comparator, MetricDirection};
use crate::rational::{parse_decimal, Rational};

use super::sexpr::{parse_error, Pos, SExpr};
use super::FrontendError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomT {
    pub symbol: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumExprT {
    Num(Rational),
    Fluent(AtomT),
    Bin(BinOp, Box<NumExprT>, Box<NumExprT>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonT {
    pub lhs: NumExprT,
    pub comp: Comparator,
    pub rhs: NumExprT,
}

/// Conjunction of atoms and numeric comparisons.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionT {
    pub atoms: Vec<AtomT>,
    pub comparisons: Vec<ComparisonT>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumEffectT {
    pub fluent: AtomT,
    pub op: AssignOp,
    pub rhs: NumExprT,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EffectT {
    pub adds: Vec<AtomT>,
    pub dels: Vec<AtomT>,
    pub numeffs: Vec<NumEffectT>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    /// Admissible types; more than one for `(either ...)`.
    pub types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    pub pre: ConditionT,
    pub eff: EffectT,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<Parameter>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    /// Type name to its declared parent types.
    pub types: BTreeMap<String, Vec<String>>,
    /// `(name, type)` pairs.
    pub constants: Vec<(String, String)>,
    pub predicates: Vec<Signature>,
    pub functions: Vec<Signature>,
    pub actions: Vec<OperatorSchema>,
}

/// A ground atom or fluent: symbol plus object names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub symbol: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn name(&self) -> String {
        if self.args.is_empty() {
            format!("({})", self.symbol)
        } else {
            format!("({} {})", self.symbol, self.args.join(" "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricT {
    pub direction: MetricDirection,
    pub expr: NumExprT,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<(String, String)>,
    pub init_atoms: Vec<GroundAtom>,
    pub init_values: BTreeMap<GroundAtom, Rational>,
    pub goal: ConditionT,
    pub metric: Option<MetricT>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedTask {
    pub domain: Domain,
    pub problem: Problem,
}

impl ParsedTask {
    /// Declared objects and domain constants with their types.
    pub fn objects(&self) -> Vec<(String, String)> {
        let mut out = self.domain.constants.clone();
        for o in &self.problem.objects {
            if !out.iter().any(|(n, _)| n == &o.0) {
                out.push(o.clone());
            }
        }
        out
    }

    /// `true` if type `sub` equals or (transitively) specializes `sup`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == "object" {
            return true;
        }
        let mut stack = vec![sub.to_string()];
        let mut seen = Vec::new();
        while let Some(t) = stack.pop() {
            if t == sup {
                return true;
            }
            if seen.contains(&t) {
                continue;
            }
            if let Some(parents) = self.domain.types.get(&t) {
                stack.extend(parents.iter().cloned());
            }
            seen.push(t);
        }
        false
    }
}

// ---------------------------------------------------------------------------

const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":fluents", ":numeric-fluents", ":equality", ":action-costs"];
const UNSUPPORTED_REQUIREMENTS: &[&str] = &[
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":existential-preconditions",
    ":universal-preconditions",
    ":quantified-preconditions",
    ":conditional-effects",
    ":adl",
    ":durative-actions",
    ":duration-inequalities",
    ":continuous-effects",
    ":derived-predicates",
    ":timed-initial-literals",
    ":preferences",
    ":constraints",
];

fn unsupported(pos: Pos, feature: &str) -> FrontendError {
    FrontendError::UnsupportedFeature { feature: feature.to_string(), line: pos.line, col: pos.col }
}

fn expect_list<'e>(e: &'e SExpr, what: &str) -> Result<&'e [SExpr], FrontendError> {
    e.list().ok_or_else(|| parse_error(e.pos(), format!("expected {what}")))
}

fn expect_atom<'e>(e: &'e SExpr, what: &str) -> Result<&'e str, FrontendError> {
    e.atom().ok_or_else(|| parse_error(e.pos(), format!("expected {what}")))
}

fn is_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn expect_name<'e>(e: &'e SExpr, what: &str) -> Result<&'e str, FrontendError> {
    let s = expect_atom(e, what)?;
    if is_name(s) {
        Ok(s)
    } else {
        Err(parse_error(e.pos(), format!("expected {what}, found '{s}'")))
    }
}

/// Splits a typed list `a b - t c - u d` into `(name, types)` pairs. Untyped
/// trailing names get `object`.
fn typed_list(items: &[SExpr], vars: bool) -> Result<Vec<(String, Vec<String>)>, FrontendError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        if e.atom() == Some("-") {
            let Some(t) = items.get(i + 1) else {
                return Err(parse_error(e.pos(), "missing type after '-'"));
            };
            let types = match t {
                SExpr::Atom(..) => vec![expect_name(t, "type name")?.to_string()],
                SExpr::List(l, _) if t.head() == Some("either") => {
                    l[1..].iter().map(|x| expect_name(x, "type name").map(str::to_string)).collect::<Result<_, _>>()?
                }
                _ => return Err(parse_error(t.pos(), "expected type name")),
            };
            if pending.is_empty() {
                return Err(parse_error(e.pos(), "type without names"));
            }
            for n in pending.drain(..) {
                out.push((n, types.clone()));
            }
            i += 2;
            continue;
        }
        let s = expect_atom(e, "name")?;
        let ok = if vars { s.starts_with('?') && is_name(&s[1..]) } else { is_name(s) };
        if !ok {
            return Err(parse_error(e.pos(), format!("unexpected '{s}' in typed list")));
        }
        pending.push(s.to_string());
        i += 1;
    }
    for n in pending {
        out.push((n, vec!["object".to_string()]));
    }
    Ok(out)
}

fn parameters(items: &[SExpr]) -> Result<Vec<Parameter>, FrontendError> {
    Ok(typed_list(items, true)?.into_iter().map(|(name, types)| Parameter { name, types }).collect())
}

fn signature(e: &SExpr) -> Result<Signature, FrontendError> {
    let l = expect_list(e, "declaration")?;
    let name = expect_name(l.first().ok_or_else(|| parse_error(e.pos(), "empty declaration"))?, "symbol")?;
    Ok(Signature { name: name.to_string(), params: parameters(&l[1..])? })
}

fn term(e: &SExpr, params: Option<&[Parameter]>) -> Result<Term, FrontendError> {
    let s = expect_atom(e, "term")?;
    if let Some(v) = s.strip_prefix('?') {
        if !is_name(v) {
            return Err(parse_error(e.pos(), format!("bad variable '{s}'")));
        }
        match params {
            Some(ps) if !ps.iter().any(|p| p.name == s) => {
                Err(parse_error(e.pos(), format!("undeclared parameter '{s}'")))
            }
            None => Err(parse_error(e.pos(), format!("variable '{s}' outside an action"))),
            _ => Ok(Term::Var(s.to_string())),
        }
    } else if is_name(s) {
        Ok(Term::Const(s.to_string()))
    } else {
        Err(parse_error(e.pos(), format!("bad term '{s}'")))
    }
}

struct Ctx<'d> {
    predicates: &'d [Signature],
    functions: &'d [Signature],
    params: Option<&'d [Parameter]>,
}

impl Ctx<'_> {
    fn atom_of(&self, e: &SExpr, decls: &[Signature], kind: &str) -> Result<AtomT, FrontendError> {
        let l = expect_list(e, kind)?;
        let head = l.first().ok_or_else(|| parse_error(e.pos(), format!("empty {kind}")))?;
        let symbol = expect_name(head, kind)?;
        let Some(decl) = decls.iter().find(|d| d.name == symbol) else {
            return Err(parse_error(head.pos(), format!("unknown {kind} '{symbol}'")));
        };
        let args = l[1..].iter().map(|a| term(a, self.params)).collect::<Result<Vec<_>, _>>()?;
        if args.len() != decl.params.len() {
            return Err(parse_error(
                e.pos(),
                format!("{kind} '{symbol}' takes {} arguments, got {}", decl.params.len(), args.len()),
            ));
        }
        Ok(AtomT { symbol: symbol.to_string(), args, pos: e.pos() })
    }

    fn atom(&self, e: &SExpr) -> Result<AtomT, FrontendError> {
        self.atom_of(e, self.predicates, "predicate")
    }

    fn fluent(&self, e: &SExpr) -> Result<AtomT, FrontendError> {
        self.atom_of(e, self.functions, "function")
    }

    fn num_expr(&self, e: &SExpr) -> Result<NumExprT, FrontendError> {
        match e {
            SExpr::Atom(s, pos) => match parse_decimal(s) {
                Some(r) => Ok(NumExprT::Num(r)),
                None if s.starts_with('?') || s.starts_with('#') => Err(unsupported(*pos, s)),
                None => Err(parse_error(*pos, format!("expected a number, found '{s}'"))),
            },
            SExpr::List(l, pos) => {
                let op = match e.head() {
                    Some("+") => BinOp::Add,
                    Some("-") => BinOp::Sub,
                    Some("*") => BinOp::Mul,
                    Some("/") => BinOp::Div,
                    _ => return Ok(NumExprT::Fluent(self.fluent(e)?)),
                };
                let args = l[1..].iter().map(|a| self.num_expr(a)).collect::<Result<Vec<_>, _>>()?;
                match (op, args.len()) {
                    (_, 0) => Err(parse_error(*pos, "operator without operands")),
                    (BinOp::Sub, 1) => Ok(NumExprT::Bin(
                        BinOp::Sub,
                        Box::new(NumExprT::Num(Rational::from_integer(0.into()))),
                        Box::new(args.into_iter().next().unwrap()),
                    )),
                    (BinOp::Sub | BinOp::Div, n) if n != 2 => {
                        Err(parse_error(*pos, "'-' and '/' take one or two operands"))
                    }
                    (_, 1) => Err(parse_error(*pos, "operator needs two operands")),
                    _ => {
                        let mut it = args.into_iter();
                        let first = it.next().unwrap();
                        Ok(it.fold(first, |acc, x| NumExprT::Bin(op, Box::new(acc), Box::new(x))))
                    }
                }
            }
        }
    }

    fn condition(&self, e: &SExpr, out: &mut ConditionT) -> Result<(), FrontendError> {
        let l = expect_list(e, "condition")?;
        let Some(head) = e.head() else {
            if l.is_empty() {
                return Ok(());
            }
            return Err(parse_error(e.pos(), "expected condition"));
        };
        let comp = match head {
            "and" => {
                for c in &l[1..] {
                    self.condition(c, out)?;
                }
                return Ok(());
            }
            "not" => return Err(unsupported(e.pos(), "negative precondition")),
            "or" | "imply" | "forall" | "exists" | "when" | "preference" => return Err(unsupported(e.pos(), head)),
            "<" => Some(Comparator::Lt),
            "<=" => Some(Comparator::Le),
            "=" => Some(Comparator::Eq),
            ">=" => Some(Comparator::Ge),
            ">" => Some(Comparator::Gt),
            _ => None,
        };
        match comp {
            Some(comp) => {
                if l.len() != 3 {
                    return Err(parse_error(e.pos(), "comparison takes two operands"));
                }
                out.comparisons.push(ComparisonT { lhs: self.num_expr(&l[1])?, comp, rhs: self.num_expr(&l[2])? });
            }
            None => out.atoms.push(self.atom(e)?),
        }
        Ok(())
    }

    fn effect(&self, e: &SExpr, out: &mut EffectT) -> Result<(), FrontendError> {
        let l = expect_list(e, "effect")?;
        let Some(head) = e.head() else {
            if l.is_empty() {
                return Ok(());
            }
            return Err(parse_error(e.pos(), "expected effect"));
        };
        let op = match head {
            "and" => {
                for c in &l[1..] {
                    self.effect(c, out)?;
                }
                return Ok(());
            }
            "not" => {
                if l.len() != 2 {
                    return Err(parse_error(e.pos(), "'not' takes one atom"));
                }
                out.dels.push(self.atom(&l[1])?);
                return Ok(());
            }
            "forall" | "when" | "scale-up" | "scale-down" => return Err(unsupported(e.pos(), head)),
            "at" | "over" if matches!(l.get(1).and_then(SExpr::atom), Some("start" | "end" | "all")) => {
                return Err(unsupported(e.pos(), "durative effect"))
            }
            "increase" => Some(AssignOp::Increase),
            "decrease" => Some(AssignOp::Decrease),
            "assign" => Some(AssignOp::Assign),
            _ => None,
        };
        match op {
            Some(op) => {
                if l.len() != 3 {
                    return Err(parse_error(e.pos(), format!("'{head}' takes a fluent and an expression")));
                }
                let fluent = self.fluent(&l[1])?;
                if out.numeffs.iter().any(|x| x.fluent.symbol == fluent.symbol && x.fluent.args == fluent.args) {
                    return Err(parse_error(e.pos(), "two updates of the same fluent"));
                }
                out.numeffs.push(NumEffectT { fluent, op, rhs: self.num_expr(&l[2])? });
            }
            None => out.adds.push(self.atom(e)?),
        }
        Ok(())
    }
}

fn section(e: &SExpr) -> Result<(&str, &[SExpr]), FrontendError> {
    let l = expect_list(e, "section")?;
    let head = l.first().and_then(SExpr::atom).ok_or_else(|| parse_error(e.pos(), "expected section keyword"))?;
    Ok((head, &l[1..]))
}

fn header<'e>(top: &'e SExpr, kind: &str) -> Result<(String, &'e [SExpr]), FrontendError> {
    let l = expect_list(top, "'(define'")?;
    if top.head() != Some("define") {
        return Err(parse_error(top.pos(), "expected '(define'"));
    }
    let h = l.get(1).ok_or_else(|| parse_error(top.pos(), format!("missing ({kind} ...)")))?;
    let hl = expect_list(h, kind)?;
    if h.head() != Some(kind) || hl.len() != 2 {
        return Err(parse_error(h.pos(), format!("expected ({kind} <name>)")));
    }
    Ok((expect_name(&hl[1], "name")?.to_string(), &l[2..]))
}

pub fn parse_domain(top: &SExpr) -> Result<Domain, FrontendError> {
    let (name, rest) = header(top, "domain")?;
    let mut d = Domain { name, ..Domain::default() };
    let mut action_exprs = Vec::new();
    for s in rest {
        let (head, body) = section(s)?;
        match head {
            ":requirements" => {
                for r in body {
                    let r_name = expect_atom(r, "requirement")?;
                    if UNSUPPORTED_REQUIREMENTS.contains(&r_name) {
                        return Err(unsupported(r.pos(), r_name));
                    }
                    if !SUPPORTED_REQUIREMENTS.contains(&r_name) {
                        return Err(parse_error(r.pos(), format!("unknown requirement '{r_name}'")));
                    }
                }
            }
            ":types" => {
                for (t, parents) in typed_list(body, false)? {
                    d.types.entry(t).or_default().extend(parents);
                }
            }
            ":constants" => {
                for (c, types) in typed_list(body, false)? {
                    d.constants.push((c, types[0].clone()));
                }
            }
            ":predicates" => {
                for p in body {
                    d.predicates.push(signature(p)?);
                }
            }
            ":functions" => {
                let mut i = 0;
                while i < body.len() {
                    if body[i].atom() == Some("-") {
                        // result type, only `number` is meaningful
                        i += 2;
                        continue;
                    }
                    d.functions.push(signature(&body[i])?);
                    i += 1;
                }
            }
            ":action" => action_exprs.push(s),
            ":durative-action" | ":derived" | ":process" | ":event" | ":constraints" => {
                return Err(unsupported(s.pos(), head))
            }
            _ => return Err(parse_error(s.pos(), format!("unknown domain section '{head}'"))),
        }
    }
    for s in action_exprs {
        let (_, body) = section(s)?;
        let name = expect_name(body.first().ok_or_else(|| parse_error(s.pos(), "action without name"))?, "action name")?;
        let mut params = Vec::new();
        let mut pre_expr = None;
        let mut eff_expr = None;
        let mut i = 1;
        while i < body.len() {
            let key = expect_atom(&body[i], "action keyword")?;
            let value = body.get(i + 1).ok_or_else(|| parse_error(body[i].pos(), format!("missing value for {key}")))?;
            match key {
                ":parameters" => params = parameters(expect_list(value, "parameter list")?)?,
                ":precondition" => pre_expr = Some(value),
                ":effect" => eff_expr = Some(value),
                _ => return Err(parse_error(body[i].pos(), format!("unknown action keyword '{key}'"))),
            }
            i += 2;
        }
        let ctx = Ctx { predicates: &d.predicates, functions: &d.functions, params: Some(&params) };
        let mut pre = ConditionT::default();
        if let Some(p) = pre_expr {
            ctx.condition(p, &mut pre)?;
        }
        let mut eff = EffectT::default();
        if let Some(e) = eff_expr {
            ctx.effect(e, &mut eff)?;
        }
        d.actions.push(OperatorSchema { name: name.to_string(), params, pre, eff });
    }
    Ok(d)
}

fn ground_atom(a: &AtomT) -> GroundAtom {
    GroundAtom {
        symbol: a.symbol.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) | Term::Var(c) => c.clone(),
            })
            .collect(),
    }
}

pub fn parse_problem(top: &SExpr, d: &Domain) -> Result<Problem, FrontendError> {
    let (name, rest) = header(top, "problem")?;
    let mut p = Problem { name, ..Problem::default() };
    let ctx = Ctx { predicates: &d.predicates, functions: &d.functions, params: None };
    for s in rest {
        let (head, body) = section(s)?;
        match head {
            ":domain" => {
                let n = expect_name(body.first().ok_or_else(|| parse_error(s.pos(), "missing domain name"))?, "name")?;
                if n != d.name {
                    return Err(parse_error(s.pos(), format!("problem is for domain '{n}', not '{}'", d.name)));
                }
                p.domain = n.to_string();
            }
            ":requirements" => {}
            ":objects" => {
                for (o, types) in typed_list(body, false)? {
                    p.objects.push((o, types[0].clone()));
                }
            }
            ":init" => {
                for f in body {
                    if f.head() == Some("=") {
                        let l = f.list().unwrap();
                        if l.len() != 3 {
                            return Err(parse_error(f.pos(), "expected (= (f ...) value)"));
                        }
                        let fluent = ground_atom(&ctx.fluent(&l[1])?);
                        let value = match ctx.num_expr(&l[2])? {
                            NumExprT::Num(r) => r,
                            _ => return Err(parse_error(l[2].pos(), "initial value must be a number")),
                        };
                        if p.init_values.insert(fluent, value).is_some() {
                            return Err(parse_error(f.pos(), "fluent initialized twice"));
                        }
                    } else if f.head() == Some("at") && f.list().unwrap().get(1).and_then(SExpr::atom).is_some_and(|x| parse_decimal(x).is_some()) {
                        return Err(unsupported(f.pos(), "timed initial literal"));
                    } else {
                        let a = ground_atom(&ctx.atom(f)?);
                        if !p.init_atoms.contains(&a) {
                            p.init_atoms.push(a);
                        }
                    }
                }
            }
            ":goal" => {
                let g = body.first().ok_or_else(|| parse_error(s.pos(), "empty goal"))?;
                ctx.condition(g, &mut p.goal)?;
            }
            ":metric" => {
                let dir = expect_atom(body.first().ok_or_else(|| parse_error(s.pos(), "empty metric"))?, "direction")?;
                let direction = match dir {
                    "minimize" => MetricDirection::Minimize,
                    "maximize" => MetricDirection::Maximize,
                    _ => return Err(parse_error(body[0].pos(), format!("unknown metric direction '{dir}'"))),
                };
                let e = body.get(1).ok_or_else(|| parse_error(s.pos(), "metric without expression"))?;
                if e.head() == Some("total-time") && !d.functions.iter().any(|f| f.name == "total-time") {
                    return Err(unsupported(e.pos(), "total-time"));
                }
                p.metric = Some(MetricT { direction, expr: ctx.num_expr(e)? });
            }
            ":constraints" => return Err(unsupported(s.pos(), head)),
            _ => return Err(parse_error(s.pos(), format!("unknown problem section '{head}'"))),
        }
    }
    let known = |o: &String| d.constants.iter().chain(&p.objects).any(|(n, _)| n == o);
    let ground = p.init_atoms.iter().chain(p.init_values.keys());
    if let Some(a) = ground.clone().find(|a| !a.args.iter().all(known)) {
        return Err(parse_error(top.pos(), format!("{} mentions an undeclared object", a.name())));
    }
    let goal_atoms = p.goal.atoms.iter().map(ground_atom);
    if let Some(a) = goal_atoms.clone().find(|a| !a.args.iter().all(known)) {
        return Err(parse_error(top.pos(), format!("goal {} mentions an undeclared object", a.name())));
    }
    Ok(p)
}
