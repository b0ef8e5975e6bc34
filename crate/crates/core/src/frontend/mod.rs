//! Reading and grounding of the conjunctive, numeric subset of PDDL.
//!
//! Accepted: `:strips :typing :fluents`; preconditions and goals are
//! conjunctions of atoms and comparisons `(<|<=|=|>=|> e e)`; effects are
//! atoms, `(not atom)`, `(increase f e)`, `(decrease f e)` and
//! `(assign f e)`; an optional `(:metric minimize|maximize e)`. Numbers may be
//! integers or decimals and are read exactly.

pub mod ast;
mod ground;
pub mod sexpr;

use thiserror::Error;

use crate::model::NumericTask;

pub use ast::{parse_domain, parse_problem, ParsedTask};
pub use ground::{ground_task, statics, StaticsReport};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unsupported feature '{feature}'")]
    UnsupportedFeature { feature: String, line: usize, col: usize },
    #[error("fluent {0} has no initial value")]
    UninitializedFluent(String),
}

pub fn parse_task(domain_text: &str, problem_text: &str) -> Result<ParsedTask, FrontendError> {
    let domain = parse_domain(&sexpr::read(domain_text)?)?;
    let problem = parse_problem(&sexpr::read(problem_text)?, &domain)?;
    Ok(ParsedTask { domain, problem })
}

/// Parses and grounds a domain/problem pair.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<NumericTask, FrontendError> {
    ground_task(&parse_task(domain_text, problem_text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroundTask;
    use crate::rational::frac;

    const DOMAIN: &str = "
        (define (domain d)
          (:requirements :strips :typing :fluents)
          (:types place)
          (:predicates (at ?p - place) (road ?a ?b - place))
          (:functions (fuel) (cost ?a ?b - place))
          (:action move
            :parameters (?a ?b - place)
            :precondition (and (at ?a) (road ?a ?b) (>= (fuel) (cost ?a ?b)))
            :effect (and (not (at ?a)) (at ?b) (decrease (fuel) (cost ?a ?b)))))";

    const PROBLEM: &str = "
        (define (problem p) (:domain d)
          (:objects x y z - place)
          (:init (at x) (road x y) (road y z)
                 (= (fuel) 2.5) (= (cost x y) 1) (= (cost y z) 1) (= (cost x z) 1)
                 (= (cost y x) 1) (= (cost z x) 1) (= (cost z y) 1)
                 (= (cost x x) 0) (= (cost y y) 0) (= (cost z z) 0))
          (:goal (at z))
          (:metric minimize (fuel)))";

    #[test]
    fn minimal_input() {
        let d = "(define (domain m) (:predicates (p)) (:action a :parameters () :effect (p)))";
        let p = "(define (problem q) (:domain m) (:objects o) (:init) (:goal (p)))";
        let parsed = parse_task(d, p).unwrap();
        assert_eq!(parsed.domain.actions.len(), 1);
        assert_eq!(parsed.problem.objects.len(), 1);
        let t = ground_task(&parsed).unwrap();
        assert_eq!(t.actions[0].name, "(a)");
    }

    #[test]
    fn static_road_prunes_instantiations() {
        let t = load_task(DOMAIN, PROBLEM).unwrap();
        let names: Vec<&str> = t.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["(move x y)", "(move y z)"]);
        assert_eq!(t.vars.len(), 1);
        assert_eq!(t.init.vals[0], frac(5, 2));
        assert!(t.find_action("(MOVE x Y)").is_some());
        let s = t.apply(&t.init, t.find_action("(move x y)").unwrap()).unwrap();
        assert_eq!(s.vals[0], frac(3, 2));
    }

    #[test]
    fn rejects_quantifiers() {
        let d = "(define (domain m) (:predicates (p ?x))
                   (:action a :parameters () :precondition (forall (?x) (p ?x)) :effect ()))";
        let p = "(define (problem q) (:domain m) (:init) (:goal (and)))";
        assert!(matches!(parse_task(d, p), Err(FrontendError::UnsupportedFeature { .. })));
    }

    #[test]
    fn rejects_uninitialized_fluent() {
        let p = PROBLEM.replace("(= (fuel) 2.5)", "");
        assert!(matches!(load_task(DOMAIN, &p), Err(FrontendError::UninitializedFluent(f)) if f == "(fuel)"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_task("(define (domain m)\n  (:predicates (p))\n  (:action a :parameters () :effect (q)))", "(x)");
        assert!(matches!(err, Err(FrontendError::Parse { line: 3, .. })));
    }

    #[test]
    fn unreachable_actions_are_removed() {
        let d = "(define (domain m) (:predicates (p) (q) (r))
                   (:action a :parameters () :precondition (q) :effect (r))
                   (:action b :parameters () :precondition (p) :effect (p)))";
        let p = "(define (problem q) (:domain m) (:init (p)) (:goal (r)))";
        let t = load_task(d, p).unwrap();
        let names: Vec<&str> = t.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["(b)"]);
    }

    #[test]
    fn counting_instantiations() {
        let d = "(define (domain m) (:requirements :typing) (:types t) (:predicates (p ?a ?b - t))
                   (:action a :parameters (?x ?y - t) :effect (p ?x ?y)))";
        let p = "(define (problem q) (:domain m) (:objects o1 o2 o3 - t) (:init) (:goal (and)))";
        assert_eq!(load_task(d, p).unwrap().actions.len(), 9);
    }
}
