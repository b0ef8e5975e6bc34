//! Plan replay under real and relaxed semantics.

use std::fmt;

use crate::model::{ApplyError, GroundTask, Plan, State};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    /// Step `index` could not be applied.
    Step { index: usize, action: String, error: ApplyError },
    /// All steps applied but the goal does not hold at the end.
    GoalNotReached,
    /// A step refers to an action the task does not have.
    UnknownAction { index: usize },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Step { index, action, error } => write!(f, "step {index} {action}: {error}"),
            Failure::GoalNotReached => f.write_str("goal not satisfied after the last step"),
            Failure::UnknownAction { index } => write!(f, "step {index}: unknown action"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub failure: Option<Failure>,
    /// State after the last applied step.
    pub final_state: State,
    pub metric: Option<Rational>,
}

impl Verdict {
    pub fn failing_step(&self) -> Option<usize> {
        match &self.failure {
            Some(Failure::Step { index, .. }) | Some(Failure::UnknownAction { index }) => Some(*index),
            _ => None,
        }
    }
}

fn replay<T, F>(t: &T, p: &Plan, step: F) -> Verdict
where
    T: GroundTask + ?Sized,
    F: Fn(&T, &State, crate::model::ActionId) -> Result<State, ApplyError>,
{
    let mut s = t.initial_state().clone();
    for (index, &a) in p.steps.iter().enumerate() {
        if a.0 >= t.num_actions() {
            return Verdict { valid: false, failure: Some(Failure::UnknownAction { index }), metric: None, final_state: s };
        }
        match step(t, &s, a) {
            Ok(next) => s = next,
            Err(error) => {
                let failure = Failure::Step { index, action: t.action_name(a).to_string(), error };
                return Verdict { valid: false, failure: Some(failure), metric: None, final_state: s };
            }
        }
    }
    let metric = t.metric_value(&s);
    if t.goal_holds(&s) {
        Verdict { valid: true, failure: None, final_state: s, metric }
    } else {
        Verdict { valid: false, failure: Some(Failure::GoalNotReached), final_state: s, metric }
    }
}

/// Replays `p` from the initial state with the real transition function.
pub fn validate_plan<T: GroundTask + ?Sized>(t: &T, p: &Plan) -> Verdict {
    replay(t, p, |t, s, a| t.apply(s, a))
}

/// Replays `p` with the relaxed transition function.
pub fn validate_relaxed<T: GroundTask + ?Sized>(t: &T, p: &Plan) -> Verdict {
    replay(t, p, |t, s, a| t.relaxed_apply(s, a))
}
