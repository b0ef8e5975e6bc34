use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lnf::LnfTask;
use crate::model::{AssignOp, MetricDirection, MetricSpec};
use crate::rational::Rational;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("metric rejected: {0}")]
pub struct Rejected(pub String);

/// Per-action costs such that the minimized metric changes by exactly the
/// cost of each executed action.
///
/// The metric (negated when maximized) must fold to a linear sum `Σ c_j v_j`,
/// and every effect on a `v_j` must add a constant with `c_j · constant ≥ 0`.
pub fn derive_costs(t: &LnfTask, m: &MetricSpec) -> Result<Vec<Rational>, Rejected> {
    let mut expr = match t.linearize_folded(&m.expr) {
        Ok(Some(e)) => e,
        Ok(None) => return Err(Rejected("metric is undefined".into())),
        Err(e) => return Err(Rejected(e.to_string())),
    };
    if m.direction == MetricDirection::Maximize {
        expr = expr.negate();
    }
    let mut costs = Vec::with_capacity(t.actions.len());
    for a in &t.actions {
        let mut cost = Rational::zero();
        for (v, c) in &expr.terms {
            let Some(e) = a.effect_on(*v) else { continue };
            if e.op != AssignOp::Increase {
                return Err(Rejected(format!("{} assigns metric variable {}", a.name, t.var_name(*v))));
            }
            if !e.rhs.is_constant() {
                return Err(Rejected(format!(
                    "{} changes metric variable {} by a non-constant amount",
                    a.name,
                    t.var_name(*v)
                )));
            }
            let contribution = c * &e.rhs.constant;
            if contribution.is_negative() {
                return Err(Rejected(format!("{} lowers the metric", a.name)));
            }
            cost += contribution;
        }
        costs.push(cost);
    }
    Ok(costs)
}
