#![allow(dead_code)]

pub mod lifted;
pub mod oracle;
pub mod tasks;

use lnfplan::lnf::{check_acyclic, normalize, verify_lnf, LnfTask};
use lnfplan::model::NumericTask;

/// The normal form of `t`, if normalization succeeds and yields an acyclic
/// task in linear normal form.
pub fn lnf_of(t: &NumericTask) -> Option<LnfTask> {
    let l = normalize(t).ok()?;
    (verify_lnf(&l).ok() && check_acyclic(&l).acyclic).then_some(l)
}
