//! Plan files: one step per line as `<index>: (<action> <args>)`, followed by
//! `; length=<k>` and `; metric=<value>` comment lines.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{ActionId, Plan};
use crate::rational::Rational;

/// Canonical spelling of an action name: lowercase, single spaces, wrapped
/// in parentheses.
pub fn normalize_action_name(text: &str) -> String {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let words: Vec<String> = inner.split_whitespace().map(str::to_ascii_lowercase).collect();
    format!("({})", words.join(" "))
}

pub fn format_plan<'a>(names: impl IntoIterator<Item = &'a str>, metric: Option<&Rational>) -> String {
    let mut out = String::new();
    let mut k = 0;
    for (i, name) in names.into_iter().enumerate() {
        out.push_str(&format!("{i}: {name}\n"));
        k += 1;
    }
    out.push_str(&format!("; length={k}\n"));
    match metric {
        Some(m) => out.push_str(&format!("; metric={m}\n")),
        None => out.push_str("; metric=-\n"),
    }
    out
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PlanParseError {
    #[error("line {line}: step {step}: unknown action {text}")]
    UnknownAction { line: usize, step: usize, text: String },
    #[error("line {line}: malformed step")]
    Malformed { line: usize },
}

impl PlanParseError {
    pub fn step(&self) -> Option<usize> {
        match self {
            PlanParseError::UnknownAction { step, .. } => Some(*step),
            PlanParseError::Malformed { .. } => None,
        }
    }
}

/// Reads a plan, resolving action names with `names[i]` naming action `i`.
/// Lines that are empty or start with `;` are skipped; the `<index>:` prefix
/// is optional.
pub fn parse_plan<S: AsRef<str>>(text: &str, names: &[S]) -> Result<Plan, PlanParseError> {
    let lookup: HashMap<String, ActionId> =
        names.iter().enumerate().map(|(i, n)| (normalize_action_name(n.as_ref()), ActionId(i))).collect();
    let mut steps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let body = match line.split_once(':') {
            Some((idx, rest)) if idx.trim().chars().all(|c| c.is_ascii_digit()) => rest.trim(),
            _ => line,
        };
        // trailing `[cost]` annotations are tolerated
        let body = body.split(';').next().unwrap_or("").trim();
        if !body.starts_with('(') || !body.ends_with(')') {
            return Err(PlanParseError::Malformed { line: lineno + 1 });
        }
        let key = normalize_action_name(body);
        match lookup.get(&key) {
            Some(a) => steps.push(*a),
            None => {
                return Err(PlanParseError::UnknownAction { line: lineno + 1, step: steps.len(), text: key })
            }
        }
    }
    Ok(Plan::new(steps))
}

/// Parses the `key=value` pairs of a stats line.
pub fn parse_stats_line(line: &str) -> HashMap<String, String> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
