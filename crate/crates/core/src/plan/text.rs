//! One step per line: `(Action, ObjectRef)`, with `(Stop)` for termination.

use super::{ObjectRef, Plan, PlanStep};
use crate::world::Action;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

pub fn format_plan(plan: &Plan) -> String {
    plan.steps().iter().map(|s| s.to_string()).collect::<Vec<_>>().join("\n")
}

pub(super) fn parse_step(s: &str) -> Result<PlanStep, String> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("malformed step `{}`", s.trim()))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    match parts.as_slice() {
        ["Stop"] => Ok(PlanStep::Stop),
        [action, object] => {
            let action: Action = action.parse().map_err(|e: crate::world::UnknownAction| e.to_string())?;
            let object: ObjectRef = object.parse()?;
            Ok(PlanStep::Act { action, object })
        }
        [single] => Err(format!("unknown action `{single}` or missing object")),
        _ => Err(format!("malformed step `{}`", s.trim())),
    }
}

/// Parse the line format. Blank lines are skipped. Affordance validity is not
/// checked here: invalid pairs must stay representable so they can be scored.
pub fn parse_plan(text: &str) -> Result<Plan, PlanParseError> {
    let mut steps = Vec::new();
    let mut stop_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(at) = stop_line {
            return Err(PlanParseError { line, message: format!("step after Stop on line {at}") });
        }
        let step = parse_step(raw).map_err(|message| PlanParseError { line, message })?;
        if step.is_stop() {
            stop_line = Some(line);
        }
        steps.push(step);
    }
    Ok(Plan::new(steps).expect("stop position checked while parsing"))
}
