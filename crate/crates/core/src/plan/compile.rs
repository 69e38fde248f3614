use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Plan, PlanStep};
use crate::world::{apply_in_place, navigate_to, Action, FailureReason, ObjectId, ObservedObject, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NavAction {
    MoveForward,
    MoveBackward,
    TurnLeft,
    TurnRight,
    StrafeLeft,
    StrafeRight,
    LookUp,
    LookDown,
    /// Walk the shortest path into interaction range of the target.
    NavigateTo,
}

impl NavAction {
    pub const ALL: [NavAction; 9] = [
        NavAction::MoveForward,
        NavAction::MoveBackward,
        NavAction::TurnLeft,
        NavAction::TurnRight,
        NavAction::StrafeLeft,
        NavAction::StrafeRight,
        NavAction::LookUp,
        NavAction::LookDown,
        NavAction::NavigateTo,
    ];

    fn name(self) -> &'static str {
        match self {
            NavAction::MoveForward => "MoveForward",
            NavAction::MoveBackward => "MoveBackward",
            NavAction::TurnLeft => "TurnLeft",
            NavAction::TurnRight => "TurnRight",
            NavAction::StrafeLeft => "StrafeLeft",
            NavAction::StrafeRight => "StrafeRight",
            NavAction::LookUp => "LookUp",
            NavAction::LookDown => "LookDown",
            NavAction::NavigateTo => "NavigateTo",
        }
    }
}

/// Low-level action kinds as they appear in demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowLevelAction {
    Nav(NavAction),
    Interact(Action),
    Stop,
}

impl fmt::Display for LowLevelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowLevelAction::Nav(n) => f.write_str(n.name()),
            LowLevelAction::Interact(a) => f.write_str(a.name()),
            LowLevelAction::Stop => f.write_str("Stop"),
        }
    }
}

impl FromStr for LowLevelAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "Stop" {
            return Ok(LowLevelAction::Stop);
        }
        if let Some(n) = NavAction::ALL.iter().find(|n| n.name() == s) {
            return Ok(LowLevelAction::Nav(*n));
        }
        s.parse::<Action>().map(LowLevelAction::Interact).map_err(|_| format!("unknown low-level action `{s}`"))
    }
}

impl Serialize for LowLevelAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LowLevelAction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryEvent {
    pub action: LowLevelAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<Vec<ObservedObject>>,
}

impl TrajectoryEvent {
    pub fn new(action: LowLevelAction, target: Option<ObjectId>) -> Self {
        Self { action, target, observation: None }
    }

    pub fn interact(action: Action, target: ObjectId) -> Self {
        Self::new(LowLevelAction::Interact(action), Some(target))
    }

    pub fn navigate(target: ObjectId) -> Self {
        Self::new(LowLevelAction::Nav(NavAction::NavigateTo), Some(target))
    }

    pub fn is_interaction(&self) -> bool {
        matches!(self.action, LowLevelAction::Interact(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn interaction_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_interaction()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompileMode {
    ByType,
    ById,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("interaction event {0} has no target id")]
    MissingTarget(usize),
}

/// Keep only interaction events, reference objects by type or by id, and
/// append a terminal `Stop`.
pub fn compile_plan(trajectory: &Trajectory, mode: CompileMode) -> Result<Plan, CompileError> {
    let mut steps = Vec::new();
    for (i, e) in trajectory.events.iter().enumerate() {
        let LowLevelAction::Interact(action) = e.action else { continue };
        let id = e.target.ok_or(CompileError::MissingTarget(i))?;
        steps.push(match mode {
            CompileMode::ByType => PlanStep::by_type(action, id.kind),
            CompileMode::ById => PlanStep::by_id(action, id),
        });
    }
    Ok(Plan::with_stop(steps))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("event {index}: target unreachable or missing")]
    Unreachable { index: usize },
    #[error("event {index}: {action} failed ({reason:?})")]
    Failed { index: usize, action: Action, reason: FailureReason },
    #[error("event {index}: missing target")]
    MissingTarget { index: usize },
}

/// Execute a trajectory event by event. Only `NavigateTo` moves the agent;
/// the other navigation primitives have no effect on the grid abstraction.
pub fn replay(world: &WorldState, trajectory: &Trajectory) -> Result<WorldState, ReplayError> {
    let mut w = world.clone();
    for (index, e) in trajectory.events.iter().enumerate() {
        match e.action {
            LowLevelAction::Nav(NavAction::NavigateTo) => {
                let t = e.target.ok_or(ReplayError::MissingTarget { index })?;
                navigate_to(&mut w, t).ok_or(ReplayError::Unreachable { index })?;
            }
            LowLevelAction::Nav(_) | LowLevelAction::Stop => {}
            LowLevelAction::Interact(action) => {
                let t = e.target.ok_or(ReplayError::MissingTarget { index })?;
                let out = apply_in_place(&mut w, action, t);
                if let Some(reason) = out.failure_reason {
                    return Err(ReplayError::Failed { index, action, reason });
                }
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::ObjectType::*;

    fn id(s: &str) -> ObjectId {
        s.parse().unwrap()
    }

    fn boil_prefix() -> Trajectory {
        Trajectory {
            events: vec![
                TrajectoryEvent::navigate(id("Potato_1")),
                TrajectoryEvent::interact(Action::Pickup, id("Potato_1")),
                TrajectoryEvent::new(LowLevelAction::Nav(NavAction::MoveForward), None),
                TrajectoryEvent::interact(Action::Place, id("Pot_1")),
            ],
        }
    }

    #[test]
    fn by_type_drops_navigation() {
        let p = compile_plan(&boil_prefix(), CompileMode::ByType).unwrap();
        assert_eq!(
            p.steps(),
            &[PlanStep::by_type(Action::Pickup, Potato), PlanStep::by_type(Action::Place, Pot), PlanStep::Stop]
        );
    }

    #[test]
    fn by_id_keeps_instances() {
        let p = compile_plan(&boil_prefix(), CompileMode::ById).unwrap();
        assert_eq!(
            p.steps(),
            &[
                PlanStep::by_id(Action::Pickup, id("Potato_1")),
                PlanStep::by_id(Action::Place, id("Pot_1")),
                PlanStep::Stop
            ]
        );
    }

    #[test]
    fn empty_trajectory_is_stop() {
        let p = compile_plan(&Trajectory::default(), CompileMode::ByType).unwrap();
        assert_eq!(p.steps(), &[PlanStep::Stop]);
    }

    #[test]
    fn missing_target_names_event() {
        let t = Trajectory {
            events: vec![
                TrajectoryEvent::navigate(id("Mug_1")),
                TrajectoryEvent::new(LowLevelAction::Interact(Action::Pickup), None),
            ],
        };
        assert_eq!(compile_plan(&t, CompileMode::ByType), Err(CompileError::MissingTarget(1)));
    }

    #[test]
    fn trajectory_file_format() {
        let json = serde_json::to_string(&boil_prefix()).unwrap();
        assert!(json.starts_with(r#"{"events":[{"action":"NavigateTo","target":"Potato_1"}"#));
        let back: Trajectory = serde_json::from_str(&json).unwrap();
        assert_eq!(back, boil_prefix());
        assert!(serde_json::from_str::<Trajectory>(r#"{"events":[{"action":"Dance"}]}"#).is_err());
    }
}
