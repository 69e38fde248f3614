//! Plan representation: `(action, object)` steps with navigation abstracted
//! away, compilation from low-level trajectories, and a line-based text form.

mod compile;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::{Action, ObjectId, ObjectType};

pub use compile::{
    compile_plan, replay, CompileError, CompileMode, LowLevelAction, NavAction, ReplayError, Trajectory,
    TrajectoryEvent,
};
pub use text::{format_plan, parse_plan, PlanParseError};

/// Object reference of a plan step: a category, or an exact instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectRef {
    Type(ObjectType),
    Id(ObjectId),
}

impl ObjectRef {
    pub fn kind(self) -> ObjectType {
        match self {
            ObjectRef::Type(t) => t,
            ObjectRef::Id(id) => id.kind,
        }
    }

    pub fn matches(self, id: ObjectId) -> bool {
        match self {
            ObjectRef::Type(t) => id.kind == t,
            ObjectRef::Id(i) => i == id,
        }
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectRef::Type(t) => write!(f, "{t}"),
            ObjectRef::Id(id) => write!(f, "{id}"),
        }
    }
}

impl std::str::FromStr for ObjectRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(t) = s.parse::<ObjectType>() {
            return Ok(ObjectRef::Type(t));
        }
        s.parse::<ObjectId>().map(ObjectRef::Id).map_err(|_| format!("unknown object `{s}`"))
    }
}

impl Serialize for ObjectRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObjectRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One plan step. `Stop` carries no object; every interaction carries one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlanStep {
    Act { action: Action, object: ObjectRef },
    Stop,
}

impl PlanStep {
    pub fn act(action: Action, object: ObjectRef) -> Self {
        PlanStep::Act { action, object }
    }

    pub fn by_type(action: Action, kind: ObjectType) -> Self {
        PlanStep::Act { action, object: ObjectRef::Type(kind) }
    }

    pub fn by_id(action: Action, id: ObjectId) -> Self {
        PlanStep::Act { action, object: ObjectRef::Id(id) }
    }

    pub fn is_stop(self) -> bool {
        matches!(self, PlanStep::Stop)
    }

    /// Same step with any instance reference replaced by its type.
    pub fn to_type_level(self) -> Self {
        match self {
            PlanStep::Act { action, object } => PlanStep::by_type(action, object.kind()),
            PlanStep::Stop => PlanStep::Stop,
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStep::Act { action, object } => write!(f, "({action}, {object})"),
            PlanStep::Stop => f.write_str("(Stop)"),
        }
    }
}

impl Serialize for PlanStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlanStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        text::parse_step(&s).map_err(serde::de::Error::custom)
    }
}

/// Ordered plan steps; a `Stop`, if present, is last and unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<PlanStep>", into = "Vec<PlanStep>")]
pub struct Plan {
    steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("Stop at position {0} is not the final step")]
pub struct MisplacedStop(pub usize);

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Result<Self, MisplacedStop> {
        if let Some(i) = steps.iter().position(|s| s.is_stop()) {
            if i + 1 != steps.len() {
                return Err(MisplacedStop(i));
            }
        }
        Ok(Self { steps })
    }

    /// Build from interaction steps, appending a terminal `Stop`.
    pub fn with_stop(mut steps: Vec<PlanStep>) -> Self {
        steps.retain(|s| !s.is_stop());
        steps.push(PlanStep::Stop);
        Self { steps }
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps with a trailing `Stop` removed.
    pub fn without_stop(&self) -> &[PlanStep] {
        match self.steps.last() {
            Some(PlanStep::Stop) => &self.steps[..self.steps.len() - 1],
            _ => &self.steps,
        }
    }

    pub fn to_type_level(&self) -> Plan {
        Plan { steps: self.steps.iter().map(|s| s.to_type_level()).collect() }
    }
}

impl TryFrom<Vec<PlanStep>> for Plan {
    type Error = MisplacedStop;

    fn try_from(steps: Vec<PlanStep>) -> Result<Self, Self::Error> {
        Plan::new(steps)
    }
}

impl From<Plan> for Vec<PlanStep> {
    fn from(p: Plan) -> Self {
        p.steps
    }
}
