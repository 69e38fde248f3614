//! Task families, goal conditions, scene and demonstration generation, and
//! slicing of demonstrations into EDH instances.

mod dialog;
mod edh;
mod goals;
mod planner;
mod scenegen;
mod spec;

use serde::{Deserialize, Serialize};

use crate::plan::{Plan, Trajectory};
use crate::world::{ObjectType, SceneSpec, WorldError, WorldState};

pub use dialog::{location_hints, render_dialog, render_hint};
pub use edh::{goal_delta, make_demonstration, slice_edh, MAX_EDH_PER_DEMO};
pub use goals::{check_predicate, goal_conditions, Containment, GoalCondition, PredicateKind, RequiredState};
pub use planner::{plan_demonstration, plan_structured, PlannedDemo, MAX_MACROS};
pub use scenegen::{generate_scene, sample_task, LayoutPool, Profile, DECOYS, SEEN_LAYOUTS, UNSEEN_LAYOUTS};
pub use spec::{Family, LocationHint, TaskParams, TaskSpec, TaskSpecError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Spec(#[from] TaskSpecError),
    #[error("world has no usable {0}")]
    MissingType(ObjectType),
    #[error("{0} cannot be sliced")]
    NotSliceable(ObjectType),
    #[error("planner failed: {0}")]
    Unsolved(String),
    #[error("scene generation failed: {0}")]
    Scene(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// An utterance spoken before trajectory event `at`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogEvent {
    pub at: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub id: String,
    pub scene: SceneSpec,
    pub task: TaskSpec,
    pub trajectory: Trajectory,
    pub dialog: Vec<DialogEvent>,
    /// Event indices at which EDH instances may start.
    pub boundaries: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EDHInstance {
    pub id: String,
    pub task: TaskSpec,
    pub dialog: Vec<String>,
    pub history: Trajectory,
    pub initial_world: WorldState,
    pub reference_plan: Plan,
    /// The demonstration's remaining trajectory, with instance ids.
    pub remaining: Trajectory,
    pub goals: Vec<GoalCondition>,
}
