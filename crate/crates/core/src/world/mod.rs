//! Deterministic symbolic household environment.
//!
//! A [`WorldState`] is a grid with object instances, containment, an agent
//! cell and at most one held item. [`apply_interaction`] implements the
//! object state machine; [`closest_instance`] and [`shortest_path`] provide
//! the navigation heuristics plan execution relies on.

mod affordance;
mod catalog;
mod interact;
mod nav;
mod observe;
mod scene;
mod state;

pub use affordance::{Action, AffordanceTable, UnknownAction};
pub use catalog::{ObjectType, TypeInfo, UnknownType, DEFAULT_SLICE_COUNT};
pub use interact::{apply_in_place, apply_interaction, check as check_interaction, FailureReason, InteractionOutcome};
pub use nav::{closest_instance, distance_to, distances_from, in_range, navigate_to, shortest_path};
pub use observe::{visible_objects, ObservedObject};
pub use scene::{build_world, GridSpec, ObjectSpec, SceneSpec, StateOverrides};
pub use state::{
    BadObjectId, Cell, CookMethod, Fill, Location, NavGraph, ObjectId, ObjectInstance, ObjectState, WorldState,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("invalid scene entry `{entry}`: {reason}")]
    InvalidScene { entry: String, reason: String },
    #[error("malformed scene file: {0}")]
    Scene(String),
    #[error("no such object {0}")]
    NoSuchObject(ObjectId),
}
