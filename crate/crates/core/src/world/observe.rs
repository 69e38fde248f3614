use serde::{Deserialize, Serialize};

use super::catalog::ObjectType;
use super::nav::{distance_to, distances_from};
use super::state::{CookMethod, Fill, Location, ObjectId, WorldState};

/// Salient state of one visible instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedObject {
    pub id: ObjectId,
    #[serde(rename = "type")]
    pub kind: ObjectType,
    /// Path distance to interaction range; `None` if unreachable.
    pub distance: Option<u32>,
    pub held: bool,
    pub open: bool,
    pub on: bool,
    pub sliced: bool,
    pub cooked: bool,
    pub cook_method: CookMethod,
    pub dirty: bool,
    pub fill: Fill,
    pub container: Option<ObjectType>,
}

/// Symbolic stand-in for an egocentric image: every instance not hidden in a
/// closed receptacle, nearest first, then by id.
pub fn visible_objects(world: &WorldState) -> Vec<ObservedObject> {
    let dist = distances_from(world, world.agent_cell);
    let mut out: Vec<ObservedObject> = world
        .instances
        .values()
        .filter(|o| !world.is_occluded(o.id))
        .map(|o| {
            let held = o.cell == Location::Held;
            let s = &o.state;
            ObservedObject {
                id: o.id,
                kind: o.kind(),
                distance: if held { Some(0) } else { distance_to(world, &dist, o.id) },
                held,
                open: s.is_open,
                on: s.is_toggled_on,
                sliced: s.is_sliced,
                cooked: s.is_cooked,
                cook_method: s.cook_method,
                dirty: s.is_dirty,
                fill: s.fill,
                container: s.contained_in.map(|c| c.kind),
            }
        })
        .collect();
    out.sort_by_key(|o| (o.distance.unwrap_or(u32::MAX), o.id));
    out
}
