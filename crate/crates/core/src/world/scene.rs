//! Declarative scene files and world construction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::catalog::ObjectType;
use super::state::{Cell, CookMethod, Fill, Location, NavGraph, ObjectId, ObjectInstance, ObjectState, WorldState};
use super::WorldError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub width: i32,
    pub height: i32,
    #[serde(default)]
    pub blocked: Vec<Cell>,
    #[serde(default = "default_range", skip_serializing_if = "is_default_range")]
    pub interaction_range: u32,
}

fn default_range() -> u32 {
    1
}

fn is_default_range(r: &u32) -> bool {
    *r == 1
}

/// Optional per-object state overrides; absent fields keep defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_open: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_toggled_on: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_cooked: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cook_method: Option<CookMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_dirty: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<Fill>,
}

impl StateOverrides {
    fn is_empty(&self) -> bool {
        *self == StateOverrides::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub ordinal: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
    #[serde(default, rename = "in", skip_serializing_if = "Option::is_none")]
    pub inside: Option<String>,
    #[serde(default, skip_serializing_if = "StateOverrides::is_empty")]
    pub state: StateOverrides,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub grid: GridSpec,
    pub agent_cell: Cell,
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub failure_surfaces: Vec<String>,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        serde_json::from_str(text).map_err(|e| WorldError::Scene(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene spec serializes")
    }

    /// Describe an existing world. Fails if the agent is holding something,
    /// since scene files have no notion of a held item.
    pub fn from_world(world: &WorldState) -> Result<Self, WorldError> {
        if world.held.is_some() {
            return Err(WorldError::Scene("cannot describe a world with a held item".into()));
        }
        let mut objects = Vec::new();
        let roots: Vec<ObjectId> =
            world.instances.values().filter(|o| o.state.contained_in.is_none()).map(|o| o.id).collect();
        let mut stack: Vec<ObjectId> = roots.into_iter().rev().collect();
        while let Some(id) = stack.pop() {
            let o = &world.instances[&id];
            let cell = match (o.state.contained_in, o.cell) {
                (None, Location::At(c)) => Some(c),
                _ => None,
            };
            objects.push(ObjectSpec {
                kind: id.kind.name().to_string(),
                ordinal: id.ordinal,
                cell,
                inside: o.state.contained_in.map(|c| c.to_string()),
                state: overrides_of(&o.state),
            });
            stack.extend(o.state.contents.iter().rev().copied());
        }
        Ok(SceneSpec {
            grid: GridSpec {
                width: world.nav.width,
                height: world.nav.height,
                blocked: world.nav.blocked.iter().copied().collect(),
                interaction_range: world.nav.interaction_range,
            },
            agent_cell: world.agent_cell,
            objects,
            failure_surfaces: world.failure_surfaces.iter().map(|t| t.name().to_string()).collect(),
        })
    }
}

fn overrides_of(s: &ObjectState) -> StateOverrides {
    let d = ObjectState::default();
    StateOverrides {
        is_open: (s.is_open != d.is_open).then_some(s.is_open),
        is_toggled_on: (s.is_toggled_on != d.is_toggled_on).then_some(s.is_toggled_on),
        is_cooked: (s.is_cooked != d.is_cooked).then_some(s.is_cooked),
        cook_method: (s.cook_method != d.cook_method).then_some(s.cook_method),
        is_dirty: (s.is_dirty != d.is_dirty).then_some(s.is_dirty),
        fill: (s.fill != d.fill).then_some(s.fill),
    }
}

/// Build a world from a scene description. Deterministic; rejections name
/// the offending entry.
pub fn build_world(spec: &SceneSpec) -> Result<WorldState, WorldError> {
    let bad = |entry: String, why: &str| WorldError::InvalidScene { entry, reason: why.to_string() };

    if spec.grid.width <= 0 || spec.grid.height <= 0 {
        return Err(bad("grid".into(), "non-positive dimensions"));
    }
    let nav = NavGraph {
        width: spec.grid.width,
        height: spec.grid.height,
        blocked: spec.grid.blocked.iter().copied().collect(),
        interaction_range: spec.grid.interaction_range,
    };
    for &c in &nav.blocked {
        if !nav.in_bounds(c) {
            return Err(bad(format!("blocked {c}"), "outside grid"));
        }
    }
    if !nav.walkable(spec.agent_cell) {
        return Err(bad("agent_cell".into(), "blocked or outside grid"));
    }

    let mut failure_surfaces = BTreeSet::new();
    for name in &spec.failure_surfaces {
        let t: ObjectType = name.parse().map_err(|_| bad(name.clone(), "unknown type"))?;
        failure_surfaces.insert(t);
    }

    let mut instances: BTreeMap<ObjectId, ObjectInstance> = BTreeMap::new();
    let mut order = Vec::new();
    for o in &spec.objects {
        let label = format!("{}_{}", o.kind, o.ordinal);
        let kind: ObjectType = o.kind.parse().map_err(|_| bad(label.clone(), "unknown type"))?;
        if o.ordinal == 0 {
            return Err(bad(label, "ordinal must start at 1"));
        }
        let id = ObjectId::new(kind, o.ordinal);
        if instances.contains_key(&id) {
            return Err(bad(label, "duplicate id"));
        }
        let info = kind.info();
        let ov = &o.state;
        if ov.is_open == Some(true) && !info.openable {
            return Err(bad(label, "is_open set on a non-openable type"));
        }
        if ov.is_toggled_on == Some(true) && !info.toggleable {
            return Err(bad(label, "is_toggled_on set on a non-toggleable type"));
        }
        let cell = match (&o.cell, &o.inside) {
            (Some(c), None) => {
                if !nav.in_bounds(*c) {
                    return Err(bad(label, "cell outside grid"));
                }
                Location::At(*c)
            }
            (None, Some(_)) => Location::At(Cell(0, 0)),
            _ => return Err(bad(label, "exactly one of `cell` or `in` is required")),
        };
        let state = ObjectState {
            is_open: ov.is_open.unwrap_or(false),
            is_toggled_on: ov.is_toggled_on.unwrap_or(false),
            is_sliced: info.sliced_into.is_none() && kind.slice_source().is_some(),
            is_cooked: ov.is_cooked.unwrap_or(false),
            cook_method: ov.cook_method.unwrap_or_default(),
            is_dirty: ov.is_dirty.unwrap_or(false),
            fill: ov.fill.unwrap_or_default(),
            contained_in: None,
            contents: vec![],
        };
        instances.insert(id, ObjectInstance { id, cell, state, source: None });
        order.push((id, o.inside.clone()));
    }

    for (id, inside) in &order {
        let Some(parent) = inside else { continue };
        let pid: ObjectId = parent
            .parse()
            .ok()
            .filter(|p| instances.contains_key(p))
            .ok_or_else(|| bad(id.to_string(), "container does not exist"))?;
        if !pid.kind.info().receptacle {
            return Err(bad(pid.to_string(), "not a receptacle"));
        }
        instances.get_mut(id).unwrap().state.contained_in = Some(pid);
        let p = instances.get_mut(&pid).unwrap();
        p.state.contents.push(*id);
        if p.state.contents.len() > pid.kind.info().capacity {
            return Err(bad(pid.to_string(), "capacity exceeded"));
        }
    }

    let mut world =
        WorldState { instances, agent_cell: spec.agent_cell, held: None, last_held: None, nav, failure_surfaces };
    // Contained objects take the cell of their outermost container.
    let ids: Vec<ObjectId> = world.instances.keys().copied().collect();
    for id in &ids {
        if world.ancestors(*id).contains(id) {
            return Err(bad(id.to_string(), "containment cycle"));
        }
    }
    for id in ids {
        let root = world.root_of(id);
        let cell = world.instances[&root].cell;
        world.instances.get_mut(&id).unwrap().cell = cell;
    }
    world.check_invariants().map_err(|e| bad("world".into(), &e))?;
    Ok(world)
}
