use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::catalog::ObjectType;

/// Instance identifier: catalog type plus a 1-based ordinal (`Mug_1`).
///
/// Ordering is by type name, then numeric ordinal, so `Mug_2 < Mug_10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObjectId {
    pub kind: ObjectType,
    pub ordinal: u32,
}

impl ObjectId {
    pub fn new(kind: ObjectType, ordinal: u32) -> Self {
        Self { kind, ordinal }
    }
}

impl PartialOrd for ObjectId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObjectId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.kind.name().cmp(other.kind.name()).then(self.ordinal.cmp(&other.ordinal))
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed object id `{0}`")]
pub struct BadObjectId(pub String);

impl FromStr for ObjectId {
    type Err = BadObjectId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, ord) = s.rsplit_once('_').ok_or_else(|| BadObjectId(s.into()))?;
        let kind = name.parse().map_err(|_| BadObjectId(s.into()))?;
        let ordinal: u32 = ord.parse().map_err(|_| BadObjectId(s.into()))?;
        if ordinal == 0 || ord.starts_with('+') {
            return Err(BadObjectId(s.into()));
        }
        Ok(Self { kind, ordinal })
    }
}

impl Serialize for ObjectId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObjectId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Grid coordinate, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell(pub i32, pub i32);

impl Cell {
    pub fn manhattan(self, other: Cell) -> u32 {
        self.0.abs_diff(other.0) + self.1.abs_diff(other.1)
    }

    pub fn neighbors(self) -> [Cell; 4] {
        let Cell(x, y) = self;
        [Cell(x + 1, y), Cell(x - 1, y), Cell(x, y + 1), Cell(x, y - 1)]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Where an instance is: a grid cell, or in the agent's hands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    At(Cell),
    Held,
}

impl Serialize for Location {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Location::At(c) => c.serialize(s),
            Location::Held => s.serialize_str("held"),
        }
    }
}

impl<'de> Deserialize<'de> for Location {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Cell(Cell),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Cell(c) => Ok(Location::At(c)),
            Raw::Word(w) if w == "held" => Ok(Location::Held),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("bad location `{w}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CookMethod {
    #[default]
    None,
    Microwave,
    Stove,
    Boil,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    #[default]
    None,
    Water,
    Coffee,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectState {
    pub is_open: bool,
    pub is_toggled_on: bool,
    pub is_sliced: bool,
    pub is_cooked: bool,
    pub cook_method: CookMethod,
    pub is_dirty: bool,
    pub fill: Fill,
    pub contained_in: Option<ObjectId>,
    pub contents: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub cell: Location,
    pub state: ObjectState,
    /// Whole object a slice was cut from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ObjectId>,
}

impl ObjectInstance {
    pub fn kind(&self) -> ObjectType {
        self.id.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavGraph {
    pub width: i32,
    pub height: i32,
    pub blocked: BTreeSet<Cell>,
    pub interaction_range: u32,
}

impl NavGraph {
    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn walkable(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked.contains(&c)
    }
}

/// Full symbolic snapshot of one household scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub instances: BTreeMap<ObjectId, ObjectInstance>,
    pub agent_cell: Cell,
    pub held: Option<ObjectId>,
    /// Most recently picked-up instance, kept after it is put down.
    #[serde(default)]
    pub last_held: Option<ObjectId>,
    pub nav: NavGraph,
    pub failure_surfaces: BTreeSet<ObjectType>,
}

impl WorldState {
    pub fn get(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.instances.get(&id)
    }

    pub fn of_type(&self, kind: ObjectType) -> impl Iterator<Item = &ObjectInstance> + '_ {
        self.instances.values().filter(move |o| o.kind() == kind)
    }

    /// Chain of containers from the immediate one outwards.
    pub fn ancestors(&self, id: ObjectId) -> Vec<ObjectId> {
        let mut out = Vec::new();
        let mut cur = self.get(id).and_then(|o| o.state.contained_in);
        while let Some(c) = cur {
            if out.contains(&c) {
                break;
            }
            out.push(c);
            cur = self.get(c).and_then(|o| o.state.contained_in);
        }
        out
    }

    /// The instance itself or its outermost container.
    pub fn root_of(&self, id: ObjectId) -> ObjectId {
        self.ancestors(id).last().copied().unwrap_or(id)
    }

    /// Cell navigation should target: the cell of the outermost container.
    pub fn effective_cell(&self, id: ObjectId) -> Option<Location> {
        self.get(self.root_of(id)).map(|o| o.cell)
    }

    /// Inside a closed (or sealed) enclosing receptacle somewhere up the chain.
    pub fn is_occluded(&self, id: ObjectId) -> bool {
        self.ancestors(id).into_iter().any(|c| {
            let inst = &self.instances[&c];
            inst.kind().info().enclosed && !inst.state.is_open
        })
    }

    /// The held instance or anything it carries.
    pub fn is_carried(&self, id: ObjectId) -> bool {
        self.get(id).is_some_and(|o| o.cell == Location::Held)
    }

    pub fn descendants(&self, id: ObjectId) -> Vec<ObjectId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(o) = self.get(cur) {
                for &c in o.state.contents.iter().rev() {
                    out.push(c);
                    stack.push(c);
                }
            }
        }
        out
    }

    pub fn next_ordinal(&self, kind: ObjectType) -> u32 {
        self.of_type(kind).map(|o| o.id.ordinal).max().unwrap_or(0) + 1
    }

    /// Structural invariants: containment symmetry, acyclicity, capacity,
    /// holding. Returns the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, o) in &self.instances {
            if *id != o.id {
                return Err(format!("key {id} stores {}", o.id));
            }
            let info = o.kind().info();
            if o.state.contents.len() > info.capacity {
                return Err(format!("{id} over capacity"));
            }
            if !info.openable && o.state.is_open {
                return Err(format!("{id} is open but not openable"));
            }
            for c in &o.state.contents {
                match self.get(*c) {
                    Some(child) if child.state.contained_in == Some(*id) => {}
                    _ => return Err(format!("{c} listed in {id} but not contained there")),
                }
            }
            if let Some(p) = o.state.contained_in {
                match self.get(p) {
                    Some(parent) if parent.state.contents.contains(id) => {}
                    _ => return Err(format!("{id} claims container {p} that does not list it")),
                }
            }
            if self.ancestors(*id).contains(id) {
                return Err(format!("containment cycle through {id}"));
            }
            if let Location::At(c) = o.cell {
                if !self.nav.in_bounds(c) {
                    return Err(format!("{id} outside grid at {c}"));
                }
            }
        }
        let carried =
            self.instances.values().filter(|o| o.cell == Location::Held && o.state.contained_in.is_none()).count();
        match self.held {
            Some(h) => {
                let inst = self.get(h).ok_or_else(|| format!("held {h} missing"))?;
                if inst.cell != Location::Held || inst.state.contained_in.is_some() {
                    return Err(format!("held {h} not in hand"));
                }
                if carried != 1 {
                    return Err("more than one root instance in hand".into());
                }
            }
            None if carried != 0 => return Err("instance in hand but nothing held".into()),
            None => {}
        }
        if !self.nav.walkable(self.agent_cell) {
            return Err(format!("agent on blocked cell {}", self.agent_cell));
        }
        Ok(())
    }
}
