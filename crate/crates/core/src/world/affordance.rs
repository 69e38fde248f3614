use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::catalog::ObjectType;

/// Object interaction actions. Navigation is handled separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Pickup,
    Place,
    Open,
    Close,
    ToggleOn,
    ToggleOff,
    Slice,
    Pour,
}

impl Action {
    pub const ALL: [Action; 8] = [
        Action::Pickup,
        Action::Place,
        Action::Open,
        Action::Close,
        Action::ToggleOn,
        Action::ToggleOff,
        Action::Slice,
        Action::Pour,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Pickup => "Pickup",
            Action::Place => "Place",
            Action::Open => "Open",
            Action::Close => "Close",
            Action::ToggleOn => "ToggleOn",
            Action::ToggleOff => "ToggleOff",
            Action::Slice => "Slice",
            Action::Pour => "Pour",
        }
    }

    /// Whether the catalog flags of `kind` admit this action at all.
    pub fn admits(self, kind: ObjectType) -> bool {
        let i = kind.info();
        match self {
            Action::Pickup => i.pickupable,
            Action::Place => i.receptacle,
            Action::Open | Action::Close => i.openable,
            Action::ToggleOn | Action::ToggleOff => i.toggleable,
            Action::Slice => i.sliceable,
            Action::Pour => i.fillable || matches!(kind, ObjectType::Sink | ObjectType::Plant),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL.iter().copied().find(|a| a.name() == s).ok_or_else(|| UnknownAction(s.to_string()))
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Admissible (action, type) pairs, derived once from the catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffordanceTable {
    valid_pairs: BTreeSet<(Action, ObjectType)>,
}

impl AffordanceTable {
    pub fn from_catalog() -> Self {
        let valid_pairs = Action::ALL
            .iter()
            .flat_map(|&a| ObjectType::ALL.iter().map(move |&t| (a, t)))
            .filter(|&(a, t)| a.admits(t))
            .collect();
        Self { valid_pairs }
    }

    pub fn is_valid(&self, action: Action, kind: ObjectType) -> bool {
        self.valid_pairs.contains(&(action, kind))
    }

    pub fn actions_for(&self, kind: ObjectType) -> impl Iterator<Item = Action> + '_ {
        Action::ALL.into_iter().filter(move |&a| self.is_valid(a, kind))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Action, ObjectType)> + '_ {
        self.valid_pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.valid_pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid_pairs.is_empty()
    }
}

impl Default for AffordanceTable {
    fn default() -> Self {
        Self::from_catalog()
    }
}
