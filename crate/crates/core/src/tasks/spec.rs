use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::ObjectType;

/// Task families, in the fixed order used by per-task report tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Coffee,
    WaterPlant,
    PlateOfToast,
    CleanAllX,
    PutAllXOnY,
    PutAllXInOneY,
    NSlicesOfXInY,
    NCookedSlicesOfXInY,
    BoilX,
    Salad,
    Sandwich,
    Breakfast,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Coffee,
        Family::WaterPlant,
        Family::PlateOfToast,
        Family::CleanAllX,
        Family::PutAllXOnY,
        Family::PutAllXInOneY,
        Family::NSlicesOfXInY,
        Family::NCookedSlicesOfXInY,
        Family::BoilX,
        Family::Salad,
        Family::Sandwich,
        Family::Breakfast,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Family::Coffee => "Coffee",
            Family::WaterPlant => "Water Plant",
            Family::PlateOfToast => "Plate Of Toast",
            Family::CleanAllX => "Clean All X",
            Family::PutAllXOnY => "Put All X On Y",
            Family::PutAllXInOneY => "Put All X In One Y",
            Family::NSlicesOfXInY => "N Slices Of X In Y",
            Family::NCookedSlicesOfXInY => "N Cooked Slices Of X In Y",
            Family::BoilX => "Boil X",
            Family::Salad => "Salad",
            Family::Sandwich => "Sandwich",
            Family::Breakfast => "Breakfast",
        }
    }

    pub fn needs_n(self) -> bool {
        matches!(self, Family::NSlicesOfXInY | Family::NCookedSlicesOfXInY)
    }

    pub fn needs_x(self) -> bool {
        matches!(
            self,
            Family::CleanAllX
                | Family::PutAllXOnY
                | Family::PutAllXInOneY
                | Family::NSlicesOfXInY
                | Family::NCookedSlicesOfXInY
                | Family::BoilX
        )
    }

    pub fn needs_y(self) -> bool {
        matches!(self, Family::PutAllXOnY | Family::PutAllXInOneY | Family::NSlicesOfXInY | Family::NCookedSlicesOfXInY)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<ObjectType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ObjectType>,
}

/// "The X is inside the Y" hint: object type and its container type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocationHint {
    pub object: ObjectType,
    pub container: ObjectType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskSpec {
    pub family: Family,
    pub params: TaskParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub location_hints: Vec<LocationHint>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskSpecError {
    #[error("{family} requires parameter `{param}`")]
    MissingParam { family: Family, param: &'static str },
    #[error("{family} does not take parameter `{param}`")]
    ExtraParam { family: Family, param: &'static str },
    #[error("count must be at least 1")]
    ZeroCount,
}

impl TaskSpec {
    pub fn new(family: Family, params: TaskParams) -> Result<Self, TaskSpecError> {
        let checks = [
            ("n", family.needs_n(), params.n.is_some()),
            ("x", family.needs_x(), params.x.is_some()),
            ("y", family.needs_y(), params.y.is_some()),
        ];
        for (param, needed, present) in checks {
            if needed && !present {
                return Err(TaskSpecError::MissingParam { family, param });
            }
            if present && !needed {
                return Err(TaskSpecError::ExtraParam { family, param });
            }
        }
        if params.n == Some(0) {
            return Err(TaskSpecError::ZeroCount);
        }
        Ok(Self { family, params, location_hints: vec![] })
    }

    pub fn simple(family: Family) -> Self {
        Self::new(family, TaskParams::default()).expect("family takes no parameters")
    }

    pub fn with_hints(mut self, mut hints: Vec<LocationHint>) -> Self {
        hints.sort();
        hints.dedup();
        self.location_hints = hints;
        self
    }

    /// Types the task talks about: parameters plus the objects each family
    /// implicitly involves.
    pub fn referenced_types(&self) -> Vec<ObjectType> {
        use ObjectType::*;
        let mut out: Vec<ObjectType> = match self.family {
            Family::Coffee => vec![Mug, CoffeeMachine],
            Family::WaterPlant => vec![Cup, Plant],
            Family::PlateOfToast => vec![Bread, BreadSliced, Plate, Knife],
            Family::CleanAllX | Family::PutAllXOnY | Family::PutAllXInOneY => vec![],
            Family::NSlicesOfXInY => vec![Knife],
            Family::NCookedSlicesOfXInY => vec![Knife, Microwave],
            Family::BoilX => vec![Pot, Cup],
            Family::Salad => vec![Lettuce, Tomato, Plate, Knife],
            Family::Sandwich => vec![Bread, Lettuce, Tomato, Plate, Knife],
            Family::Breakfast => vec![Mug, Bread, Plate, Knife],
        };
        if let Some(x) = self.params.x {
            out.insert(0, x);
            if let Some(s) = x.info().sliced_into {
                if self.family != Family::BoilX {
                    out.insert(1, s);
                }
            }
        }
        if let Some(y) = self.params.y {
            out.push(y);
        }
        let mut seen = Vec::new();
        out.retain(|t| {
            let fresh = !seen.contains(t);
            seen.push(*t);
            fresh
        });
        out
    }
}

impl fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        let p = &self.params;
        let mut parts = vec![];
        if let Some(n) = p.n {
            parts.push(format!("n:{n}"));
        }
        if let Some(x) = p.x {
            parts.push(format!("x:{x}"));
        }
        if let Some(y) = p.y {
            parts.push(format!("y:{y}"));
        }
        if !parts.is_empty() {
            write!(f, "{{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}
