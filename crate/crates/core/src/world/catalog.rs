//! Fixed object-type catalog.
//!
//! Every object in a scene is an instance of exactly one [`ObjectType`]. The
//! per-type flags never change at runtime; they drive both the affordance
//! table and the interaction semantics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! object_types {
    ($($name:ident),* $(,)?) => {
        /// A catalog entry name.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum ObjectType {
            $($name),*
        }

        impl ObjectType {
            pub const ALL: &'static [ObjectType] = &[$(ObjectType::$name),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(ObjectType::$name => stringify!($name)),*
                }
            }
        }

        impl FromStr for ObjectType {
            type Err = UnknownType;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($name) => Ok(ObjectType::$name),)*
                    _ => Err(UnknownType(s.to_string())),
                }
            }
        }
    };
}

object_types!(
    Potato,
    PotatoSliced,
    Tomato,
    TomatoSliced,
    Bread,
    BreadSliced,
    Lettuce,
    LettuceSliced,
    Mug,
    Cup,
    Plate,
    Bowl,
    Pot,
    Knife,
    Fork,
    Fridge,
    Microwave,
    Sink,
    Faucet,
    CounterTop,
    DiningTable,
    Stove,
    CoffeeMachine,
    Plant,
    Drawer,
    Cabinet,
    DisplayCase,
);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown object type `{0}`")]
pub struct UnknownType(pub String);

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ObjectType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ObjectType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Static properties of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeInfo {
    pub pickupable: bool,
    pub receptacle: bool,
    pub openable: bool,
    pub toggleable: bool,
    pub sliceable: bool,
    pub fillable: bool,
    pub cookable: bool,
    pub cleanable: bool,
    /// Max directly contained items; 0 for non-receptacles.
    pub capacity: usize,
    /// Holding this object allows slicing.
    pub knife_class: bool,
    /// Contents are hidden and unreachable while the receptacle is closed.
    pub enclosed: bool,
    /// Type produced by slicing, and how many pieces.
    pub sliced_into: Option<ObjectType>,
    pub slice_count: usize,
}

const NONE: TypeInfo = TypeInfo {
    pickupable: false,
    receptacle: false,
    openable: false,
    toggleable: false,
    sliceable: false,
    fillable: false,
    cookable: false,
    cleanable: false,
    capacity: 0,
    knife_class: false,
    enclosed: false,
    sliced_into: None,
    slice_count: 0,
};

pub const DEFAULT_SLICE_COUNT: usize = 4;

const fn receptacle(capacity: usize) -> TypeInfo {
    TypeInfo { receptacle: true, capacity, ..NONE }
}

const fn cabinet_like(capacity: usize) -> TypeInfo {
    TypeInfo { receptacle: true, openable: true, enclosed: true, capacity, ..NONE }
}

const fn sliceable(into: ObjectType, cookable: bool) -> TypeInfo {
    TypeInfo {
        pickupable: true,
        sliceable: true,
        cookable,
        sliced_into: Some(into),
        slice_count: DEFAULT_SLICE_COUNT,
        ..NONE
    }
}

const fn piece(cookable: bool) -> TypeInfo {
    TypeInfo { pickupable: true, cookable, ..NONE }
}

impl ObjectType {
    pub const fn info(self) -> TypeInfo {
        use ObjectType::*;
        match self {
            Potato => sliceable(PotatoSliced, true),
            PotatoSliced => piece(true),
            Tomato => sliceable(TomatoSliced, false),
            TomatoSliced => piece(false),
            Bread => sliceable(BreadSliced, false),
            BreadSliced => piece(true),
            Lettuce => sliceable(LettuceSliced, false),
            LettuceSliced => piece(false),
            Mug | Cup => TypeInfo { pickupable: true, fillable: true, cleanable: true, ..NONE },
            Plate => TypeInfo { pickupable: true, receptacle: true, cleanable: true, capacity: 4, ..NONE },
            Bowl => {
                TypeInfo { pickupable: true, receptacle: true, fillable: true, cleanable: true, capacity: 3, ..NONE }
            }
            Pot => {
                TypeInfo { pickupable: true, receptacle: true, fillable: true, cleanable: true, capacity: 2, ..NONE }
            }
            Knife => TypeInfo { pickupable: true, knife_class: true, ..NONE },
            Fork => TypeInfo { pickupable: true, cleanable: true, ..NONE },
            Fridge => cabinet_like(6),
            Microwave => TypeInfo { toggleable: true, ..cabinet_like(2) },
            Sink => receptacle(2),
            Faucet => TypeInfo { toggleable: true, ..NONE },
            CounterTop => receptacle(10),
            DiningTable => receptacle(12),
            Stove => TypeInfo { toggleable: true, ..receptacle(2) },
            CoffeeMachine => TypeInfo { toggleable: true, ..receptacle(1) },
            Plant => NONE,
            Drawer => cabinet_like(2),
            Cabinet => cabinet_like(3),
            DisplayCase => TypeInfo { enclosed: true, ..receptacle(3) },
        }
    }

    /// Whole object this slice type is cut from.
    pub fn slice_source(self) -> Option<ObjectType> {
        ObjectType::ALL.iter().copied().find(|t| t.info().sliced_into == Some(self))
    }

    /// True for `self` itself and, for sliceable types, its slice type.
    pub fn covers(self, other: ObjectType) -> bool {
        self == other || self.info().sliced_into == Some(other)
    }

    /// Fixtures never move and anchor navigation.
    pub fn is_fixture(self) -> bool {
        !self.info().pickupable
    }

    pub fn lower_words(self) -> &'static str {
        use ObjectType::*;
        match self {
            Potato => "potato",
            PotatoSliced => "potato slice",
            Tomato => "tomato",
            TomatoSliced => "tomato slice",
            Bread => "bread",
            BreadSliced => "bread slice",
            Lettuce => "lettuce",
            LettuceSliced => "lettuce slice",
            Mug => "mug",
            Cup => "cup",
            Plate => "plate",
            Bowl => "bowl",
            Pot => "pot",
            Knife => "knife",
            Fork => "fork",
            Fridge => "fridge",
            Microwave => "microwave",
            Sink => "sink",
            Faucet => "faucet",
            CounterTop => "counter",
            DiningTable => "dining table",
            Stove => "stove",
            CoffeeMachine => "coffee machine",
            Plant => "plant",
            Drawer => "drawer",
            Cabinet => "cabinet",
            DisplayCase => "display case",
        }
    }

    pub fn plural_words(self) -> &'static str {
        use ObjectType::*;
        match self {
            Potato => "potatoes",
            Tomato => "tomatoes",
            Knife => "knives",
            Bread => "bread",
            Lettuce => "lettuce",
            Mug => "mugs",
            Cup => "cups",
            Plate => "plates",
            Bowl => "bowls",
            Pot => "pots",
            Fork => "forks",
            _ => self.lower_words(),
        }
    }
}
