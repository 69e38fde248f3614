//! Goal conditions: type-quantified predicates over object states.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::spec::{Family, TaskSpec};
use super::TaskError;
use crate::world::{CookMethod, Fill, ObjectId, ObjectInstance, ObjectType, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    ExistsK,
    ForAll,
}

/// Required state; `None` fields are unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequiredState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooked: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cook_method: Option<CookMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sliced: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<Fill>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toggled: Option<bool>,
}

impl RequiredState {
    pub fn holds(&self, o: &ObjectInstance) -> bool {
        let s = &o.state;
        self.cooked.is_none_or(|v| s.is_cooked == v)
            && self.cook_method.is_none_or(|v| s.cook_method == v)
            && self.sliced.is_none_or(|v| s.is_sliced == v)
            && self.clean.is_none_or(|v| s.is_dirty != v)
            && self.fill.is_none_or(|v| s.fill == v)
            && self.toggled.is_none_or(|v| s.is_toggled_on == v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    /// Directly inside some instance of the type.
    In(ObjectType),
    /// All counted subjects directly inside one shared instance of the type.
    InOneCommon(ObjectType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoalCondition {
    pub kind: PredicateKind,
    pub quantity: u32,
    pub subject: ObjectType,
    /// Also count slices cut from `subject`.
    #[serde(default)]
    pub include_slices: bool,
    #[serde(default)]
    pub required: RequiredState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub containment: Option<Containment>,
}

impl GoalCondition {
    pub fn exists(quantity: u32, subject: ObjectType, required: RequiredState) -> Self {
        Self { kind: PredicateKind::ExistsK, quantity, subject, include_slices: false, required, containment: None }
    }

    pub fn for_all(quantity: u32, subject: ObjectType, required: RequiredState) -> Self {
        Self { kind: PredicateKind::ForAll, quantity, subject, include_slices: false, required, containment: None }
    }

    pub fn inside(mut self, c: Containment) -> Self {
        self.containment = Some(c);
        self
    }

    pub fn with_slices(mut self) -> Self {
        self.include_slices = true;
        self
    }

    fn subject_matches(&self, kind: ObjectType) -> bool {
        kind == self.subject || (self.include_slices && self.subject.covers(kind))
    }
}

impl fmt::Display for GoalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PredicateKind::ExistsK => write!(f, "exists-{} {}", self.quantity, self.subject)?,
            PredicateKind::ForAll => write!(f, "for-all-{} {}", self.quantity, self.subject)?,
        }
        if self.include_slices {
            f.write_str("*")?;
        }
        let r = &self.required;
        let mut req = vec![];
        if let Some(v) = r.cooked {
            req.push(format!("cooked={v}"));
        }
        if let Some(v) = r.cook_method {
            req.push(format!("cook_method={v:?}"));
        }
        if let Some(v) = r.sliced {
            req.push(format!("sliced={v}"));
        }
        if let Some(v) = r.clean {
            req.push(format!("clean={v}"));
        }
        if let Some(v) = r.fill {
            req.push(format!("fill={v:?}"));
        }
        if let Some(v) = r.toggled {
            req.push(format!("toggled={v}"));
        }
        if !req.is_empty() {
            write!(f, " [{}]", req.join(", "))?;
        }
        match self.containment {
            Some(Containment::In(t)) => write!(f, " in {t}"),
            Some(Containment::InOneCommon(t)) => write!(f, " in one {t}"),
            None => Ok(()),
        }
    }
}

/// Evaluate one goal condition. Pure.
pub fn check_predicate(world: &WorldState, cond: &GoalCondition) -> bool {
    let subjects: Vec<&ObjectInstance> = world.instances.values().filter(|o| cond.subject_matches(o.kind())).collect();
    let container_of = |o: &ObjectInstance| o.state.contained_in;
    let in_type = |o: &ObjectInstance, t: ObjectType| container_of(o).is_some_and(|c| c.kind == t);

    match cond.kind {
        PredicateKind::ExistsK => {
            let ok: Vec<&&ObjectInstance> = subjects.iter().filter(|o| cond.required.holds(o)).collect();
            let count = match cond.containment {
                None => ok.len(),
                Some(Containment::In(t)) => ok.iter().filter(|o| in_type(o, t)).count(),
                Some(Containment::InOneCommon(t)) => {
                    let mut per: BTreeMap<ObjectId, usize> = BTreeMap::new();
                    for o in ok.iter().filter(|o| in_type(o, t)) {
                        *per.entry(container_of(o).unwrap()).or_default() += 1;
                    }
                    per.values().copied().max().unwrap_or(0)
                }
            };
            count >= cond.quantity as usize
        }
        PredicateKind::ForAll => {
            if !subjects.iter().all(|o| cond.required.holds(o)) {
                return false;
            }
            match cond.containment {
                None => true,
                Some(Containment::In(t)) => subjects.iter().all(|o| in_type(o, t)),
                Some(Containment::InOneCommon(t)) => {
                    let mut containers = subjects.iter().map(|o| container_of(o));
                    match containers.next() {
                        None => true,
                        Some(first) => first.is_some_and(|c| c.kind == t) && containers.all(|c| c == first),
                    }
                }
            }
        }
    }
}

fn require_type(world: &WorldState, t: ObjectType) -> Result<(), TaskError> {
    let present = world.instances.keys().any(|id| t.covers(id.kind));
    if present {
        Ok(())
    } else {
        Err(TaskError::MissingType(t))
    }
}

fn param(p: Option<ObjectType>, family: Family, name: &'static str) -> Result<ObjectType, TaskError> {
    p.ok_or(TaskError::Spec(super::TaskSpecError::MissingParam { family, param: name }))
}

/// Goal conditions that define completion of `task` in `world`.
pub fn goal_conditions(task: &TaskSpec, world: &WorldState) -> Result<Vec<GoalCondition>, TaskError> {
    use ObjectType::*;
    let fam = task.family;
    let p = task.params;
    let clean = RequiredState { clean: Some(true), ..Default::default() };
    let cooked = RequiredState { cooked: Some(true), ..Default::default() };
    let any = RequiredState::default();

    let coffee = || {
        GoalCondition::exists(
            1,
            Mug,
            RequiredState { fill: Some(Fill::Coffee), clean: Some(true), ..Default::default() },
        )
    };
    let toast = |k| GoalCondition::exists(k, BreadSliced, cooked).inside(Containment::In(Plate));
    let on_plate = |t| GoalCondition::exists(1, t, any).inside(Containment::In(Plate));

    let (needed, conds): (Vec<ObjectType>, Vec<GoalCondition>) = match fam {
        Family::Coffee => (vec![Mug, CoffeeMachine], vec![coffee()]),
        Family::WaterPlant => (
            vec![Plant, Sink, Faucet],
            vec![GoalCondition::exists(1, Plant, RequiredState { fill: Some(Fill::Water), ..Default::default() })],
        ),
        Family::PlateOfToast => (vec![Bread, Plate, Knife, Microwave], vec![toast(1)]),
        Family::CleanAllX => {
            let x = param(p.x, fam, "x")?;
            let k = world.of_type(x).count() as u32;
            (vec![x, Sink, Faucet], vec![GoalCondition::for_all(k, x, clean)])
        }
        Family::PutAllXOnY => {
            let (x, y) = (param(p.x, fam, "x")?, param(p.y, fam, "y")?);
            let k = world.of_type(x).count() as u32;
            (vec![x, y], vec![GoalCondition::for_all(k, x, any).inside(Containment::In(y))])
        }
        Family::PutAllXInOneY => {
            let (x, y) = (param(p.x, fam, "x")?, param(p.y, fam, "y")?);
            let k = world.of_type(x).count() as u32;
            (vec![x, y], vec![GoalCondition::for_all(k, x, any).inside(Containment::InOneCommon(y))])
        }
        Family::NSlicesOfXInY | Family::NCookedSlicesOfXInY => {
            let (x, y) = (param(p.x, fam, "x")?, param(p.y, fam, "y")?);
            let n = p.n.ok_or(TaskError::Spec(super::TaskSpecError::MissingParam { family: fam, param: "n" }))?;
            let piece = x.info().sliced_into.ok_or(TaskError::NotSliceable(x))?;
            let req = if fam == Family::NCookedSlicesOfXInY { cooked } else { any };
            let mut needed = vec![x, y, Knife];
            if fam == Family::NCookedSlicesOfXInY {
                needed.push(Microwave);
            }
            (needed, vec![GoalCondition::exists(n, piece, req).inside(Containment::InOneCommon(y))])
        }
        Family::BoilX => {
            let x = param(p.x, fam, "x")?;
            let boiled =
                RequiredState { cooked: Some(true), cook_method: Some(CookMethod::Boil), ..Default::default() };
            (vec![x, Pot, Stove, Sink, Faucet], vec![GoalCondition::exists(1, x, boiled).with_slices()])
        }
        Family::Salad => (vec![Lettuce, Tomato, Plate, Knife], vec![on_plate(LettuceSliced), on_plate(TomatoSliced)]),
        Family::Sandwich => (
            vec![Bread, Lettuce, Tomato, Plate, Knife, Microwave],
            vec![toast(2), on_plate(LettuceSliced), on_plate(TomatoSliced)],
        ),
        Family::Breakfast => (vec![Mug, CoffeeMachine, Bread, Plate, Knife, Microwave], vec![coffee(), toast(1)]),
    };
    for t in needed {
        require_type(world, t)?;
    }
    Ok(conds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_quantity_is_vacuous() {
        let w = crate::world::build_world(&crate::world::SceneSpec {
            grid: crate::world::GridSpec { width: 2, height: 2, blocked: vec![], interaction_range: 1 },
            agent_cell: crate::world::Cell(0, 0),
            objects: vec![],
            failure_surfaces: vec![],
        })
        .unwrap();
        let c = GoalCondition::exists(0, ObjectType::PotatoSliced, RequiredState::default());
        assert!(check_predicate(&w, &c));
        let all = GoalCondition::for_all(0, ObjectType::Mug, RequiredState { clean: Some(true), ..Default::default() });
        assert!(check_predicate(&w, &all));
    }

    #[test]
    fn display_is_readable() {
        let c = GoalCondition::exists(
            2,
            ObjectType::PotatoSliced,
            RequiredState { cooked: Some(true), ..Default::default() },
        )
        .inside(Containment::InOneCommon(ObjectType::Plate));
        assert_eq!(c.to_string(), "exists-2 PotatoSliced [cooked=true] in one Plate");
    }
}
