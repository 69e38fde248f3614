//! Interaction semantics. Every precondition violation becomes a failure
//! outcome and leaves the world untouched.

use serde::{Deserialize, Serialize};

use super::affordance::Action;
use super::catalog::ObjectType;
use super::nav::in_range;
use super::state::{CookMethod, Fill, Location, ObjectId, ObjectInstance, ObjectState, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    InvalidPair,
    PrerequisiteMissing,
    NotInRange,
    Occluded,
    CapacityExceeded,
    SurfaceRejected,
    NoSuchObject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionOutcome {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
}

impl InteractionOutcome {
    pub const OK: InteractionOutcome = InteractionOutcome { success: true, failure_reason: None };

    pub fn fail(reason: FailureReason) -> Self {
        Self { success: false, failure_reason: Some(reason) }
    }
}

/// Apply one interaction. On failure the returned world equals the input.
pub fn apply_interaction(world: &WorldState, action: Action, target: ObjectId) -> (WorldState, InteractionOutcome) {
    let mut next = world.clone();
    match try_apply(&mut next, action, target) {
        Ok(()) => {
            settle(&mut next);
            (next, InteractionOutcome::OK)
        }
        Err(reason) => (world.clone(), InteractionOutcome::fail(reason)),
    }
}

/// In-place variant; `world` is only modified on success.
pub fn apply_in_place(world: &mut WorldState, action: Action, target: ObjectId) -> InteractionOutcome {
    if let Err(reason) = check(world, action, target) {
        return InteractionOutcome::fail(reason);
    }
    try_apply(world, action, target).expect("preconditions were checked");
    settle(world);
    InteractionOutcome::OK
}

/// Would `action` on `target` succeed from this world?
pub fn check(world: &WorldState, action: Action, target: ObjectId) -> Result<(), FailureReason> {
    use FailureReason::*;
    let t = world.get(target).ok_or(NoSuchObject)?;
    let kind = t.kind();
    let info = kind.info();
    if !action.admits(kind) {
        return Err(InvalidPair);
    }
    if world.is_carried(target) {
        return Err(if action == Action::Pickup { PrerequisiteMissing } else { NotInRange });
    }
    if world.is_occluded(target) {
        return Err(Occluded);
    }
    if !in_range(world, target) {
        return Err(NotInRange);
    }
    let held = world.held.and_then(|h| world.get(h));
    let s = &t.state;
    match action {
        Action::Pickup => {
            if held.is_some() {
                return Err(PrerequisiteMissing);
            }
        }
        Action::Place => {
            if held.is_none() || (info.enclosed && !s.is_open) {
                return Err(PrerequisiteMissing);
            }
            if world.failure_surfaces.contains(&kind) {
                return Err(SurfaceRejected);
            }
            if s.contents.len() >= info.capacity {
                return Err(CapacityExceeded);
            }
        }
        Action::Open => {
            if s.is_open || s.is_toggled_on {
                return Err(PrerequisiteMissing);
            }
        }
        Action::Close => {
            if !s.is_open {
                return Err(PrerequisiteMissing);
            }
        }
        Action::ToggleOn => {
            if s.is_toggled_on || (info.openable && s.is_open) {
                return Err(PrerequisiteMissing);
            }
        }
        Action::ToggleOff => {
            if !s.is_toggled_on {
                return Err(PrerequisiteMissing);
            }
        }
        Action::Slice => {
            if !held.is_some_and(|h| h.kind().info().knife_class) {
                return Err(PrerequisiteMissing);
            }
            if let Some(c) = s.contained_in {
                let cont = &world.instances[&c];
                let after = cont.state.contents.len() - 1 + info.slice_count;
                if after > cont.kind().info().capacity {
                    return Err(CapacityExceeded);
                }
            }
        }
        Action::Pour => {
            if !held.is_some_and(|h| h.state.fill != Fill::None) {
                return Err(PrerequisiteMissing);
            }
        }
    }
    Ok(())
}

fn try_apply(world: &mut WorldState, action: Action, target: ObjectId) -> Result<(), FailureReason> {
    check(world, action, target)?;
    match action {
        Action::Pickup => {
            detach(world, target);
            relocate(world, target, Location::Held);
            world.held = Some(target);
            world.last_held = Some(target);
        }
        Action::Place => {
            let item = world.held.take().expect("checked");
            let cell = world.effective_cell(target).expect("checked");
            relocate(world, item, cell);
            world.instances.get_mut(&item).unwrap().state.contained_in = Some(target);
            world.instances.get_mut(&target).unwrap().state.contents.push(item);
        }
        Action::Open => set(world, target, |s| s.is_open = true),
        Action::Close => set(world, target, |s| s.is_open = false),
        Action::ToggleOn => set(world, target, |s| s.is_toggled_on = true),
        Action::ToggleOff => set(world, target, |s| s.is_toggled_on = false),
        Action::Slice => slice(world, target),
        Action::Pour => {
            let held = world.held.expect("checked");
            let fill = std::mem::take(&mut world.instances.get_mut(&held).unwrap().state.fill);
            let kind = target.kind;
            if kind.info().fillable || kind == ObjectType::Plant {
                set(world, target, |s| s.fill = fill);
            }
        }
    }
    Ok(())
}

fn set(world: &mut WorldState, id: ObjectId, f: impl FnOnce(&mut ObjectState)) {
    f(&mut world.instances.get_mut(&id).expect("instance exists").state);
}

fn detach(world: &mut WorldState, id: ObjectId) {
    if let Some(parent) = world.instances.get_mut(&id).and_then(|o| o.state.contained_in.take()) {
        world.instances.get_mut(&parent).expect("container exists").state.contents.retain(|c| *c != id);
    }
}

fn relocate(world: &mut WorldState, id: ObjectId, loc: Location) {
    let mut ids = world.descendants(id);
    ids.push(id);
    for d in ids {
        world.instances.get_mut(&d).unwrap().cell = loc;
    }
}

fn slice(world: &mut WorldState, target: ObjectId) {
    let whole = world.instances.remove(&target).expect("checked");
    let info = whole.kind().info();
    let piece_kind = info.sliced_into.expect("sliceable");
    let first = world.next_ordinal(piece_kind);
    let pieces: Vec<ObjectId> = (0..info.slice_count as u32).map(|i| ObjectId::new(piece_kind, first + i)).collect();
    let container = whole.state.contained_in;
    for &p in &pieces {
        world.instances.insert(
            p,
            ObjectInstance {
                id: p,
                cell: whole.cell,
                state: ObjectState {
                    is_sliced: true,
                    is_cooked: whole.state.is_cooked,
                    cook_method: whole.state.cook_method,
                    contained_in: container,
                    ..ObjectState::default()
                },
                source: Some(whole.source.unwrap_or(target)),
            },
        );
    }
    if let Some(c) = container {
        let contents = &mut world.instances.get_mut(&c).unwrap().state.contents;
        let at = contents.iter().position(|x| *x == target).expect("listed");
        contents.splice(at..=at, pieces);
    }
}

fn cook(world: &mut WorldState, id: ObjectId, method: CookMethod) {
    let o = world.instances.get_mut(&id).unwrap();
    if o.kind().info().cookable && !o.state.is_cooked {
        o.state.is_cooked = true;
        o.state.cook_method = method;
    }
}

/// Continuous appliance effects, applied after every successful interaction.
fn settle(world: &mut WorldState) {
    let active: Vec<(ObjectId, ObjectType)> =
        world.instances.values().filter(|o| o.state.is_toggled_on).map(|o| (o.id, o.kind())).collect();
    for (id, kind) in active {
        match kind {
            ObjectType::Faucet => {
                let sinks: Vec<ObjectId> = world.of_type(ObjectType::Sink).map(|s| s.id).collect();
                for s in sinks {
                    for c in world.instances[&s].state.contents.clone() {
                        let o = world.instances.get_mut(&c).unwrap();
                        let info = o.kind().info();
                        if info.cleanable {
                            o.state.is_dirty = false;
                        }
                        if info.fillable {
                            o.state.fill = Fill::Water;
                        }
                    }
                }
            }
            ObjectType::CoffeeMachine => {
                for c in world.instances[&id].state.contents.clone() {
                    let o = world.instances.get_mut(&c).unwrap();
                    if o.kind().info().fillable {
                        o.state.fill = Fill::Coffee;
                    }
                }
            }
            ObjectType::Microwave => {
                if !world.instances[&id].state.is_open {
                    for d in world.descendants(id) {
                        cook(world, d, CookMethod::Microwave);
                    }
                }
            }
            ObjectType::Stove => {
                for c in world.instances[&id].state.contents.clone() {
                    cook(world, c, CookMethod::Stove);
                    let vessel = &world.instances[&c];
                    let method = if vessel.state.fill == Fill::Water { CookMethod::Boil } else { CookMethod::Stove };
                    for d in vessel.state.contents.clone() {
                        cook(world, d, method);
                    }
                }
            }
            _ => {}
        }
    }
}
