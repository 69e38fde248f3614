//! Assisted execution: the direct attempt wrapped in recovery heuristics.

use super::{resolve_target, StepRecord};
use crate::plan::{ObjectRef, PlanStep};
use crate::world::{
    apply_in_place, check_interaction, distance_to, distances_from, navigate_to, Action, FailureReason,
    InteractionOutcome, ObjectId, ObjectType, WorldState,
};

/// Whether the step's intended effect already holds.
pub fn already_complete(world: &WorldState, step: &PlanStep, target: Option<ObjectId>) -> bool {
    let PlanStep::Act { action, object } = *step else { return false };
    let state = |id: ObjectId| world.get(id).map(|o| &o.state);
    match action {
        Action::Pickup => world.held.is_some_and(|h| object.matches(h)),
        Action::Place => {
            let item = world.held.or(world.last_held);
            item.and_then(|i| world.get(i)).and_then(|o| o.state.contained_in).is_some_and(|c| object.matches(c))
        }
        Action::Open => target.and_then(state).is_some_and(|s| s.is_open),
        Action::Close => target.and_then(state).is_some_and(|s| !s.is_open),
        Action::ToggleOn => target.and_then(state).is_some_and(|s| s.is_toggled_on),
        Action::ToggleOff => target.and_then(state).is_some_and(|s| !s.is_toggled_on),
        Action::Slice => match (target, object) {
            (Some(t), _) => world.instances.values().any(|o| o.source == Some(t)),
            (None, ObjectRef::Id(id)) => world.instances.values().any(|o| o.source == Some(id)),
            (None, ObjectRef::Type(t)) => t.info().sliced_into.is_some_and(|s| world.of_type(s).next().is_some()),
        },
        Action::Pour => target.and_then(state).is_some_and(|s| s.fill != crate::world::Fill::None),
    }
}

fn resolve_assisted(world: &WorldState, step: &PlanStep) -> Option<ObjectId> {
    if let PlanStep::Act { action: Action::Pickup, object } = *step {
        if let Some(h) = world.held.filter(|h| object.matches(*h)) {
            return Some(h);
        }
    }
    resolve_target(world, step)
}

/// Nearest counter with room, falling back to a dining table.
fn set_aside_surface(world: &WorldState) -> Option<ObjectId> {
    let dist = distances_from(world, world.agent_cell);
    [ObjectType::CounterTop, ObjectType::DiningTable].into_iter().find_map(|t| {
        world
            .of_type(t)
            .filter(|o| o.state.contents.len() < t.info().capacity)
            .filter_map(|o| distance_to(world, &dist, o.id).map(|d| (d, o.id.ordinal, o.id)))
            .min()
            .map(|(_, _, id)| id)
    })
}

struct Session {
    world: WorldState,
    subactions: Vec<(Action, ObjectId)>,
    interactions: u32,
}

impl Session {
    fn sub(&mut self, action: Action, target: ObjectId) -> bool {
        if navigate_to(&mut self.world, target).is_none() {
            return false;
        }
        self.interactions += 1;
        let ok = apply_in_place(&mut self.world, action, target).success;
        if ok {
            self.subactions.push((action, target));
        }
        ok
    }

    fn is_on(&self, id: ObjectId) -> bool {
        self.world.get(id).is_some_and(|o| o.state.is_toggled_on)
    }

    fn is_open(&self, id: ObjectId) -> bool {
        self.world.get(id).is_some_and(|o| o.state.is_open)
    }

    /// Open every closed openable ancestor, outermost first. Returns those opened.
    fn open_ancestors(&mut self, id: ObjectId) -> Vec<ObjectId> {
        let mut opened = Vec::new();
        let mut chain = self.world.ancestors(id);
        chain.reverse();
        for a in chain {
            if a.kind.info().openable && !self.is_open(a) {
                if self.is_on(a) {
                    self.sub(Action::ToggleOff, a);
                }
                if self.sub(Action::Open, a) {
                    opened.push(a);
                }
            }
        }
        opened
    }

    fn close_all(&mut self, opened: &[ObjectId]) {
        for &a in opened.iter().rev() {
            self.sub(Action::Close, a);
        }
    }

    /// Bring `item` out of its closed enclosure onto a counter, keeping hold
    /// of whatever the agent was carrying.
    fn extract_to_counter(&mut self, item: ObjectId) {
        let carried = self.world.held;
        if carried.is_some() {
            let Some(surface) = set_aside_surface(&self.world) else { return };
            if !self.sub(Action::Place, surface) {
                return;
            }
        }
        let opened = self.open_ancestors(item);
        let picked = self.sub(Action::Pickup, item);
        self.close_all(&opened);
        if picked {
            if let Some(surface) = set_aside_surface(&self.world) {
                self.sub(Action::Place, surface);
            }
        }
        if let Some(c) = carried {
            self.sub(Action::Pickup, c);
        }
    }

    fn in_closed_enclosure(&self, id: ObjectId) -> bool {
        self.world.ancestors(id).iter().any(|a| {
            let info = a.kind.info();
            info.openable && !self.is_open(*a)
        })
    }

    fn attempt(&mut self, action: Action, target: ObjectId) -> InteractionOutcome {
        navigate_to(&mut self.world, target);
        self.interactions += 1;
        apply_in_place(&mut self.world, action, target)
    }
}

pub(super) fn assisted(world: &WorldState, step: &PlanStep, action: Action) -> (crate::world::WorldState, StepRecord) {
    let resolved = resolve_assisted(world, step);
    let skip = |w: &WorldState, nav: usize| {
        let rec = StepRecord {
            step: *step,
            resolved,
            nav_path_len: nav,
            assist_subactions: vec![],
            outcome: InteractionOutcome::OK,
            skipped_already_complete: true,
            interactions: 0,
        };
        (w.clone(), rec)
    };
    let Some(id) = resolved else {
        if already_complete(world, step, None) {
            return skip(world, 0);
        }
        return (world.clone(), StepRecord::failed(*step, None, FailureReason::NoSuchObject));
    };

    let mut s = Session { world: world.clone(), subactions: vec![], interactions: 0 };
    let nav = match navigate_to(&mut s.world, id) {
        Some(n) => n,
        None => {
            if already_complete(world, step, Some(id)) {
                return skip(world, 0);
            }
            return (world.clone(), StepRecord::failed(*step, Some(id), FailureReason::NotInRange));
        }
    };

    // A step that would succeed directly is executed as is.
    if check_interaction(&s.world, action, id).is_ok() {
        let outcome = s.attempt(action, id);
        return finish(s, step, id, nav, outcome);
    }
    if already_complete(&s.world, step, Some(id)) {
        return skip(&s.world, nav);
    }

    let outcome = match action {
        Action::Pickup => {
            let opened = s.open_ancestors(id);
            let out = s.attempt(action, id);
            s.close_all(&opened);
            out
        }
        Action::Place => {
            let encased = s.world.ancestors(id).iter().any(|a| a.kind.info().openable && !s.is_open(*a));
            if encased {
                s.extract_to_counter(id);
            }
            let mut opened = vec![];
            if id.kind.info().openable && !s.is_open(id) {
                if s.is_on(id) {
                    s.sub(Action::ToggleOff, id);
                }
                if s.sub(Action::Open, id) {
                    opened.push(id);
                }
            }
            let mut out = s.attempt(action, id);
            if out.failure_reason == Some(FailureReason::CapacityExceeded) {
                let mut contents = s.world.instances[&id].state.contents.clone();
                contents.sort();
                for c in contents {
                    let Some(carried) = s.world.held else { break };
                    let Some(surface) = set_aside_surface(&s.world) else { break };
                    if !s.sub(Action::Place, surface) {
                        break;
                    }
                    let moved = s.sub(Action::Pickup, c) && {
                        match set_aside_surface(&s.world) {
                            Some(surf) => s.sub(Action::Place, surf),
                            None => false,
                        }
                    };
                    if !s.sub(Action::Pickup, carried) || !moved {
                        break;
                    }
                    out = s.attempt(action, id);
                    if out.success {
                        break;
                    }
                }
            }
            s.close_all(&opened);
            out
        }
        Action::Open | Action::Close => {
            if s.is_on(id) {
                s.sub(Action::ToggleOff, id);
            }
            s.attempt(action, id)
        }
        Action::ToggleOn | Action::ToggleOff => {
            if s.is_open(id) {
                s.sub(Action::Close, id);
            }
            s.attempt(action, id)
        }
        Action::Slice => {
            let crowded = check_interaction(&s.world, action, id) == Err(FailureReason::CapacityExceeded);
            if s.in_closed_enclosure(id) || crowded {
                s.extract_to_counter(id);
            }
            s.attempt(action, id)
        }
        Action::Pour => s.attempt(action, id),
    };
    let outcome = if outcome.success {
        outcome
    } else if check_interaction(&retry_world(&s.world, id), action, id).is_ok() {
        s.attempt(action, id)
    } else {
        outcome
    };
    finish(s, step, id, nav, outcome)
}

/// World after one re-navigation toward the target.
fn retry_world(w: &WorldState, id: ObjectId) -> WorldState {
    let mut r = w.clone();
    navigate_to(&mut r, id);
    r
}

fn finish(
    s: Session,
    step: &PlanStep,
    id: ObjectId,
    nav: usize,
    outcome: InteractionOutcome,
) -> (WorldState, StepRecord) {
    let rec = StepRecord {
        step: *step,
        resolved: Some(id),
        nav_path_len: nav,
        assist_subactions: s.subactions,
        outcome,
        skipped_already_complete: false,
        interactions: s.interactions,
    };
    (s.world, rec)
}
