//! Demonstration assembly and slicing into EDH instances.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dialog::{location_hints, render_dialog};
use super::goals::{check_predicate, goal_conditions, Containment, GoalCondition, RequiredState};
use super::planner::plan_structured;
use super::scenegen::{generate_scene, sample_task, Profile};
use super::{Demonstration, DialogEvent, EDHInstance, TaskError};
use crate::plan::{compile_plan, replay, CompileMode, Trajectory};
use crate::world::{build_world, ObjectId, ObjectInstance, ObjectType, WorldState};

pub const MAX_EDH_PER_DEMO: usize = 4;
const ATTEMPTS: u64 = 24;

/// Generate a scene, sample a task, plan it, and attach dialog. Scenes or
/// tasks the planner cannot solve are resampled.
pub fn make_demonstration(id: &str, seed: u64, profile: &Profile) -> Result<Demonstration, TaskError> {
    let mut last = TaskError::Unsolved("no attempts".into());
    for attempt in 0..ATTEMPTS {
        let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt);
        match attempt_demo(id, s, profile) {
            Ok(d) => return Ok(d),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn attempt_demo(id: &str, seed: u64, profile: &Profile) -> Result<Demonstration, TaskError> {
    let scene = generate_scene(seed, profile)?;
    let world = build_world(&scene)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7461_736b);
    let task = sample_task(&world, &mut rng).ok_or_else(|| TaskError::Unsolved("no feasible task".into()))?;
    let planned = plan_structured(&world, &task)?;
    let end = replay(&world, &planned.trajectory).map_err(|e| TaskError::Unsolved(e.to_string()))?;
    let goals = goal_conditions(&task, &world)?;
    if !goals.iter().all(|g| check_predicate(&end, g)) {
        return Err(TaskError::Unsolved("replay does not reach the goal".into()));
    }

    let hints = location_hints(&task, &world);
    let task = task.with_hints(hints.clone());
    let lines = render_dialog(&task, &world, seed);
    let directive = lines.len() - hints.len();
    let events = &planned.trajectory.events;
    let mut dialog: Vec<DialogEvent> =
        lines[..directive].iter().map(|t| DialogEvent { at: 0, text: t.clone() }).collect();
    let mut boundaries = vec![0];
    for (h, text) in hints.iter().zip(&lines[directive..]) {
        let container = world
            .of_type(h.object)
            .find(|o| world.is_occluded(o.id) && o.state.contained_in.is_some_and(|c| c.kind == h.container))
            .and_then(|o| o.state.contained_in);
        let at = container.and_then(|c| events.iter().position(|e| e.target == Some(c))).unwrap_or(0);
        dialog.push(DialogEvent { at, text: text.clone() });
        boundaries.push(at);
    }
    dialog.sort_by_key(|d| d.at);
    boundaries.extend(planned.subtask_ends.iter().copied().filter(|&e| e < events.len()));
    boundaries.sort_unstable();
    boundaries.dedup();
    boundaries.truncate(MAX_EDH_PER_DEMO);

    Ok(Demonstration { id: id.to_string(), scene, task, trajectory: planned.trajectory, dialog, boundaries })
}

fn required_delta(before: Option<&ObjectInstance>, after: &ObjectInstance) -> RequiredState {
    let a = &after.state;
    let mut r = RequiredState::default();
    let Some(b) = before.map(|o| &o.state) else {
        r.sliced = Some(a.is_sliced);
        return r;
    };
    if a.is_cooked != b.is_cooked {
        r.cooked = Some(a.is_cooked);
    }
    if a.cook_method != b.cook_method {
        r.cook_method = Some(a.cook_method);
    }
    if a.is_sliced != b.is_sliced {
        r.sliced = Some(a.is_sliced);
    }
    if a.is_dirty != b.is_dirty {
        r.clean = Some(!a.is_dirty);
    }
    if a.fill != b.fill {
        r.fill = Some(a.fill);
    }
    if a.is_toggled_on != b.is_toggled_on {
        r.toggled = Some(a.is_toggled_on);
    }
    r
}

fn satisfying_count(world: &WorldState, g: &GoalCondition) -> u32 {
    let ok = |o: &&ObjectInstance| o.kind() == g.subject && g.required.holds(o);
    match g.containment {
        None => world.instances.values().filter(ok).count() as u32,
        Some(Containment::In(t)) => {
            world.instances.values().filter(ok).filter(|o| o.state.contained_in.is_some_and(|c| c.kind == t)).count()
                as u32
        }
        Some(Containment::InOneCommon(t)) => {
            let mut per: BTreeMap<ObjectId, u32> = BTreeMap::new();
            for o in world.instances.values().filter(ok) {
                if let Some(c) = o.state.contained_in.filter(|c| c.kind == t) {
                    *per.entry(c).or_default() += 1;
                }
            }
            per.values().copied().max().unwrap_or(0)
        }
    }
}

/// Object state changes between two worlds, generalized from instances to
/// type-quantified conditions. Openness is not tracked.
pub fn goal_delta(before: &WorldState, after: &WorldState) -> Vec<GoalCondition> {
    type Key = (ObjectType, RequiredState, Option<ObjectType>);
    let mut groups: BTreeMap<Key, Vec<&ObjectInstance>> = BTreeMap::new();
    for o in after.instances.values() {
        let prev = before.get(o.id).or_else(|| o.source.and_then(|s| before.get(s)));
        let req = required_delta(prev, o);
        let moved = prev.map(|p| p.state.contained_in) != Some(o.state.contained_in);
        let dest = if moved { o.state.contained_in.map(|c| c.kind) } else { None };
        if req == RequiredState::default() && dest.is_none() {
            continue;
        }
        groups.entry((o.kind(), req, dest)).or_default().push(o);
    }
    let mut out = Vec::new();
    for ((kind, req, dest), members) in groups {
        let mut g = GoalCondition::exists(0, kind, req);
        if let Some(t) = dest {
            let first = members[0].state.contained_in;
            let shared = members.iter().all(|m| m.state.contained_in == first);
            g = g.inside(if shared && members.len() >= 2 { Containment::InOneCommon(t) } else { Containment::In(t) });
        }
        g.quantity = satisfying_count(after, &g);
        out.push(g);
    }
    out
}

/// One EDH instance per boundary with work left to do.
pub fn slice_edh(demo: &Demonstration) -> Result<Vec<EDHInstance>, TaskError> {
    let start = build_world(&demo.scene)?;
    let events = &demo.trajectory.events;
    let end = replay(&start, &demo.trajectory).map_err(|e| TaskError::Unsolved(e.to_string()))?;
    let mut out = Vec::new();
    for (k, &b) in demo.boundaries.iter().enumerate() {
        if b >= events.len() {
            continue;
        }
        let history = Trajectory { events: events[..b].to_vec() };
        let remaining = Trajectory { events: events[b..].to_vec() };
        let at = replay(&start, &history).map_err(|e| TaskError::Unsolved(e.to_string()))?;
        let goals = goal_delta(&at, &end);
        if goals.is_empty() || goals.iter().all(|g| check_predicate(&at, g)) {
            continue;
        }
        let reference_plan =
            compile_plan(&remaining, CompileMode::ByType).map_err(|e| TaskError::Unsolved(e.to_string()))?;
        out.push(EDHInstance {
            id: format!("{}_{k}", demo.id),
            task: demo.task.clone(),
            dialog: demo.dialog.iter().filter(|d| d.at <= b).map(|d| d.text.clone()).collect(),
            history,
            initial_world: at,
            reference_plan,
            remaining,
            goals,
        });
    }
    Ok(out)
}
