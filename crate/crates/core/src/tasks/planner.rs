//! Demonstration planner: shallowest-first search over macro operators
//! (navigate to an object, then interact with it), run once per subgoal of a
//! per-family subgoal script.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use super::goals::{check_predicate, goal_conditions};
use super::spec::{Family, TaskSpec};
use super::TaskError;
use crate::plan::{Trajectory, TrajectoryEvent};
use crate::world::{
    apply_in_place, check_interaction, navigate_to, Action, CookMethod, Fill, ObjectId, ObjectType, WorldState,
};

/// Upper bound on interaction macros per demonstration.
pub const MAX_MACROS: usize = 40;
const SUBGOAL_DEPTH: usize = 8;
const NODE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Macro {
    pub action: Action,
    pub target: ObjectId,
}

/// Planner output: the trajectory plus the event indices where subtasks end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedDemo {
    pub trajectory: Trajectory,
    pub subtask_ends: Vec<usize>,
}

pub fn plan_demonstration(world: &WorldState, task: &TaskSpec) -> Result<Trajectory, TaskError> {
    plan_structured(world, task).map(|d| d.trajectory)
}

pub fn plan_structured(world: &WorldState, task: &TaskSpec) -> Result<PlannedDemo, TaskError> {
    let goals = goal_conditions(task, world)?;
    let mut p = Planner::new(world);
    script(&mut p, task)?;
    if !goals.iter().all(|g| check_predicate(&p.world, g)) {
        return Err(TaskError::Unsolved("script finished without satisfying goals".into()));
    }
    if p.macros.len() > MAX_MACROS {
        return Err(TaskError::Unsolved(format!("plan needs {} macros", p.macros.len())));
    }
    let mut events = Vec::new();
    let mut ends = Vec::new();
    let mut next_end = p.subtask_ends.iter().peekable();
    for (i, m) in p.macros.iter().enumerate() {
        events.push(TrajectoryEvent::navigate(m.target));
        events.push(TrajectoryEvent::interact(m.action, m.target));
        while next_end.peek().is_some_and(|&&e| e == i + 1) {
            ends.push(events.len());
            next_end.next();
        }
    }
    ends.dedup();
    Ok(PlannedDemo { trajectory: Trajectory { events }, subtask_ends: ends })
}

struct Planner {
    world: WorldState,
    macros: Vec<Macro>,
    /// Macro counts at which a subtask completed.
    subtask_ends: Vec<usize>,
    faucet_was_on: bool,
}

fn state_key(w: &WorldState) -> u64 {
    let mut h = DefaultHasher::new();
    w.held.hash(&mut h);
    for o in w.instances.values() {
        o.hash(&mut h);
    }
    h.finish()
}

/// Objects that can never be reached: inside an enclosure that cannot open.
fn sealed(w: &WorldState, id: ObjectId) -> bool {
    w.ancestors(id).iter().any(|a| {
        let info = a.kind.info();
        info.enclosed && !info.openable
    })
}

/// Counters and tables with spare room, where items can be set aside.
fn dump_surfaces(w: &WorldState) -> impl Iterator<Item = ObjectId> + '_ {
    [ObjectType::CounterTop, ObjectType::DiningTable]
        .into_iter()
        .flat_map(move |t| w.of_type(t).filter(move |o| o.state.contents.len() < t.info().capacity).map(|o| o.id))
}

fn relevant(w: &WorldState, focus: &[ObjectId]) -> Vec<ObjectId> {
    let mut set = BTreeSet::new();
    for &f in focus {
        let ids: Vec<ObjectId> = if w.get(f).is_some() {
            vec![f]
        } else {
            w.instances.values().filter(|o| o.source == Some(f)).map(|o| o.id).collect()
        };
        for id in ids {
            set.insert(id);
            set.extend(w.ancestors(id));
            set.extend(w.instances[&id].state.contents.iter().copied());
        }
    }
    set.extend(w.held);
    set.extend(dump_surfaces(w));
    set.into_iter().filter(|id| !sealed(w, *id)).collect()
}

fn successors(w: &WorldState, focus: &[ObjectId]) -> Vec<(Macro, WorldState)> {
    let mut out = Vec::new();
    for id in relevant(w, focus) {
        let mut at = w.clone();
        if navigate_to(&mut at, id).is_none() {
            continue;
        }
        for action in Action::ALL {
            // Only cut what the subgoal is about.
            if action == Action::Slice && !focus.contains(&id) {
                continue;
            }
            if !action.admits(id.kind) || check_interaction(&at, action, id).is_err() {
                continue;
            }
            let mut next = at.clone();
            apply_in_place(&mut next, action, id);
            out.push((Macro { action, target: id }, next));
        }
    }
    out
}

/// Shallowest macro sequence from `start` reaching `done`.
fn search(start: &WorldState, focus: &[ObjectId], done: &dyn Fn(&WorldState) -> bool) -> Option<Vec<Macro>> {
    if done(start) {
        return Some(vec![]);
    }
    struct Node {
        world: WorldState,
        parent: usize,
        step: Option<Macro>,
        depth: usize,
    }
    let mut nodes = vec![Node { world: start.clone(), parent: 0, step: None, depth: 0 }];
    let mut seen = HashSet::from([state_key(start)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if nodes[i].depth >= SUBGOAL_DEPTH || nodes.len() > NODE_BUDGET {
            continue;
        }
        for (m, next) in successors(&nodes[i].world, focus) {
            if !seen.insert(state_key(&next)) {
                continue;
            }
            let hit = done(&next);
            let depth = nodes[i].depth + 1;
            nodes.push(Node { world: next, parent: i, step: Some(m), depth });
            let j = nodes.len() - 1;
            if hit {
                let mut path = Vec::new();
                let mut k = j;
                while let Some(s) = nodes[k].step {
                    path.push(s);
                    k = nodes[k].parent;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(j);
        }
    }
    None
}

impl Planner {
    fn new(world: &WorldState) -> Self {
        let faucet_was_on = world.of_type(ObjectType::Faucet).any(|f| f.state.is_toggled_on);
        Self { world: world.clone(), macros: vec![], subtask_ends: vec![], faucet_was_on }
    }

    fn achieve(&mut self, what: &str, focus: &[ObjectId], done: impl Fn(&WorldState) -> bool) -> Result<(), TaskError> {
        let path = search(&self.world, focus, &done)
            .ok_or_else(|| TaskError::Unsolved(format!("no macro sequence for subgoal `{what}`")))?;
        for m in path {
            navigate_to(&mut self.world, m.target);
            let out = apply_in_place(&mut self.world, m.action, m.target);
            debug_assert!(out.success);
            self.macros.push(m);
        }
        if self.macros.len() > MAX_MACROS {
            return Err(TaskError::Unsolved(format!("plan exceeds {MAX_MACROS} macros")));
        }
        Ok(())
    }

    fn end_subtask(&mut self) {
        self.subtask_ends.push(self.macros.len());
    }

    fn first(&self, kind: ObjectType) -> Result<ObjectId, TaskError> {
        self.world.of_type(kind).map(|o| o.id).find(|id| !sealed(&self.world, *id)).ok_or(TaskError::MissingType(kind))
    }

    fn first_of(&self, kinds: &[ObjectType]) -> Result<ObjectId, TaskError> {
        kinds.iter().find_map(|&k| self.first(k).ok()).ok_or(TaskError::MissingType(kinds[0]))
    }

    fn hands_free(&mut self) -> Result<(), TaskError> {
        let Some(h) = self.world.held else { return Ok(()) };
        self.achieve("put down held item", &[h], |w| w.held.is_none())
    }

    fn faucet_restore(&mut self) -> Result<(), TaskError> {
        if self.faucet_was_on {
            return Ok(());
        }
        for f in self.world.of_type(ObjectType::Faucet).map(|o| o.id).collect::<Vec<_>>() {
            self.achieve("turn faucet off", &[f], move |w| !w.instances[&f].state.is_toggled_on)?;
        }
        Ok(())
    }

    fn wash(&mut self, item: ObjectId) -> Result<(), TaskError> {
        if !self.world.instances[&item].state.is_dirty {
            return Ok(());
        }
        self.hands_free()?;
        let sink = self.first(ObjectType::Sink)?;
        let faucet = self.first(ObjectType::Faucet)?;
        self.achieve("clean item", &[item, sink, faucet], move |w| !w.instances[&item].state.is_dirty)?;
        self.faucet_restore()
    }

    fn fill_water(&mut self, vessel: ObjectId) -> Result<(), TaskError> {
        self.hands_free()?;
        let sink = self.first(ObjectType::Sink)?;
        let faucet = self.first(ObjectType::Faucet)?;
        self.achieve("fill with water", &[vessel, sink, faucet], move |w| {
            w.instances[&vessel].state.fill == Fill::Water
        })?;
        self.faucet_restore()
    }

    fn put_in(&mut self, item: ObjectId, container: ObjectId) -> Result<(), TaskError> {
        if self.world.held.is_some_and(|h| h != item) {
            self.hands_free()?;
        }
        self.achieve("relocate item", &[item, container], move |w| {
            w.get(item).is_some_and(|o| o.state.contained_in == Some(container)) && w.held.is_none()
        })
    }

    /// Slice `whole` with the lowest-id knife; returns the pieces.
    fn slice(&mut self, whole: ObjectId) -> Result<Vec<ObjectId>, TaskError> {
        let knife = self.first(ObjectType::Knife)?;
        if self.world.held.is_some_and(|h| h != knife) {
            self.hands_free()?;
        }
        self.achieve("slice", &[knife, whole], move |w| w.get(whole).is_none())?;
        self.hands_free()?;
        Ok(self.world.instances.values().filter(|o| o.source == Some(whole)).map(|o| o.id).collect())
    }

    /// Microwave a batch of items, leaving them inside an open, switched-off microwave.
    fn microwave(&mut self, batch: &[ObjectId]) -> Result<(), TaskError> {
        self.hands_free()?;
        let mw = self.first(ObjectType::Microwave)?;
        let cap = ObjectType::Microwave.info().capacity;
        let items: Vec<ObjectId> = batch.to_vec();
        let need = items.len();
        let owned = items.clone();
        self.achieve("prepare microwave", &[mw], move |w| {
            let s = &w.instances[&mw].state;
            let foreign = s.contents.iter().filter(|c| !owned.contains(c)).count();
            s.is_open && !s.is_toggled_on && foreign + need <= cap
        })?;
        for &it in &items {
            self.put_in(it, mw)?;
        }
        let cooked = items.clone();
        self.achieve("cook", &[mw], move |w| cooked.iter().all(|c| w.instances[c].state.is_cooked))?;
        self.achieve("stop microwave", &[mw], move |w| {
            let s = &w.instances[&mw].state;
            s.is_open && !s.is_toggled_on
        })
    }

    fn whole(&self, kind: ObjectType) -> Result<ObjectId, TaskError> {
        self.first(kind)
    }

    fn toast(&mut self, count: usize, plate: ObjectId) -> Result<(), TaskError> {
        let bread = self.whole(ObjectType::Bread)?;
        let slices = self.slice(bread)?;
        let batch: Vec<ObjectId> = slices.into_iter().take(count).collect();
        self.end_subtask();
        self.microwave(&batch)?;
        for s in batch {
            self.put_in(s, plate)?;
        }
        self.end_subtask();
        Ok(())
    }

    fn coffee(&mut self) -> Result<(), TaskError> {
        let mug = self.first(ObjectType::Mug)?;
        let cm = self.first(ObjectType::CoffeeMachine)?;
        self.wash(mug)?;
        self.hands_free()?;
        self.achieve("mug into machine", &[mug, cm], move |w| {
            w.instances[&mug].state.contained_in == Some(cm) || w.instances[&mug].state.fill == Fill::Coffee
        })?;
        self.achieve("brew coffee", &[mug, cm], move |w| {
            let m = &w.instances[&mug].state;
            m.fill == Fill::Coffee && !m.is_dirty
        })?;
        self.end_subtask();
        Ok(())
    }
}

fn capacity_left(w: &WorldState, id: ObjectId) -> usize {
    id.kind.info().capacity.saturating_sub(w.instances[&id].state.contents.len())
}

fn script(p: &mut Planner, task: &TaskSpec) -> Result<(), TaskError> {
    use ObjectType::*;
    let prm = task.params;
    let x = || prm.x.ok_or(TaskError::MissingType(Potato));
    let y = || prm.y.ok_or(TaskError::MissingType(Plate));
    match task.family {
        Family::Coffee => p.coffee()?,
        Family::WaterPlant => {
            let vessel = p.first_of(&[Cup, Mug, Bowl])?;
            let plant = p.first(Plant)?;
            p.fill_water(vessel)?;
            p.end_subtask();
            p.achieve("water plant", &[vessel, plant], move |w| w.instances[&plant].state.fill == Fill::Water)?;
            p.hands_free()?;
            p.end_subtask();
        }
        Family::PlateOfToast => {
            let plate = p.first(Plate)?;
            p.toast(1, plate)?;
        }
        Family::CleanAllX => {
            let items: Vec<ObjectId> = p.world.of_type(x()?).map(|o| o.id).collect();
            for it in items {
                p.wash(it)?;
                p.end_subtask();
            }
        }
        Family::PutAllXOnY => {
            let (x, y) = (x()?, y()?);
            let items: Vec<ObjectId> = p.world.of_type(x).map(|o| o.id).collect();
            for it in items {
                if p.world.instances[&it].state.contained_in.is_some_and(|c| c.kind == y) {
                    continue;
                }
                let dest = p
                    .world
                    .of_type(y)
                    .map(|o| o.id)
                    .filter(|d| !sealed(&p.world, *d))
                    .find(|d| capacity_left(&p.world, *d) > 0)
                    .map_or_else(|| p.first(y), Ok)?;
                p.put_in(it, dest)?;
                p.end_subtask();
            }
        }
        Family::PutAllXInOneY => {
            let (x, y) = (x()?, y()?);
            let items: Vec<ObjectId> = p.world.of_type(x).map(|o| o.id).collect();
            if y.info().capacity < items.len() {
                return Err(TaskError::Unsolved(format!("one {y} cannot hold every {x}")));
            }
            let dest = p.first(y)?;
            for it in items {
                p.put_in(it, dest)?;
                p.end_subtask();
            }
        }
        Family::NSlicesOfXInY => {
            let (x, y) = (x()?, y()?);
            let n = prm.n.unwrap_or(1) as usize;
            let dest = p.first(y)?;
            let pieces = p.slice(p.whole(x)?)?;
            p.end_subtask();
            for s in pieces.into_iter().take(n) {
                p.put_in(s, dest)?;
            }
            p.end_subtask();
        }
        Family::NCookedSlicesOfXInY => {
            let (x, y) = (x()?, y()?);
            let n = prm.n.unwrap_or(1) as usize;
            let dest = p.first(y)?;
            let whole = p.whole(x)?;
            if x.info().cookable {
                p.microwave(&[whole])?;
                p.end_subtask();
                let pieces = p.slice(whole)?;
                for s in pieces.into_iter().take(n) {
                    p.put_in(s, dest)?;
                }
            } else {
                let pieces = p.slice(whole)?;
                p.end_subtask();
                let chosen: Vec<ObjectId> = pieces.into_iter().take(n).collect();
                for batch in chosen.chunks(Microwave.info().capacity) {
                    p.microwave(batch)?;
                    for &s in batch {
                        p.put_in(s, dest)?;
                    }
                }
            }
            p.end_subtask();
        }
        Family::BoilX => {
            let x = x()?;
            let pot = p.first(Pot)?;
            let stove = p.first(Stove)?;
            if p.world.instances[&pot].state.fill != Fill::Water {
                let vessel = p.first_of(&[Cup, Mug, Bowl])?;
                p.fill_water(vessel)?;
                p.achieve("fill pot", &[vessel, pot], move |w| w.instances[&pot].state.fill == Fill::Water)?;
                p.hands_free()?;
                p.end_subtask();
            }
            let item = p.whole(x)?;
            p.put_in(item, pot)?;
            p.achieve("boil", &[stove, pot], move |w| {
                w.instances.values().any(|o| x.covers(o.kind()) && o.state.cook_method == CookMethod::Boil)
            })?;
            p.achieve("stove off", &[stove], move |w| !w.instances[&stove].state.is_toggled_on)?;
            p.end_subtask();
        }
        Family::Salad | Family::Sandwich => {
            let plate = p.first(Plate)?;
            if task.family == Family::Sandwich {
                p.toast(2, plate)?;
            }
            let lettuce = p.whole(Lettuce)?;
            let tomato = p.whole(Tomato)?;
            let l = p.slice(lettuce)?;
            let t = p.slice(tomato)?;
            p.end_subtask();
            p.put_in(l[0], plate)?;
            p.put_in(t[0], plate)?;
            p.end_subtask();
        }
        Family::Breakfast => {
            p.coffee()?;
            let plate = p.first(Plate)?;
            p.toast(1, plate)?;
        }
    }
    Ok(())
}
