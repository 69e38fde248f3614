//! Grid navigation: breadth-first distances, shortest paths to objects, and
//! the closest-instance heuristic used to ground type-level plan steps.

use std::collections::{BTreeMap, VecDeque};

use super::catalog::ObjectType;
use super::state::{Cell, Location, ObjectId, WorldState};
use super::WorldError;

/// BFS distance from `start` to every reachable walkable cell.
pub fn distances_from(world: &WorldState, start: Cell) -> BTreeMap<Cell, u32> {
    let mut dist = BTreeMap::new();
    if !world.nav.walkable(start) {
        return dist;
    }
    dist.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for n in c.neighbors() {
            if world.nav.walkable(n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

fn target_cell(world: &WorldState, target: ObjectId) -> Option<Cell> {
    match world.effective_cell(target)? {
        Location::At(c) => Some(c),
        Location::Held => Some(world.agent_cell),
    }
}

/// Path distance from the agent to the nearest cell within interaction range
/// of `target`, or `None` when no such cell is reachable.
pub fn distance_to(world: &WorldState, dist: &BTreeMap<Cell, u32>, target: ObjectId) -> Option<u32> {
    let goal = target_cell(world, target)?;
    let r = world.nav.interaction_range as i32;
    let mut best: Option<u32> = None;
    for dx in -r..=r {
        for dy in -r..=r {
            let c = Cell(goal.0 + dx, goal.1 + dy);
            if c.manhattan(goal) > world.nav.interaction_range {
                continue;
            }
            if let Some(&d) = dist.get(&c) {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
    }
    best
}

/// Minimal walk from the agent to a cell within interaction range of the
/// target's effective cell. The returned cells exclude the starting cell, so
/// an agent already in range gets an empty path.
pub fn shortest_path(world: &WorldState, target: ObjectId) -> Result<Option<Vec<Cell>>, WorldError> {
    if world.get(target).is_none() {
        return Err(WorldError::NoSuchObject(target));
    }
    let Some(goal) = target_cell(world, target) else {
        return Ok(None);
    };
    let range = world.nav.interaction_range;
    let start = world.agent_cell;
    if !world.nav.walkable(start) {
        return Ok(None);
    }
    let mut prev: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c.manhattan(goal) <= range {
            let mut path = vec![];
            let mut cur = c;
            while cur != start {
                path.push(cur);
                cur = prev[&cur];
            }
            path.reverse();
            return Ok(Some(path));
        }
        for n in c.neighbors() {
            if world.nav.walkable(n) && seen.insert(n) {
                prev.insert(n, c);
                queue.push_back(n);
            }
        }
    }
    Ok(None)
}

/// Instance of `kind` nearest to the agent by path distance, ties broken by
/// ascending ordinal. Held instances are skipped; unreachable instances rank
/// after every reachable one.
pub fn closest_instance(world: &WorldState, kind: ObjectType) -> Option<ObjectId> {
    let dist = distances_from(world, world.agent_cell);
    world
        .of_type(kind)
        .filter(|o| o.cell != Location::Held)
        .map(|o| (distance_to(world, &dist, o.id).unwrap_or(u32::MAX), o.id.ordinal, o.id))
        .min()
        .map(|(_, _, id)| id)
}

/// Move the agent along the shortest path to `target`. Returns the number of
/// cells walked, or `None` (agent unmoved) when unreachable.
pub fn navigate_to(world: &mut WorldState, target: ObjectId) -> Option<usize> {
    let path = shortest_path(world, target).ok().flatten()?;
    if let Some(&end) = path.last() {
        world.agent_cell = end;
    }
    Some(path.len())
}

pub fn in_range(world: &WorldState, target: ObjectId) -> bool {
    target_cell(world, target).is_some_and(|c| c.manhattan(world.agent_cell) <= world.nav.interaction_range)
}
