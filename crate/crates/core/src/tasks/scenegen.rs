//! Seeded procedural scenes. Fixture layouts come from two disjoint pools so
//! that "unseen" splits never share a floor plan with training scenes.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::goals::{check_predicate, goal_conditions};
use super::spec::{Family, TaskParams, TaskSpec};
use super::TaskError;
use crate::world::{build_world, Cell, GridSpec, ObjectSpec, ObjectType, SceneSpec, StateOverrides, WorldState};

pub const SEEN_LAYOUTS: std::ops::Range<u32> = 0..8;
pub const UNSEEN_LAYOUTS: std::ops::Range<u32> = 100..104;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutPool {
    Seen,
    Unseen,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Profile {
    pub pool: LayoutPool,
    /// Add a sealed display case beside the agent holding decoy instances.
    pub ambiguity: bool,
    /// Types that must have at least two instances.
    pub duplicates: Vec<ObjectType>,
}

impl Profile {
    pub fn seen() -> Self {
        Self { pool: LayoutPool::Seen, ambiguity: false, duplicates: vec![] }
    }

    pub fn unseen() -> Self {
        Self { pool: LayoutPool::Unseen, ambiguity: false, duplicates: vec![] }
    }

    pub fn with_ambiguity(mut self) -> Self {
        self.ambiguity = true;
        self
    }

    pub fn with_duplicates(mut self, types: &[ObjectType]) -> Self {
        self.duplicates = types.to_vec();
        self
    }
}

/// Types placed as decoys in the ambiguity profile.
pub const DECOYS: [ObjectType; 3] = [ObjectType::Mug, ObjectType::Knife, ObjectType::Cup];

struct Layout {
    width: i32,
    height: i32,
    fixtures: Vec<(ObjectType, Cell)>,
    pillars: Vec<Cell>,
    free_wall: Vec<Cell>,
}

fn perimeter(w: i32, h: i32) -> Vec<Cell> {
    let mut out = Vec::new();
    for x in 1..w - 1 {
        out.push(Cell(x, 0));
        out.push(Cell(x, h - 1));
    }
    for y in 1..h - 1 {
        out.push(Cell(0, y));
        out.push(Cell(w - 1, y));
    }
    out
}

fn interior(w: i32, h: i32) -> Vec<Cell> {
    let mut out = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            out.push(Cell(x, y));
        }
    }
    out
}

fn inside(w: i32, h: i32, c: Cell) -> bool {
    c.0 > 0 && c.1 > 0 && c.0 < w - 1 && c.1 < h - 1
}

fn interior_connected(w: i32, h: i32, pillars: &BTreeSet<Cell>) -> bool {
    let open: Vec<Cell> = interior(w, h).into_iter().filter(|c| !pillars.contains(c)).collect();
    let Some(&start) = open.first() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for n in c.neighbors() {
            if inside(w, h, n) && !pillars.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == open.len()
}

fn layout(id: u32) -> Layout {
    use ObjectType::*;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_796f_7574 ^ u64::from(id));
    let width = rng.gen_range(6..=10);
    let height = rng.gen_range(6..=10);
    let mut kinds =
        vec![Sink, Faucet, CounterTop, CounterTop, Fridge, Microwave, Stove, CoffeeMachine, Cabinet, Plant, Drawer];
    for opt in [DiningTable, Cabinet, Drawer] {
        if rng.gen_bool(0.5) {
            kinds.push(opt);
        }
    }
    let mut wall = perimeter(width, height);
    wall.shuffle(&mut rng);
    let fixtures: Vec<(ObjectType, Cell)> = kinds.iter().copied().zip(wall.iter().copied()).collect();
    let free_wall = wall[fixtures.len()..].to_vec();

    let mut pillars = BTreeSet::new();
    let cells = interior(width, height);
    for _ in 0..rng.gen_range(0..=2) {
        let c = *cells.choose(&mut rng).expect("interior nonempty");
        let mut trial = pillars.clone();
        trial.insert(c);
        let fixtures_reachable =
            fixtures.iter().all(|(_, f)| f.neighbors().iter().any(|n| inside(width, height, *n) && !trial.contains(n)));
        if fixtures_reachable && interior_connected(width, height, &trial) {
            pillars = trial;
        }
    }
    Layout { width, height, fixtures, pillars: pillars.into_iter().collect(), free_wall }
}

fn counters(objects: &[ObjectSpec]) -> Vec<String> {
    objects
        .iter()
        .filter(|o| o.kind == "CounterTop" || o.kind == "DiningTable")
        .map(|o| format!("{}_{}", o.kind, o.ordinal))
        .collect()
}

struct Builder {
    objects: Vec<ObjectSpec>,
    load: std::collections::BTreeMap<String, usize>,
}

impl Builder {
    fn next_ordinal(&self, kind: ObjectType) -> u32 {
        self.objects.iter().filter(|o| o.kind == kind.name()).count() as u32 + 1
    }

    fn add_at(&mut self, kind: ObjectType, cell: Cell, state: StateOverrides) -> String {
        let ordinal = self.next_ordinal(kind);
        self.objects.push(ObjectSpec { kind: kind.name().into(), ordinal, cell: Some(cell), inside: None, state });
        format!("{}_{}", kind.name(), ordinal)
    }

    fn has_room(&self, container: &str) -> bool {
        let kind: ObjectType = container.split('_').next().unwrap().parse().expect("own id");
        self.load.get(container).copied().unwrap_or(0) < kind.info().capacity
    }

    fn add_in(&mut self, kind: ObjectType, container: &str, state: StateOverrides) -> String {
        let ordinal = self.next_ordinal(kind);
        *self.load.entry(container.to_string()).or_default() += 1;
        self.objects.push(ObjectSpec {
            kind: kind.name().into(),
            ordinal,
            cell: None,
            inside: Some(container.to_string()),
            state,
        });
        format!("{}_{}", kind.name(), ordinal)
    }

    fn holds(&self, container: &str, kind: ObjectType) -> bool {
        self.objects.iter().any(|o| o.kind == kind.name() && o.inside.as_deref() == Some(container))
    }

    fn of(&self, kind: ObjectType) -> Vec<String> {
        self.objects.iter().filter(|o| o.kind == kind.name()).map(|o| format!("{}_{}", o.kind, o.ordinal)).collect()
    }
}

/// Seeded scene. Identical `(seed, profile)` gives an identical spec.
pub fn generate_scene(seed: u64, profile: &Profile) -> Result<SceneSpec, TaskError> {
    use ObjectType::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<u32> = match profile.pool {
        LayoutPool::Seen => SEEN_LAYOUTS.collect(),
        LayoutPool::Unseen => UNSEEN_LAYOUTS.collect(),
    };
    let lay = layout(*pool.choose(&mut rng).expect("pool nonempty"));
    let mut b = Builder { objects: vec![], load: Default::default() };
    let mut blocked: Vec<Cell> = perimeter(lay.width, lay.height);
    for c in [Cell(0, 0), Cell(lay.width - 1, 0), Cell(0, lay.height - 1), Cell(lay.width - 1, lay.height - 1)] {
        blocked.push(c);
    }
    blocked.extend(lay.pillars.iter().copied());

    let faucet_on = rng.gen_bool(0.15);
    for &(kind, cell) in &lay.fixtures {
        let state = if kind == Faucet && faucet_on {
            StateOverrides { is_toggled_on: Some(true), ..Default::default() }
        } else if kind.info().openable && rng.gen_bool(0.15) {
            StateOverrides { is_open: Some(true), ..Default::default() }
        } else {
            StateOverrides::default()
        };
        b.add_at(kind, cell, state);
    }

    let open_cells: Vec<Cell> =
        interior(lay.width, lay.height).into_iter().filter(|c| !lay.pillars.contains(c)).collect();
    let mut agent_cell = *open_cells.choose(&mut rng).expect("interior nonempty");

    let mut decoy_case = None;
    if profile.ambiguity {
        let wall = *lay.free_wall.first().ok_or_else(|| TaskError::Scene("no wall cell for display case".into()))?;
        let case = b.add_at(DisplayCase, wall, StateOverrides::default());
        agent_cell = wall
            .neighbors()
            .into_iter()
            .find(|n| open_cells.contains(n))
            .ok_or_else(|| TaskError::Scene("display case is not reachable".into()))?;
        decoy_case = Some(case);
    }

    let stove = b.of(Stove).remove(0);
    let dirty = |rng: &mut ChaCha8Rng, kind: ObjectType| {
        if kind.info().cleanable && rng.gen_bool(0.4) {
            StateOverrides { is_dirty: Some(true), ..Default::default() }
        } else {
            StateOverrides::default()
        }
    };
    let pot_state = dirty(&mut rng, Pot);
    b.add_in(Pot, &stove, pot_state);

    let mut movables = vec![Knife, Mug, Plate, Bread, Potato, Tomato, Lettuce, Cup];
    let extras = [Mug, Cup, Plate, Bowl, Fork, Knife, Potato, Tomato, Bread, Lettuce, Fork, Bowl];
    for _ in 0..rng.gen_range(0..=8) {
        movables.push(*extras.choose(&mut rng).unwrap());
    }
    for &d in &profile.duplicates {
        while movables.iter().filter(|&&m| m == d).count() < 2 {
            movables.push(d);
        }
    }
    if movables.len() + 1 > 20 {
        return Err(TaskError::Scene(format!("profile asks for {} movable objects", movables.len() + 1)));
    }

    let surfaces = counters(&b.objects);
    for kind in movables {
        let hidden = rng.gen_bool(0.35);
        let food = kind.info().sliceable;
        let utensil = matches!(kind, Knife | Fork);
        let mut options: Vec<String> = Vec::new();
        if hidden {
            let homes: &[ObjectType] = if food {
                &[Fridge]
            } else if utensil {
                &[Drawer, Cabinet]
            } else {
                &[Cabinet]
            };
            for &h in homes {
                options.extend(b.of(h));
            }
        } else {
            if matches!(kind, Mug | Cup | Plate | Bowl | Fork) && rng.gen_bool(0.1) {
                options.extend(b.of(Sink));
            }
            if kind == Mug && rng.gen_bool(0.1) {
                options.extend(b.of(CoffeeMachine));
            }
            let mut s = surfaces.clone();
            s.shuffle(&mut rng);
            options.extend(s);
        }
        options.extend(surfaces.iter().cloned());
        // Duplicated types go to different receptacles when possible.
        let spread = profile.duplicates.contains(&kind);
        let dest = options
            .iter()
            .find(|c| b.has_room(c) && !(spread && b.holds(c, kind)))
            .or_else(|| options.iter().find(|c| b.has_room(c)))
            .cloned()
            .ok_or_else(|| TaskError::Scene("receptacles are full".into()))?;
        let state = dirty(&mut rng, kind);
        b.add_in(kind, &dest, state);
    }
    if let Some(case) = decoy_case {
        for d in DECOYS {
            b.add_in(d, &case, StateOverrides::default());
        }
    }

    let spec = SceneSpec {
        grid: GridSpec { width: lay.width, height: lay.height, blocked, interaction_range: 1 },
        agent_cell,
        objects: b.objects,
        failure_surfaces: vec![Stove.name().into()],
    };
    build_world(&spec)?;
    Ok(spec)
}

fn sealed_types(world: &WorldState) -> BTreeSet<ObjectType> {
    world
        .instances
        .values()
        .filter(|o| world.ancestors(o.id).iter().any(|a| a.kind.info().enclosed && !a.kind.info().openable))
        .map(|o| o.kind())
        .collect()
}

/// Draw a task whose goals are defined in `world` and not already satisfied.
pub fn sample_task(world: &WorldState, rng: &mut ChaCha8Rng) -> Option<TaskSpec> {
    use ObjectType::*;
    let sealed = sealed_types(world);
    let count = |t: ObjectType| world.of_type(t).count();
    let present = |t: ObjectType| count(t) > 0;
    for _ in 0..32 {
        let family = *Family::ALL.choose(rng).unwrap();
        let mut params = TaskParams::default();
        match family {
            Family::CleanAllX => {
                let xs: Vec<ObjectType> = [Mug, Cup, Plate, Bowl, Fork]
                    .into_iter()
                    .filter(|&t| present(t) && count(t) <= 3 && !sealed.contains(&t))
                    .filter(|&t| world.of_type(t).any(|o| o.state.is_dirty))
                    .collect();
                params.x = Some(*xs.choose(rng)?);
            }
            Family::PutAllXOnY | Family::PutAllXInOneY => {
                let xs: Vec<ObjectType> = [Mug, Cup, Fork, Knife, Potato, Tomato, Plate, Bowl]
                    .into_iter()
                    .filter(|&t| present(t) && count(t) <= 3 && !sealed.contains(&t))
                    .collect();
                let Some(&x) = xs.choose(rng) else { continue };
                let dishes = matches!(x, Plate | Bowl);
                let ys: Vec<ObjectType> = [CounterTop, DiningTable, Sink, Fridge, Cabinet, Drawer, Plate, Bowl]
                    .into_iter()
                    .filter(|&y| present(y) && y != x && !(dishes && matches!(y, Plate | Bowl | Drawer)))
                    .filter(|&y| {
                        let cap = y.info().capacity;
                        if family == Family::PutAllXInOneY {
                            cap >= count(x)
                        } else {
                            cap * count(y) >= count(x)
                        }
                    })
                    .collect();
                let Some(&y) = ys.choose(rng) else { continue };
                params.x = Some(x);
                params.y = Some(y);
            }
            Family::NSlicesOfXInY | Family::NCookedSlicesOfXInY => {
                let xs: &[ObjectType] =
                    if family == Family::NSlicesOfXInY { &[Potato, Tomato, Bread, Lettuce] } else { &[Potato, Bread] };
                let xs: Vec<ObjectType> = xs.iter().copied().filter(|&t| present(t)).collect();
                let ys: Vec<ObjectType> =
                    [Plate, Bowl].into_iter().filter(|&t| present(t) && !sealed.contains(&t)).collect();
                let (Some(&x), Some(&y)) = (xs.choose(rng), ys.choose(rng)) else { continue };
                params.x = Some(x);
                params.y = Some(y);
                params.n = Some(rng.gen_range(1..=3));
            }
            Family::BoilX => params.x = Some(Potato),
            _ => {}
        }
        let Ok(task) = TaskSpec::new(family, params) else { continue };
        let Ok(goals) = goal_conditions(&task, world) else { continue };
        if goals.iter().all(|g| check_predicate(world, g)) {
            continue;
        }
        return Some(task);
    }
    None
}
