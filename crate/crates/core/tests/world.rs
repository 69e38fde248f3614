mod common;

use std::collections::BTreeMap;

use common::{id, scene, world};
use planbench::tasks::{check_predicate, Containment, GoalCondition, RequiredState};
use planbench::world::{
    apply_in_place, apply_interaction, build_world, check_interaction, closest_instance, distances_from, shortest_path,
    visible_objects, Action, Cell, FailureReason, Fill, ObjectType, SceneSpec, WorldError, WorldState,
};
use proptest::prelude::*;
use serde_json::json;

fn kitchen() -> WorldState {
    world(json!({
        "grid": {"width": 5, "height": 5, "blocked": [[2, 2]]},
        "agent_cell": [2, 1],
        "objects": [
            {"type": "Fridge", "ordinal": 1, "cell": [0, 4]},
            {"type": "Mug", "ordinal": 1, "in": "Fridge_1"},
            {"type": "Microwave", "ordinal": 1, "cell": [1, 4]},
            {"type": "Sink", "ordinal": 1, "cell": [2, 4]},
            {"type": "Cup", "ordinal": 1, "in": "Sink_1", "state": {"is_dirty": true}},
            {"type": "Faucet", "ordinal": 1, "cell": [3, 4]},
            {"type": "CounterTop", "ordinal": 1, "cell": [4, 4]},
            {"type": "Knife", "ordinal": 1, "in": "CounterTop_1"},
            {"type": "Potato", "ordinal": 1, "in": "CounterTop_1"},
            {"type": "Plate", "ordinal": 1, "in": "CounterTop_1"},
            {"type": "Bread", "ordinal": 1, "in": "CounterTop_1"},
            {"type": "Stove", "ordinal": 1, "cell": [4, 0]},
            {"type": "Pot", "ordinal": 1, "in": "Stove_1"},
            {"type": "CoffeeMachine", "ordinal": 1, "cell": [0, 0]},
            {"type": "Plant", "ordinal": 1, "cell": [4, 2]},
            {"type": "Cabinet", "ordinal": 1, "cell": [0, 2]},
            {"type": "Bowl", "ordinal": 1, "in": "Cabinet_1"},
            {"type": "Fork", "ordinal": 1, "in": "Cabinet_1", "state": {"is_dirty": true}}
        ],
        "failure_surfaces": ["Stove"]
    }))
}

/// Walk next to `target` by teleporting to the first free neighbour.
fn stand_near(w: &mut WorldState, target: &str) {
    let planbench::world::Location::At(c) = w.effective_cell(id(target)).unwrap() else { return };
    w.agent_cell = std::iter::once(c).chain(c.neighbors()).find(|n| w.nav.walkable(*n)).unwrap();
}

fn act(w: &mut WorldState, action: Action, target: &str) {
    stand_near(w, target);
    let out = apply_in_place(w, action, id(target));
    assert!(out.success, "{action} {target}: {:?}", out.failure_reason);
}

#[test]
fn mug_in_closed_fridge() {
    let w = world(json!({
        "grid": {"width": 4, "height": 4},
        "agent_cell": [0, 0],
        "objects": [
            {"type": "Fridge", "ordinal": 1, "cell": [3, 3]},
            {"type": "Mug", "ordinal": 1, "in": "Fridge_1"}
        ]
    }));
    let mug = w.get(id("Mug_1")).unwrap();
    assert_eq!(mug.state.contained_in, Some(id("Fridge_1")));
    assert!(!w.get(id("Fridge_1")).unwrap().state.is_open);
    assert_eq!(mug.cell, w.get(id("Fridge_1")).unwrap().cell);
    assert!(w.is_occluded(id("Mug_1")));
}

#[test]
fn overfull_sink_is_rejected_by_name() {
    let spec = scene(json!({
        "grid": {"width": 4, "height": 4},
        "agent_cell": [0, 0],
        "objects": [
            {"type": "Sink", "ordinal": 1, "cell": [3, 3]},
            {"type": "Cup", "ordinal": 1, "in": "Sink_1"},
            {"type": "Mug", "ordinal": 1, "in": "Sink_1"},
            {"type": "Fork", "ordinal": 1, "in": "Sink_1"}
        ]
    }));
    match build_world(&spec) {
        Err(WorldError::InvalidScene { entry, .. }) => assert_eq!(entry, "Sink_1"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn malformed_scenes_name_the_entry() {
    let base = |objects: serde_json::Value, agent: [i32; 2]| {
        scene(json!({"grid": {"width": 3, "height": 3, "blocked": [[1, 1]]}, "agent_cell": agent, "objects": objects}))
    };
    let err = build_world(&base(json!([{"type": "Banana", "ordinal": 1, "cell": [0, 0]}]), [0, 0])).unwrap_err();
    assert!(err.to_string().contains("Banana_1"), "{err}");
    let err = build_world(&base(json!([]), [1, 1])).unwrap_err();
    assert!(err.to_string().contains("agent_cell"), "{err}");
    let err = build_world(&base(json!([{"type": "Mug", "ordinal": 1, "in": "Fridge_9"}]), [0, 0])).unwrap_err();
    assert!(err.to_string().contains("Mug_1"), "{err}");
    assert!(SceneSpec::from_json("{\"grid\": 3}").is_err());
}

#[test]
fn same_spec_builds_identical_worlds() {
    let a = kitchen();
    let b = kitchen();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let round = build_world(&SceneSpec::from_json(&SceneSpec::from_world(&a).unwrap().to_json()).unwrap()).unwrap();
    assert_eq!(round, a);
}

#[test]
fn closest_instance_examples() {
    let w = world(json!({
        "grid": {"width": 8, "height": 1},
        "agent_cell": [0, 0],
        "objects": [
            {"type": "Mug", "ordinal": 1, "cell": [6, 0]},
            {"type": "Mug", "ordinal": 2, "cell": [3, 0]},
            {"type": "Plate", "ordinal": 2, "cell": [4, 0]},
            {"type": "Plate", "ordinal": 1, "cell": [4, 0]}
        ]
    }));
    // Mug_2 is 2 steps from range, Mug_1 is 5.
    assert_eq!(closest_instance(&w, ObjectType::Mug), Some(id("Mug_2")));
    assert_eq!(closest_instance(&w, ObjectType::Plate), Some(id("Plate_1")));
    assert_eq!(closest_instance(&w, ObjectType::Potato), None);
}

#[test]
fn shortest_path_examples() {
    let open = world(json!({
        "grid": {"width": 4, "height": 4},
        "agent_cell": [0, 0],
        "objects": [{"type": "Mug", "ordinal": 1, "cell": [0, 3]}, {"type": "Cup", "ordinal": 1, "cell": [1, 0]}]
    }));
    assert_eq!(shortest_path(&open, id("Mug_1")).unwrap(), Some(vec![Cell(0, 1), Cell(0, 2)]));
    assert_eq!(shortest_path(&open, id("Cup_1")).unwrap(), Some(vec![]));
    assert!(shortest_path(&open, id("Bowl_1")).is_err());

    let walled = world(json!({
        "grid": {"width": 5, "height": 5, "blocked": [[3, 2], [4, 3], [3, 4], [4, 4], [2, 3], [3, 3]]},
        "agent_cell": [0, 0],
        "objects": [{"type": "Mug", "ordinal": 1, "cell": [4, 4]}]
    }));
    assert_eq!(shortest_path(&walled, id("Mug_1")).unwrap(), None);
}

#[test]
fn interaction_examples() {
    let mut w = kitchen();
    act(&mut w, Action::Open, "Microwave_1");
    let before = w.clone();
    let (after, out) = apply_interaction(&w, Action::ToggleOn, id("Microwave_1"));
    assert_eq!(out.failure_reason, Some(FailureReason::PrerequisiteMissing));
    assert_eq!(after, before);

    act(&mut w, Action::Pickup, "Knife_1");
    stand_near(&mut w, "Plate_1");
    let before = w.clone();
    let (after, out) = apply_interaction(&w, Action::Pickup, id("Plate_1"));
    assert_eq!(out.failure_reason, Some(FailureReason::PrerequisiteMissing));
    assert_eq!(after, before);

    act(&mut w, Action::Slice, "Potato_1");
    assert!(w.get(id("Potato_1")).is_none());
    let slices: Vec<_> = w.of_type(ObjectType::PotatoSliced).collect();
    assert_eq!(slices.len(), 4);
    for (i, s) in slices.iter().enumerate() {
        assert_eq!(s.id.ordinal, i as u32 + 1);
        assert!(s.state.is_sliced);
        assert_eq!(s.source, Some(id("Potato_1")));
        assert_eq!(s.state.contained_in, Some(id("CounterTop_1")));
    }
    w.check_invariants().unwrap();
}

#[test]
fn stove_rejects_placement() {
    let mut w = kitchen();
    act(&mut w, Action::Pickup, "Knife_1");
    stand_near(&mut w, "Stove_1");
    let (_, out) = apply_interaction(&w, Action::Place, id("Stove_1"));
    assert_eq!(out.failure_reason, Some(FailureReason::SurfaceRejected));
}

#[test]
fn faucet_cleans_and_fills_sink_contents() {
    let mut w = kitchen();
    act(&mut w, Action::ToggleOn, "Faucet_1");
    let cup = w.get(id("Cup_1")).unwrap();
    assert!(!cup.state.is_dirty);
    assert_eq!(cup.state.fill, Fill::Water);
    act(&mut w, Action::Pickup, "Cup_1");
    act(&mut w, Action::Pour, "Plant_1");
    assert_eq!(w.get(id("Plant_1")).unwrap().state.fill, Fill::Water);
    assert_eq!(w.get(id("Cup_1")).unwrap().state.fill, Fill::None);
}

#[test]
fn coffee_machine_fills_mug() {
    let mut w = kitchen();
    act(&mut w, Action::Open, "Fridge_1");
    act(&mut w, Action::Pickup, "Mug_1");
    act(&mut w, Action::Place, "CoffeeMachine_1");
    act(&mut w, Action::ToggleOn, "CoffeeMachine_1");
    assert_eq!(w.get(id("Mug_1")).unwrap().state.fill, Fill::Coffee);
}

#[test]
fn observation_respects_occlusion() {
    let mut w = kitchen();
    let seen = |w: &WorldState, s: &str| visible_objects(w).iter().any(|o| o.id == id(s));
    assert!(!seen(&w, "Mug_1"));
    assert!(seen(&w, "Fridge_1"));
    act(&mut w, Action::Open, "Fridge_1");
    assert!(seen(&w, "Mug_1"));

    let empty = world(json!({"grid": {"width": 2, "height": 2}, "agent_cell": [0, 0], "objects": []}));
    assert!(visible_objects(&empty).is_empty());

    // Nearest first.
    let d: Vec<u32> = visible_objects(&w).iter().map(|o| o.distance.unwrap_or(u32::MAX)).collect();
    assert!(d.windows(2).all(|p| p[0] <= p[1]));
}

#[test]
fn predicate_examples() {
    let mut w = kitchen();
    let cooked = RequiredState { cooked: Some(true), ..Default::default() };
    let on_plate =
        GoalCondition::exists(2, ObjectType::PotatoSliced, cooked).inside(Containment::InOneCommon(ObjectType::Plate));
    assert!(!check_predicate(&w, &on_plate));
    assert!(check_predicate(&w, &GoalCondition::exists(0, ObjectType::PotatoSliced, cooked)));

    act(&mut w, Action::Pickup, "Knife_1");
    act(&mut w, Action::Slice, "Potato_1");
    act(&mut w, Action::Place, "CounterTop_1");
    act(&mut w, Action::Open, "Microwave_1");
    for s in ["PotatoSliced_1", "PotatoSliced_2"] {
        act(&mut w, Action::Pickup, s);
        act(&mut w, Action::Place, "Microwave_1");
    }
    act(&mut w, Action::Close, "Microwave_1");
    act(&mut w, Action::ToggleOn, "Microwave_1");
    act(&mut w, Action::ToggleOff, "Microwave_1");
    act(&mut w, Action::Open, "Microwave_1");
    for s in ["PotatoSliced_1", "PotatoSliced_2"] {
        act(&mut w, Action::Pickup, s);
        act(&mut w, Action::Place, "Plate_1");
    }
    assert!(check_predicate(&w, &on_plate));
}

// Reference distances by repeated relaxation, independent of the queue order.
fn relaxed_distances(w: &WorldState, start: Cell) -> BTreeMap<Cell, u32> {
    let mut d: BTreeMap<Cell, u32> = BTreeMap::new();
    if !w.nav.walkable(start) {
        return d;
    }
    d.insert(start, 0);
    loop {
        let mut changed = false;
        for x in 0..w.nav.width {
            for y in 0..w.nav.height {
                let c = Cell(x, y);
                if !w.nav.walkable(c) {
                    continue;
                }
                let best = c.neighbors().iter().filter_map(|n| d.get(n)).map(|v| v + 1).min();
                if let Some(b) = best {
                    if d.get(&c).is_none_or(|cur| b < *cur) {
                        d.insert(c, b);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

fn reference_target_distance(w: &WorldState, dist: &BTreeMap<Cell, u32>, target: Cell) -> Option<u32> {
    dist.iter().filter(|(c, _)| c.manhattan(target) <= w.nav.interaction_range).map(|(_, d)| *d).min()
}

prop_compose! {
    fn grid_world(max_mugs: usize)(
        w in 1i32..=8, h in 1i32..=8,
    )(
        w in Just(w), h in Just(h),
        blocked in proptest::collection::vec(proptest::bool::weighted(0.3), (w * h) as usize),
        agent in (0..w, 0..h),
        mugs in proptest::collection::vec((0..w, 0..h), 1..=max_mugs),
    ) -> WorldState {
        let blocked: Vec<[i32; 2]> = (0..w * h)
            .filter(|i| blocked[*i as usize] && (i % w, i / w) != agent)
            .map(|i| [i % w, i / w])
            .collect();
        let objects: Vec<_> = mugs
            .iter()
            .enumerate()
            .map(|(i, (x, y))| json!({"type": "Mug", "ordinal": i + 1, "cell": [x, y]}))
            .collect();
        world(json!({
            "grid": {"width": w, "height": h, "blocked": blocked},
            "agent_cell": [agent.0, agent.1],
            "objects": objects
        }))
    }
}

proptest! {
    #[test]
    fn bfs_matches_relaxation(w in grid_world(1)) {
        let dist = distances_from(&w, w.agent_cell);
        let reference = relaxed_distances(&w, w.agent_cell);
        prop_assert_eq!(&dist, &reference);

        let mug = id("Mug_1");
        let planbench::world::Location::At(goal) = w.get(mug).unwrap().cell else { unreachable!() };
        let path = shortest_path(&w, mug).unwrap();
        match (path, reference_target_distance(&w, &reference, goal)) {
            (None, None) => {}
            (Some(p), Some(d)) => {
                prop_assert_eq!(p.len() as u32, d);
                let mut cur = w.agent_cell;
                for c in &p {
                    prop_assert_eq!(cur.manhattan(*c), 1);
                    prop_assert!(w.nav.walkable(*c));
                    cur = *c;
                }
                prop_assert!(cur.manhattan(goal) <= w.nav.interaction_range);
            }
            (p, d) => prop_assert!(false, "path {:?} vs reference {:?}", p, d),
        }
    }

    #[test]
    fn closest_matches_exhaustive_scan(w in grid_world(4)) {
        let reference = relaxed_distances(&w, w.agent_cell);
        let best = w
            .of_type(ObjectType::Mug)
            .map(|o| {
                let planbench::world::Location::At(c) = o.cell else { unreachable!() };
                (reference_target_distance(&w, &reference, c).unwrap_or(u32::MAX), o.id.ordinal)
            })
            .min()
            .map(|(_, ord)| ord);
        prop_assert_eq!(closest_instance(&w, ObjectType::Mug).map(|m| m.ordinal), best);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Teleport(usize),
    Near(usize),
    Act(usize, usize),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        (0usize..25).prop_map(Op::Teleport),
        (0usize..64).prop_map(Op::Near),
        (0usize..Action::ALL.len(), 0usize..64).prop_map(|(a, t)| Op::Act(a, t)),
        (0usize..Action::ALL.len(), 0usize..64).prop_map(|(a, t)| Op::Act(a, t)),
    ];
    proptest::collection::vec(op, 0..60)
}

fn run_ops(ops: &[Op]) -> Result<WorldState, TestCaseError> {
    let mut w = kitchen();
    for op in ops {
        match *op {
            Op::Teleport(i) => {
                let c = Cell(i as i32 % 5, i as i32 / 5);
                if w.nav.walkable(c) {
                    w.agent_cell = c;
                }
            }
            Op::Near(t) => {
                let ids: Vec<_> = w.instances.keys().copied().collect();
                stand_near(&mut w, &ids[t % ids.len()].to_string());
            }
            Op::Act(a, t) => {
                let action = Action::ALL[a];
                let ids: Vec<_> = w.instances.keys().copied().collect();
                let target = ids[t % ids.len()];
                let predicted = check_interaction(&w, action, target);
                let (next, out) = apply_interaction(&w, action, target);
                prop_assert_eq!(out.success, predicted.is_ok());
                let mut inplace = w.clone();
                let out2 = apply_in_place(&mut inplace, action, target);
                prop_assert_eq!(out, out2);
                prop_assert_eq!(&inplace, &next);
                if !out.success {
                    prop_assert_eq!(&next, &w, "failed {} {} changed the world", action, target);
                    prop_assert_eq!(out.failure_reason, predicted.err());
                }
                if let Err(e) = next.check_invariants() {
                    prop_assert!(false, "invariant broken after {} {}: {}", action, target, e);
                }
                w = next;
            }
        }
    }
    Ok(w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn failures_are_no_ops_and_invariants_hold(ops in ops()) {
        let a = run_ops(&ops)?;
        let b = run_ops(&ops)?;
        prop_assert_eq!(a, b);
    }
}
