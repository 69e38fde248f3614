mod common;

use std::collections::BTreeSet;

use common::{id, world};
use planbench::exec::{execute_step, Mode};
use planbench::plan::{compile_plan, replay, CompileMode, LowLevelAction, PlanStep, TrajectoryEvent};
use planbench::predict::parse_task_spec;
use planbench::tasks::{
    check_predicate, generate_scene, goal_conditions, make_demonstration, plan_demonstration, render_dialog, slice_edh,
    Containment, Family, GoalCondition, Profile, RequiredState, TaskParams, TaskSpec,
};
use planbench::world::{build_world, Action, Fill, ObjectType, SceneSpec, WorldState};
use serde_json::json;

fn task(family: Family, n: Option<u32>, x: Option<ObjectType>, y: Option<ObjectType>) -> TaskSpec {
    TaskSpec::new(family, TaskParams { n, x, y }).unwrap()
}

fn counter_kitchen(extra: serde_json::Value) -> WorldState {
    let mut objects = vec![
        json!({"type": "CounterTop", "ordinal": 1, "cell": [0, 5]}),
        json!({"type": "CoffeeMachine", "ordinal": 1, "cell": [0, 3]}),
        json!({"type": "Sink", "ordinal": 1, "cell": [3, 5]}),
        json!({"type": "Faucet", "ordinal": 1, "cell": [2, 5]}),
        json!({"type": "Fridge", "ordinal": 1, "cell": [5, 5]}),
        json!({"type": "Stove", "ordinal": 1, "cell": [5, 0]}),
        json!({"type": "Pot", "ordinal": 1, "in": "Stove_1"}),
        json!({"type": "Microwave", "ordinal": 1, "cell": [5, 2]}),
        json!({"type": "Plant", "ordinal": 1, "cell": [0, 0]}),
        json!({"type": "Knife", "ordinal": 1, "in": "CounterTop_1"}),
        json!({"type": "Plate", "ordinal": 1, "in": "CounterTop_1"}),
    ];
    objects.extend(extra.as_array().unwrap().iter().cloned());
    world(json!({
        "grid": {"width": 6, "height": 6},
        "agent_cell": [2, 2],
        "objects": objects,
        "failure_surfaces": ["Stove"]
    }))
}

fn interactions(t: &planbench::plan::Trajectory) -> Vec<(Action, String)> {
    t.events
        .iter()
        .filter_map(|e| match e.action {
            LowLevelAction::Interact(a) => Some((a, e.target.unwrap().to_string())),
            _ => None,
        })
        .collect()
}

#[test]
fn scenes_are_seeded() {
    let a = generate_scene(7, &Profile::seen()).unwrap();
    let b = generate_scene(7, &Profile::seen()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_ne!(a.to_json(), generate_scene(8, &Profile::seen()).unwrap().to_json());
    let w = build_world(&a).unwrap();
    assert!((6..=10).contains(&w.nav.width) && (6..=10).contains(&w.nav.height));
    let movable = w.instances.values().filter(|o| o.kind().info().pickupable).count();
    assert!((5..=20).contains(&movable), "{movable} movable objects");
}

#[test]
fn duplicate_profile_places_two_mugs_apart() {
    let profile = Profile::seen().with_duplicates(&[ObjectType::Mug]);
    for seed in 0..20 {
        let w = build_world(&generate_scene(seed, &profile).unwrap()).unwrap();
        let cells: BTreeSet<String> =
            w.of_type(ObjectType::Mug).map(|m| format!("{:?}", w.effective_cell(m.id).unwrap())).collect();
        assert!(w.of_type(ObjectType::Mug).count() >= 2, "seed {seed}");
        assert!(cells.len() >= 2, "seed {seed}: mugs share a cell");
    }
}

fn fixture_layout(spec: &SceneSpec) -> BTreeSet<String> {
    spec.objects
        .iter()
        .filter(|o| o.cell.is_some() && o.kind.parse::<ObjectType>().unwrap().is_fixture())
        .map(|o| format!("{}@{:?}", o.kind, o.cell.unwrap()))
        .collect()
}

#[test]
fn unseen_layouts_are_disjoint_from_seen() {
    let seen: BTreeSet<_> = (0..60).map(|s| fixture_layout(&generate_scene(s, &Profile::seen()).unwrap())).collect();
    let unseen: BTreeSet<_> =
        (0..60).map(|s| fixture_layout(&generate_scene(s, &Profile::unseen()).unwrap())).collect();
    assert!(seen.len() > 1 && unseen.len() > 1);
    assert!(seen.is_disjoint(&unseen));
}

#[test]
fn goal_condition_examples() {
    use ObjectType::*;
    let w = counter_kitchen(json!([
        {"type": "Mug", "ordinal": 1, "in": "CounterTop_1"},
        {"type": "Fork", "ordinal": 1, "in": "CounterTop_1"},
        {"type": "Fork", "ordinal": 2, "in": "CounterTop_1"},
        {"type": "Fork", "ordinal": 3, "cell": [1, 1]},
        {"type": "Potato", "ordinal": 1, "in": "CounterTop_1"}
    ]));
    let coffee = goal_conditions(&TaskSpec::simple(Family::Coffee), &w).unwrap();
    let brewed = RequiredState { fill: Some(Fill::Coffee), clean: Some(true), ..Default::default() };
    assert_eq!(coffee, vec![GoalCondition::exists(1, Mug, brewed)]);

    let forks = goal_conditions(&task(Family::PutAllXOnY, None, Some(Fork), Some(Sink)), &w).unwrap();
    assert_eq!(forks, vec![GoalCondition::for_all(3, Fork, RequiredState::default()).inside(Containment::In(Sink))]);

    let water = goal_conditions(&TaskSpec::simple(Family::WaterPlant), &w).unwrap();
    assert_eq!(water[0].to_string(), "exists-1 Plant [fill=Water]");

    let cooked = goal_conditions(&task(Family::NCookedSlicesOfXInY, Some(2), Some(Potato), Some(Plate)), &w).unwrap();
    assert_eq!(cooked[0].to_string(), "exists-2 PotatoSliced [cooked=true] in one Plate");

    let boil = goal_conditions(&task(Family::BoilX, None, Some(Potato), None), &w).unwrap();
    assert_eq!(boil[0].to_string(), "exists-1 Potato* [cooked=true, cook_method=Boil]");

    let clean = goal_conditions(&task(Family::CleanAllX, None, Some(Mug), None), &w).unwrap();
    assert_eq!(clean[0].to_string(), "for-all-1 Mug [clean=true]");

    assert!(goal_conditions(&task(Family::BoilX, None, Some(Tomato), None), &w).is_err());
}

#[test]
fn coffee_plan_is_the_canonical_three_steps() {
    let w = counter_kitchen(json!([{"type": "Mug", "ordinal": 1, "in": "CounterTop_1"}]));
    let t = plan_demonstration(&w, &TaskSpec::simple(Family::Coffee)).unwrap();
    assert_eq!(
        t.events,
        vec![
            TrajectoryEvent::navigate(id("Mug_1")),
            TrajectoryEvent::interact(Action::Pickup, id("Mug_1")),
            TrajectoryEvent::navigate(id("CoffeeMachine_1")),
            TrajectoryEvent::interact(Action::Place, id("CoffeeMachine_1")),
            TrajectoryEvent::navigate(id("CoffeeMachine_1")),
            TrajectoryEvent::interact(Action::ToggleOn, id("CoffeeMachine_1")),
        ]
    );
    assert_eq!(
        interactions(&t),
        vec![
            (Action::Pickup, "Mug_1".to_string()),
            (Action::Place, "CoffeeMachine_1".to_string()),
            (Action::ToggleOn, "CoffeeMachine_1".to_string()),
        ]
    );
}

#[test]
fn hidden_mug_is_fetched_from_fridge() {
    let w = counter_kitchen(json!([{"type": "Mug", "ordinal": 1, "in": "Fridge_1"}]));
    let t = plan_demonstration(&w, &TaskSpec::simple(Family::Coffee)).unwrap();
    let steps = interactions(&t);
    let open = steps.iter().position(|s| *s == (Action::Open, "Fridge_1".to_string())).unwrap();
    let pick = steps.iter().position(|s| *s == (Action::Pickup, "Mug_1".to_string())).unwrap();
    assert!(open < pick);
}

#[test]
fn boiling_never_places_on_stove() {
    let w = counter_kitchen(json!([
        {"type": "Potato", "ordinal": 1, "in": "CounterTop_1"},
        {"type": "Cup", "ordinal": 1, "in": "CounterTop_1"}
    ]));
    let spec = task(Family::BoilX, None, Some(ObjectType::Potato), None);
    let t = plan_demonstration(&w, &spec).unwrap();
    let steps = interactions(&t);
    assert!(!steps.iter().any(|(a, target)| *a == Action::Place && target.starts_with("Stove")));
    assert!(steps.contains(&(Action::Pour, "Pot_1".to_string())), "{steps:?}");
    let end = replay(&w, &t).unwrap();
    assert!(goal_conditions(&spec, &w).unwrap().iter().all(|g| check_predicate(&end, g)));
}

#[test]
fn dialog_examples() {
    let spec = task(Family::NSlicesOfXInY, Some(2), Some(ObjectType::Potato), Some(ObjectType::Plate));
    let w = counter_kitchen(json!([{"type": "Potato", "ordinal": 1, "in": "CounterTop_1"}]));
    let forms: BTreeSet<Vec<String>> = (0..40).map(|s| render_dialog(&spec, &w, s)).collect();
    let expected = vec!["make 2 slices of potato".to_string(), "serve them on a plate".to_string()];
    assert!(forms.contains(&expected), "{forms:?}");
    for f in &forms {
        assert_eq!(parse_task_spec(f).as_ref(), Some(&spec), "{f:?}");
    }
    assert_eq!(render_dialog(&spec, &w, 3), render_dialog(&spec, &w, 3));

    let hidden = counter_kitchen(json!([{"type": "Mug", "ordinal": 1, "in": "Fridge_1"}]));
    let coffee = TaskSpec::simple(Family::Coffee);
    let hints: BTreeSet<String> =
        (0..40).flat_map(|s| render_dialog(&coffee, &hidden, s)).filter(|l| l.contains("fridge")).collect();
    assert!(hints.contains("the mug is inside the fridge"), "{hints:?}");
}

#[test]
fn edh_instances_nest_and_need_work() {
    let mut checked = 0;
    for seed in 0..40 {
        let demo = make_demonstration(&format!("d{seed}"), seed, &Profile::seen()).unwrap();
        let start = build_world(&demo.scene).unwrap();
        let instances = slice_edh(&demo).unwrap();
        for w in instances.windows(2) {
            let (a, b) = (&w[0].history.events, &w[1].history.events);
            assert!(a.len() < b.len());
            assert_eq!(a[..], b[..a.len()]);
        }
        for inst in &instances {
            assert!(!inst.goals.iter().all(|g| check_predicate(&inst.initial_world, g)), "{}", inst.id);
            assert_eq!(replay(&start, &inst.history).unwrap(), inst.initial_world);
            assert_eq!(compile_plan(&inst.remaining, CompileMode::ByType).unwrap(), inst.reference_plan);
            let end = replay(&inst.initial_world, &inst.remaining).unwrap();
            assert!(inst.goals.iter().all(|g| check_predicate(&end, g)), "{}", inst.id);
            checked += 1;
        }
    }
    assert!(checked >= 40);
}

#[test]
fn demonstrations_are_sound_and_deterministic() {
    for seed in 100..160 {
        let a = make_demonstration("d", seed, &Profile::unseen()).unwrap();
        let b = make_demonstration("d", seed, &Profile::unseen()).unwrap();
        assert_eq!(a, b);
        let w = build_world(&a.scene).unwrap();
        let end = replay(&w, &a.trajectory).unwrap();
        assert!(goal_conditions(&a.task, &w).unwrap().iter().all(|g| check_predicate(&end, g)), "seed {seed}");
        let texts: Vec<String> = a.dialog.iter().map(|d| d.text.clone()).collect();
        assert_eq!(parse_task_spec(&texts).as_ref(), Some(&a.task), "seed {seed}: {texts:?}");
    }
}

#[test]
fn by_id_reference_solves_instances_with_assistance() {
    for seed in 200..240 {
        let demo = make_demonstration("d", seed, &Profile::seen().with_ambiguity()).unwrap();
        for inst in slice_edh(&demo).unwrap() {
            let plan = compile_plan(&inst.remaining, CompileMode::ById).unwrap();
            let mut w = inst.initial_world.clone();
            for s in plan.without_stop() {
                let (next, rec) = execute_step(&w, s, Mode::Assisted);
                assert!(rec.outcome.success, "{}: {s} failed", inst.id);
                w = next;
            }
            assert!(inst.goals.iter().all(|g| check_predicate(&w, g)), "{}", inst.id);
            assert!(!plan.without_stop().iter().any(|s| matches!(s, PlanStep::Stop)));
        }
    }
}

#[test]
fn ambiguity_profile_adds_duplicates_everywhere() {
    let data = planbench::bench::generate_dataset(&planbench::bench::GenConfig {
        seed: 9,
        per_split: 10,
        train_demos: 0,
        profile: planbench::bench::ProfileKind::Ambiguity,
    })
    .unwrap();
    for split in planbench::bench::EVAL_SPLITS {
        for inst in &data.splits[split] {
            let mut counts = std::collections::BTreeMap::new();
            for i in inst.initial_world.instances.keys() {
                *counts.entry(i.kind).or_insert(0) += 1;
            }
            assert!(
                planbench::tasks::DECOYS.iter().any(|t| counts.get(t).copied().unwrap_or(0) >= 2),
                "{}",
                inst.id
            );
        }
    }
}
