mod common;

use std::collections::BTreeMap;

use common::brute_ed;
use planbench::exec::Termination;
use planbench::metrics::{
    aggregate_report, edit_distance, edit_distance_steps, evaluate_edh, fraction_valid, Condition, EpisodeResult,
};
use planbench::plan::{compile_plan, CompileMode, Plan, PlanStep, Trajectory};
use planbench::tasks::{make_demonstration, Family, GoalCondition, Profile, RequiredState};
use planbench::world::{Action, AffordanceTable, ObjectType};
use proptest::prelude::*;

const ACTIONS: [Action; 4] = [Action::Pickup, Action::Place, Action::ToggleOn, Action::Slice];
const TYPES: [ObjectType; 4] = [ObjectType::Mug, ObjectType::Sink, ObjectType::Potato, ObjectType::Plate];

fn plan(steps: &[(Action, ObjectType)]) -> Plan {
    Plan::with_stop(steps.iter().map(|&(a, t)| PlanStep::by_type(a, t)).collect())
}

fn steps() -> impl Strategy<Value = Vec<PlanStep>> {
    proptest::collection::vec((0..4usize, 0..4usize).prop_map(|(a, t)| PlanStep::by_type(ACTIONS[a], TYPES[t])), 0..9)
}

#[test]
fn coffee_examples() {
    use Action::*;
    use ObjectType::*;
    let gt = plan(&[(Pickup, Mug), (Place, CoffeeMachine), (ToggleOn, CoffeeMachine)]);
    let swapped = plan(&[(Pickup, CounterTop), (Place, CoffeeMachine), (ToggleOn, CoffeeMachine)]);
    let missing = plan(&[(Pickup, Mug), (ToggleOn, CoffeeMachine)]);
    let extra = plan(&[(Pickup, Mug), (Place, CoffeeMachine), (ToggleOn, CoffeeMachine), (ToggleOff, CoffeeMachine)]);
    assert_eq!(edit_distance(&swapped, &gt), 1);
    assert_eq!(edit_distance(&missing, &gt), 1);
    assert_eq!(edit_distance(&extra, &gt), 1);
    assert_eq!(edit_distance(&gt, &gt), 0);
    // Stop is not a scored token.
    let bare = Plan::new(gt.without_stop().to_vec()).unwrap();
    assert_eq!(edit_distance(&bare, &gt), 0);
}

proptest! {
    #[test]
    fn dp_matches_recursion(a in steps(), b in steps()) {
        prop_assert_eq!(edit_distance_steps(&a, &b), brute_ed(&a, &b));
    }

    #[test]
    fn edit_distance_is_a_metric(a in steps(), b in steps(), c in steps()) {
        let d = edit_distance_steps;
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(a.len().abs_diff(b.len()) <= d(&a, &b));
        prop_assert!(d(&a, &b) <= a.len().max(b.len()));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
    }
}

fn result(id: &str, family: Family, success: bool, gc: f64) -> EpisodeResult {
    EpisodeResult {
        instance_id: id.into(),
        family,
        success,
        gc_fraction: gc,
        attempted_plan: plan(&[(Action::Pickup, ObjectType::Mug)]),
        reference_plan: plan(&[(Action::Pickup, ObjectType::Mug), (Action::Place, ObjectType::Sink)]),
        termination: Termination::StopPredicted,
        failures: 0,
        steps: 1,
    }
}

#[test]
fn goal_fraction_counts_conditions() {
    let demo = make_demonstration("d", 3, &Profile::seen()).unwrap();
    let mut inst = planbench::tasks::slice_edh(&demo).unwrap().remove(0);
    let world = planbench::world::build_world(&demo.scene).unwrap();
    let vacuous = GoalCondition::exists(0, ObjectType::Mug, RequiredState::default());
    let impossible = GoalCondition::exists(99, ObjectType::Mug, RequiredState::default());
    inst.goals = vec![vacuous, vacuous, vacuous, impossible];
    assert_eq!(evaluate_edh(&world, &inst), (false, 0.75));
    inst.goals.clear();
    assert_eq!(evaluate_edh(&world, &inst), (true, 1.0));
}

#[test]
fn generated_reference_plans_are_valid() {
    let table = AffordanceTable::from_catalog();
    for seed in 0..30 {
        let demo = make_demonstration("d", seed, &Profile::seen()).unwrap();
        let p = compile_plan(&demo.trajectory, CompileMode::ByType).unwrap();
        assert_eq!(fraction_valid(&p, &table), 1.0);
    }
    assert_eq!(fraction_valid(&compile_plan(&Trajectory::default(), CompileMode::ById).unwrap(), &table), 1.0);
}

#[test]
fn report_rows_are_ordered_and_pure() {
    let mut results = BTreeMap::new();
    results.insert(
        Condition { condition: "oracle/direct".into(), split: "s".into() },
        vec![
            result("b", Family::WaterPlant, false, 0.5),
            result("a", Family::Coffee, true, 1.0),
            result("c", Family::Coffee, false, 0.0),
        ],
    );
    let report = aggregate_report(&results, 7, "abc");
    let tasks: Vec<&str> = report.rows.iter().map(|r| r.task.as_str()).collect();
    assert_eq!(tasks, vec!["all", "Coffee", "WaterPlant"]);
    let all = report.row("oracle/direct", "s", "all").unwrap();
    assert_eq!((all.sr, all.gc, all.ed, all.n), (1.0 / 3.0, 0.5, 1.0, 3));
    assert_eq!((all.gt_norm_ed, all.pred_norm_ed), (0.5, 1.0));
    report.check().unwrap();

    let mut shuffled = results.clone();
    shuffled.values_mut().for_each(|v| v.reverse());
    assert_eq!(aggregate_report(&shuffled, 7, "abc").to_csv(), report.to_csv());
    assert!(report.to_text().contains("oracle/direct"));
}

proptest! {
    #[test]
    fn aggregate_gc_never_below_sr(outcomes in proptest::collection::vec((any::<bool>(), 0.0f64..1.0), 1..30)) {
        let eps: Vec<EpisodeResult> = outcomes
            .iter()
            .enumerate()
            .map(|(i, &(ok, gc))| result(&format!("i{i:03}"), Family::ALL[i % 12], ok, if ok { 1.0 } else { gc }))
            .collect();
        let results = BTreeMap::from([(Condition { condition: "x/direct".into(), split: "s".into() }, eps)]);
        let report = aggregate_report(&results, 1, "d");
        prop_assert!(report.check().is_ok());
        for r in &report.rows {
            prop_assert!(r.metrics.gc >= r.metrics.sr);
        }
    }
}
