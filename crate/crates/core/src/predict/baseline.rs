//! Language-only whole-plan baseline: the task parsed from the dialog is
//! expanded into a fixed plan for a default kitchen, and replayed verbatim.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{parse_task_spec, step_at, Predictor, PredictorContext};
use crate::plan::{compile_plan, CompileMode, Plan};
use crate::tasks::{plan_demonstration, Family, TaskSpec};
use crate::world::{build_world, Cell, GridSpec, ObjectSpec, ObjectType, SceneSpec, StateOverrides};

/// Default kitchen: one of every fixture along the walls, one of every
/// movable on the counters, nothing hidden, nothing dirty except what the
/// task asks to clean.
fn default_scene(task: &TaskSpec) -> SceneSpec {
    use ObjectType::*;
    let fixtures = [
        (Sink, Cell(0, 1)),
        (Faucet, Cell(0, 2)),
        (CounterTop, Cell(0, 4)),
        (CounterTop, Cell(0, 5)),
        (Fridge, Cell(7, 1)),
        (Microwave, Cell(7, 3)),
        (Stove, Cell(7, 5)),
        (CoffeeMachine, Cell(3, 0)),
        (Cabinet, Cell(5, 0)),
        (Drawer, Cell(1, 7)),
        (Plant, Cell(4, 7)),
        (DiningTable, Cell(6, 7)),
    ];
    let mut objects: Vec<ObjectSpec> = fixtures
        .iter()
        .enumerate()
        .map(|(i, &(t, c))| {
            let ordinal = fixtures[..i].iter().filter(|(k, _)| *k == t).count() as u32 + 1;
            ObjectSpec { kind: t.name().into(), ordinal, cell: Some(c), inside: None, state: StateOverrides::default() }
        })
        .collect();
    objects.push(ObjectSpec {
        kind: Pot.name().into(),
        ordinal: 1,
        cell: None,
        inside: Some("Stove_1".into()),
        state: StateOverrides::default(),
    });
    let movables = [Knife, Mug, Cup, Plate, Bowl, Fork, Bread, Potato, Tomato, Lettuce];
    for (i, t) in movables.into_iter().enumerate() {
        let dirty = task.family == Family::CleanAllX && task.params.x == Some(t);
        objects.push(ObjectSpec {
            kind: t.name().into(),
            ordinal: 1,
            cell: None,
            inside: Some(format!("CounterTop_{}", i % 2 + 1)),
            state: StateOverrides { is_dirty: dirty.then_some(true), ..StateOverrides::default() },
        });
    }
    SceneSpec {
        grid: GridSpec { width: 8, height: 8, blocked: vec![], interaction_range: 1 },
        agent_cell: Cell(3, 3),
        objects,
        failure_surfaces: vec![Stove.name().into()],
    }
}

/// Type-level plan for `task` in the default kitchen, ending in Stop.
pub fn default_plan(task: &TaskSpec) -> Option<Plan> {
    let world = build_world(&default_scene(task)).ok()?;
    let trajectory = plan_demonstration(&world, task).ok()?;
    compile_plan(&trajectory, CompileMode::ByType).ok()
}

/// Whole plan from dialog alone; `[Stop]` when no task is recognized.
pub fn whole_plan_baseline(dialog: &[String]) -> Plan {
    parse_task_spec(dialog)
        .and_then(|t| default_plan(&TaskSpec { location_hints: vec![], ..t }))
        .unwrap_or_else(|| Plan::with_stop(vec![]))
}

/// Emits the whole-plan baseline step by step, ignoring execution feedback.
#[derive(Default)]
pub struct BaselinePredictor {
    cache: Mutex<HashMap<Vec<String>, Plan>>,
}

impl BaselinePredictor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Predictor for BaselinePredictor {
    fn name(&self) -> &str {
        "baseline"
    }

    fn predict_next(&self, ctx: &PredictorContext<'_>) -> crate::plan::PlanStep {
        let mut cache = self.cache.lock().expect("cache lock");
        let plan = cache.entry(ctx.dialog.to_vec()).or_insert_with(|| whole_plan_baseline(ctx.dialog));
        step_at(Some(plan), ctx.plan_history.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{format_plan, PlanStep};
    use crate::world::Action;

    fn lines(s: &[&str]) -> Vec<String> {
        s.iter().map(|l| l.to_string()).collect()
    }

    #[test]
    fn coffee_template() {
        use ObjectType::*;
        let plan = whole_plan_baseline(&lines(&["make coffee"]));
        let want = Plan::with_stop(vec![
            PlanStep::by_type(Action::Pickup, Mug),
            PlanStep::by_type(Action::Place, CoffeeMachine),
            PlanStep::by_type(Action::ToggleOn, CoffeeMachine),
        ]);
        assert_eq!(plan, want, "{}", format_plan(&plan));
    }

    #[test]
    fn water_plant_template_fills_at_the_sink() {
        use ObjectType::*;
        let plan = whole_plan_baseline(&lines(&["water the plant"]));
        let steps = plan.steps();
        assert_eq!(steps[0], PlanStep::by_type(Action::Pickup, Cup));
        assert!(steps.contains(&PlanStep::by_type(Action::ToggleOn, Faucet)));
        assert!(steps.contains(&PlanStep::by_type(Action::Pour, Plant)));
        assert_eq!(steps.last(), Some(&PlanStep::Stop));
    }

    #[test]
    fn gibberish_gives_empty_plan() {
        assert_eq!(whole_plan_baseline(&lines(&["blah blah"])), Plan::with_stop(vec![]));
    }

    #[test]
    fn every_family_has_a_template() {
        use crate::tasks::TaskParams;
        use ObjectType::*;
        let p = |n, x, y| TaskParams { n, x, y };
        let cases = [
            (Family::CleanAllX, p(None, Some(Mug), None)),
            (Family::PutAllXOnY, p(None, Some(Fork), Some(Sink))),
            (Family::PutAllXInOneY, p(None, Some(Potato), Some(Bowl))),
            (Family::NSlicesOfXInY, p(Some(2), Some(Tomato), Some(Plate))),
            (Family::NCookedSlicesOfXInY, p(Some(2), Some(Potato), Some(Plate))),
            (Family::BoilX, p(None, Some(Potato), None)),
        ];
        for f in [
            Family::Coffee,
            Family::WaterPlant,
            Family::PlateOfToast,
            Family::Salad,
            Family::Sandwich,
            Family::Breakfast,
        ] {
            assert!(default_plan(&TaskSpec::simple(f)).is_some_and(|p| p.len() > 1), "{f}");
        }
        for (f, params) in cases {
            let t = TaskSpec::new(f, params).unwrap();
            assert!(default_plan(&t).is_some_and(|p| p.len() > 1), "{t}");
        }
    }
}
