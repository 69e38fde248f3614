//! Plan execution: ground each step to an instance, navigate, and interact,
//! either directly or wrapped in assistance heuristics, under the episode
//! failure and step limits.

mod assist;

use serde::{Deserialize, Serialize};

use crate::plan::{compile_plan, CompileMode, ObjectRef, Plan, PlanStep};
use crate::predict::{parse_task_spec, Predictor, PredictorContext};
use crate::tasks::EDHInstance;
use crate::world::{
    apply_in_place, closest_instance, navigate_to, visible_objects, Action, FailureReason, InteractionOutcome,
    ObjectId, WorldState,
};

pub use assist::already_complete;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    Assisted,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Assisted => "assisted",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Mode::Direct),
            "assisted" => Ok(Mode::Assisted),
            _ => Err(format!("unknown execution mode `{s}` (expected direct or assisted)")),
        }
    }
}

pub const DEFAULT_FAILURE_LIMIT: u32 = 30;
pub const DEFAULT_STEP_LIMIT: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionConfig {
    pub mode: Mode,
    pub failure_limit: u32,
    pub step_limit: u32,
}

impl ExecutionConfig {
    pub fn new(mode: Mode) -> Self {
        Self { mode, failure_limit: DEFAULT_FAILURE_LIMIT, step_limit: DEFAULT_STEP_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: PlanStep,
    pub resolved: Option<ObjectId>,
    pub nav_path_len: usize,
    pub assist_subactions: Vec<(Action, ObjectId)>,
    pub outcome: InteractionOutcome,
    pub skipped_already_complete: bool,
    /// Interaction attempts made for this step, sub-actions included.
    pub interactions: u32,
}

impl StepRecord {
    fn failed(step: PlanStep, resolved: Option<ObjectId>, reason: FailureReason) -> Self {
        Self {
            step,
            resolved,
            nav_path_len: 0,
            assist_subactions: vec![],
            outcome: InteractionOutcome::fail(reason),
            skipped_already_complete: false,
            interactions: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    StopPredicted,
    FailureLimit,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    pub failures: u32,
    pub steps: u32,
}

impl ExecutionTrace {
    /// Counter and termination consistency.
    pub fn check(&self, config: &ExecutionConfig) -> Result<(), String> {
        let failed = self.records.iter().filter(|r| !r.outcome.success).count() as u32;
        if failed != self.failures {
            return Err(format!("failures counter {} but {failed} failed records", self.failures));
        }
        if self.steps as usize != self.records.len() {
            return Err("steps counter disagrees with records".into());
        }
        if self.failures > config.failure_limit || self.steps > config.step_limit {
            return Err("limit exceeded".into());
        }
        if (self.termination == Termination::FailureLimit) != (self.failures == config.failure_limit) {
            return Err("termination reason inconsistent with failure count".into());
        }
        if self.records.iter().any(|r| r.skipped_already_complete && !r.outcome.success) {
            return Err("skipped step recorded as failure".into());
        }
        Ok(())
    }
}

/// Ground a step: ids verbatim when present, types via the closest instance.
pub fn resolve_target(world: &WorldState, step: &PlanStep) -> Option<ObjectId> {
    match step {
        PlanStep::Stop => None,
        PlanStep::Act { object: ObjectRef::Id(id), .. } => world.get(*id).map(|o| o.id),
        PlanStep::Act { object: ObjectRef::Type(t), .. } => closest_instance(world, *t),
    }
}

pub fn execute_step(world: &WorldState, step: &PlanStep, mode: Mode) -> (WorldState, StepRecord) {
    let PlanStep::Act { action, .. } = *step else {
        return (world.clone(), StepRecord::failed(*step, None, FailureReason::InvalidPair));
    };
    match mode {
        Mode::Direct => direct(world, step, action),
        Mode::Assisted => assist::assisted(world, step, action),
    }
}

fn direct(world: &WorldState, step: &PlanStep, action: Action) -> (WorldState, StepRecord) {
    let Some(id) = resolve_target(world, step) else {
        return (world.clone(), StepRecord::failed(*step, None, FailureReason::NoSuchObject));
    };
    let mut w = world.clone();
    let Some(walked) = navigate_to(&mut w, id) else {
        return (world.clone(), StepRecord::failed(*step, Some(id), FailureReason::NotInRange));
    };
    let outcome = apply_in_place(&mut w, action, id);
    let rec = StepRecord {
        step: *step,
        resolved: Some(id),
        nav_path_len: walked,
        assist_subactions: vec![],
        outcome,
        skipped_already_complete: false,
        interactions: 1,
    };
    (w, rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRun {
    pub final_world: WorldState,
    pub trace: ExecutionTrace,
    /// Predicted non-Stop steps in order, failed ones included.
    pub attempted: Plan,
}

/// Closed loop: predict, execute, observe, until Stop or a limit.
pub fn run_episode(instance: &EDHInstance, predictor: &dyn Predictor, config: &ExecutionConfig) -> EpisodeRun {
    let task_hint = parse_task_spec(&instance.dialog);
    let prior_steps: Vec<PlanStep> =
        compile_plan(&instance.history, CompileMode::ByType).map(|p| p.without_stop().to_vec()).unwrap_or_default();
    let mut world = instance.initial_world.clone();
    let mut history: Vec<(PlanStep, bool)> = Vec::new();
    let mut records = Vec::new();
    let mut failures = 0;
    let termination = loop {
        if records.len() as u32 >= config.step_limit {
            break Termination::StepLimit;
        }
        let observation = visible_objects(&world);
        let ctx = PredictorContext {
            instance_id: &instance.id,
            dialog: &instance.dialog,
            prior_steps: &prior_steps,
            plan_history: &history,
            observation: &observation,
            task_hint: task_hint.as_ref(),
        };
        let step = predictor.predict_next(&ctx);
        if step.is_stop() {
            break Termination::StopPredicted;
        }
        let (next, rec) = execute_step(&world, &step, config.mode);
        world = next;
        history.push((step, rec.outcome.success));
        if !rec.outcome.success {
            failures += 1;
        }
        records.push(rec);
        if failures >= config.failure_limit {
            break Termination::FailureLimit;
        }
    };
    let attempted = Plan::new(history.iter().map(|(s, _)| *s).collect()).expect("Stop is never recorded");
    let steps = records.len() as u32;
    EpisodeRun { final_world: world, trace: ExecutionTrace { records, termination, failures, steps }, attempted }
}
