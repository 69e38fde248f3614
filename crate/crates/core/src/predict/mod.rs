//! Plan-step predictors. Every predictor maps a [`PredictorContext`] to one
//! next [`PlanStep`], `Stop` included.

mod baseline;
mod factored;
mod taskparse;

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::plan::{compile_plan, CompileMode, Plan, PlanStep};
use crate::tasks::{EDHInstance, TaskSpec};
use crate::world::{Action, AffordanceTable, ObjectType, ObservedObject};

pub use baseline::{default_plan, whole_plan_baseline, BaselinePredictor};
pub use factored::{
    train_factored, FactoredModel, FactoredPredictor, Head, ModelError, TrainConfig, DEFAULT_HISTORY_ORDER,
    DEFAULT_SMOOTHING,
};
pub use taskparse::parse_task_spec;

/// Everything a predictor may look at before choosing the next step.
#[derive(Debug, Clone, Copy)]
pub struct PredictorContext<'a> {
    pub instance_id: &'a str,
    pub dialog: &'a [String],
    /// Type-level plan of the demonstration prefix preceding the episode.
    pub prior_steps: &'a [PlanStep],
    /// Steps predicted so far in this episode with their success flags.
    pub plan_history: &'a [(PlanStep, bool)],
    pub observation: &'a [ObservedObject],
    pub task_hint: Option<&'a TaskSpec>,
}

pub trait Predictor: Sync {
    fn name(&self) -> &str;
    fn predict_next(&self, ctx: &PredictorContext<'_>) -> PlanStep;
}

/// Action head over interaction actions and Stop (`None`), object head over
/// types, optionally conditioned on the action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionObjectDistribution {
    pub action_probs: BTreeMap<Option<Action>, f64>,
    pub object_probs: ObjectProbs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectProbs {
    Independent(BTreeMap<ObjectType, f64>),
    PerAction(BTreeMap<Action, BTreeMap<ObjectType, f64>>),
}

fn argmax<K: Copy + Ord>(table: &BTreeMap<K, f64>) -> Option<K> {
    // Ties go to the smallest key, which keeps decoding deterministic.
    table
        .iter()
        .fold(None, |best: Option<(K, f64)>, (&k, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((k, p)),
        })
        .map(|(k, _)| k)
}

impl ActionObjectDistribution {
    pub fn check(&self) -> Result<(), String> {
        let tables: Vec<Vec<f64>> = match &self.object_probs {
            ObjectProbs::Independent(o) => vec![o.values().copied().collect()],
            ObjectProbs::PerAction(m) => m.values().map(|o| o.values().copied().collect()).collect(),
        };
        for t in std::iter::once(self.action_probs.values().copied().collect::<Vec<_>>()).chain(tables) {
            let sum: f64 = t.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || t.iter().any(|p| *p < 0.0) {
                return Err(format!("probability table sums to {sum}"));
            }
        }
        Ok(())
    }

    pub fn object_table(&self, action: Option<Action>) -> Option<&BTreeMap<ObjectType, f64>> {
        match (&self.object_probs, action) {
            (ObjectProbs::Independent(o), _) => Some(o),
            (ObjectProbs::PerAction(m), Some(a)) => m.get(&a),
            (ObjectProbs::PerAction(_), None) => None,
        }
    }

    /// Argmax action, then argmax object (given that action when coupled).
    pub fn greedy(&self) -> PlanStep {
        let Some(Some(action)) = argmax(&self.action_probs) else { return PlanStep::Stop };
        match self.object_table(Some(action)).and_then(argmax) {
            Some(o) => PlanStep::by_type(action, o),
            None => PlanStep::Stop,
        }
    }
}

/// Keep the argmax object; if the argmax action cannot be applied to it,
/// substitute the most probable action that can.
pub fn apply_validity_mask(dist: &ActionObjectDistribution, affordance: &AffordanceTable) -> PlanStep {
    let Some(Some(action)) = argmax(&dist.action_probs) else { return PlanStep::Stop };
    let Some(object) = dist.object_table(Some(action)).and_then(argmax) else { return PlanStep::Stop };
    if affordance.is_valid(action, object) {
        return PlanStep::by_type(action, object);
    }
    let valid: BTreeMap<Option<Action>, f64> = dist
        .action_probs
        .iter()
        .filter(|(a, _)| a.is_some_and(|a| affordance.is_valid(a, object)))
        .map(|(a, p)| (*a, *p))
        .collect();
    match argmax(&valid) {
        Some(Some(a)) => PlanStep::by_type(a, object),
        _ => PlanStep::Stop,
    }
}

fn step_at(plan: Option<&Plan>, index: usize) -> PlanStep {
    plan.and_then(|p| p.steps().get(index).copied()).unwrap_or(PlanStep::Stop)
}

/// Replays each instance's type-level reference plan by position.
pub struct OraclePredictor {
    plans: HashMap<String, Plan>,
}

impl OraclePredictor {
    pub fn new<'a>(instances: impl IntoIterator<Item = &'a EDHInstance>) -> Self {
        let plans = instances.into_iter().map(|i| (i.id.clone(), i.reference_plan.to_type_level())).collect();
        Self { plans }
    }
}

impl Predictor for OraclePredictor {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict_next(&self, ctx: &PredictorContext<'_>) -> PlanStep {
        step_at(self.plans.get(ctx.instance_id), ctx.plan_history.len())
    }
}

/// Same as the oracle but with exact instance ids.
pub struct CorefOraclePredictor {
    plans: HashMap<String, Plan>,
}

impl CorefOraclePredictor {
    pub fn new<'a>(instances: impl IntoIterator<Item = &'a EDHInstance>) -> Self {
        let plans = instances
            .into_iter()
            .map(|i| {
                let plan = compile_plan(&i.remaining, CompileMode::ById).unwrap_or_else(|_| Plan::with_stop(vec![]));
                (i.id.clone(), plan)
            })
            .collect();
        Self { plans }
    }
}

impl Predictor for CorefOraclePredictor {
    fn name(&self) -> &str {
        "coref-oracle"
    }

    fn predict_next(&self, ctx: &PredictorContext<'_>) -> PlanStep {
        step_at(self.plans.get(ctx.instance_id), ctx.plan_history.len())
    }
}

/// Uniform over affordance-valid pairs on visible types, stopping with a
/// fixed per-step probability. Seeded by instance id and step index.
pub struct RandomPredictor {
    seed: u64,
    stop_prob: f64,
    affordance: AffordanceTable,
}

impl RandomPredictor {
    pub fn new(seed: u64) -> Self {
        Self { seed, stop_prob: 0.05, affordance: AffordanceTable::from_catalog() }
    }
}

pub(crate) fn stable_seed(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

impl Predictor for RandomPredictor {
    fn name(&self) -> &str {
        "random"
    }

    fn predict_next(&self, ctx: &PredictorContext<'_>) -> PlanStep {
        let seed = stable_seed(&[
            &self.seed.to_le_bytes(),
            ctx.instance_id.as_bytes(),
            &(ctx.plan_history.len() as u64).to_le_bytes(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if rng.gen_bool(self.stop_prob) {
            return PlanStep::Stop;
        }
        let mut types: Vec<ObjectType> = ctx.observation.iter().map(|o| o.kind).collect();
        types.sort();
        types.dedup();
        let pairs: Vec<(Action, ObjectType)> =
            types.iter().flat_map(|&t| self.affordance.actions_for(t).map(move |a| (a, t))).collect();
        match pairs.choose(&mut rng) {
            Some(&(a, t)) => PlanStep::by_type(a, t),
            None => PlanStep::Stop,
        }
    }
}

/// Names accepted by [`make_predictor`] and the CLI.
pub const PREDICTOR_NAMES: [&str; 8] =
    ["oracle", "coref-oracle", "baseline", "factored", "hierarchical", "masked", "factored-nostop", "random"];

pub fn needs_model(name: &str) -> bool {
    matches!(name, "factored" | "hierarchical" | "masked" | "factored-nostop")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(actions: &[(Option<Action>, f64)], objects: &[(ObjectType, f64)]) -> ActionObjectDistribution {
        ActionObjectDistribution {
            action_probs: actions.iter().copied().collect(),
            object_probs: ObjectProbs::Independent(objects.iter().copied().collect()),
        }
    }

    #[test]
    fn mask_swaps_action_not_object() {
        use Action::*;
        let d = dist(
            &[(Some(Pickup), 0.6), (Some(Place), 0.3), (Some(ToggleOn), 0.1)],
            &[(ObjectType::Sink, 0.7), (ObjectType::Potato, 0.3)],
        );
        assert_eq!(d.greedy(), PlanStep::by_type(Pickup, ObjectType::Sink));
        let table = AffordanceTable::from_catalog();
        assert_eq!(apply_validity_mask(&d, &table), PlanStep::by_type(Place, ObjectType::Sink));
    }

    #[test]
    fn mask_keeps_valid_pair() {
        let d = dist(&[(Some(Action::Pickup), 0.9), (None, 0.1)], &[(ObjectType::Potato, 1.0)]);
        let table = AffordanceTable::from_catalog();
        assert_eq!(apply_validity_mask(&d, &table), PlanStep::by_type(Action::Pickup, ObjectType::Potato));
    }

    fn normalized(raw: Vec<f64>) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / s).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn masked_output_is_always_valid(
            a in prop::collection::vec(0.001f64..1.0, 9),
            o in prop::collection::vec(0.001f64..1.0, ObjectType::ALL.len()),
        ) {
            let actions: Vec<Option<Action>> = std::iter::once(None).chain(Action::ALL.iter().copied().map(Some)).collect();
            let d = ActionObjectDistribution {
                action_probs: actions.into_iter().zip(normalized(a)).collect(),
                object_probs: ObjectProbs::Independent(ObjectType::ALL.iter().copied().zip(normalized(o)).collect()),
            };
            prop_assert!(d.check().is_ok());
            let table = AffordanceTable::from_catalog();
            if let PlanStep::Act { action, object } = apply_validity_mask(&d, &table) {
                prop_assert!(table.is_valid(action, object.kind()));
            }
        }
    }
}
