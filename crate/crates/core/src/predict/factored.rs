//! Count-based next-step model with separate action and object heads.
//!
//! Objects are encoded relative to the task where possible: the `x`
//! parameter becomes `X`, its slice type `Xs`, and `y` becomes `Y`, so that
//! statistics transfer between tasks of one family with different params.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{apply_validity_mask, parse_task_spec, ActionObjectDistribution, ObjectProbs, Predictor, PredictorContext};
use crate::plan::{compile_plan, CompileMode, LowLevelAction, NavAction, PlanStep};
use crate::tasks::{EDHInstance, TaskSpec};
use crate::world::{apply_in_place, navigate_to, visible_objects, Action, AffordanceTable, ObjectType, ObservedObject};

pub const DEFAULT_HISTORY_ORDER: usize = 2;
pub const DEFAULT_SMOOTHING: f64 = 0.1;
const STOP: &str = "Stop";
const SLOTS: [&str; 3] = ["X", "Xs", "Y"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub k: usize,
    pub smoothing: f64,
    /// Whether Stop is a training target.
    pub stop_supervision: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { k: DEFAULT_HISTORY_ORDER, smoothing: DEFAULT_SMOOTHING, stop_supervision: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("smoothing must be positive, got {0}")]
    BadSmoothing(f64),
    #[error("model file is malformed: {0}")]
    Malformed(String),
    #[error("model digest mismatch (file says {stored}, content hashes to {actual})")]
    Digest { stored: String, actual: String },
}

type Counts = BTreeMap<String, BTreeMap<String, u64>>;

/// Trained count tables. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredModel {
    pub config: TrainConfig,
    /// Backoff key -> action label -> count.
    pub action_counts: Counts,
    /// Backoff key -> object label -> count.
    pub object_counts: Counts,
    /// Backoff key plus action -> object label -> count.
    pub coupled_counts: Counts,
    pub examples: u64,
}

fn slot_label(t: ObjectType, task: Option<&TaskSpec>) -> String {
    if let Some(p) = task.map(|t| t.params) {
        if p.x == Some(t) {
            return "X".into();
        }
        if p.x.and_then(|x| x.info().sliced_into) == Some(t) {
            return "Xs".into();
        }
        if p.y == Some(t) {
            return "Y".into();
        }
    }
    t.name().into()
}

fn resolve_label(label: &str, task: Option<&TaskSpec>) -> Option<ObjectType> {
    let p = task.map(|t| t.params).unwrap_or_default();
    match label {
        "X" => p.x,
        "Xs" => p.x.and_then(|x| x.info().sliced_into),
        "Y" => p.y,
        _ => label.parse().ok(),
    }
}

fn step_label(s: &PlanStep, task: Option<&TaskSpec>) -> String {
    match s {
        PlanStep::Stop => STOP.into(),
        PlanStep::Act { action, object } => format!("{action}:{}", slot_label(object.kind(), task)),
    }
}

/// One character per referenced type: held, visible, contained (present but
/// hidden), or unknown. A leading `h` marks an unrelated held object.
fn observation_flags(obs: &[ObservedObject], task: Option<&TaskSpec>) -> String {
    let refs = task.map(|t| t.referenced_types()).unwrap_or_default();
    let mut out = String::new();
    if obs.iter().any(|o| o.held && !refs.contains(&o.kind)) {
        out.push('h');
    }
    for t in refs {
        let mine = obs.iter().filter(|o| o.kind == t);
        let c = mine.fold('U', |acc, o| match (acc, o.held) {
            (_, true) | ('H', _) => 'H',
            _ => 'V',
        });
        out.push(c);
    }
    out
}

/// Backoff chain from most to least specific.
fn feature_keys(k: usize, task: Option<&TaskSpec>, history: &[PlanStep], obs: &[ObservedObject]) -> Vec<String> {
    let family = task.map(|t| t.family.to_string()).unwrap_or_else(|| "?".into());
    let bucket = task
        .map(|t| {
            let p = t.params;
            let name = |o: Option<ObjectType>| o.map(|t| t.name()).unwrap_or("-");
            format!("{}/{}/{}", p.n.unwrap_or(0), name(p.x), name(p.y))
        })
        .unwrap_or_default();
    let flags = observation_flags(obs, task);
    // `^` marks a window that reaches the start of the episode.
    let hist = |j: usize| {
        let start = (history.len() < j).then(|| "^".to_string());
        start
            .into_iter()
            .chain(history[history.len().saturating_sub(j)..].iter().map(|s| step_label(s, task)))
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut keys = Vec::new();
    for j in (0..=k).rev() {
        keys.push(format!("{family}|{bucket}|{flags}|{}", hist(j)));
    }
    for j in (0..=k).rev() {
        keys.push(format!("{family}|{flags}|{}", hist(j)));
    }
    for j in (0..=k).rev() {
        keys.push(format!("{family}|{}", hist(j)));
    }
    keys.push(String::new());
    // Histories shorter than k repeat keys.
    keys.dedup();
    keys
}

fn action_vocab() -> Vec<String> {
    std::iter::once(STOP.to_string()).chain(Action::ALL.iter().map(|a| a.name().to_string())).collect()
}

fn object_vocab() -> Vec<String> {
    SLOTS.iter().map(|s| s.to_string()).chain(ObjectType::ALL.iter().map(|t| t.name().to_string())).collect()
}

fn bump(table: &mut Counts, key: &str, label: &str) {
    *table.entry(key.to_string()).or_default().entry(label.to_string()).or_default() += 1;
}

/// Supervised examples of one instance: (history, observation, target).
fn examples(inst: &EDHInstance) -> Vec<(Vec<PlanStep>, Vec<ObservedObject>, PlanStep)> {
    let mut history: Vec<PlanStep> =
        compile_plan(&inst.history, CompileMode::ByType).map(|p| p.without_stop().to_vec()).unwrap_or_default();
    let mut world = inst.initial_world.clone();
    let mut out = Vec::new();
    for e in &inst.remaining.events {
        match (e.action, e.target) {
            (LowLevelAction::Nav(NavAction::NavigateTo), Some(t)) => {
                navigate_to(&mut world, t);
            }
            (LowLevelAction::Interact(a), Some(t)) => {
                let step = PlanStep::by_type(a, t.kind);
                out.push((history.clone(), visible_objects(&world), step));
                apply_in_place(&mut world, a, t);
                history.push(step);
            }
            _ => {}
        }
    }
    out.push((history, visible_objects(&world), PlanStep::Stop));
    out
}

/// Count tables over the training instances' remaining plans.
pub fn train_factored(corpus: &[EDHInstance], config: TrainConfig) -> Result<FactoredModel, ModelError> {
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    if config.smoothing.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(ModelError::BadSmoothing(config.smoothing));
    }
    let mut model = FactoredModel {
        config,
        action_counts: Counts::new(),
        object_counts: Counts::new(),
        coupled_counts: Counts::new(),
        examples: 0,
    };
    for inst in corpus {
        let task = parse_task_spec(&inst.dialog);
        let task = task.as_ref();
        for (history, obs, target) in examples(inst) {
            if target.is_stop() && !config.stop_supervision {
                continue;
            }
            model.examples += 1;
            let keys = feature_keys(config.k, task, &history, &obs);
            let PlanStep::Act { action, object } = target else {
                for key in &keys {
                    bump(&mut model.action_counts, key, STOP);
                }
                continue;
            };
            let obj = slot_label(object.kind(), task);
            for key in &keys {
                bump(&mut model.action_counts, key, action.name());
                bump(&mut model.object_counts, key, &obj);
                bump(&mut model.coupled_counts, &format!("{key}#{action}"), &obj);
            }
        }
    }
    Ok(model)
}

/// Which object head decodes the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// Independent argmaxes; may produce invalid pairs.
    Independent,
    /// Object conditioned on the chosen action.
    Hierarchical,
    /// Independent heads with the action replaced when invalid for the object.
    Masked,
}

impl FactoredModel {
    fn smoothed(&self, table: &Counts, keys: &[String], vocab: &[String]) -> Option<BTreeMap<String, f64>> {
        let row = keys.iter().find_map(|k| table.get(k).filter(|r| r.values().sum::<u64>() > 0))?;
        let a = self.config.smoothing;
        let total = row.values().sum::<u64>() as f64 + a * vocab.len() as f64;
        Some(vocab.iter().map(|v| (v.clone(), (row.get(v).copied().unwrap_or(0) as f64 + a) / total)).collect())
    }

    fn uniform(vocab: &[String]) -> BTreeMap<String, f64> {
        vocab.iter().map(|v| (v.clone(), 1.0 / vocab.len() as f64)).collect()
    }

    fn to_types(labels: BTreeMap<String, f64>, task: Option<&TaskSpec>) -> BTreeMap<ObjectType, f64> {
        let mut out: BTreeMap<ObjectType, f64> = BTreeMap::new();
        for (l, p) in labels {
            if let Some(t) = resolve_label(&l, task) {
                *out.entry(t).or_default() += p;
            }
        }
        let mass: f64 = out.values().sum();
        out.values_mut().for_each(|p| *p /= mass);
        out
    }

    pub fn distribution(&self, ctx: &PredictorContext<'_>, coupled: bool) -> ActionObjectDistribution {
        let task = ctx.task_hint;
        let history: Vec<PlanStep> =
            ctx.prior_steps.iter().copied().chain(ctx.plan_history.iter().map(|(s, _)| *s)).collect();
        let keys = feature_keys(self.config.k, task, &history, ctx.observation);
        let avocab = action_vocab();
        let ovocab = object_vocab();
        let actions = self.smoothed(&self.action_counts, &keys, &avocab).unwrap_or_else(|| Self::uniform(&avocab));
        let action_probs =
            actions.into_iter().map(|(l, p)| (if l == STOP { None } else { l.parse::<Action>().ok() }, p)).collect();
        let independent = self.smoothed(&self.object_counts, &keys, &ovocab).unwrap_or_else(|| Self::uniform(&ovocab));
        let object_probs = if coupled {
            let per = Action::ALL
                .iter()
                .map(|a| {
                    let ck: Vec<String> = keys.iter().map(|k| format!("{k}#{a}")).collect();
                    let t = self.smoothed(&self.coupled_counts, &ck, &ovocab).unwrap_or_else(|| independent.clone());
                    (*a, Self::to_types(t, task))
                })
                .collect();
            ObjectProbs::PerAction(per)
        } else {
            ObjectProbs::Independent(Self::to_types(independent, task))
        };
        ActionObjectDistribution { action_probs, object_probs }
    }

    /// Canonical file text: JSON with sorted keys plus a content digest.
    pub fn to_file(&self) -> String {
        let body = serde_json::to_value(self).expect("model serializes");
        let text = serde_json::to_string(&body).expect("value serializes");
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        let file = serde_json::json!({ "digest": digest, "model": body });
        let mut out = serde_json::to_string_pretty(&file).expect("value serializes");
        out.push('\n');
        out
    }

    pub fn from_file(text: &str) -> Result<Self, ModelError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let stored = v["digest"].as_str().ok_or_else(|| ModelError::Malformed("missing digest".into()))?;
        let body = v.get("model").ok_or_else(|| ModelError::Malformed("missing model".into()))?;
        let actual = hex::encode(Sha256::digest(serde_json::to_string(body).expect("value serializes").as_bytes()));
        if stored != actual {
            return Err(ModelError::Digest { stored: stored.into(), actual });
        }
        serde_json::from_value(body.clone()).map_err(|e| ModelError::Malformed(e.to_string()))
    }

    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&serde_json::to_value(self).expect("model serializes")).expect("serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

pub struct FactoredPredictor {
    name: String,
    model: FactoredModel,
    head: Head,
    affordance: AffordanceTable,
}

impl FactoredPredictor {
    pub fn new(name: impl Into<String>, model: FactoredModel, head: Head) -> Self {
        Self { name: name.into(), model, head, affordance: AffordanceTable::from_catalog() }
    }

    pub fn model(&self) -> &FactoredModel {
        &self.model
    }
}

impl Predictor for FactoredPredictor {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_next(&self, ctx: &PredictorContext<'_>) -> PlanStep {
        let dist = self.model.distribution(ctx, self.head == Head::Hierarchical);
        match self.head {
            Head::Masked => apply_validity_mask(&dist, &self.affordance),
            Head::Independent | Head::Hierarchical => dist.greedy(),
        }
    }
}
