//! Benchmark harness: dataset generation and layout on disk, model
//! training, the predictor x mode x split run matrix, and reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exec::{run_episode, ExecutionConfig, ExecutionTrace, Mode, DEFAULT_FAILURE_LIMIT, DEFAULT_STEP_LIMIT};
use crate::metrics::{aggregate_report, evaluate_edh, Condition, EpisodeResult, MetricsReport};
use crate::predict::{
    needs_model, train_factored, BaselinePredictor, CorefOraclePredictor, FactoredModel, FactoredPredictor, Head,
    ModelError, OraclePredictor, Predictor, RandomPredictor, TrainConfig, PREDICTOR_NAMES,
};
use crate::tasks::{make_demonstration, slice_edh, Demonstration, EDHInstance, Profile};

pub const TRAIN_SPLIT: &str = "train";
pub const EVAL_SPLITS: [&str; 4] =
    ["divided_val_seen", "divided_test_seen", "divided_val_unseen", "divided_test_unseen"];
const BATCH: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("dataset not found at {0} (run `gen` first)")]
    MissingDataset(PathBuf),
    #[error("unknown predictor `{0}`; expected one of: {names}", names = PREDICTOR_NAMES.join(", "))]
    UnknownPredictor(String),
    #[error("unknown split `{0}`")]
    UnknownSplit(String),
    #[error("cannot read model file {path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("model file {0} not found (run `train` first)")]
    MissingModel(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed file: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, text).map_err(io(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, BenchError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Malformed { path: path.to_path_buf(), reason: e.to_string() })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Standard,
    Ambiguity,
}

impl std::str::FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(ProfileKind::Standard),
            "ambiguity" => Ok(ProfileKind::Ambiguity),
            _ => Err(format!("unknown profile `{s}` (expected standard or ambiguity)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Minimum EDH instances per evaluation split.
    pub per_split: usize,
    /// Demonstrations in the training split.
    pub train_demos: usize,
    pub profile: ProfileKind,
}

fn split_profile(split: &str, kind: ProfileKind) -> Profile {
    let base = if split.ends_with("_unseen") { Profile::unseen() } else { Profile::seen() };
    match kind {
        ProfileKind::Standard => base,
        ProfileKind::Ambiguity => base.with_ambiguity(),
    }
}

fn split_tag(split: &str) -> &'static str {
    match split {
        "train" => "tr",
        "divided_val_seen" => "vs",
        "divided_test_seen" => "ts",
        "divided_val_unseen" => "vu",
        "divided_test_unseen" => "tu",
        _ => "xx",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub config: GenConfig,
    pub demos: BTreeMap<String, usize>,
    pub instances: BTreeMap<String, usize>,
    /// Demonstration seeds the generator gave up on.
    pub generation_failures: usize,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub demos: BTreeMap<String, Vec<Demonstration>>,
    pub splits: BTreeMap<String, Vec<EDHInstance>>,
}

fn demo_seed(seed: u64, split: &str, k: usize) -> u64 {
    crate::predict::stable_seed(&[&seed.to_le_bytes(), split.as_bytes(), &(k as u64).to_le_bytes()])
}

/// Generate demonstrations in order until the split is large enough.
/// Batches run in parallel but results are consumed in index order, so the
/// outcome does not depend on the thread count.
fn generate_split(
    cfg: &GenConfig,
    split: &str,
    enough: impl Fn(usize, usize) -> bool,
) -> Result<(Vec<Demonstration>, Vec<EDHInstance>, usize), BenchError> {
    let profile = split_profile(split, cfg.profile);
    let mut demos = Vec::new();
    let mut instances = Vec::new();
    let mut failures = 0;
    let mut k = 0;
    while !enough(demos.len(), instances.len()) {
        if failures > 1000 {
            return Err(BenchError::Generation(format!("{split}: too many failed demonstrations")));
        }
        let batch: Vec<_> = (k..k + BATCH)
            .into_par_iter()
            .map(|i| {
                let id = format!("{}{i:04}", split_tag(split));
                make_demonstration(&id, demo_seed(cfg.seed, split, i), &profile).map(|d| {
                    let edh = slice_edh(&d);
                    (d, edh)
                })
            })
            .collect();
        k += BATCH;
        for r in batch {
            if enough(demos.len(), instances.len()) {
                break;
            }
            match r {
                Ok((d, edh)) => {
                    demos.push(d);
                    instances.extend(edh.map_err(|e| BenchError::Generation(e.to_string()))?);
                }
                Err(_) => failures += 1,
            }
        }
    }
    Ok((demos, instances, failures))
}

pub fn generate_dataset(cfg: &GenConfig) -> Result<Dataset, BenchError> {
    let mut demos = BTreeMap::new();
    let mut splits = BTreeMap::new();
    let mut failures = 0;
    let train_demos = cfg.train_demos;
    let (d, i, f) = generate_split(cfg, TRAIN_SPLIT, |n, _| n >= train_demos)?;
    demos.insert(TRAIN_SPLIT.to_string(), d);
    splits.insert(TRAIN_SPLIT.to_string(), i);
    failures += f;
    for split in EVAL_SPLITS {
        let per = cfg.per_split;
        let (d, i, f) = generate_split(cfg, split, |_, m| m >= per)?;
        demos.insert(split.to_string(), d);
        splits.insert(split.to_string(), i);
        failures += f;
    }
    let meta = DatasetMeta {
        seed: cfg.seed,
        config: *cfg,
        demos: demos.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
        instances: splits.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
        generation_failures: failures,
    };
    Ok(Dataset { meta, demos, splits })
}

fn manifest_name(split: &str) -> String {
    format!("{split}.list")
}

/// Write scenes, demonstrations, EDH instances, and split manifests.
pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<(), BenchError> {
    for sub in ["scenes", "demos", "edh"] {
        let p = dir.join(sub);
        if p.exists() {
            fs::remove_dir_all(&p).map_err(io(&p))?;
        }
    }
    for demos in ds.demos.values() {
        for d in demos {
            write(&dir.join("scenes").join(format!("{}.scene", d.id)), &d.scene.to_json())?;
            write(&dir.join("demos").join(format!("{}.demo", d.id)), &to_json(d))?;
        }
    }
    for (split, instances) in &ds.splits {
        let mut list = String::new();
        for inst in instances {
            write(&dir.join("edh").join(format!("{}.edh", inst.id)), &to_json(inst))?;
            list.push_str(&inst.id);
            list.push('\n');
        }
        write(&dir.join(manifest_name(split)), &list)?;
    }
    write(&dir.join("dataset.json"), &to_json(&ds.meta))
}

pub fn load_meta(dir: &Path) -> Result<DatasetMeta, BenchError> {
    let p = dir.join("dataset.json");
    if !p.exists() {
        return Err(BenchError::MissingDataset(dir.to_path_buf()));
    }
    read_json(&p)
}

pub fn load_split(dir: &Path, split: &str) -> Result<Vec<EDHInstance>, BenchError> {
    let list = dir.join(manifest_name(split));
    if !list.exists() {
        if !dir.join("dataset.json").exists() {
            return Err(BenchError::MissingDataset(dir.to_path_buf()));
        }
        return Err(BenchError::UnknownSplit(split.to_string()));
    }
    let text = fs::read_to_string(&list).map_err(io(&list))?;
    text.lines().filter(|l| !l.is_empty()).map(|id| read_json(&dir.join("edh").join(format!("{id}.edh")))).collect()
}

pub fn model_file_name(stop_supervision: bool) -> &'static str {
    if stop_supervision {
        "factored.json"
    } else {
        "factored-nostop.json"
    }
}

/// Train on the dataset's training split and write the model file.
pub fn train_to_file(data: &Path, config: TrainConfig, out: &Path) -> Result<FactoredModel, BenchError> {
    let corpus = load_split(data, TRAIN_SPLIT)?;
    let model = train_factored(&corpus, config).map_err(|source| BenchError::Model { path: out.into(), source })?;
    write(out, &model.to_file())?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<FactoredModel, BenchError> {
    if !path.exists() {
        return Err(BenchError::MissingModel(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(io(path))?;
    FactoredModel::from_file(&text).map_err(|source| BenchError::Model { path: path.to_path_buf(), source })
}

/// Models available to learned predictors.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub stop: Option<FactoredModel>,
    pub nostop: Option<FactoredModel>,
}

pub fn make_predictor(
    name: &str,
    instances: &[EDHInstance],
    models: &Models,
    seed: u64,
) -> Result<Box<dyn Predictor>, BenchError> {
    let need = |m: &Option<FactoredModel>, file: bool| {
        m.clone().ok_or_else(|| BenchError::MissingModel(PathBuf::from(model_file_name(file))))
    };
    Ok(match name {
        "oracle" => Box::new(OraclePredictor::new(instances)),
        "coref-oracle" => Box::new(CorefOraclePredictor::new(instances)),
        "baseline" => Box::new(BaselinePredictor::new()),
        "random" => Box::new(RandomPredictor::new(seed)),
        "factored" => Box::new(FactoredPredictor::new(name, need(&models.stop, true)?, Head::Independent)),
        "hierarchical" => Box::new(FactoredPredictor::new(name, need(&models.stop, true)?, Head::Hierarchical)),
        "masked" => Box::new(FactoredPredictor::new(name, need(&models.stop, true)?, Head::Masked)),
        "factored-nostop" => Box::new(FactoredPredictor::new(name, need(&models.nostop, false)?, Head::Independent)),
        _ => return Err(BenchError::UnknownPredictor(name.to_string())),
    })
}

/// Run one episode and score it. Returns invariant violations alongside.
pub fn evaluate_instance(
    inst: &EDHInstance,
    predictor: &dyn Predictor,
    config: &ExecutionConfig,
) -> (EpisodeResult, Vec<String>) {
    let (result, _, problems) = evaluate_traced(inst, predictor, config);
    (result, problems)
}

/// [`evaluate_instance`], also returning the execution trace.
pub fn evaluate_traced(
    inst: &EDHInstance,
    predictor: &dyn Predictor,
    config: &ExecutionConfig,
) -> (EpisodeResult, ExecutionTrace, Vec<String>) {
    let run = run_episode(inst, predictor, config);
    let (success, gc_fraction) = evaluate_edh(&run.final_world, inst);
    let result = EpisodeResult {
        instance_id: inst.id.clone(),
        family: inst.task.family,
        success,
        gc_fraction,
        attempted_plan: run.attempted.clone(),
        reference_plan: inst.reference_plan.clone(),
        termination: run.trace.termination,
        failures: run.trace.failures,
        steps: run.trace.steps,
    };
    let mut problems = Vec::new();
    if let Err(e) = run.trace.check(config) {
        problems.push(format!("{}: {e}", inst.id));
    }
    if let Err(e) = run.final_world.check_invariants() {
        problems.push(format!("{}: {e}", inst.id));
    }
    if let Err(e) = result.check() {
        problems.push(e);
    }
    (result, run.trace, problems)
}

/// Evaluate a whole suite in memory, in instance order.
pub fn evaluate_suite(
    instances: &[EDHInstance],
    predictor: &dyn Predictor,
    config: &ExecutionConfig,
) -> (Vec<EpisodeResult>, Vec<String>) {
    let out: Vec<_> = instances.par_iter().map(|i| evaluate_instance(i, predictor, config)).collect();
    let mut problems = Vec::new();
    let results = out
        .into_iter()
        .map(|(r, p)| {
            problems.extend(p);
            r
        })
        .collect();
    (results, problems)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub splits: Vec<String>,
    pub predictors: Vec<String>,
    pub modes: Vec<Mode>,
    pub failure_limit: u32,
    pub step_limit: u32,
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Does not affect results.
    pub jobs: usize,
    pub out: PathBuf,
    pub models: PathBuf,
    pub resume: bool,
}

impl RunConfig {
    pub fn new(data: PathBuf, out: PathBuf, seed: u64) -> Self {
        let models = data.join("models");
        Self {
            data,
            splits: EVAL_SPLITS.iter().map(|s| s.to_string()).collect(),
            predictors: vec!["oracle".into()],
            modes: vec![Mode::Direct, Mode::Assisted],
            failure_limit: DEFAULT_FAILURE_LIMIT,
            step_limit: DEFAULT_STEP_LIMIT,
            seed,
            jobs: 0,
            out,
            models,
            resume: false,
        }
    }

    /// Digest over everything that can change results.
    pub fn digest(&self) -> String {
        let key = serde_json::json!({
            "splits": self.splits,
            "predictors": self.predictors,
            "modes": self.modes,
            "failure_limit": self.failure_limit,
            "step_limit": self.step_limit,
            "seed": self.seed,
        });
        digest(&key.to_string())[..16].to_string()
    }
}

/// Per-step execution record of one episode, kept for diffing runs.
#[derive(Serialize)]
struct TraceFile {
    seed: u64,
    instance_id: String,
    trace: ExecutionTrace,
}

/// Per-episode result file: the result plus the run identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EpisodeFile {
    seed: u64,
    config_digest: String,
    condition: String,
    split: String,
    result: EpisodeResult,
}

fn condition_dir(predictor: &str, mode: Mode) -> String {
    format!("{predictor}__{}", mode.name())
}

fn condition_label(predictor: &str, mode: Mode) -> String {
    format!("{predictor}/{}", mode.name())
}

/// Result, invariant problems, and whether it was read back from disk.
type CellEpisode = (EpisodeResult, Vec<String>, bool);

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: MetricsReport,
    pub episodes: usize,
    pub resumed: usize,
}

/// Run every (predictor, mode, split) cell, write per-episode results and
/// the aggregate report. Invariant violations are reported after all files
/// are written.
pub fn run_matrix(cfg: &RunConfig) -> Result<RunOutcome, BenchError> {
    load_meta(&cfg.data)?;
    for p in &cfg.predictors {
        if !PREDICTOR_NAMES.contains(&p.as_str()) {
            return Err(BenchError::UnknownPredictor(p.clone()));
        }
    }
    if cfg.modes.is_empty() || cfg.predictors.is_empty() || cfg.splits.is_empty() {
        return Err(BenchError::Usage("need at least one predictor, mode and split".into()));
    }
    let mut models = Models::default();
    if cfg.predictors.iter().any(|p| needs_model(p) && p != "factored-nostop") {
        models.stop = Some(load_model(&cfg.models.join(model_file_name(true)))?);
    }
    if cfg.predictors.iter().any(|p| p == "factored-nostop") {
        models.nostop = Some(load_model(&cfg.models.join(model_file_name(false)))?);
    }
    let splits: Vec<(String, Vec<EDHInstance>)> =
        cfg.splits.iter().map(|s| load_split(&cfg.data, s).map(|i| (s.clone(), i))).collect::<Result<_, _>>()?;

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(|e| BenchError::Usage(e.to_string()))?;
    let config_digest = cfg.digest();
    let results_dir = cfg.out.join("results");
    let mut all: BTreeMap<Condition, Vec<EpisodeResult>> = BTreeMap::new();
    let mut problems = Vec::new();
    let mut episodes = 0;
    let mut resumed = 0;
    for name in &cfg.predictors {
        for (split, instances) in &splits {
            let predictor = make_predictor(name, instances, &models, cfg.seed)?;
            for &mode in &cfg.modes {
                let exec = ExecutionConfig { mode, failure_limit: cfg.failure_limit, step_limit: cfg.step_limit };
                let dir = results_dir.join(condition_dir(name, mode));
                let traces_dir = cfg.out.join("traces").join(condition_dir(name, mode));
                let label = condition_label(name, mode);
                let out: Vec<Result<CellEpisode, BenchError>> = pool.install(|| {
                    instances
                        .par_iter()
                        .map(|inst| {
                            let path = dir.join(format!("{}.json", inst.id));
                            if cfg.resume && path.exists() {
                                let f: EpisodeFile = read_json(&path)?;
                                if f.config_digest == config_digest && f.result.instance_id == inst.id {
                                    return Ok((f.result, vec![], true));
                                }
                            }
                            let (result, trace, p) = evaluate_traced(inst, predictor.as_ref(), &exec);
                            let trace_file = TraceFile { seed: cfg.seed, instance_id: inst.id.clone(), trace };
                            write(&traces_dir.join(format!("{}.json", inst.id)), &to_json(&trace_file))?;
                            let file = EpisodeFile {
                                seed: cfg.seed,
                                config_digest: config_digest.clone(),
                                condition: label.clone(),
                                split: split.clone(),
                                result: result.clone(),
                            };
                            write(&path, &to_json(&file))?;
                            Ok((result, p, false))
                        })
                        .collect()
                });
                let cell = all.entry(Condition { condition: label.clone(), split: split.clone() }).or_default();
                for r in out {
                    let (result, p, was_resumed) = r?;
                    problems.extend(p);
                    resumed += usize::from(was_resumed);
                    episodes += 1;
                    cell.push(result);
                }
            }
        }
    }
    let report = aggregate_report(&all, cfg.seed, &config_digest);
    if let Err(e) = report.check() {
        problems.push(e);
    }
    write_report(&cfg.out, &report)?;
    if !problems.is_empty() {
        return Err(BenchError::Invariant(problems));
    }
    Ok(RunOutcome { report, episodes, resumed })
}

pub fn write_report(out: &Path, report: &MetricsReport) -> Result<(), BenchError> {
    write(&out.join("report.txt"), &report.to_text())?;
    write(&out.join("report.csv"), &report.to_csv())?;
    write(&out.join("report.json"), &to_json(report))
}

/// Rebuild the report from per-episode result files.
pub fn report_from_results(out: &Path) -> Result<MetricsReport, BenchError> {
    let results_dir = out.join("results");
    if !results_dir.is_dir() {
        return Err(BenchError::Usage(format!("no results under {}", results_dir.display())));
    }
    let mut all: BTreeMap<Condition, Vec<(String, EpisodeResult)>> = BTreeMap::new();
    let mut seed = None;
    let mut config_digest = String::new();
    let mut files: Vec<PathBuf> = Vec::new();
    for cond in fs::read_dir(&results_dir).map_err(io(&results_dir))? {
        let cond = cond.map_err(io(&results_dir))?.path();
        for f in fs::read_dir(&cond).map_err(io(&cond))? {
            files.push(f.map_err(io(&cond))?.path());
        }
    }
    files.sort();
    for path in files {
        let f: EpisodeFile = read_json(&path)?;
        if seed.is_some_and(|s| s != f.seed) || (!config_digest.is_empty() && config_digest != f.config_digest) {
            return Err(BenchError::Invariant(vec![format!("{}: results from a different run", path.display())]));
        }
        seed = Some(f.seed);
        config_digest = f.config_digest;
        all.entry(Condition { condition: f.condition, split: f.split })
            .or_default()
            .push((f.result.instance_id.clone(), f.result));
    }
    // Manifest order is generation order; ids sort the same way.
    let all = all
        .into_iter()
        .map(|(c, mut v)| {
            v.sort_by(|a, b| a.0.cmp(&b.0));
            (c, v.into_iter().map(|(_, r)| r).collect())
        })
        .collect();
    let report = aggregate_report(&all, seed.unwrap_or(0), &config_digest);
    report.check().map_err(|e| BenchError::Invariant(vec![e]))?;
    write_report(out, &report)?;
    Ok(report)
}
