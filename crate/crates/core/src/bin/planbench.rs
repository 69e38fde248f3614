use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use planbench::bench::{
    generate_dataset, load_meta, model_file_name, report_from_results, run_matrix, train_to_file, write_dataset,
    BenchError, GenConfig, ProfileKind, RunConfig, EVAL_SPLITS,
};
use planbench::exec::{Mode, DEFAULT_FAILURE_LIMIT, DEFAULT_STEP_LIMIT};
use planbench::predict::{TrainConfig, DEFAULT_HISTORY_ORDER, DEFAULT_SMOOTHING};

#[derive(Parser)]
#[command(name = "planbench", version, about = "Plan prediction and execution benchmark")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate scenes, demonstrations, EDH instances and split manifests.
    Gen {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Minimum EDH instances per evaluation split.
        #[arg(long, default_value_t = 50)]
        per_split: usize,
        #[arg(long, default_value_t = 200)]
        train_demos: usize,
        /// `standard` or `ambiguity`.
        #[arg(long, default_value = "standard")]
        profile: ProfileKind,
        /// Dataset directory.
        #[arg(long, env = "PLANBENCH_OUT", default_value = "planbench-data")]
        out: PathBuf,
    },
    /// Train the count-based predictor on the training split.
    Train {
        #[arg(long, env = "PLANBENCH_OUT", default_value = "planbench-data")]
        data: PathBuf,
        /// Leave Stop out of the supervision targets.
        #[arg(long)]
        no_stop: bool,
        #[arg(long, default_value_t = DEFAULT_HISTORY_ORDER)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
        /// Model file; defaults to `<data>/models/factored[-nostop].json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run predictors under execution modes on dataset splits.
    Run {
        #[arg(long, env = "PLANBENCH_OUT", default_value = "planbench-data")]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "oracle")]
        predictors: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "direct,assisted")]
        modes: Vec<Mode>,
        #[arg(long, value_delimiter = ',')]
        splits: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_FAILURE_LIMIT)]
        failure_limit: u32,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        step_limit: u32,
        /// Seed for stochastic predictors; defaults to the dataset seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Directory holding trained model files; defaults to `<data>/models`.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Results directory; defaults to `<data>/runs/default`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reuse per-episode results already on disk.
        #[arg(long)]
        resume: bool,
    },
    /// Rebuild the report from per-episode result files.
    Report {
        /// Run directory containing `results/`.
        #[arg(long)]
        run: PathBuf,
    },
}

fn exec(cli: Cli) -> Result<(), BenchError> {
    match cli.cmd {
        Cmd::Gen { seed, per_split, train_demos, profile, out } => {
            let ds = generate_dataset(&GenConfig { seed, per_split, train_demos, profile })?;
            write_dataset(&out, &ds)?;
            for (split, n) in &ds.meta.instances {
                println!("{split}: {} demos, {n} instances", ds.meta.demos[split]);
            }
            println!("wrote {}", out.display());
        }
        Cmd::Train { data, no_stop, k, smoothing, out } => {
            let out = out.unwrap_or_else(|| data.join("models").join(model_file_name(!no_stop)));
            let model = train_to_file(&data, TrainConfig { k, smoothing, stop_supervision: !no_stop }, &out)?;
            println!("trained on {} examples, digest {}", model.examples, model.digest());
            println!("wrote {}", out.display());
        }
        Cmd::Run { data, predictors, modes, splits, failure_limit, step_limit, seed, jobs, models, out, resume } => {
            let meta = load_meta(&data)?;
            let out = out.unwrap_or_else(|| data.join("runs").join("default"));
            let mut cfg = RunConfig::new(data.clone(), out, seed.unwrap_or(meta.seed));
            cfg.predictors = predictors;
            cfg.modes = modes;
            cfg.splits = if splits.is_empty() { EVAL_SPLITS.iter().map(|s| s.to_string()).collect() } else { splits };
            cfg.failure_limit = failure_limit;
            cfg.step_limit = step_limit;
            cfg.jobs = jobs;
            cfg.resume = resume;
            if let Some(m) = models {
                cfg.models = m;
            }
            let outcome = run_matrix(&cfg)?;
            print!("{}", outcome.report.to_text());
            println!("{} episodes ({} resumed); report in {}", outcome.episodes, outcome.resumed, cfg.out.display());
        }
        Cmd::Report { run } => {
            let report = report_from_results(&run)?;
            print!("{}", report.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match exec(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, BenchError::Invariant(_)) { 2 } else { 1 })
        }
    }
}
