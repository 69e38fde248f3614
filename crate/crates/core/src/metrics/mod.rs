//! Edit distance over plan-step tokens, step validity, goal-based success,
//! and aggregate reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::exec::Termination;
use crate::plan::{Plan, PlanStep};
use crate::tasks::{check_predicate, EDHInstance, Family};
use crate::world::{AffordanceTable, WorldState};

fn strip(plan: &Plan) -> &[PlanStep] {
    plan.without_stop()
}

/// Unit-cost insert/delete/substitute distance between step sequences.
pub fn edit_distance_steps(a: &[PlanStep], b: &[PlanStep]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance with any trailing Stop removed from both plans.
pub fn edit_distance(pred: &Plan, gt: &Plan) -> usize {
    edit_distance_steps(strip(pred), strip(gt))
}

/// `(ed / gt_len, ed / pred_len)`; a zero denominator divides by one
/// instead, which gives 0 when `ed` is 0.
pub fn normalized_eds(ed: usize, gt_len: usize, pred_len: usize) -> (f64, f64) {
    let norm = |len: usize| ed as f64 / len.max(1) as f64;
    (norm(gt_len), norm(pred_len))
}

/// Share of non-Stop steps whose (action, type) pair is afforded; 1 for an
/// empty plan.
pub fn fraction_valid(plan: &Plan, affordance: &AffordanceTable) -> f64 {
    let steps = strip(plan);
    if steps.is_empty() {
        return 1.0;
    }
    let ok = steps
        .iter()
        .filter(|s| match s {
            PlanStep::Act { action, object } => affordance.is_valid(*action, object.kind()),
            PlanStep::Stop => false,
        })
        .count();
    ok as f64 / steps.len() as f64
}

/// Success and share of satisfied goal conditions in the final world.
pub fn evaluate_edh(final_world: &WorldState, instance: &EDHInstance) -> (bool, f64) {
    let total = instance.goals.len();
    if total == 0 {
        return (true, 1.0);
    }
    let met = instance.goals.iter().filter(|g| check_predicate(final_world, g)).count();
    (met == total, met as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub instance_id: String,
    pub family: Family,
    pub success: bool,
    pub gc_fraction: f64,
    pub attempted_plan: Plan,
    pub reference_plan: Plan,
    pub termination: Termination,
    pub failures: u32,
    pub steps: u32,
}

impl EpisodeResult {
    pub fn edit_distance(&self) -> usize {
        edit_distance(&self.attempted_plan.to_type_level(), &self.reference_plan.to_type_level())
    }

    pub fn check(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.gc_fraction) {
            return Err(format!("{}: gc fraction {} out of range", self.instance_id, self.gc_fraction));
        }
        if self.success && self.gc_fraction < 1.0 {
            return Err(format!("{}: success with partial goal conditions", self.instance_id));
        }
        Ok(())
    }
}

/// Means over a set of episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sr: f64,
    pub gc: f64,
    pub ed: f64,
    pub gt_norm_ed: f64,
    pub pred_norm_ed: f64,
    pub frac_valid: f64,
    pub n: usize,
}

impl Aggregate {
    pub fn over<'a>(results: impl IntoIterator<Item = &'a EpisodeResult>, affordance: &AffordanceTable) -> Self {
        let mut a = Aggregate { sr: 0.0, gc: 0.0, ed: 0.0, gt_norm_ed: 0.0, pred_norm_ed: 0.0, frac_valid: 0.0, n: 0 };
        for r in results {
            let ed = r.edit_distance();
            let (g, p) = normalized_eds(ed, strip(&r.reference_plan).len(), strip(&r.attempted_plan).len());
            a.sr += f64::from(u8::from(r.success));
            a.gc += r.gc_fraction;
            a.ed += ed as f64;
            a.gt_norm_ed += g;
            a.pred_norm_ed += p;
            a.frac_valid += fraction_valid(&r.attempted_plan, affordance);
            a.n += 1;
        }
        if a.n > 0 {
            let n = a.n as f64;
            for v in [&mut a.sr, &mut a.gc, &mut a.ed, &mut a.gt_norm_ed, &mut a.pred_norm_ed, &mut a.frac_valid] {
                *v /= n;
            }
        }
        a
    }
}

/// One evaluated cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    /// Predictor and execution mode, e.g. `oracle/assisted`.
    pub condition: String,
    pub split: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub condition: String,
    pub split: String,
    /// `all` for the aggregate row, otherwise a family name.
    pub task: String,
    pub metrics: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub config_digest: String,
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "condition,split,task,sr,gc,ed,gt_norm_ed,pred_norm_ed,frac_valid,n";

/// Aggregate and per-family rows for every condition, in condition order
/// and then family order.
pub fn aggregate_report(
    results: &BTreeMap<Condition, Vec<EpisodeResult>>,
    seed: u64,
    config_digest: &str,
) -> MetricsReport {
    let affordance = AffordanceTable::from_catalog();
    let mut rows = Vec::new();
    for (cond, eps) in results {
        let mut eps: Vec<&EpisodeResult> = eps.iter().collect();
        eps.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
        let row = |task: String, metrics| ReportRow {
            condition: cond.condition.clone(),
            split: cond.split.clone(),
            task,
            metrics,
        };
        rows.push(row("all".into(), Aggregate::over(eps.iter().copied(), &affordance)));
        for f in Family::ALL {
            let mine: Vec<&EpisodeResult> = eps.iter().copied().filter(|r| r.family == f).collect();
            if !mine.is_empty() {
                rows.push(row(f.to_string(), Aggregate::over(mine, &affordance)));
            }
        }
    }
    MetricsReport { seed, config_digest: config_digest.to_string(), rows }
}

impl MetricsReport {
    /// Rates in range and GC at least SR on every row.
    pub fn check(&self) -> Result<(), String> {
        for r in &self.rows {
            let m = &r.metrics;
            for (name, v) in [("sr", m.sr), ("gc", m.gc), ("frac_valid", m.frac_valid)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("{} {} {}: {name} = {v}", r.condition, r.split, r.task));
                }
            }
            if m.gc + 1e-12 < m.sr {
                return Err(format!("{} {} {}: gc {} < sr {}", r.condition, r.split, r.task, m.gc, m.sr));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
                r.condition, r.split, r.task, m.sr, m.gc, m.ed, m.gt_norm_ed, m.pred_norm_ed, m.frac_valid, m.n
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}  config {}", self.seed, self.config_digest);
        let _ = writeln!(
            out,
            "ED is averaged per episode; normalized EDs divide by max(len, 1). Trailing Stop is not scored."
        );
        let _ = writeln!(
            out,
            "{:<26} {:<20} {:<26} {:>6} {:>6} {:>7} {:>7} {:>7} {:>7} {:>5}",
            "condition", "split", "task", "SR", "GC", "ED", "ED/GT", "ED/Pred", "Valid", "n"
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:<26} {:<20} {:<26} {:>6.2} {:>6.2} {:>7.2} {:>7.2} {:>7.2} {:>7.3} {:>5}",
                r.condition,
                r.split,
                r.task,
                100.0 * m.sr,
                100.0 * m.gc,
                m.ed,
                m.gt_norm_ed,
                m.pred_norm_ed,
                m.frac_valid,
                m.n
            );
        }
        out
    }

    pub fn row(&self, condition: &str, split: &str, task: &str) -> Option<&Aggregate> {
        self.rows.iter().find(|r| r.condition == condition && r.split == split && r.task == task).map(|r| &r.metrics)
    }
}
