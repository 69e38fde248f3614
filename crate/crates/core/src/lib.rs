//! Benchmark framework for high-level plan prediction and execution in a
//! symbolic household world.
//!
//! Plans are sequences of `(interaction action, object)` steps. They are
//! produced by predictors, grounded and executed against a deterministic
//! grid world either directly or with heuristic assistance, and scored with
//! success rate, goal-condition rate, tuple edit distance and step validity.

pub mod bench;
pub mod exec;
pub mod metrics;
pub mod plan;
pub mod predict;
pub mod tasks;
pub mod world;
