//! Cost-sensitive model schedules.
//!
//! Given a labelled dataset and a per-variable cost profile, builds a
//! cost-sorted, dominance-compressed list of trained models by merging four
//! greedy model sequences, and checks the result against exhaustive search
//! on small problems.

pub mod cost;
pub mod data;
pub mod engine;
pub mod error;
pub mod forest;
pub mod harness;
pub mod lasso;
pub mod oracle;
pub mod schedule;
pub mod sequences;
pub mod synth;

pub use cost::{total_cost, Cost, CostProfile, VarSet};
pub use data::{Dataset, Matrix, SplitData};
pub use error::{Error, ErrorKind, Result};
pub use forest::{Forest, ForestParams, ImportanceProfile};
pub use schedule::{compress, dominates, merge, ModelRecord, ModelSchedule, Source};
pub use sequences::{msb, logitb_schedule, MsbConfig, MsbResult, SequenceKind, SequenceRun};
